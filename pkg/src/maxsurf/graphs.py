"""Spacelike graphs over starlike regions and their light-cone clearance.

Along the ray t -> t e^{i theta} the graph point (t e^{i theta}, u(t e^{i theta}))
sits at Euclidean distance

    f(t) = min(|t - u|, |t + u|) / sqrt(2)

from the light cone. For a spacelike graph through the origin this is
positive for t > 0 and non-decreasing, and a uniform positive clearance at
one radius forces the Lorentzian norm to be proper.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .lorentz import SQRT2, dist_to_lightcone, minkowski_inner

DEFAULT_CUTOFF = 1e3
MONO_TOL = 1e-9
BOUNDARY_TOL = 1e-9


class GraphError(ValueError):
    pass


class GraphExtractionError(GraphError):
    def __init__(self, message, overlapping=()):
        super().__init__(message)
        self.overlapping = list(overlapping)


@dataclass(frozen=True)
class StarlikeRegion:
    """Region {t e^{i theta} : 0 <= t <= extent(theta)} around the origin."""

    extent: Callable[[np.ndarray], np.ndarray]
    label: str = "region"

    @classmethod
    def plane(cls) -> "StarlikeRegion":
        return cls(lambda th: np.full(np.shape(th), np.inf), "plane")

    @classmethod
    def disc(cls, radius: float) -> "StarlikeRegion":
        return cls(lambda th: np.full(np.shape(th), float(radius)), f"disc({radius})")

    @classmethod
    def from_table(cls, angles, radii, label="table") -> "StarlikeRegion":
        """Periodic piecewise-linear extent through (angle, radius) samples."""
        a = np.mod(np.asarray(angles, dtype=float), 2 * np.pi)
        r = np.asarray(radii, dtype=float)
        order = np.argsort(a)
        a, r = a[order], r[order]
        a_ext = np.concatenate([a[-1:] - 2 * np.pi, a, a[:1] + 2 * np.pi])
        r_ext = np.concatenate([r[-1:], r, r[:1]])
        return cls(lambda th: np.interp(np.mod(th, 2 * np.pi), a_ext, r_ext), label)

    def t_max(self, theta) -> np.ndarray:
        t = np.asarray(self.extent(np.asarray(theta, dtype=float)), dtype=float)
        if np.any(~(t > 0)):
            raise GraphError("radial extent must be positive")
        return t

    def bounded(self, rays: int = 256) -> bool:
        return bool(np.all(np.isfinite(self.t_max(2 * np.pi * np.arange(rays) / rays))))


@dataclass(frozen=True)
class SpacelikeGraph:
    """Height function u over a starlike region, shifted so that u(0) = 0."""

    region: StarlikeRegion
    height: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = "graph"

    def u(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u0 = float(np.asarray(self.height(np.zeros(1), np.zeros(1)))[0])
        return np.asarray(self.height(x, y), dtype=float) - u0

    def u_ray(self, theta: float, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.u(t * math.cos(theta), t * math.sin(theta))

    def scaled(self, c: float) -> "SpacelikeGraph":
        """The graph c * S (both the region and the height scaled by c)."""
        ext, h = self.region.extent, self.height
        region = StarlikeRegion(lambda th: c * np.asarray(ext(th)), f"{c}*{self.region.label}")
        return SpacelikeGraph(region, lambda x, y: c * np.asarray(h(x / c, y / c)),
                              f"{c}*{self.label}")

    def reflected(self) -> "SpacelikeGraph":
        h = self.height
        return SpacelikeGraph(self.region, lambda x, y: -np.asarray(h(x, y)), f"-{self.label}")


def clearance(t, u):
    """min(|t - u|, |t + u|) / sqrt(2)."""
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    return np.minimum(np.abs(t - u), np.abs(t + u)) / SQRT2


@dataclass
class Profile:
    theta: float
    t: np.ndarray
    u: np.ndarray
    f: np.ndarray
    t_extent: float

    @property
    def n(self) -> np.ndarray:
        """Lorentzian norm t^2 - u^2 of the graph points."""
        return self.t**2 - self.u**2

    def rows(self):
        for t, u, f, n in zip(self.t, self.u, self.f, self.n):
            yield (self.theta, float(t), float(u), float(f), float(n))


def ray_samples(t_extent: float, samples: int, cutoff: float = DEFAULT_CUTOFF) -> np.ndarray:
    if samples < 2:
        raise ValueError("need at least 2 samples per ray")
    if math.isinf(t_extent):
        return np.geomspace(cutoff * 1e-6, cutoff, samples)
    return t_extent * np.arange(1, samples + 1) / samples


def lightcone_clearance_profile(graph: SpacelikeGraph, theta: float, samples: int = 64,
                                cutoff: float = DEFAULT_CUTOFF) -> Profile:
    """Samples (t, u_theta(t), f_theta(t)) on (0, min(t_theta, cutoff)].

    Geometric spacing on unbounded rays, linear otherwise.
    """
    t_ext = float(graph.region.t_max(np.array([theta]))[0])
    t = ray_samples(t_ext, samples, cutoff)
    u = graph.u_ray(theta, t)
    return Profile(float(theta), t, u, clearance(t, u), t_ext)


def profiles_csv(profiles) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "t", "u", "f", "n"])
    for p in profiles:
        for row in p.rows():
            w.writerow([repr(v) for v in row])
    return buf.getvalue()


@dataclass
class StarlikeReport:
    passed: bool
    ext_cone: bool  # every sample with t > 0 off the closed light cone
    monotone: bool  # f non-decreasing on every ray
    lorentz_norm_monotone: bool
    lipschitz: bool
    epsilon: float  # min over rays of f(delta)
    delta: float
    proper: bool
    properness: str
    rays: int
    samples: int
    worst_cone_slack: float
    worst_cone_location: tuple
    worst_monotone_drop: float
    worst_monotone_location: tuple
    failing_rays: list = field(default_factory=list)
    flagged_boundary: list = field(default_factory=list)
    profiles: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "check": "starlike",
            "status": "PASS" if self.passed else "FAIL",
            "ext_cone": self.ext_cone,
            "monotone": self.monotone,
            "lorentz_norm_monotone": self.lorentz_norm_monotone,
            "lipschitz": self.lipschitz,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "proper": self.proper,
            "properness": self.properness,
            "rays": self.rays,
            "samples": self.samples,
            "worst_cone_slack": self.worst_cone_slack,
            "worst_cone_location": list(self.worst_cone_location),
            "worst_monotone_drop": self.worst_monotone_drop,
            "worst_monotone_location": list(self.worst_monotone_location),
            "failing_rays": self.failing_rays,
            "flagged_boundary": self.flagged_boundary,
        }


def starlike_report(graph: SpacelikeGraph, delta: float, rays: int = 64, samples: int = 64,
                    cutoff: float = DEFAULT_CUTOFF) -> StarlikeReport:
    """Check the three starlike-graph properties on a polar sample of the graph.

    (i) |u| < t at every sample with t > 0. Samples on the region boundary
        with |u| = t (to 1e-9) are flagged, not failed: the boundary may
        carry singular points.
    (ii) f non-decreasing along each ray, up to -1e-9 (1 + f).
    (iii) epsilon = min over rays of f(delta) > 0 certifies properness of the
        Lorentzian norm on unbounded regions; bounded regions are compact
        and proper trivially.
    """
    if rays < 8:
        raise ValueError("need at least 8 rays")
    thetas = 2 * np.pi * np.arange(rays) / rays
    t_ext = graph.region.t_max(thetas)
    if not 0 < delta < t_ext.min():
        raise ValueError(f"delta={delta} must lie in (0, {t_ext.min():.6g})")

    profiles = [lightcone_clearance_profile(graph, th, samples, cutoff) for th in thetas]
    f_delta = np.array([clearance(delta, graph.u_ray(th, np.array([delta])))[0] for th in thetas])
    epsilon = float(f_delta.min())

    ext_cone = monotone = norm_mono = True
    worst_slack, worst_loc = math.inf, (0.0, 0.0)
    worst_drop, drop_loc = math.inf, (0.0, 0.0)
    failing, flagged = [], []
    for p in profiles:
        slack = p.t - np.abs(p.u)
        on_boundary = np.isclose(p.t, p.t_extent, rtol=1e-12, atol=0.0)
        band = BOUNDARY_TOL * np.maximum(1.0, p.t)
        touching = np.abs(slack) <= band
        ray_ok = True
        if np.any((slack <= 0) & ~on_boundary) or np.any(slack < -band):
            ext_cone = ray_ok = False
        for k in np.flatnonzero(touching & on_boundary):
            flagged.append([p.theta, float(p.t[k])])
        k = int(np.argmin(slack))
        if slack[k] < worst_slack:
            worst_slack, worst_loc = float(slack[k]), (p.theta, float(p.t[k]))
        df = np.diff(p.f)
        floor = -MONO_TOL * (1.0 + np.abs(p.f[1:]))
        if np.any(df < floor):
            monotone = ray_ok = False
        if df.size:
            k = int(np.argmin(df))
            if df[k] < worst_drop:
                worst_drop, drop_loc = float(df[k]), (p.theta, float(p.t[k + 1]))
        dn = np.diff(p.n)
        if np.any(dn < -MONO_TOL * (1.0 + np.abs(p.n[1:]))):
            norm_mono = False
        if not ray_ok:
            failing.append(p.theta)

    lipschitz = _lipschitz_ok(graph, profiles)
    bounded = bool(np.all(np.isfinite(t_ext)))
    if bounded:
        proper, how = True, "bounded region: compact graph"
    else:
        proper = epsilon > 0
        how = (f"clearance {epsilon:.6g} off the light cone beyond radius {delta}"
               if proper else "no positive clearance at delta")
    passed = ext_cone and monotone and lipschitz and epsilon > 0
    return StarlikeReport(passed, ext_cone, monotone, norm_mono, lipschitz, epsilon, float(delta),
                          proper, how, rays, samples, worst_slack, worst_loc,
                          worst_drop if math.isfinite(worst_drop) else 0.0, drop_loc,
                          failing, flagged, profiles)


def _lipschitz_ok(graph: SpacelikeGraph, profiles) -> bool:
    """|u(z) - u(w)| <= |z - w| on consecutive samples along and across rays."""
    pts = []
    for p in profiles:
        pts.append(np.column_stack([p.t * math.cos(p.theta), p.t * math.sin(p.theta), p.u]))
    ok = True
    for k, a in enumerate(pts):
        b = pts[(k + 1) % len(pts)]
        pairs = [(a[1:], a[:-1])]
        if len(a) == len(b):
            pairs.append((a, b))
        for x, y in pairs:
            dz = np.hypot(x[:, 0] - y[:, 0], x[:, 1] - y[:, 1])
            du = np.abs(x[:, 2] - y[:, 2])
            if np.any(du > dz * (1 + 1e-9) + 1e-12):
                ok = False
    return ok


@dataclass
class ConeReport:
    alpha: float
    inside: np.ndarray
    margin: np.ndarray
    norm_lower_bound: np.ndarray
    lorentz_norm: np.ndarray

    @property
    def all_inside(self) -> bool:
        return bool(np.all(self.inside))

    def to_dict(self, core_radius: float = 0.0, horizontal=None) -> dict:
        sel = np.ones(self.inside.shape, dtype=bool)
        if horizontal is not None:
            sel = np.asarray(horizontal) >= core_radius
        inside = self.inside[sel]
        margin = self.margin[sel]
        return {
            "check": "cone",
            "status": "PASS" if bool(np.all(inside)) else "FAIL",
            "alpha": self.alpha,
            "core_radius": core_radius,
            "points": int(sel.sum()),
            "inside": int(inside.sum()),
            "min_margin": float(margin.min()) if margin.size else 0.0,
            "min_norm_lower_bound": float(self.norm_lower_bound[sel].min()) if margin.size else 0.0,
            "bound_holds": bool(np.all(self.lorentz_norm[sel] + 1e-12 >= self.norm_lower_bound[sel])),
        }


def cone_region_test(points, alpha: float) -> ConeReport:
    """Membership in {|x3| <= |(x1, x2)| tan(alpha)}, 0 < alpha < pi/4.

    Also reports the lower bound |(x1, x2)|^2 (1 - tan alpha) for the
    Lorentzian norm of each point.
    """
    if not 0 < alpha < math.pi / 4:
        raise ValueError("alpha must lie in (0, pi/4)")
    p = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.hypot(p[:, 0], p[:, 1])
    ta = math.tan(alpha)
    margin = r * ta - np.abs(p[:, 2])
    return ConeReport(float(alpha), margin >= 0, margin, r**2 * (1 - ta), minkowski_inner(p, p))


# --------------------------------------------------------------------------
# Graph extraction from a surface mesh

def projected_overlaps(mesh, tol: float = 1e-14) -> tuple[list[int], int]:
    """Faces whose horizontal projection is flipped relative to the majority."""
    xy = mesh.positions[:, :2]
    areas, owners = [], []
    for k, face in enumerate(mesh.faces):
        for tri in ((face[0], face[1], face[2]), (face[0], face[2], face[-1])):
            if len(set(tri)) < 3:
                continue
            a, b, c = xy[list(tri)]
            areas.append(0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])))
            owners.append(k)
    areas = np.array(areas)
    owners = np.array(owners)
    scale = max(mesh.scale, 1e-300) ** 2
    live = np.abs(areas) > tol * scale
    sign = 1 if np.sum(areas[live] > 0) >= np.sum(areas[live] < 0) else -1
    bad = sorted(set(owners[live & (np.sign(areas) != sign)].tolist()))
    return bad, sign


def graph_from_mesh(mesh, center_param: complex | None = None, newton_tol: float = 1e-12,
                    max_iter: int = 40) -> SpacelikeGraph:
    """Read an immersion as a graph over its horizontal projection.

    The graph is centered at the projection of X(center_param) (default: the
    basepoint) and heights are measured from X3 there. Heights at arbitrary
    points are found by Newton inversion of the projection using the exact
    tangents, so they carry quadrature accuracy rather than mesh
    interpolation error. Raises GraphExtractionError when the projection is
    not injective or the boundary is not starlike about the center.
    """
    from .weierstrass import frame_arrays

    data = mesh.data
    p0 = data.basepoint if center_param is None else complex(center_param)
    x0 = mesh.position_at([p0])[0]
    c = x0[:2]

    bad, _ = projected_overlaps(mesh)
    if bad:
        raise GraphExtractionError(f"projection folds over {len(bad)} cells", bad)

    grid = mesh.grid
    n = grid.n_angles
    rings = [grid.n_rings - 1] if grid.offset else [0, grid.n_rings - 1]
    best = None
    for i in rings:
        idx = [grid.index(i, j) for j in range(n)]
        pts = mesh.positions[idx, :2] - c
        d = np.hypot(pts[:, 0], pts[:, 1]).mean()
        if best is None or d > best[0]:
            best = (d, pts)
    pts = best[1]
    phi = np.angle(pts[:, 0] + 1j * pts[:, 1])
    step = np.diff(np.append(phi, phi[0]))
    step = (step + np.pi) % (2 * np.pi) - np.pi
    if not (np.all(step > 0) or np.all(step < 0)) or abs(abs(step.sum()) - 2 * np.pi) > 1e-6:
        raise GraphExtractionError("projected boundary is not starlike about the center")
    region = StarlikeRegion.from_table(phi, np.hypot(pts[:, 0], pts[:, 1]), "projected mesh")

    xy_tree = cKDTree(mesh.positions[:, :2])

    def height(x, y):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        target = np.column_stack([x.ravel() + c[0], y.ravel() + c[1]])
        _, k = xy_tree.query(target)
        z = mesh.z[k].copy()
        pos = mesh.position_at(z)
        for _ in range(max_iter):
            resid = target - pos[:, :2]
            if np.all(np.hypot(resid[:, 0], resid[:, 1])
                      <= newton_tol * (1 + np.hypot(target[:, 0], target[:, 1]))):
                break
            _, _, xu, xv = frame_arrays(data, z)
            det = xu[:, 0] * xv[:, 1] - xu[:, 1] * xv[:, 0]
            du = (resid[:, 0] * xv[:, 1] - resid[:, 1] * xv[:, 0]) / det
            dv = (xu[:, 0] * resid[:, 1] - xu[:, 1] * resid[:, 0]) / det
            step_z = du + 1j * dv
            for _ in range(30):
                cand = z + step_z
                inside = np.array([data.domain.near(w) for w in cand])
                if inside.all():
                    break
                step_z = np.where(inside, step_z, 0.5 * step_z)
            z = z + step_z
            pos = mesh.position_at(z)
        else:
            worst = np.argmax(np.hypot(resid[:, 0], resid[:, 1]))
            raise GraphExtractionError(
                f"Newton inversion of the projection did not converge near {target[worst]}"
                f" (z={z[worst]:.6g}, residual {np.hypot(*resid[worst]):.3g})")
        return (pos[:, 2] - x0[2]).reshape(x.shape)

    return SpacelikeGraph(region, height, f"graph of {data.kind} mesh")
