"""Conformal maximal (and minimal) immersions from Weierstrass data.

Maximal data (g, f) in Lorentz-Minkowski space::

    phi1 = i/2 (1/g - g) f,   phi2 = -1/2 (1/g + g) f,   phi3 = f

Minimal data (g, f) in Euclidean space::

    phi1 = 1/2 (1/g - g) f,   phi2 = i/2 (1/g + g) f,    phi3 = f

and in both cases X = base_value + Re of the integral of (phi1, phi2, phi3) dz
from the basepoint. Replacing f by i f turns maximal data into minimal
data with the same phi1, phi2 and the same g.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.spatial import cKDTree

from .expr import AnalyticFn, ImagUnit, Num, PoleError, add, div, mul, neg, parse, pole_probe, sub
from .lorentz import LVec3, euclidean_normal_direction, minkowski_inner, stereographic_array
from .quadrature import adaptive_simpson, circle_trapezoid

Kind = Literal["maximal", "minimal"]

QUAD_TOL = 1e-10
QUAD_MAX_DEPTH = 24
PERIOD_TOL = 1e-8
PATH_TOL = 1e-8


class WeierstrassError(ValueError):
    pass


class SpacelikeViolation(WeierstrassError):
    pass


class DegeneratePhi(WeierstrassError):
    pass


class NonExactRealPart(WeierstrassError):
    def __init__(self, message, periods=None):
        super().__init__(message)
        self.periods = periods


class DegenerateFrame(WeierstrassError):
    pass


class InconclusiveClassification(WeierstrassError):
    pass


# --------------------------------------------------------------------------
# Parameter domains

DOMAIN_KINDS = ("disc", "annulus", "punctured_plane", "plane")


@dataclass(frozen=True)
class ParamDomain:
    """Radially symmetric parameter domain with a polar sampling grid.

    disc(radius) and plane(radius = sampled extent) carry a center node and
    linearly spaced rings; annulus and punctured_plane use geometric rings
    between r_in and r_out. For plane and punctured_plane the radii only
    bound the sampled part: every ring is interior.
    """

    kind: str
    radius: float = 1.0
    r_in: float = 0.0
    r_out: float = 0.0
    outer_closed: bool = False
    n_radial: int = 32
    n_angular: int = 64

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.n_radial < 8 or self.n_angular < 8:
            raise ValueError("grid resolutions must be >= 8")
        if self.kind in ("disc", "plane") and not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.kind in ("annulus", "punctured_plane") and not 0 < self.r_in < self.r_out:
            raise ValueError("need 0 < r_in < r_out")

    @classmethod
    def disc(cls, radius, **kw):
        return cls("disc", radius=radius, **kw)

    @classmethod
    def annulus(cls, r_in, r_out, outer_closed=False, **kw):
        return cls("annulus", r_in=r_in, r_out=r_out, outer_closed=outer_closed, **kw)

    @classmethod
    def plane(cls, extent=4.0, **kw):
        return cls("plane", radius=extent, **kw)

    @classmethod
    def punctured_plane(cls, r_in=0.1, r_out=10.0, **kw):
        return cls("punctured_plane", r_in=r_in, r_out=r_out, **kw)

    @property
    def has_center(self) -> bool:
        return self.kind in ("disc", "plane")

    @property
    def simply_connected(self) -> bool:
        return self.has_center

    @cached_property
    def rings(self) -> np.ndarray:
        n = self.n_radial
        if self.has_center:
            return self.radius * np.arange(1, n + 1) / n
        return self.r_in * (self.r_out / self.r_in) ** (np.arange(n) / (n - 1))

    @cached_property
    def boundary_rings(self) -> np.ndarray:
        """Boolean per ring: True where the ring lies on the domain boundary."""
        b = np.zeros(self.n_radial, dtype=bool)
        if self.kind == "disc":
            b[-1] = True
        elif self.kind == "annulus":
            b[0] = b[-1] = True
        return b

    @property
    def cycle_radius(self) -> float | None:
        """Radius of a circle generating the homology, None if simply connected."""
        if self.simply_connected:
            return None
        return math.sqrt(self.r_in * self.r_out)

    @property
    def outer_radius(self) -> float:
        return self.radius if self.has_center else self.r_out

    def contains(self, z: complex) -> bool:
        r = abs(z)
        if self.kind == "disc":
            return r < self.radius
        if self.kind == "annulus":
            return self.r_in < r < self.r_out or (self.outer_closed and r == self.r_out)
        if self.kind == "punctured_plane":
            return r > 0
        return True

    def near(self, z: complex, rel: float = 0.01) -> bool:
        """Inside the closure of the domain widened by a relative margin."""
        r = abs(z)
        if self.kind == "disc":
            return r <= self.radius * (1 + rel)
        if self.kind == "annulus":
            return self.r_in * (1 - rel) <= r <= self.r_out * (1 + rel)
        if self.kind == "punctured_plane":
            return r > 0
        return True

    def to_dict(self) -> dict:
        d = {"type": self.kind, "n_radial": self.n_radial, "n_angular": self.n_angular}
        if self.has_center:
            d["radius" if self.kind == "disc" else "extent"] = self.radius
        else:
            d.update(r_in=self.r_in, r_out=self.r_out)
            if self.kind == "annulus":
                d["outer_closed"] = self.outer_closed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ParamDomain":
        kind = d["type"]
        kw = {k: d[k] for k in ("n_radial", "n_angular") if k in d}
        if kind == "disc":
            return cls.disc(float(d["radius"]), **kw)
        if kind == "plane":
            return cls.plane(float(d.get("extent", 4.0)), **kw)
        if kind == "annulus":
            return cls.annulus(float(d["r_in"]), float(d["r_out"]),
                               bool(d.get("outer_closed", False)), **kw)
        if kind == "punctured_plane":
            return cls.punctured_plane(float(d.get("r_in", 0.1)), float(d.get("r_out", 10.0)), **kw)
        raise ValueError(f"unknown domain type {kind!r}")


@dataclass(frozen=True)
class PolarGrid:
    """Vertices of a domain's polar grid: optional center, then ring-major."""

    domain: ParamDomain

    @property
    def n_rings(self) -> int:
        return self.domain.n_radial

    @property
    def n_angles(self) -> int:
        return self.domain.n_angular

    @property
    def offset(self) -> int:
        return 1 if self.domain.has_center else 0

    @property
    def size(self) -> int:
        return self.offset + self.n_rings * self.n_angles

    @cached_property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles

    @cached_property
    def z(self) -> np.ndarray:
        ring = (self.domain.rings[:, None] * np.exp(1j * self.angles)[None, :]).ravel()
        if self.offset:
            return np.concatenate([[0j], ring])
        return ring

    @cached_property
    def interior(self) -> np.ndarray:
        b = np.repeat(self.domain.boundary_rings, self.n_angles)
        if self.offset:
            b = np.concatenate([[False], b])
        return ~b

    def index(self, ring: int, col: int) -> int:
        return self.offset + ring * self.n_angles + (col % self.n_angles)

    @cached_property
    def faces(self) -> list[tuple[int, ...]]:
        out = []
        n = self.n_angles
        if self.offset:
            out += [(0, self.index(0, j), self.index(0, j + 1)) for j in range(n)]
        for i in range(self.n_rings - 1):
            for j in range(n):
                out.append((self.index(i, j), self.index(i + 1, j),
                            self.index(i + 1, j + 1), self.index(i, j + 1)))
        return out


# --------------------------------------------------------------------------
# Weierstrass data

@dataclass(frozen=True)
class WeierstrassData:
    domain: ParamDomain
    g: AnalyticFn
    f: AnalyticFn
    basepoint: complex = 0j
    base_value: LVec3 = LVec3(0.0, 0.0, 0.0)
    kind: Kind = "maximal"

    @cached_property
    def phi(self) -> tuple[AnalyticFn, AnalyticFn, AnalyticFn]:
        return make_phi(self)

    @cached_property
    def grid(self) -> PolarGrid:
        return PolarGrid(self.domain)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "domain": self.domain.to_dict(),
            "g": self.g.text,
            "phi3": self.f.text,
            "basepoint": [self.basepoint.real, self.basepoint.imag],
            "base_value": [self.base_value.x1, self.base_value.x2, self.base_value.x3],
        }


def make_phi(data: WeierstrassData) -> tuple[AnalyticFn, AnalyticFn, AnalyticFn]:
    g, f = data.g.ast, data.f.ast
    inv = div(Num(1 + 0j), g)
    half = Num(0.5 + 0j)
    if data.kind == "maximal":
        p1 = mul(mul(mul(ImagUnit(), half), sub(inv, g)), f)
        p2 = neg(mul(mul(half, add(inv, g)), f))
    else:
        p1 = mul(mul(half, sub(inv, g)), f)
        p2 = mul(mul(mul(ImagUnit(), half), add(inv, g)), f)
    return AnalyticFn(p1), AnalyticFn(p2), AnalyticFn(f)


def _repair(fn: AnalyticFn, z: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Fill nan entries (exact-zero divisors) by the circle mean when removable."""
    bad = np.flatnonzero(~np.isfinite(vals))
    for k in bad:
        z0 = complex(z.flat[k])
        probe = pole_probe(fn.ast, z0, radius=1e-4 * max(1.0, abs(z0)))
        if probe["pole"]:
            raise PoleError(f"pole of {fn.text} at z={z0}")
        vals.flat[k] = probe["mean"]
    return vals


def eval_fn(fn: AnalyticFn, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return _repair(fn, z, np.asarray(fn(z, strict=False)))


def phi_values(data: WeierstrassData, z) -> np.ndarray:
    """(len(z), 3) complex array of the phi coefficients, removable points repaired."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.stack([eval_fn(p, z) for p in data.phi], axis=-1)


def phi_derivative_values(data: WeierstrassData, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.stack([p.derivative(z, strict=False) for p in data.phi], axis=-1)


def make_weierstrass(domain: ParamDomain, g_text: str, f_text: str, basepoint=0j,
                     base_value=(0.0, 0.0, 0.0), kind: Kind = "maximal") -> WeierstrassData:
    """Parse and validate Weierstrass data on the domain's full sampling grid."""
    if kind not in ("maximal", "minimal"):
        raise ValueError(f"kind must be 'maximal' or 'minimal', got {kind!r}")
    if not isinstance(base_value, LVec3):
        base_value = LVec3(*map(float, base_value))
    basepoint = complex(basepoint)
    if not domain.contains(basepoint):
        raise WeierstrassError(f"basepoint {basepoint} is not interior to the domain")
    data = WeierstrassData(domain, AnalyticFn(parse(g_text)), AnalyticFn(parse(f_text)),
                           basepoint, base_value, kind)
    validate(data)
    return data


def validate(data: WeierstrassData) -> None:
    grid = data.grid
    z = np.concatenate([grid.z[grid.interior], [data.basepoint]])
    gv = data.g(z, strict=False)
    absg = np.where(np.isfinite(gv), np.abs(gv), np.inf)
    if np.any(absg >= 1.0):
        k = int(np.argmax(absg))
        raise SpacelikeViolation(f"|g| = {absg[k]:.6g} >= 1 at interior sample z={z[k]:.6g}")
    phis = phi_values(data, z)
    if not np.all(np.isfinite(phis)):
        raise PoleError("Weierstrass 1-forms are not finite on the interior grid")
    mag = np.max(np.abs(phis), axis=1)
    if np.any(mag == 0.0):
        k = int(np.argmin(mag))
        raise DegeneratePhi(f"(phi1, phi2, phi3) vanishes at z={z[k]:.6g}")


def dualize(data: WeierstrassData, inverse: bool = False) -> WeierstrassData:
    """f -> i f with the surface kind flipped (f -> -i f when inverse=True).

    dualize keeps phi1, phi2 of maximal data; dualize(inverse=True) keeps
    phi1, phi2 of minimal data, so it maps a minimal surface Y to the
    maximal surface (Y1, Y2, conjugate of Y3).
    """
    unit = Num(-1j) if inverse else ImagUnit()
    f = AnalyticFn(mul(unit, data.f.ast))
    kind = "minimal" if data.kind == "maximal" else "maximal"
    return replace(data, f=f, kind=kind)


# --------------------------------------------------------------------------
# Periods

@dataclass(frozen=True)
class Periods:
    radius: float
    values: np.ndarray  # 3 complex
    nodes: int

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag


def cycle_periods(data: WeierstrassData, radius: float, check: bool = True) -> Periods:
    vals, n = circle_trapezoid(lambda z: phi_values(data, z), 0j, radius, tol=1e-10)
    periods = Periods(radius, vals, n)
    if check and np.any(np.abs(vals.real) > PERIOD_TOL):
        raise NonExactRealPart(
            f"real periods {vals.real.tolist()} on |z|={radius}: the immersion is multivalued",
            periods)
    return periods


# --------------------------------------------------------------------------
# Path integration

@dataclass
class Paths:
    """Line segments (kind 0, p0 -> p1) and origin-centered arcs (kind 1,
    start point p0, angle sweep p1.real)."""

    kind: np.ndarray
    p0: np.ndarray
    p1: np.ndarray

    @classmethod
    def lines(cls, a, b) -> "Paths":
        a = np.asarray(a, dtype=complex).ravel()
        b = np.asarray(b, dtype=complex).ravel()
        return cls(np.zeros(a.size, dtype=int), a, b)

    @classmethod
    def arcs(cls, start, sweep) -> "Paths":
        start = np.asarray(start, dtype=complex).ravel()
        sweep = np.broadcast_to(np.asarray(sweep, dtype=float), start.shape).astype(complex)
        return cls(np.ones(start.size, dtype=int), start, sweep)

    @classmethod
    def concat(cls, *ps: "Paths") -> "Paths":
        return cls(np.concatenate([p.kind for p in ps]), np.concatenate([p.p0 for p in ps]),
                   np.concatenate([p.p1 for p in ps]))

    def __len__(self):
        return self.kind.size

    def point(self, idx, s):
        k, p0, p1 = self.kind[idx], self.p0[idx], self.p1[idx]
        line_z = p0 + s * (p1 - p0)
        arc_z = p0 * np.exp(1j * s * p1.real)
        z = np.where(k == 0, line_z, arc_z)
        dz = np.where(k == 0, p1 - p0, 1j * p1.real * arc_z)
        return z, dz

    def endpoints(self):
        end = np.where(self.kind == 0, self.p1, self.p0 * np.exp(1j * self.p1.real))
        return self.p0, end

    def lengths(self) -> np.ndarray:
        return np.where(self.kind == 0, np.abs(self.p1 - self.p0),
                        np.abs(self.p0) * np.abs(self.p1.real))


def integrate_paths(data: WeierstrassData, paths: Paths, tol: float = QUAD_TOL,
                    max_depth: int = QUAD_MAX_DEPTH):
    """Complex integrals of (phi1, phi2, phi3) dz along each path.

    Initial panel counts come from the symbolic derivative: paths along which
    |Phi'| * length is large relative to |Phi| start out pre-subdivided.
    """
    if len(paths) == 0:
        return np.zeros((0, 3), dtype=complex), np.zeros(0)
    a, b = paths.endpoints()
    ends = np.concatenate([a, b])
    with np.errstate(all="ignore"):
        val = np.abs(np.stack([p(ends, strict=False) for p in data.phi], axis=-1))
        der = np.abs(phi_derivative_values(data, ends))
        val = np.nan_to_num(val, nan=0.0, posinf=0.0)
        der = np.nan_to_num(der, nan=0.0, posinf=0.0)
        scale = np.maximum(np.maximum(val[: len(paths)], val[len(paths):]).max(axis=1), 1e-300)
        slope = np.maximum(der[: len(paths)], der[len(paths):]).max(axis=1)
        hint = np.ceil(0.5 * paths.lengths() * slope / scale)
    panels = np.clip(np.nan_to_num(hint, nan=1.0), 1, 32).astype(int)

    def integrand(idx, s):
        z, dz = paths.point(idx, s)
        return phi_values(data, z) * dz[:, None]

    res = adaptive_simpson(integrand, len(paths), 3, tol=tol, max_depth=max_depth,
                           initial_panels=panels)
    return res.values, res.errors


# --------------------------------------------------------------------------
# Mesh

@dataclass
class SurfaceMesh:
    data: WeierstrassData
    grid: PolarGrid
    primitive: np.ndarray  # (N, 3) complex integral of Phi from the basepoint
    positions: np.ndarray  # (N, 3) real
    normals: np.ndarray  # (N, 3); H^2 normals (maximal) or unit normals (minimal)
    lambda_sq: np.ndarray  # (N,)
    error_bound: np.ndarray  # (N,)
    path_discrepancy: float
    root: int
    faces: list = field(repr=False, default_factory=list)

    @property
    def z(self) -> np.ndarray:
        return self.grid.z

    @property
    def interior(self) -> np.ndarray:
        return self.grid.interior

    @property
    def kind(self) -> str:
        return self.data.kind

    @cached_property
    def scale(self) -> float:
        """Euclidean diameter of the bounding box."""
        p = self.positions[np.all(np.isfinite(self.positions), axis=1)]
        return float(np.linalg.norm(p.max(axis=0) - p.min(axis=0)))

    def euclidean_normals(self) -> np.ndarray:
        g = eval_fn(self.data.g, self.z)
        if self.kind == "minimal":
            return euclidean_stereographic(g)
        return euclidean_normal_direction(g)

    @cached_property
    def _tree(self):
        return cKDTree(np.column_stack([self.z.real, self.z.imag]))

    def nearest_vertex(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        _, k = self._tree.query(np.column_stack([z.real, z.imag]))
        return np.asarray(k)

    def primitive_at(self, z) -> np.ndarray:
        """Integral of Phi from the basepoint to arbitrary points, via the nearest vertex."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        k = self.nearest_vertex(z)
        inc, _ = integrate_paths(self.data, Paths.lines(self.z[k], z))
        return self.primitive[k] + inc

    def position_at(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        bv = np.asarray(self.data.base_value, dtype=float)
        out = bv + self.primitive_at(z).real
        out[z == self.data.basepoint] = bv  # empty path
        return out


def euclidean_stereographic(g) -> np.ndarray:
    """Unit normal of a minimal surface from its Gauss map g (north-pole chart)."""
    g = np.asarray(g, dtype=complex)
    r2 = np.abs(g) ** 2
    return np.stack([2 * g.real, 2 * g.imag, r2 - 1.0], axis=-1) / (r2 + 1.0)[..., None]


def _sweep(v0: np.ndarray, inc: np.ndarray, j0: int, sign: float = -1.0) -> np.ndarray:
    """Propagate values around rings from column j0, half the ring each way.

    v0: (R, k) values at column j0; inc: (R, n, k) increments from column j
    to j+1. With sign=+1 the backward direction adds instead of subtracting
    (used for accumulating error bounds).
    """
    n = inc.shape[1]
    r = np.roll(inc, -j0, axis=1)
    kf = n // 2
    kb = n - 1 - kf
    out = np.empty_like(r)
    fw = np.concatenate([np.zeros_like(r[:, :1]), np.cumsum(r[:, :kf], axis=1)], axis=1)
    out[:, : kf + 1] = v0[:, None] + fw
    if kb:
        back = np.cumsum(r[:, ::-1][:, :kb], axis=1)
        out[:, n - kb:] = (v0[:, None] + sign * back)[:, ::-1]
    return np.roll(out, j0, axis=1)


def _accumulate(grid: PolarGrid, root_val, root_err, radial, rad_err, angular, ang_err,
                center, cen_err, i0, j0, ring_first: bool, complex_sign=-1.0):
    """Values at every vertex along one of two spanning trees.

    Tree A (ring_first=False): radial spine along column j0, then rings.
    Tree B (ring_first=True): ring i0 first, then radially along each column.
    i0 = -1 means the root is the center vertex.
    """
    n_r, n = grid.n_rings, grid.n_angles
    k = root_val.shape[-1]

    def spine(v_start, e_start, i_start, rad, rerr):
        # propagate along ring index from ring i_start (values per column)
        v = np.empty((n_r,) + v_start.shape, dtype=v_start.dtype)
        e = np.empty((n_r,) + e_start.shape)
        v[i_start], e[i_start] = v_start, e_start
        for i in range(i_start + 1, n_r):
            v[i] = v[i - 1] + rad[i - 1]
            e[i] = e[i - 1] + rerr[i - 1]
        for i in range(i_start - 1, -1, -1):
            v[i] = v[i + 1] - rad[i]
            e[i] = e[i + 1] + rerr[i]
        return v, e

    if i0 < 0:
        # root at the center: its spokes reach ring 0
        if ring_first:
            v0 = root_val[None, :] + center  # (n, k)
            e0 = root_err + cen_err
            V, E = spine(v0, e0, 0, radial, rad_err)
        else:
            vs, es = spine(root_val + center[j0], root_err + cen_err[j0], 0,
                           radial[:, j0], rad_err[:, j0])
            V = _sweep(vs, angular, j0, complex_sign)
            E = _sweep(es[:, None], ang_err[..., None], j0, 1.0)[..., 0]
        return root_val, root_err, V, E

    if ring_first:
        ring_v = _sweep(root_val[None, :], angular[i0:i0 + 1], j0, complex_sign)[0]
        ring_e = _sweep(np.array([[root_err]]), ang_err[i0:i0 + 1, :, None], j0, 1.0)[0, :, 0]
        V, E = spine(ring_v, ring_e, i0, radial, rad_err)
        jc = (j0 + n // 2) % n
    else:
        vs, es = spine(root_val, root_err, i0, radial[:, j0], rad_err[:, j0])
        V = _sweep(vs, angular, j0, complex_sign)
        E = _sweep(es[:, None], ang_err[..., None], j0, 1.0)[..., 0]
        jc = j0
    if grid.offset:
        cval = V[0, jc] - center[jc]
        cerr = E[0, jc] + cen_err[jc]
    else:
        cval, cerr = None, None
    return cval, cerr, V, E


def integrate_immersion(data: WeierstrassData, tol: float = QUAD_TOL,
                        max_depth: int = QUAD_MAX_DEPTH, check_paths: bool = True) -> SurfaceMesh:
    """X = base_value + Re of the integral of Phi along a spanning tree of grid edges."""
    domain = data.domain
    if domain.cycle_radius is not None:
        cycle_periods(data, domain.cycle_radius)
    grid = data.grid
    n_r, n = grid.n_rings, grid.n_angles
    rings = domain.rings
    theta = grid.angles
    ring_z = rings[:, None] * np.exp(1j * theta)[None, :]

    radial = Paths.lines(ring_z[:-1], ring_z[1:])
    angular = Paths.arcs(ring_z, 2.0 * np.pi / n)
    parts = [radial, angular]
    if grid.offset:
        parts.append(Paths.lines(np.zeros(n), ring_z[0]))
    zs = grid.z
    root = int(np.argmin(np.abs(zs - data.basepoint)))
    parts.append(Paths.lines([data.basepoint], [zs[root]]))
    vals, errs = integrate_paths(data, Paths.concat(*parts), tol, max_depth)

    n_rad = (n_r - 1) * n
    n_ang = n_r * n
    rad_v = vals[:n_rad].reshape(n_r - 1, n, 3)
    rad_e = errs[:n_rad].reshape(n_r - 1, n)
    ang_v = vals[n_rad:n_rad + n_ang].reshape(n_r, n, 3)
    ang_e = errs[n_rad:n_rad + n_ang].reshape(n_r, n)
    pos = n_rad + n_ang
    if grid.offset:
        cen_v, cen_e = vals[pos:pos + n], errs[pos:pos + n]
        pos += n
    else:
        cen_v, cen_e = None, None
    root_v, root_e = vals[pos], errs[pos]

    if grid.offset and root == 0:
        i0, j0 = -1, 0
    else:
        i0, j0 = divmod(root - grid.offset, n)

    def build(ring_first):
        cval, cerr, V, E = _accumulate(grid, root_v, root_e, rad_v, rad_e, ang_v, ang_e,
                                       cen_v, cen_e, i0, j0, ring_first)
        prim = V.reshape(-1, 3)
        err = E.reshape(-1)
        if grid.offset:
            prim = np.concatenate([cval[None, :], prim])
            err = np.concatenate([[cerr], err])
        return prim, err

    prim, err = build(False)
    discrepancy = 0.0
    if check_paths:
        alt, _ = build(True)
        discrepancy = float(np.max(np.abs(alt.real - prim.real)))

    bv = np.asarray(data.base_value, dtype=float)
    positions = bv + prim.real
    lam, normals = _metric_and_normal(data, zs)
    return SurfaceMesh(data, grid, prim, positions, normals, lam, err, discrepancy, root,
                       grid.faces)


# --------------------------------------------------------------------------
# Frames

def _metric_and_normal(data: WeierstrassData, z):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = eval_fn(data.g, z)
    f = eval_fn(data.f, z)
    absg = np.abs(g)
    with np.errstate(all="ignore"):
        if data.kind == "maximal":
            lam = (0.5 * np.abs(f) * (1.0 / absg - absg)) ** 2
            normals = stereographic_array(g)
        else:
            lam = (0.5 * np.abs(f) * (1.0 / absg + absg)) ** 2
            normals = euclidean_stereographic(g)
    fix = (absg == 0) | ~np.isfinite(lam)
    if fix.any():
        phis = phi_values(data, z[fix])
        sign = -1.0 if data.kind == "maximal" else 1.0
        lam[fix] = 0.5 * (np.abs(phis[:, 0]) ** 2 + np.abs(phis[:, 1]) ** 2
                          + sign * np.abs(phis[:, 2]) ** 2)
    return lam, normals


@dataclass(frozen=True)
class Frame:
    lambda_sq: float
    N0: LVec3
    X_u: LVec3
    X_v: LVec3


def frame_arrays(data: WeierstrassData, z):
    """Vectorized frame: (lambda_sq, N, X_u, X_v) with X_u = Re Phi, X_v = -Im Phi."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    phis = phi_values(data, z)
    lam, normals = _metric_and_normal(data, z)
    return lam, normals, phis.real, -phis.imag


def frame_at(data: WeierstrassData, z: complex) -> Frame:
    lam, n0, xu, xv = frame_arrays(data, [z])
    if not lam[0] >= 1e-14:
        raise DegenerateFrame(f"lambda^2 = {lam[0]:.3g} at z={z}")
    return Frame(float(lam[0]), LVec3.from_array(n0[0]), LVec3.from_array(xu[0]),
                 LVec3.from_array(xv[0]))


# --------------------------------------------------------------------------
# Singularities

@dataclass(frozen=True)
class BranchPoint:
    site: complex


@dataclass(frozen=True)
class LightlikeLoop:
    radius: float
    collapsed: bool
    conelike: bool
    covering_degree: int
    diameter: float = 0.0


@dataclass(frozen=True)
class Regular:
    pass


def _limit_value(fn: AnalyticFn, z0: complex) -> complex:
    """Value at z0 by probing along radii toward it; raises on divergence."""
    probe = pole_probe(fn.ast, z0, radius=1e-4 * max(1.0, abs(z0)))
    if probe["pole"]:
        raise PoleError(f"{fn.text} does not extend continuously to z={z0}")
    try:
        return fn(z0)
    except PoleError:
        return probe["mean"]


def classify_singularity(data: WeierstrassData, site, mesh: SurfaceMesh | None = None,
                         samples: int = 256):
    """Classify a boundary site: ("point", z0) or ("loop", radius).

    point: BranchPoint iff |g(z0)| < 1 - 1e-9 and |f(z0)| < 1e-9.
    loop: LightlikeLoop iff sup ||g| - 1| < 1e-6 along the circle; collapsed
    when X(loop) has diameter below 1e-6 of the surface scale; the covering
    degree is the winding number of the horizontal projection around the
    collapse point on a nearby interior circle.
    """
    what, where = site
    if what == "point":
        z0 = complex(where)
        g0 = _limit_value(data.g, z0)
        f0 = _limit_value(data.f, z0)
        if abs(g0) < 1 - 1e-9 and abs(f0) < 1e-9:
            return BranchPoint(z0)
        return Regular()
    if what != "loop":
        raise ValueError(f"site must be 'point' or 'loop', got {what!r}")
    rho = float(where)
    w = np.exp(2j * np.pi * np.arange(samples) / samples)
    absg = np.abs(eval_fn(data.g, rho * w))
    dev = np.abs(absg - 1.0)
    if dev.max() < 1e-6:
        if mesh is None:
            mesh = integrate_immersion(data)
        pts = mesh.position_at(rho * w)
        diameter = float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)))
        collapsed = diameter < 1e-6 * mesh.scale
        degree = 0
        if collapsed:
            degree = _winding_near_loop(data, mesh, rho, pts.mean(axis=0), w)
        return LightlikeLoop(rho, collapsed, collapsed and abs(degree) == 1, abs(degree), diameter)
    if absg.max() < 1.0 - 1e-6:
        return Regular()
    raise InconclusiveClassification(
        f"|g| on |z|={rho} ranges over [{absg.min():.6g}, {absg.max():.6g}]")


def _winding_near_loop(data, mesh, rho, center, w) -> int:
    dom = data.domain
    for factor in (0.95, 1.05):
        r = rho * factor
        if dom.contains(r):
            break
    else:
        raise InconclusiveClassification("no interior circle next to the loop")
    p = mesh.position_at(r * w)
    ang = np.angle((p[:, 0] - center[0]) + 1j * (p[:, 1] - center[1]))
    d = np.diff(np.append(ang, ang[0]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return int(round(d.sum() / (2 * np.pi)))
