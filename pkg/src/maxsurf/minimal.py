"""Minimal surfaces in Euclidean space and their maximal duals.

For a conformal minimal immersion Y with unit normal N, the 1-form
psi = N2 dY1 - N1 dY2 is the differential of the harmonic conjugate X3 of
Y3, i.e. X3 = Im of the integral of phi3. When X3 is single valued the
triple (Y1, Y2, X3) is a maximal surface in Lorentz-Minkowski space with
the same Gauss map g; its data are dualize(data, inverse=True).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .graphs import StarlikeReport, graph_from_mesh, starlike_report
from .lorentz import LVec3
from .parabolicity import SuperharmonicReport, superharmonic_convergence
from .weierstrass import (
    PERIOD_TOL,
    DegenerateFrame,
    Paths,
    SurfaceMesh,
    WeierstrassData,
    WeierstrassError,
    cycle_periods,
    dualize,
    eval_fn,
    euclidean_stereographic,
    frame_arrays,
    integrate_immersion,
    integrate_paths,
)

NORMAL_TOL = 1e-9
NORMAL_MATCH_TOL = 1e-8


class NotExact(WeierstrassError):
    def __init__(self, message, period: float = float("nan")):
        super().__init__(message)
        self.period = period


class PreconditionError(ValueError):
    pass


def cross_normals(data: WeierstrassData, z) -> np.ndarray:
    """Normalized Y_u x Y_v, the oracle for the Gauss-map normal."""
    _, _, xu, xv = frame_arrays(data, z)
    c = np.cross(xu, xv)
    nrm = np.linalg.norm(c, axis=1)
    if np.any(nrm < 1e-14):
        raise DegenerateFrame("coordinate tangents are parallel")
    return c / nrm[:, None]


@dataclass
class MinimalImmersion:
    data: WeierstrassData
    mesh: SurfaceMesh
    normal_mismatch: float = 0.0

    def __post_init__(self):
        if self.data.kind != "minimal":
            raise PreconditionError("a minimal immersion needs minimal Weierstrass data")
        n = np.linalg.norm(self.mesh.normals, axis=1)
        if np.any(np.abs(n - 1.0) > NORMAL_TOL):
            raise WeierstrassError("Gauss map normals are not unit vectors")

    @property
    def Y(self) -> np.ndarray:
        return self.mesh.positions

    @property
    def N(self) -> np.ndarray:
        return self.mesh.normals

    @property
    def normals_agree(self) -> bool:
        return self.normal_mismatch <= NORMAL_MATCH_TOL


def minimal_immersion(data: WeierstrassData, **kw) -> MinimalImmersion:
    mesh = integrate_immersion(data, **kw)
    inner = mesh.interior
    oracle = cross_normals(data, mesh.z[inner])
    mismatch = float(np.max(np.abs(oracle - mesh.normals[inner]))) if inner.any() else 0.0
    return MinimalImmersion(data, mesh, mismatch)


@dataclass
class ConjugateField:
    values: np.ndarray  # Im of the integral of phi3 from the basepoint, per node
    constant: float = 0.0
    exact: bool = True
    periods: dict = field(default_factory=dict)

    @property
    def X3(self) -> np.ndarray:
        return self.values + self.constant


def harmonic_conjugate(imm: MinimalImmersion) -> ConjugateField:
    """X3 = Im of the integral of phi3; NotExact when Im of its period is nonzero."""
    data = imm.data
    periods = {}
    radius = data.domain.cycle_radius
    if radius is not None:
        per = cycle_periods(data, radius, check=False)
        im3 = float(per.imag[2])
        periods[f"{radius:.12g}"] = im3
        if abs(im3) > PERIOD_TOL:
            raise NotExact(f"Im of the phi3 period on |z|={radius:.6g} is {im3:.12g}; "
                           "psi is not exact", im3)
    return ConjugateField(imm.mesh.primitive[:, 2].imag.copy(), 0.0, True, periods)


# --------------------------------------------------------------------------
# psi = dX3

@dataclass(frozen=True)
class PsiResidual:
    h: float
    residual: float  # max over the u and v directions
    normal_mismatch: float  # |N_cross - N_stereographic|


def psi_check(imm: MinimalImmersion, conj: ConjugateField, z: complex,
              h: float = 1e-3) -> PsiResidual:
    """Compare N2 dY1 - N1 dY2 with dX3 by centered differences at z.

    Differences are exact segment integrals of Phi, so the only error is
    the O(h^2) truncation of the centred difference. N comes from the
    cross product of the difference tangents.
    """
    if not conj.exact:
        raise NotExact("psi is not exact on this domain")
    z = complex(z)
    data = imm.data
    pts = np.array([z - h, z + h, z - 1j * h, z + 1j * h])
    if not all(data.domain.contains(w) for w in pts):
        raise PreconditionError(f"stencil at {z} with h={h} leaves the domain")
    seg, _ = integrate_paths(data, Paths.lines(pts[[0, 2]], pts[[1, 3]]))
    dY = seg.real / (2 * h)  # rows: d/du, d/dv
    dX3 = seg[:, 2].imag / (2 * h)
    c = np.cross(dY[0], dY[1])
    nc = np.linalg.norm(c)
    if nc < 1e-14:
        raise DegenerateFrame(f"coordinate tangents are parallel at {z}")
    N = c / nc
    Ns = euclidean_stereographic(eval_fn(data.g, np.array([z])))[0]
    psi = N[1] * dY[:, 0] - N[0] * dY[:, 1]
    return PsiResidual(h, float(np.max(np.abs(psi - dX3))), float(np.max(np.abs(N - Ns))))


def psi_convergence(imm: MinimalImmersion, conj: ConjugateField, z: complex,
                    h: float = 0.02, levels: int = 3) -> tuple[list, list]:
    """Residuals at h, h/2, ... and the observed orders between levels."""
    res = [psi_check(imm, conj, z, h / 2 ** k).residual for k in range(levels)]
    orders = [math.log2(res[k] / res[k + 1]) for k in range(levels - 1)]
    return res, orders


# --------------------------------------------------------------------------
# Bounded conjugate criterion

@dataclass
class ConjugateReport:
    epsilon: float
    constant: float
    worst_slack: float  # max over nodes of |X3 + C| - (|pi0 Y| - eps)
    violations: list
    norm_bound_ok: bool
    proper_spot_check: bool
    dual: WeierstrassData | None = None
    error: str | None = None
    period: float | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.worst_slack <= 0 and self.norm_bound_ok

    def to_dict(self) -> dict:
        out = {
            "check": "conjugate",
            "passed": bool(self.passed),
            "epsilon": self.epsilon,
            "constant": self.constant,
            "worst_slack": self.worst_slack,
            "violations": [int(k) for k in self.violations[:50]],
            "violation_count": len(self.violations),
            "norm_bound_ok": bool(self.norm_bound_ok),
            "proper_spot_check": bool(self.proper_spot_check),
            "dual": self.dual.to_dict() if self.dual is not None else None,
        }
        if self.error is not None:
            out["error"] = self.error
            out["period"] = self.period
        return out


def bounded_conjugate_arrays(Y, X3, epsilon: float):
    """Best constant C and node slacks for |X3 + C| <= |pi0 Y| - eps.

    With b = |pi0 Y| - eps, A = max(X3 - b), B = max(-X3 - b), the worst
    violation max(A + C, B - C) is minimized by C = (B - A) / 2. Returns
    (C, slack per node, Lorentz norms of (Y1, Y2, X3 + C), lower bounds).
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    Y = np.asarray(Y, dtype=float)
    X3 = np.asarray(X3, dtype=float)
    r = np.hypot(Y[:, 0], Y[:, 1])
    b = r - epsilon
    A = float(np.max(X3 - b))
    B = float(np.max(-X3 - b))
    C = 0.5 * (B - A)
    slack = np.abs(X3 + C) - b
    norm = r ** 2 - (X3 + C) ** 2
    bound = epsilon * (2 * r - epsilon)
    return C, slack, norm, bound


def bounded_conjugate_criterion(imm: MinimalImmersion, conj: ConjugateField,
                                epsilon: float) -> ConjugateReport:
    C, slack, norm, bound = bounded_conjugate_arrays(imm.Y, conj.values, epsilon)
    worst = float(slack.max())
    bad = np.flatnonzero(slack > 0).tolist()
    ok_bound = bool(np.all(norm >= bound - 1e-9 * np.maximum(1.0, np.abs(bound)))) if not bad else False
    dual = None
    if worst <= 0:
        y0 = imm.mesh.position_at([imm.data.basepoint])[0]
        dual = replace(dualize(imm.data, inverse=True), base_value=LVec3(y0[0], y0[1], C))
    return ConjugateReport(epsilon, C, worst, bad, ok_bound, _proper_spot_check(imm), dual)


def _proper_spot_check(imm: MinimalImmersion) -> bool:
    """|pi0 Y| grows toward the outer boundary along most rays."""
    grid = imm.mesh.grid
    n = grid.n_angles
    k = max(2, grid.n_rings // 2)
    ring_ids = range(grid.n_rings - k, grid.n_rings)
    r = np.array([[np.hypot(*imm.Y[grid.index(i, j), :2]) for j in range(n)] for i in ring_ids])
    growing = np.all(np.diff(r, axis=0) >= 0, axis=0)
    return bool(growing.mean() >= 0.9)


# --------------------------------------------------------------------------
# Pipeline

@dataclass
class PipelineReport:
    conjugate: ConjugateField
    starlike: StarlikeReport | None
    superharmonic: SuperharmonicReport | None
    dual_mismatch: float
    error: str | None = None

    @property
    def passed(self) -> bool:
        return (self.error is None and self.starlike is not None and self.starlike.passed
                and self.superharmonic is not None and self.superharmonic.passed)

    def to_dict(self) -> dict:
        return {
            "check": "minimal-pipeline",
            "passed": bool(self.passed),
            "exact": bool(self.conjugate.exact) if self.conjugate else False,
            "dual_mismatch": self.dual_mismatch,
            "starlike": self.starlike.to_dict() if self.starlike else None,
            "superharmonic": self.superharmonic.to_dict() if self.superharmonic else None,
            "error": self.error,
        }


def minimal_starlike_pipeline(imm: MinimalImmersion, delta: float | None = None,
                              mask_fraction: float = 0.1) -> PipelineReport:
    """Conjugate, dualize, then run the starlike and superharmonic checks.

    The maximal triple (Y1, Y2, X3) is rebuilt from the inverse-dual data
    and compared node by node with the minimal mesh. delta defaults to half
    the smallest extent of the projected region. The superharmonic
    chart is a square of half-width 0.45 R inside the disc of radius R,
    masked at mask_fraction of the largest ||X||^2 on the mesh.
    """
    data = imm.data
    if not data.domain.simply_connected:
        raise PreconditionError("the pipeline needs a simply connected parameter domain")
    conj = harmonic_conjugate(imm)
    y0 = imm.mesh.positions[imm.mesh.root] - imm.mesh.primitive[imm.mesh.root].real
    dual = replace(dualize(data, inverse=True), base_value=LVec3(y0[0], y0[1], 0.0))
    dmesh = integrate_immersion(dual)
    expect = np.column_stack([imm.Y[:, 0], imm.Y[:, 1], conj.X3])
    mismatch = float(np.max(np.abs(dmesh.positions - expect)))

    graph = graph_from_mesh(dmesh)
    if delta is None:
        delta = 0.5 * float(np.min(graph.region.t_max(np.linspace(0, 2 * np.pi, 256))))
    star = starlike_report(graph, delta)

    R = data.domain.outer_radius
    if not math.isfinite(R):
        R = float(np.max(np.abs(imm.mesh.z)))
    hw = 0.45 * R
    h = hw / 8
    norms = dmesh.positions[:, 0] ** 2 + dmesh.positions[:, 1] ** 2 - dmesh.positions[:, 2] ** 2
    threshold = mask_fraction * float(norms.max())
    sup = superharmonic_convergence(dual, 0j, hw, h, 3, threshold)
    return PipelineReport(conj, star, sup, mismatch)
