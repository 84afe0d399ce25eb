"""Superharmonicity of log ||X||^2 and discrete harmonic-measure exhaustions.

The sign test uses the flat parameter Laplacian. Since the surface is
conformal, the Laplacian of the induced metric is lambda^-2 times the flat
one, so the sign of Delta h does not depend on the chart.

For a harmonic X with <X_u, X_u> = <X_v, X_v> = lambda^2,

    Delta_flat log<X, X> = -4 lambda^2 <X, N0>^2 / <X, X>^2,

which is never positive.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .lorentz import minkowski_inner
from .weierstrass import (
    DegenerateFrame,
    Paths,
    WeierstrassData,
    frame_arrays,
    integrate_paths,
)

DEFAULT_MASK = 2.0
CHART_TOL = 1e-13
SOLVER_TOL = 1e-10
CLOSED_SIGN_TOL = 1e-12
PARABOLIC_LIMIT = 1e-3
NOISE_FLOOR = 1e-8


class ParabolicityError(ValueError):
    pass


class MaskError(ParabolicityError):
    pass


class SolverError(ArithmeticError):
    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


# --------------------------------------------------------------------------
# Chart grids

def _path_to(data: WeierstrassData, target: complex) -> Paths:
    """A path from the basepoint to target avoiding the hole of annular domains."""
    bp = complex(data.basepoint)
    if data.domain.simply_connected or abs(bp) == 0:
        return Paths.lines([bp], [target])
    r = abs(bp)
    sweep = float(np.angle(target / bp)) if target != 0 else 0.0
    mid = r * np.exp(1j * (np.angle(bp) + sweep))
    arc = Paths.arcs([bp], sweep) if sweep else None
    line = Paths.lines([mid], [target])
    return Paths.concat(arc, line) if arc is not None else line


def _position(data: WeierstrassData, z: complex, tol: float) -> np.ndarray:
    vals, _ = integrate_paths(data, _path_to(data, z), tol)
    return np.asarray(data.base_value, dtype=float) + vals.sum(axis=0).real


@dataclass
class ChartGrid:
    """Cartesian parameter chart z = center + x + iy, |x|, |y| <= half_width."""

    data: WeierstrassData
    center: complex
    h: float
    x: np.ndarray  # (n,) offsets
    X: np.ndarray  # (n, n, 3), indexed [iy, ix]
    lambda_sq: np.ndarray  # (n, n)
    N0: np.ndarray  # (n, n, 3)
    X_u: np.ndarray
    X_v: np.ndarray
    mask_threshold: float = DEFAULT_MASK

    def __post_init__(self):
        if not self.h > 0:
            raise ParabolicityError("grid spacing must be positive")

    @property
    def z(self) -> np.ndarray:
        return self.center + self.x[None, :] + 1j * self.x[:, None]

    @property
    def norm_sq(self) -> np.ndarray:
        return minkowski_inner(self.X, self.X)

    @property
    def mask(self) -> np.ndarray:
        return self.norm_sq >= self.mask_threshold

    @property
    def stencil_mask(self) -> np.ndarray:
        """Masked nodes whose four neighbours are masked as well."""
        m = self.mask
        s = np.zeros_like(m)
        s[1:-1, 1:-1] = (m[1:-1, 1:-1] & m[:-2, 1:-1] & m[2:, 1:-1]
                         & m[1:-1, :-2] & m[1:-1, 2:])
        return s

    def node(self, z: complex) -> tuple[int, int]:
        d = complex(z) - self.center
        ix = int(round((d.real - self.x[0]) / self.h))
        iy = int(round((d.imag - self.x[0]) / self.h))
        n = self.x.size
        if not (0 <= ix < n and 0 <= iy < n):
            raise MaskError(f"{z} lies outside the chart")
        return iy, ix


def chart_grid(data: WeierstrassData, center: complex, half_width: float, h: float,
               mask_threshold: float = DEFAULT_MASK, tol: float = CHART_TOL) -> ChartGrid:
    """Integrate the immersion onto a square Cartesian chart.

    The centre row is reached from the basepoint, then every column is
    integrated vertically from the centre row, one adaptive-quadrature batch
    for all edges.
    """
    if not h > 0 or not half_width > 0:
        raise ParabolicityError("spacing and half-width must be positive")
    m = int(round(half_width / h))
    if abs(m * h - half_width) > 1e-9 * half_width:
        raise ParabolicityError("half_width must be a multiple of h")
    center = complex(center)
    x = h * np.arange(-m, m + 1)
    z = center + x[None, :] + 1j * x[:, None]
    outside = [w for w in z.ravel() if not data.domain.contains(w)]
    if outside:
        raise ParabolicityError(f"chart leaves the parameter domain near {outside[0]}")

    row = center + x
    horiz = Paths.lines(row[:-1], row[1:])
    vert = Paths.lines(z[:-1].ravel(), z[1:].ravel())
    vals, _ = integrate_paths(data, Paths.concat(horiz, vert), tol)
    n = x.size
    hv = vals[: n - 1].real
    vv = vals[n - 1:].real.reshape(n - 1, n, 3)

    X0 = _position(data, center, tol)
    row_pos = np.zeros((n, 3))
    row_pos[m + 1:] = np.cumsum(hv[m:], axis=0)
    row_pos[:m] = -np.cumsum(hv[:m][::-1], axis=0)[::-1]
    X = np.zeros((n, n, 3))
    X[m] = row_pos
    X[m + 1:] = row_pos[None] + np.cumsum(vv[m:], axis=0)
    X[:m] = row_pos[None] - np.cumsum(vv[:m][::-1], axis=0)[::-1]
    X += X0

    lam, n0, xu, xv = frame_arrays(data, z.ravel())
    shape = (n, n)
    return ChartGrid(data, center, h, x, X, lam.reshape(shape), n0.reshape(shape + (3,)),
                     xu.reshape(shape + (3,)), xv.reshape(shape + (3,)), mask_threshold)


# --------------------------------------------------------------------------
# Superharmonicity

def laplacian_closed(X, lam, N0) -> np.ndarray:
    """-4 lambda^2 <X, N0>^2 / <X, X>^2, pointwise."""
    xn = minkowski_inner(X, N0)
    xx = minkowski_inner(X, X)
    with np.errstate(invalid="ignore", divide="ignore"):
        return -4.0 * lam * xn ** 2 / xx ** 2


@dataclass
class SuperharmonicReport:
    h: float
    z: np.ndarray  # nodes where the stencil fits
    fd: np.ndarray
    closed: np.ndarray
    mask_threshold: float
    orders: list = field(default_factory=list)
    level_errors: list = field(default_factory=list)
    order_target: float = 2.0
    order_tol: float = 0.2

    @property
    def residual(self) -> np.ndarray:
        return self.fd - self.closed

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual)))

    @property
    def max_closed(self) -> float:
        return float(np.max(self.closed))

    @property
    def constant(self) -> float:
        """C in max |residual| <= C h^2."""
        return self.max_residual / self.h ** 2

    @property
    def sign_ok(self) -> bool:
        return self.max_closed <= CLOSED_SIGN_TOL

    @property
    def order_ok(self) -> bool:
        if not self.orders:
            return True
        return all(abs(p - self.order_target) <= self.order_tol for p in self.orders)

    @property
    def passed(self) -> bool:
        return self.sign_ok and self.order_ok

    def value_at(self, z: complex) -> tuple[float, float]:
        k = int(np.argmin(np.abs(self.z - z)))
        return float(self.fd[k]), float(self.closed[k])

    def to_dict(self) -> dict:
        return {
            "check": "superharmonic",
            "passed": bool(self.passed),
            "h": self.h,
            "mask_threshold": self.mask_threshold,
            "nodes": int(self.z.size),
            "max_closed": self.max_closed,
            "max_abs_residual": self.max_residual,
            "residual_constant": self.constant,
            "orders": [float(p) for p in self.orders],
            "level_errors": [float(e) for e in self.level_errors],
            "sign_ok": bool(self.sign_ok),
            "order_ok": bool(self.order_ok),
        }

    def csv(self) -> str:
        buf = io.StringIO()
        buf.write("re_z,im_z,laplacian_fd,laplacian_closed,residual\n")
        for z, a, b in zip(self.z, self.fd, self.closed):
            buf.write(f"{z.real:.12g},{z.imag:.12g},{a:.12g},{b:.12g},{a - b:.6e}\n")
        return buf.getvalue()


def _fd_laplacian(grid: ChartGrid):
    sel = grid.stencil_mask
    if not sel.any():
        raise MaskError("no masked node has a full five-point stencil")
    with np.errstate(invalid="ignore", divide="ignore"):
        hgt = np.log(grid.norm_sq)
    lap = np.full(hgt.shape, np.nan)
    lap[1:-1, 1:-1] = (hgt[:-2, 1:-1] + hgt[2:, 1:-1] + hgt[1:-1, :-2] + hgt[1:-1, 2:]
                       - 4.0 * hgt[1:-1, 1:-1]) / grid.h ** 2
    return sel, lap


def superharmonic_report(grid: ChartGrid) -> SuperharmonicReport:
    """Five-point Laplacian of log ||X||^2 against the closed form on one chart."""
    sel, lap = _fd_laplacian(grid)
    closed = laplacian_closed(grid.X, grid.lambda_sq, grid.N0)
    return SuperharmonicReport(grid.h, grid.z[sel], lap[sel], closed[sel], grid.mask_threshold)


def superharmonic_convergence(data: WeierstrassData, center: complex, half_width: float,
                              h: float, levels: int = 3,
                              mask_threshold: float = DEFAULT_MASK) -> SuperharmonicReport:
    """Run the report at h, h/2, ... and measure the order at the coarse nodes.

    The returned report is the finest level's, with the observed orders
    log2(e_k / e_{k+1}) attached, e_k being the max residual over nodes of
    the coarsest grid.
    """
    grids = [chart_grid(data, center, half_width, h / 2 ** k, mask_threshold)
             for k in range(levels)]
    coarse_sel, _ = _fd_laplacian(grids[0])
    errors = []
    for k, grid in enumerate(grids):
        sel, lap = _fd_laplacian(grid)
        closed = laplacian_closed(grid.X, grid.lambda_sq, grid.N0)
        step = 2 ** k
        sub = (lap - closed)[::step, ::step]
        ok = coarse_sel & sel[::step, ::step]
        if not ok.any():
            raise MaskError("refined grids share no stencil nodes with the coarse grid")
        errors.append(float(np.max(np.abs(sub[ok]))))
    # residuals already at rounding level carry no order information
    if errors[0] > NOISE_FLOOR:
        orders = [math.log2(errors[k] / errors[k + 1]) for k in range(levels - 1)]
    else:
        orders = []
    rep = superharmonic_report(grids[-1])
    rep.orders = orders
    rep.level_errors = errors
    return rep


@dataclass(frozen=True)
class TangentResidual:
    vector: float
    scalar: float


def tangent_residuals(X, lam, N0, X_u, X_v) -> tuple[np.ndarray, np.ndarray]:
    """Relative residuals of the frame expansion of X and of <X, X>."""
    X = np.atleast_2d(X)
    if np.any(~(np.asarray(lam) > 1e-14)):
        raise DegenerateFrame("lambda^2 vanishes at a requested node")
    a = minkowski_inner(X, X_u)
    b = minkowski_inner(X, X_v)
    c = minkowski_inner(X, N0)
    lam = np.atleast_1d(lam)
    recon = (a[:, None] * X_u + b[:, None] * X_v) / lam[:, None] - c[:, None] * N0
    vec = np.linalg.norm(X - recon, axis=1) / np.maximum(np.linalg.norm(X, axis=1), 1e-300)
    xx = minkowski_inner(X, X)
    rhs = (a ** 2 + b ** 2) / lam - c ** 2
    scale = np.maximum.reduce([np.abs(xx), (a ** 2 + b ** 2) / lam, c ** 2, np.full_like(xx, 1e-300)])
    return vec, np.abs(xx - rhs) / scale


def tangent_decomposition_check(grid: ChartGrid, z: complex) -> TangentResidual:
    iy, ix = grid.node(z)
    if not grid.mask[iy, ix]:
        raise MaskError(f"node {z} is outside the mask")
    vec, sc = tangent_residuals(grid.X[iy, ix], grid.lambda_sq[iy, ix], grid.N0[iy, ix][None],
                                grid.X_u[iy, ix][None], grid.X_v[iy, ix][None])
    return TangentResidual(float(vec[0]), float(sc[0]))


# --------------------------------------------------------------------------
# Dirichlet problems

@dataclass
class DirichletSolution:
    values: np.ndarray
    residual: float
    iterations: int


def _apply(u, hx, hy):
    """Negative five-point Laplacian with wrap-around neighbours."""
    return ((2.0 * u - np.roll(u, 1, 1) - np.roll(u, -1, 1)) / hx ** 2
            + (2.0 * u - np.roll(u, 1, 0) - np.roll(u, -1, 0)) / hy ** 2)


def solve_dirichlet(unknown, values, spacing=(1.0, 1.0), periodic=(False, False),
                    tol: float = SOLVER_TOL, max_iter: int | None = None) -> DirichletSolution:
    """Discrete harmonic extension of the known nodes into the unknown ones.

    unknown: boolean (ny, nx) array; values: boundary data at known nodes.
    spacing is (hx, hy); periodic flags are (x, y). Solved by Jacobi-scaled
    conjugate gradients until ||r||_2 <= tol * max(1, ||b||_2).
    """
    unknown = np.asarray(unknown, dtype=bool)
    vals = np.array(values, dtype=float)
    if vals.shape != unknown.shape:
        raise ParabolicityError("values and unknown mask differ in shape")
    if not unknown.any():
        return DirichletSolution(vals, 0.0, 0)
    px, py = periodic
    if not py and (unknown[0].any() or unknown[-1].any()):
        raise MaskError("a stencil crosses the edge of the region (y)")
    if not px and (unknown[:, 0].any() or unknown[:, -1].any()):
        raise MaskError("a stencil crosses the edge of the region (x)")
    if not np.all(np.isfinite(vals[~unknown])):
        raise ParabolicityError("boundary values must be finite")
    hx, hy = spacing
    diag = 2.0 / hx ** 2 + 2.0 / hy ** 2

    known = np.where(unknown, 0.0, vals)
    b = -_apply(known, hx, hy)[unknown]

    def A(x):
        u = np.zeros(unknown.shape)
        u[unknown] = x
        return _apply(u, hx, hy)[unknown]

    x = np.zeros(b.size)
    r = b.copy()
    target = tol * max(1.0, float(np.linalg.norm(b)))
    cap = max_iter or 20 * int(np.sqrt(b.size)) * max(unknown.shape) + 100
    zv = r / diag
    p = zv.copy()
    rz = r @ zv
    it = 0
    res = float(np.linalg.norm(r))
    while res > target:
        if it >= cap:
            raise SolverError(f"CG stalled at residual {res:.3e} after {it} iterations", res, it)
        Ap = A(p)
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        zv = r / diag
        rz_new = r @ zv
        p = zv + (rz_new / rz) * p
        rz = rz_new
        it += 1
        res = float(np.linalg.norm(r))
    out = vals.copy()
    out[unknown] = x
    lo, hi = vals[~unknown].min(), vals[~unknown].max()
    slack = 1e-8 * max(1.0, hi - lo)
    assert x.min() >= lo - slack and x.max() <= hi + slack, "maximum principle violated"
    return DirichletSolution(out, res, it)


def annulus_harmonic_measure(r_zero: float, r_one: float, probe: float,
                             n_s: int = 256, n_theta: int = 256,
                             tol: float = SOLVER_TOL) -> tuple[float, DirichletSolution]:
    """Harmonic function 0 on |z| = r_zero, 1 on |z| = r_one, read at |z| = probe.

    Solved on the log-polar chart (s, theta), s = log r, where the flat
    Laplacian is conformally equivalent to the planar one. The probe value
    is interpolated linearly in s along theta = 0.
    """
    if r_zero <= 0 or r_one <= 0 or r_zero == r_one:
        raise ParabolicityError("radii must be positive and distinct")
    lo, hi = sorted((r_zero, r_one))
    if not lo < probe < hi:
        raise ParabolicityError(f"probe radius {probe} is not between {lo} and {hi}")
    s = np.linspace(math.log(r_zero), math.log(r_one), n_s)
    hs = abs(s[1] - s[0])
    ht = 2.0 * math.pi / n_theta
    vals = np.zeros((n_theta, n_s))  # axis 0 theta (periodic), axis 1 s
    vals[:, -1] = 1.0
    unknown = np.zeros_like(vals, dtype=bool)
    unknown[:, 1:-1] = True
    sol = solve_dirichlet(unknown, vals, spacing=(hs, ht), periodic=(False, True), tol=tol)
    sp = math.log(probe)
    value = float(np.interp(sp, s, sol.values[0]) if s[0] < s[-1]
                  else np.interp(sp, s[::-1], sol.values[0][::-1]))
    return value, sol


# --------------------------------------------------------------------------
# Exhaustions

@dataclass(frozen=True)
class ExhaustionSpec:
    """Concentric annuli between a fixed inner circle and growing outer circles.

    "Outer" means away from the inner circle: radii may increase (exhausting
    the plane) or decrease (exhausting a punctured disc toward its puncture).
    limit_radius is where the stages accumulate (inf, 0 or a finite ideal
    boundary such as the unit circle).
    """

    inner_radius: float
    radii: tuple
    probe: float
    limit_radius: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if len(self.radii) < 2:
            raise ParabolicityError("an exhaustion needs at least two stages")
        if self.inner_radius <= 0 or any(r <= 0 for r in self.radii):
            raise ParabolicityError("radii must be positive")
        lo, hi = sorted((self.inner_radius, self.radii[0]))
        if not lo < self.probe < hi:
            raise ParabolicityError("the probe must lie inside the first region")
        side = [np.sign(r - self.inner_radius) for r in self.radii]
        if len(set(side)) != 1 or side[0] == 0:
            raise ParabolicityError("every stage must lie on one side of the inner circle")

    @property
    def outward(self) -> float:
        return 1.0 if self.radii[0] > self.inner_radius else -1.0

    @property
    def strictly_nested(self) -> bool:
        d = self.outward * np.diff(self.radii)
        return bool(np.all(d > 0))

    def x(self, r) -> np.ndarray:
        """Regression variable 1/|log(r / inner)|, zero at r = 0 or inf."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            out = 1.0 / np.abs(np.log(r / self.inner_radius))
        return np.where((r == 0) | np.isinf(r), 0.0, out)


@dataclass
class ParabolicityReport:
    spec: ExhaustionSpec
    omega: np.ndarray
    residuals: np.ndarray
    iterations: np.ndarray
    slope: float
    intercept: float
    limit: float
    verdict: str
    solver_tol: float = SOLVER_TOL

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.omega) <= 10 * self.solver_tol))

    @property
    def passed(self) -> bool:
        return self.verdict == "parabolic-evidence"

    def to_dict(self) -> dict:
        return {
            "check": "parabolicity",
            "passed": bool(self.passed),
            "verdict": self.verdict,
            "inner_radius": self.spec.inner_radius,
            "probe": self.spec.probe,
            "limit_radius": None if math.isinf(self.spec.limit_radius) else self.spec.limit_radius,
            "stages": [{"radius": r, "omega": float(w), "residual": float(e), "iterations": int(i)}
                       for r, w, e, i in zip(self.spec.radii, self.omega, self.residuals,
                                             self.iterations)],
            "fit": {"slope": self.slope, "intercept": self.intercept, "limit": self.limit},
            "monotone": self.monotone,
        }

    def csv(self) -> str:
        rows = ["radius,x,omega,residual,iterations"]
        for r, x, w, e, i in zip(self.spec.radii, self.spec.x(self.spec.radii), self.omega,
                                 self.residuals, self.iterations):
            rows.append(f"{r:.12g},{x:.12g},{w:.12g},{e:.3e},{i}")
        return "\n".join(rows) + "\n"


def harmonic_measure_sequence(spec: ExhaustionSpec, n_s: int = 256, n_theta: int = 256,
                              tol: float = SOLVER_TOL) -> ParabolicityReport:
    """Harmonic measure of each stage's outer circle seen from the probe.

    The values are fitted as omega = a + b x with x = 1/|log(R / inner)|
    and extrapolated to the limit radius. Conformal invariance lets the
    solve run in the parameter annulus.
    """
    omega, res, its = [], [], []
    for r in spec.radii:
        w, sol = annulus_harmonic_measure(spec.inner_radius, r, spec.probe, n_s, n_theta, tol)
        omega.append(w)
        res.append(sol.residual)
        its.append(sol.iterations)
    omega = np.array(omega)
    xs = spec.x(spec.radii)
    if np.ptp(xs) > 0:
        slope, intercept = np.polyfit(xs, omega, 1)
    else:
        slope, intercept = 0.0, float(omega.mean())
    limit = float(intercept + slope * spec.x(spec.limit_radius))
    decreasing = bool(np.all(np.diff(omega) < 0))
    if not spec.strictly_nested or len(spec.radii) < 3:
        verdict = "inconclusive"
    elif decreasing and abs(limit) <= PARABOLIC_LIMIT:
        verdict = "parabolic-evidence"
    elif limit >= 10 * tol and not abs(limit) <= PARABOLIC_LIMIT:
        verdict = "hyperbolic-evidence"
    else:
        verdict = "inconclusive"
    return ParabolicityReport(spec, omega, np.array(res), np.array(its), float(slope),
                              float(intercept), limit, verdict, tol)
