"""Batched adaptive Simpson quadrature and periodic trapezoid rule.

Many short paths (grid edges) are integrated at once: each path owns a
set of panels on s in [0, 1], and every refinement pass evaluates the
integrand for all unfinished panels in one vectorized call.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class QuadratureError(ArithmeticError):
    pass


@dataclass
class QuadResult:
    values: np.ndarray  # (n_paths, k) complex
    errors: np.ndarray  # (n_paths,) estimated absolute error
    evaluations: int
    max_depth: int


def adaptive_simpson(integrand, n_paths: int, n_out: int, tol: float = 1e-10,
                     max_depth: int = 24, initial_panels=None) -> QuadResult:
    """Integrate integrand(idx, s) -> (len(s), n_out) over s in [0, 1] per path.

    tol is an absolute tolerance per path, split evenly over the initial
    panels and halved at each bisection. A panel is accepted when the
    Simpson halving difference is below 15 * tol (the classical bound)
    and its Richardson-corrected value is used.
    """
    if initial_panels is None:
        initial_panels = np.ones(n_paths, dtype=int)
    initial_panels = np.maximum(np.asarray(initial_panels, dtype=int), 1)
    idx = np.repeat(np.arange(n_paths), initial_panels)
    offs = np.concatenate([np.arange(k) for k in initial_panels]) if n_paths else np.zeros(0)
    widths = 1.0 / initial_panels[idx]
    a = offs * widths
    b = a + widths
    ptol = tol / initial_panels[idx]
    depth = np.zeros(idx.shape, dtype=int)

    values = np.zeros((n_paths, n_out), dtype=complex)
    errors = np.zeros(n_paths)
    evals = 0
    deepest = 0

    while idx.size:
        m = 0.5 * (a + b)
        s = np.concatenate([a, 0.5 * (a + m), m, 0.5 * (m + b), b])
        ids = np.tile(idx, 5)
        f = integrand(ids, s)
        evals += s.size
        if not np.all(np.isfinite(f)):
            bad = np.unique(ids[~np.all(np.isfinite(f), axis=1)])
            raise QuadratureError(f"non-finite integrand on paths {bad[:10].tolist()}")
        fa, fl, fm, fr, fb = np.split(f, 5)
        h = (b - a)[:, None]
        whole = h / 6.0 * (fa + 4.0 * fm + fb)
        halves = h / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb)
        diff = halves - whole
        err = np.max(np.abs(diff), axis=1) / 15.0
        done = (err <= ptol) | (depth >= max_depth)
        if np.any(done & (err > ptol)):
            deepest = max_depth
        np.add.at(values, idx[done], halves[done] + diff[done] / 15.0)
        np.add.at(errors, idx[done], err[done])
        keep = ~done
        if keep.any():
            deepest = max(deepest, int(depth[keep].max()) + 1)
        idx, a, m, b = idx[keep], a[keep], m[keep], b[keep]
        ptol, depth = ptol[keep] / 2.0, depth[keep] + 1
        idx = np.concatenate([idx, idx])
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        ptol = np.concatenate([ptol, ptol])
        depth = np.concatenate([depth, depth])
    return QuadResult(values, errors, evals, deepest)


def circle_trapezoid(f, center: complex, radius: float, tol: float = 1e-10,
                     n0: int = 16, n_max: int = 1 << 16) -> tuple[np.ndarray, int]:
    """Contour integrals of f(z) dz around |z - center| = radius.

    f maps an array of points to (len, k) values. The number of nodes is
    doubled until the change drops below tol; for integrands analytic on
    an annulus around the circle the rule converges geometrically.
    Returns (integrals, nodes_used).
    """
    def rule(n):
        t = 2.0 * np.pi * np.arange(n) / n
        w = np.exp(1j * t)
        z = center + radius * w
        vals = np.asarray(f(z))
        if vals.ndim == 1:
            vals = vals[:, None]
        dz = 1j * radius * w
        return (2.0 * np.pi / n) * np.sum(vals * dz[:, None], axis=0)

    n = n0
    prev = rule(n)
    while n < n_max:
        n *= 2
        cur = rule(n)
        if np.max(np.abs(cur - prev)) < tol:
            return cur, n
        prev = cur
    raise QuadratureError(f"circle rule did not converge with {n} nodes")
