"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line; conftest collects them into a summary
section at the end of the run.
"""
import json
import math
import os
import subprocess
import sys
import time

import numpy as np

from maxsurf.catalog import get_catalog_surface, names, synthetic_branch_point
from maxsurf.graphs import SpacelikeGraph, StarlikeRegion, starlike_report
from maxsurf.lorentz import INFINITY, minkowski_inner, stereographic, stereographic_array
from maxsurf.minimal import NotExact, harmonic_conjugate, minimal_immersion, psi_convergence
from maxsurf.parabolicity import (
    ExhaustionSpec,
    chart_grid,
    harmonic_measure_sequence,
    superharmonic_convergence,
    tangent_decomposition_check,
)
from maxsurf.weierstrass import (
    BranchPoint,
    LightlikeLoop,
    ParamDomain,
    classify_singularity,
    dualize,
    eval_fn,
    frame_arrays,
    integrate_immersion,
    make_weierstrass,
    phi_values,
)

RNG_SEED = 20240501


def verdict(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def sample_domain(domain, count, rng):
    """Uniform-in-area points of the open domain."""
    R = domain.outer_radius if math.isfinite(domain.outer_radius) else 4.0
    out = []
    while len(out) < count:
        w = rng.uniform(-R, R, 4 * count) + 1j * rng.uniform(-R, R, 4 * count)
        out.extend(x for x in w if domain.contains(x) and abs(x) < R * (1 - 1e-6))
    return np.array(out[:count])


def test_criterion_1_weierstrass_identities():
    rng = np.random.default_rng(RNG_SEED)
    t0 = time.perf_counter()
    worst_null, worst_metric = 0.0, 0.0
    surfaces = names()
    per = 10_000 // len(surfaces)
    for name in surfaces:
        data = get_catalog_surface(name).data
        z = sample_domain(data.domain, per, rng)
        phi = phi_values(data, z)
        lam, _, _, _ = frame_arrays(data, z)
        sign = -1.0 if data.kind == "maximal" else 1.0
        scale = np.sum(np.abs(phi) ** 2, axis=1)
        null = phi[:, 0] ** 2 + phi[:, 1] ** 2 + sign * phi[:, 2] ** 2
        metric = np.abs(phi[:, 0]) ** 2 + np.abs(phi[:, 1]) ** 2 + sign * np.abs(phi[:, 2]) ** 2
        worst_null = max(worst_null, float(np.max(np.abs(null) / scale)))
        worst_metric = max(worst_metric, float(np.max(np.abs(metric - lam) / lam)))
    elapsed = time.perf_counter() - t0
    ok = verdict(1, worst_null < 1e-10 and worst_metric < 1e-10 and elapsed < 5,
                 f"null {worst_null:.2e}, metric {worst_metric:.2e}, {elapsed:.2f}s")
    # The squared-modulus sum is twice the conformal factor of the induced
    # metric; the stated identity without that factor cannot hold.
    assert ok, f"null residual {worst_null:.3e}, metric residual {worst_metric:.3e}"


def test_criterion_2_stereographic():
    rng = np.random.default_rng(RNG_SEED + 2)
    z = rng.uniform(-3, 3, 30_000) + 1j * rng.uniform(-3, 3, 30_000)
    z = z[np.abs(np.abs(z) - 1) > 0.05][:10_000]
    assert z.size == 10_000
    s = stereographic_array(z)
    err = float(np.max(np.abs(minkowski_inner(s, s) + 1)))
    inf = stereographic(INFINITY)
    exact = (inf.x1, inf.x2, inf.x3) == (0.0, 0.0, 1.0)
    assert verdict(2, err < 1e-12 and exact, f"max |<s,s>+1| = {err:.1e}")


def test_criterion_3_superharmonicity():
    data = get_catalog_surface("lorentzian-catenoid").data
    t0 = time.perf_counter()
    far = superharmonic_convergence(data, 0.1, 0.03, 0.0075, 3, 2.0)
    band = superharmonic_convergence(data, 0.5, 0.2, 0.025, 3, 0.01)
    elapsed = time.perf_counter() - t0
    spot = band.value_at(0.5)[1]
    orders = far.orders + band.orders
    ok = (far.sign_ok and band.sign_ok and all(abs(p - 2) <= 0.2 for p in orders)
          and abs(spot + 32.22) <= 0.5 and elapsed < 30)
    assert verdict(3, ok, f"orders {[round(p, 3) for p in orders]}, spot {spot:.4f}, "
                          f"{elapsed:.2f}s")


def test_criterion_4_tangent_decomposition():
    rng = np.random.default_rng(RNG_SEED + 4)
    worst = 0.0
    charts = [
        chart_grid(get_catalog_surface("lorentzian-catenoid").data, 0.5, 0.2, 0.025, 0.01),
        chart_grid(make_weierstrass(ParamDomain.disc(0.9), "0.3+z/3", "1+z^2", 0j,
                                    (1.0, -0.5, 0.25)), 0j, 0.5, 0.03125, 0.0),
    ]
    for g in charts:
        iy, ix = np.nonzero(g.mask)
        pick = rng.choice(iy.size, 100, replace=False)
        for k in pick:
            z = g.center + g.x[ix[k]] + 1j * g.x[iy[k]]
            r = tangent_decomposition_check(g, z)
            worst = max(worst, r.vector, r.scalar)
    assert verdict(4, worst < 1e-8, f"worst relative residual {worst:.1e}")


def test_criterion_5_starlike():
    t0 = time.perf_counter()
    cat = starlike_report(get_catalog_surface("lorentzian-catenoid").graph, 1.0)
    plane = starlike_report(SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: 0 * x), 1.0)
    cone = starlike_report(SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: np.hypot(x, y)),
                           1.0)
    elapsed = time.perf_counter() - t0
    ok = (cat.passed and abs(cat.epsilon - 0.0839) <= 1e-3
          and plane.passed and abs(plane.epsilon - 1 / math.sqrt(2)) <= 1e-12
          and not cone.ext_cone and not cone.passed and elapsed < 5)
    assert verdict(5, ok, f"eps catenoid {cat.epsilon:.7f}, plane {plane.epsilon:.15f}, "
                          f"{elapsed:.2f}s")


def test_criterion_6_harmonic_measure():
    t0 = time.perf_counter()
    plane = harmonic_measure_sequence(ExhaustionSpec(1.0, (10, 100, 1000, 1e4), 2.0), 256, 256)
    expect = [math.log(2) / math.log(R) for R in (10, 100, 1000, 1e4)]
    err = float(np.max(np.abs(plane.omega - expect)))
    disc = harmonic_measure_sequence(
        ExhaustionSpec(0.1, tuple(1 - 1 / k for k in (3, 5, 10, 20, 100)), 0.5, 1.0), 256, 256)
    elapsed = time.perf_counter() - t0
    ok = (err <= 1e-3 and plane.verdict == "parabolic-evidence"
          and disc.verdict == "hyperbolic-evidence" and abs(disc.limit - 0.69897) <= 2e-3
          and elapsed < 120)
    assert verdict(6, ok, f"plane err {err:.1e}, disc limit {disc.limit:.5f}, {elapsed:.1f}s")


def test_criterion_7_calabi_plane():
    worst = 0.0
    for g in ("0.2", "0.5*i", "-0.3+0.4*i", "0.95"):
        data = make_weierstrass(ParamDomain.disc(2.0), g, "1+z+z^2", 0j, (0.5, 1.0, -2.0))
        P = integrate_immersion(data).positions
        P = P - P.mean(axis=0)
        normal = np.linalg.svd(P, full_matrices=False)[2][-1]
        worst = max(worst, float(np.max(np.abs(P @ normal))))
    assert verdict(7, worst < 1e-10, f"max distance to plane {worst:.1e}")


def test_criterion_8_duality():
    rng = np.random.default_rng(RNG_SEED + 8)
    cat = get_catalog_surface("lorentzian-catenoid").data
    twice = dualize(dualize(cat))
    z = sample_domain(cat.domain, 200, rng)
    neg = float(np.max(np.abs(eval_fn(twice.f, z) + eval_fn(cat.f, z))))
    try:
        harmonic_conjugate(minimal_immersion(get_catalog_surface("minimal-catenoid").data))
        period = None
    except NotExact as exc:
        period = exc.period
    imm = minimal_immersion(get_catalog_surface("enneper").data)
    _, orders = psi_convergence(imm, harmonic_conjugate(imm), 0.1 + 0.2j)
    ok = (neg < 1e-14 and twice.kind == cat.kind and period is not None
          and abs(abs(period) - 2 * math.pi) <= 1e-8 and all(abs(p - 2) <= 0.2 for p in orders))
    assert verdict(8, ok, f"period {period}, psi orders {[round(p, 3) for p in orders]}")


def test_criterion_9_classification():
    cat = get_catalog_surface("lorentzian-catenoid").data
    loop = classify_singularity(cat, ("loop", 1.0))
    bp = classify_singularity(synthetic_branch_point(), ("point", 0))
    ok = isinstance(loop, LightlikeLoop) and loop.conelike and bp == BranchPoint(0j)
    assert verdict(9, ok, f"{type(loop).__name__}(conelike={getattr(loop, 'conelike', None)}), "
                          f"{type(bp).__name__}")


def test_criterion_10_cli_pipeline(tmp_path):
    env = dict(os.environ, MAXSURF_OUT_DIR=str(tmp_path))
    proc = subprocess.run([sys.executable, "-m", "maxsurf", "check", "pipeline",
                           "lorentzian-catenoid", "--out", "pipeline.json"],
                          capture_output=True, text=True, env=env, timeout=300)
    d = json.loads(proc.stdout) if proc.stdout else {}
    ok = (proc.returncode == 0 and d.get("starlike", {}).get("status") == "PASS"
          and d.get("superharmonic", {}).get("passed")
          and d.get("parabolicity", {}).get("verdict") == "parabolic-evidence"
          and (tmp_path / "pipeline.json").read_text() == proc.stdout)
    assert verdict(10, bool(ok), f"exit {proc.returncode}"), proc.stderr
