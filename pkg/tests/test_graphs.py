import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import frozen
from maxsurf.catalog import catenoid_graph, get_catalog_surface
from maxsurf.graphs import (
    GraphExtractionError,
    SpacelikeGraph,
    StarlikeRegion,
    clearance,
    cone_region_test,
    graph_from_mesh,
    lightcone_clearance_profile,
    profiles_csv,
    projected_overlaps,
    starlike_report,
)
from maxsurf.lorentz import dist_to_lightcone
from maxsurf.weierstrass import ParamDomain, integrate_immersion, make_weierstrass

plane_graph = SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: 0 * np.asarray(x), "flat")
cone_graph = SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: np.hypot(x, y), "lightlike")


def test_profile_examples():
    p = lightcone_clearance_profile(plane_graph, 0.3, 16)
    assert np.allclose(p.f, p.t / math.sqrt(2), rtol=1e-15)
    half = SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: 0.5 * np.hypot(x, y))
    p = lightcone_clearance_profile(half, 1.0, 16)
    assert np.allclose(p.f, 0.25 * math.sqrt(2) * p.t, rtol=1e-12)
    u = catenoid_graph().u_ray(0.0, np.array([1.0]))
    assert clearance(1.0, u)[0] == pytest.approx(frozen.CATENOID_EPSILON_DELTA1, abs=1e-14)


def test_profile_sampling():
    p = lightcone_clearance_profile(plane_graph, 0.0, 8)
    assert p.t[-1] == pytest.approx(1e3) and p.t[0] > 0
    assert np.allclose(np.diff(np.log(p.t)), np.log(p.t[1] / p.t[0]))
    disc = SpacelikeGraph(StarlikeRegion.disc(2.0), lambda x, y: 0 * np.asarray(x))
    p = lightcone_clearance_profile(disc, 0.0, 4)
    assert np.allclose(p.t, [0.5, 1.0, 1.5, 2.0])
    with pytest.raises(ValueError):
        lightcone_clearance_profile(disc, 0.0, 1)


def test_starlike_examples():
    r = starlike_report(plane_graph, 1.0)
    assert r.passed and abs(r.epsilon - 1 / math.sqrt(2)) < 1e-12
    r = starlike_report(catenoid_graph(), 1.0)
    assert r.passed and abs(r.epsilon - frozen.CATENOID_EPSILON_DELTA1) < 1e-12
    r = starlike_report(cone_graph, 1.0)
    assert not r.passed and not r.ext_cone


def test_delta_out_of_range():
    disc = SpacelikeGraph(StarlikeRegion.disc(0.5), lambda x, y: 0 * np.asarray(x))
    with pytest.raises(ValueError):
        starlike_report(disc, 1.0)
    with pytest.raises(ValueError):
        starlike_report(plane_graph, 1.0, rays=4)


def test_boundary_touch_is_flagged():
    # u = |z| on the boundary only: a bounded graph whose rim is lightlike
    g = SpacelikeGraph(StarlikeRegion.disc(1.0), lambda x, y: np.hypot(x, y) ** 4)
    r = starlike_report(g, 0.5, rays=8, samples=8)
    assert r.ext_cone and r.flagged_boundary


def test_non_monotone_fails():
    # a slope below one keeps f increasing, so only a timelike stretch can break it
    gentle = SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: 0.9 * np.sin(np.hypot(x, y)))
    assert starlike_report(gentle, 0.5).monotone
    steep = SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: 1.5 * np.sin(np.hypot(x, y)))
    r = starlike_report(steep, 0.5)
    assert not r.monotone and not r.passed


def test_csv_columns():
    r = starlike_report(catenoid_graph(), 1.0, rays=8, samples=4)
    lines = profiles_csv(r.profiles).splitlines()
    assert lines[0] == "theta,t,u,f,n" and len(lines) == 1 + 8 * 4


slopes = st.floats(-0.95, 0.95)


@settings(max_examples=40, deadline=None)
@given(slopes, slopes, st.floats(0, 2 * math.pi))
def test_clearance_equals_cone_distance(a, b, theta):
    g = SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: a * x + b * np.tanh(y))
    p = lightcone_clearance_profile(g, theta, 16)
    pts = np.column_stack([p.t * math.cos(theta), p.t * math.sin(theta), p.u])
    assert np.allclose(p.f, dist_to_lightcone(pts), atol=1e-12 * (1 + p.t.max()))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.2, 5))
def test_scaling_and_reflection(a, c):
    g = SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: -a * np.arcsinh(np.hypot(x, y)))
    p = lightcone_clearance_profile(g, 0.7, 16)
    ps = lightcone_clearance_profile(g.scaled(c), 0.7, 16)
    # the scaled graph is sampled on the same t grid; compare at matching points
    q = g.u_ray(0.7, ps.t / c) * c
    assert np.allclose(ps.u, q, rtol=1e-12, atol=1e-12)
    r1 = starlike_report(g, 1.0, rays=8, samples=16)
    r2 = starlike_report(g.reflected(), 1.0, rays=8, samples=16)
    assert r1.passed == r2.passed and r1.epsilon == pytest.approx(r2.epsilon, rel=1e-14)
    assert np.all(np.diff(p.n) >= -1e-9 * (1 + np.abs(p.n[1:])))


def test_cone_examples():
    r = cone_region_test([(3, 4, 2), (0, 0, 1), (1, 0, 0)], math.pi / 8)
    assert r.inside.tolist() == [True, False, True]
    assert r.margin[0] == pytest.approx(5 * math.tan(math.pi / 8) - 2)
    assert r.margin[2] == pytest.approx(math.tan(math.pi / 8))
    with pytest.raises(ValueError):
        cone_region_test([(1, 0, 0)], math.pi / 3)


def test_catenoid_mesh_graph():
    m = integrate_immersion(get_catalog_surface("lorentzian-catenoid").data)
    assert projected_overlaps(m)[0] == []
    r = starlike_report(graph_from_mesh(m, 1.0), 1.0, rays=16, samples=16)
    assert r.passed and abs(r.epsilon - frozen.CATENOID_EPSILON_DELTA1) < 1e-6
    # heights reproduce u = -arcsinh(r) about the vertex
    g = graph_from_mesh(m, 1.0)
    x = np.array([0.5, 2.0, 5.0])
    assert np.allclose(g.u(x, 0 * x), -np.arcsinh(x), atol=1e-8)


def test_folded_projection_rejected():
    # z + z^2 style fold: the projection of g = 0.9 z^3 on a wide annulus winds
    d = make_weierstrass(ParamDomain.annulus(0.2, 0.95), "0.9*z^3", "1/z^2", 0.5)
    m = integrate_immersion(d)
    bad, _ = projected_overlaps(m)
    if bad:
        with pytest.raises(GraphExtractionError):
            graph_from_mesh(m)
