import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import frozen
from maxsurf.catalog import get_catalog_surface, lorentzian_catenoid_reference
from maxsurf.expr import PoleError
from maxsurf.lorentz import minkowski_inner
from maxsurf.weierstrass import (
    BranchPoint,
    DegenerateFrame,
    LightlikeLoop,
    NonExactRealPart,
    ParamDomain,
    Regular,
    SpacelikeViolation,
    classify_singularity,
    cycle_periods,
    dualize,
    frame_arrays,
    frame_at,
    integrate_immersion,
    make_weierstrass,
    phi_values,
)


@pytest.fixture(scope="module")
def catenoid():
    return make_weierstrass(ParamDomain.annulus(0.05, 1.0, outer_closed=True), "z", "1/z", 0.5,
                            frozen.CATENOID_X_HALF)


@pytest.fixture(scope="module")
def catenoid_mesh(catenoid):
    return integrate_immersion(catenoid)


def test_domain_invariants():
    with pytest.raises(ValueError):
        ParamDomain.annulus(1.0, 0.5)
    with pytest.raises(ValueError):
        ParamDomain.disc(-1)
    with pytest.raises(ValueError):
        ParamDomain.disc(1, n_radial=4)
    d = ParamDomain.annulus(0.1, 1.0)
    assert ParamDomain.from_dict(d.to_dict()) == d


def test_make_examples():
    make_weierstrass(ParamDomain.plane(), "0.2", "1")
    make_weierstrass(ParamDomain.annulus(0.1, 1.0), "z", "1/z", 0.5)
    with pytest.raises(SpacelikeViolation):
        make_weierstrass(ParamDomain.disc(2), "z", "1")


def test_basepoint_must_be_interior():
    with pytest.raises(ValueError):
        make_weierstrass(ParamDomain.disc(1), "0.2", "1", 2.0)


def test_phi_examples():
    d = make_weierstrass(ParamDomain.annulus(0.1, 0.9), "z", "1", 0.5)
    assert phi_values(d, [2.0])[0, 0] == pytest.approx(-0.75j)
    rng = np.random.default_rng(0)
    z = rng.uniform(-0.9, 0.9, 100) + 1j * rng.uniform(-0.9, 0.9, 100)
    p = phi_values(d, z)
    null = p[:, 0] ** 2 + p[:, 1] ** 2 - p[:, 2] ** 2
    assert np.max(np.abs(null) / np.max(np.abs(p) ** 2, axis=1)) < 1e-12
    c = make_weierstrass(ParamDomain.plane(), "0.2", "1")
    pc = phi_values(c, z)
    assert np.ptp(pc, axis=0).max() == 0


def test_periods(catenoid):
    per = cycle_periods(catenoid, 0.5)
    assert np.allclose(per.values, [0, 0, 2j * math.pi], atol=1e-10)
    plane = make_weierstrass(ParamDomain.plane(), "0.2", "1")
    assert np.allclose(cycle_periods(plane, 1.0).values, 0, atol=1e-12)
    # g = 0.5, f = 1/z: phi2 = -1.25/z has period -2.5 pi i, but
    # phi1 = 0.75 i/z has the real period -1.5 pi
    const = make_weierstrass(ParamDomain.annulus(0.1, 1.0), "0.5", "1/z", 0.5)
    per = cycle_periods(const, 0.5, check=False)
    assert per.values[1] == pytest.approx(-2.5j * math.pi, abs=1e-10)
    assert per.values[0] == pytest.approx(-1.5 * math.pi, abs=1e-10)
    with pytest.raises(NonExactRealPart):
        cycle_periods(const, 0.5)


def test_real_period_rejected():
    # f = i/z gives phi3 a real period 2 pi i * i = -2 pi
    d = make_weierstrass(ParamDomain.annulus(0.1, 0.9), "0.5", "i/z", 0.5)
    with pytest.raises(NonExactRealPart) as info:
        integrate_immersion(d)
    assert abs(info.value.periods.real[2] + 2 * math.pi) < 1e-8


def test_catenoid_against_closed_form(catenoid_mesh):
    m = catenoid_mesh
    ref = lorentzian_catenoid_reference(m.z)
    assert np.max(np.abs(m.positions - ref)) < 1e-9
    assert m.path_discrepancy < 1e-8
    assert np.allclose(m.position_at(0.5)[0], frozen.CATENOID_X_HALF, atol=1e-12)


def test_base_value_at_basepoint(catenoid):
    m = integrate_immersion(catenoid)
    assert np.array_equal(m.position_at(0.5)[0], np.asarray(catenoid.base_value))


def test_position_at_off_grid(catenoid_mesh):
    z = np.array([0.3 + 0.2j, -0.6j])
    assert np.allclose(catenoid_mesh.position_at(z), lorentzian_catenoid_reference(z), atol=1e-10)


def test_mesh_normals_on_lower_sheet(catenoid_mesh):
    m = catenoid_mesh
    n = m.normals[m.interior]
    assert np.allclose(minkowski_inner(n, n), -1, atol=1e-9)
    assert np.all(n[:, 2] <= -1)
    assert np.all(m.lambda_sq[m.interior] > 0)


def test_calabi_plane_is_coplanar():
    m = integrate_immersion(get_catalog_surface("plane").data)
    p = m.positions - m.positions.mean(axis=0)
    s = np.linalg.svd(p, compute_uv=False)
    assert s[2] / s[0] < 1e-10


def test_frame_examples(catenoid):
    fr = frame_at(catenoid, 0.5)
    assert fr.lambda_sq == pytest.approx(frozen.CATENOID_LAMBDA_SQ_HALF, abs=1e-12)
    assert np.allclose(np.asarray(fr.N0), frozen.CATENOID_N0_HALF, atol=1e-14)


def test_degenerate_frame():
    # Phi vanishes at 0 for constant g and f = z
    d = make_weierstrass(ParamDomain.annulus(0.1, 0.9), "0.5", "z", 0.5)
    with pytest.raises(DegenerateFrame):
        frame_at(d, 0)


def test_metric_identity_factor(catenoid):
    # |phi1|^2 + |phi2|^2 - |phi3|^2 is twice the conformal factor <X_u, X_u>
    rng = np.random.default_rng(1)
    z = 0.3 * np.exp(2j * np.pi * rng.random(100)) * (0.3 + 2 * rng.random(100))
    p = phi_values(catenoid, z)
    lam, _, xu, _ = frame_arrays(catenoid, z)
    lhs = np.abs(p[:, 0]) ** 2 + np.abs(p[:, 1]) ** 2 - np.abs(p[:, 2]) ** 2
    assert np.allclose(lhs, 2 * lam, rtol=1e-12)
    assert np.allclose(minkowski_inner(xu, xu), lam, rtol=1e-12)


# g = c + z/4 with 0.3 <= |c| <= 0.5 keeps |g| < 1 and g zero-free on the unit disc
gdata = st.tuples(st.floats(0.3, 0.5), st.floats(0, 2 * math.pi), st.floats(0.2, 3))


@settings(max_examples=40, deadline=None)
@given(gdata, st.lists(st.complex_numbers(max_magnitude=0.9, allow_nan=False), min_size=5,
                       max_size=20))
def test_frame_contracts(params, zs):
    r, t, s = params
    a, b = r * math.cos(t), r * math.sin(t)
    d = make_weierstrass(ParamDomain.disc(1.0, n_radial=8, n_angular=16),
                         f"{a}+{b}*i + z/4", f"{s}*exp(z)", 0j)
    z = np.array(zs, dtype=complex)
    lam, n0, xu, xv = frame_arrays(d, z)
    assert np.all(np.abs(minkowski_inner(xu, xv)) < 1e-10 * lam)
    assert np.allclose(minkowski_inner(xu, xu), lam, rtol=1e-10)
    assert np.allclose(minkowski_inner(xv, xv), lam, rtol=1e-10)
    scale = np.sqrt(lam) * np.linalg.norm(n0, axis=1)
    assert np.all(np.abs(minkowski_inner(xu, n0)) < 1e-10 * scale)
    assert np.all(np.abs(minkowski_inner(xv, n0)) < 1e-10 * scale)
    assert np.allclose(minkowski_inner(n0, n0), -1, atol=1e-9)


def test_dualize():
    d = make_weierstrass(ParamDomain.annulus(0.1, 1.0), "z", "1/z", 0.5)
    m = dualize(d)
    assert m.kind == "minimal" and m.g is d.g
    assert m.f(2.0) == pytest.approx(0.5j)
    dd = dualize(dualize(d))
    assert dd.kind == "maximal"
    z = np.array([0.3, 0.5j, -0.7])
    assert np.allclose(dd.f(z), -d.f(z))
    assert np.allclose(dualize(dd).f(z), dualize(d).f(z) * -1)
    d4 = dualize(dualize(dd))
    assert np.allclose(d4.f(z), d.f(z)) and d4.kind == d.kind
    assert np.allclose(phi_values(m, z)[:, :2], phi_values(d, z)[:, :2])


def test_double_dual_negates_surface():
    d = get_catalog_surface("lorentzian-catenoid").data
    from dataclasses import replace
    dd = replace(dualize(dualize(d)), base_value=d.base_value * -1)
    a, b = integrate_immersion(d), integrate_immersion(dd)
    assert np.allclose(a.positions, -b.positions, atol=1e-9)


def test_classify_examples(catenoid_mesh, catenoid):
    v = classify_singularity(catenoid, ("loop", 1.0), catenoid_mesh)
    assert isinstance(v, LightlikeLoop) and v.collapsed and v.conelike and v.covering_degree == 1
    bp = make_weierstrass(ParamDomain.disc(0.9), "z/2", "z", 0.5)
    assert classify_singularity(bp, ("point", 0)) == BranchPoint(0j)
    plane = make_weierstrass(ParamDomain.disc(1.0), "0.2", "1")
    assert isinstance(classify_singularity(plane, ("loop", 1.0)), Regular)


def test_classify_pole_site():
    d = make_weierstrass(ParamDomain.annulus(0.1, 1.0), "z", "1/z", 0.5)
    with pytest.raises(PoleError):
        classify_singularity(d, ("point", 0))
