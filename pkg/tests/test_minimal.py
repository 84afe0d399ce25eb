import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import frozen
from maxsurf.catalog import enneper_reference, get_catalog_surface
from maxsurf.minimal import (
    NotExact,
    PreconditionError,
    bounded_conjugate_arrays,
    bounded_conjugate_criterion,
    harmonic_conjugate,
    minimal_immersion,
    minimal_starlike_pipeline,
    psi_check,
    psi_convergence,
)
from maxsurf.weierstrass import DegeneratePhi, ParamDomain, integrate_immersion, make_weierstrass

enneper = get_catalog_surface("enneper").data


_IMM = minimal_immersion(enneper)
_ENN = (_IMM, harmonic_conjugate(_IMM))


@pytest.fixture
def enn():
    return _ENN


def test_enneper_mesh_and_normals(enn):
    imm, _ = enn
    assert np.max(np.abs(imm.Y - enneper_reference(imm.mesh.z))) < 1e-11
    assert imm.normals_agree


def test_conjugate_matches_closed_form(enn):
    imm, conj = enn
    assert np.allclose(conj.X3, (0.5 * imm.mesh.z ** 2).imag, atol=1e-11)
    k = imm.mesh.nearest_vertex(0.25 + 0.25j)
    w = imm.mesh.z[k]
    # Im(z^2/2) at (1+i)/2 equals 1/4
    assert (0.5 * ((1 + 1j) / 2) ** 2).imag == frozen.ENNEPER_X3
    assert conj.X3[k] == pytest.approx((0.5 * w ** 2).imag, abs=1e-11)


def test_psi_second_order(enn):
    imm, conj = enn
    res, orders = psi_convergence(imm, conj, 0.1 + 0.2j)
    assert all(abs(p - 2) < 0.2 for p in orders)
    assert psi_check(imm, conj, 0.1 + 0.2j).normal_mismatch < 1e-5


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 0.4), st.floats(0, 2 * math.pi))
def test_psi_random_nodes(r, t):
    imm, conj = _ENN
    assert psi_check(imm, conj, r * complex(math.cos(t), math.sin(t))).residual < 1e-5


def test_psi_stencil_outside(enn):
    imm, conj = enn
    with pytest.raises(PreconditionError):
        psi_check(imm, conj, 0.499, h=0.01)


def test_minimal_catenoid_not_exact():
    imm = minimal_immersion(get_catalog_surface("minimal-catenoid").data)
    with pytest.raises(NotExact) as err:
        harmonic_conjugate(imm)
    assert abs(err.value.period) == pytest.approx(2 * math.pi, rel=1e-9)


def test_maximal_data_rejected():
    with pytest.raises(PreconditionError):
        minimal_immersion(get_catalog_surface("plane").data)


def test_bounded_conjugate_arrays_plane():
    # horizontal unit disc, X3 = 0: the slack at the centre is eps - 0
    Y = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 1.0, 0.0]])
    C, slack, norm, bound = bounded_conjugate_arrays(Y, np.zeros(3), 0.5)
    assert C == 0.0 and slack.max() == pytest.approx(0.5)
    with pytest.raises(ValueError):
        bounded_conjugate_arrays(Y, np.zeros(3), 0.0)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)),
                min_size=1, max_size=30), st.floats(0.01, 2), st.floats(-3, 3))
def test_constant_is_optimal(rows, eps, shift):
    a = np.array(rows)
    C, slack, _, _ = bounded_conjugate_arrays(a, a[:, 2], eps)
    r = np.hypot(a[:, 0], a[:, 1]) - eps
    other = np.max(np.abs(a[:, 2] + C + shift) - r)
    assert slack.max() <= other + 1e-12


@settings(max_examples=50)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)),
                min_size=1, max_size=30), st.floats(0.01, 2))
def test_norm_bound_when_feasible(rows, eps):
    a = np.array(rows)
    C, slack, norm, bound = bounded_conjugate_arrays(a, a[:, 2], eps)
    if slack.max() <= 0:
        assert np.all(norm >= bound - 1e-9 * np.maximum(1, np.abs(bound)))


def test_enneper_criterion_fails_small_disc(enn):
    imm, conj = enn
    rep = bounded_conjugate_criterion(imm, conj, 0.4)
    assert not rep.passed and rep.violations and rep.dual is None
    assert rep.to_dict()["check"] == "conjugate"


def test_criterion_passes_on_wide_graph():
    # a horizontal plane far from the origin: |pi0 Y| >= 3 everywhere
    with pytest.raises(DegeneratePhi):
        make_weierstrass(ParamDomain.disc(1.0), "0.01", "0", 0j, (4.0, 0.0, 0.0), "minimal")
    d = make_weierstrass(ParamDomain.disc(1.0), "0.01", "1", 0j, (4.0, 0.0, 0.0), "minimal")
    imm = minimal_immersion(d)
    rep = bounded_conjugate_criterion(imm, harmonic_conjugate(imm), 0.5)
    assert rep.passed and rep.dual is not None and rep.dual.kind == "maximal"
    mesh = integrate_immersion(rep.dual)
    x3 = harmonic_conjugate(imm).X3 + rep.constant
    assert np.allclose(mesh.positions[:, 2], x3, atol=1e-10)


def test_pipeline_enneper_disc():
    d = make_weierstrass(ParamDomain.disc(0.3), "z", "z", 0j, (0.0, 0.0, 0.0), "minimal")
    rep = minimal_starlike_pipeline(minimal_immersion(d))
    assert rep.dual_mismatch < 1e-10
    assert rep.passed
    assert rep.to_dict()["check"] == "minimal-pipeline"


def test_pipeline_needs_simply_connected():
    imm = minimal_immersion(get_catalog_surface("minimal-catenoid").data)
    with pytest.raises(PreconditionError):
        minimal_starlike_pipeline(imm)
