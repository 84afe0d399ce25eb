"""Built-in surfaces with closed-form references and expected outcomes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graphs import SpacelikeGraph, StarlikeRegion
from .parabolicity import ExhaustionSpec
from .weierstrass import BranchPoint, LightlikeLoop, ParamDomain, WeierstrassData, make_weierstrass


class UnknownSurface(KeyError):
    def __str__(self):
        return str(self.args[0])


@dataclass(frozen=True)
class ChartHint:
    center: complex
    half_width: float
    h: float
    mask: float = 2.0


@dataclass
class CatalogEntry:
    name: str
    kind: str
    data: WeierstrassData
    reference: Callable | None = None  # z -> (n, 3) closed-form immersion
    expected_sites: list = field(default_factory=list)  # [(site, verdict type, attrs)]
    expected: dict = field(default_factory=dict)  # pipeline outcomes
    chart: ChartHint | None = None
    exhaustion: ExhaustionSpec | None = None
    graph: SpacelikeGraph | None = None
    description: str = ""


# closed forms --------------------------------------------------------------

def _plane_reference(data: WeierstrassData):
    from .weierstrass import phi_values

    phi = phi_values(data, [0j])[0]
    bv = np.asarray(data.base_value, dtype=float)

    def ref(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return bv + ((z - data.basepoint)[:, None] * phi[None, :]).real
    return ref


def lorentzian_catenoid_reference(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    rho, th = np.abs(z), np.angle(z)
    a = 0.5 * (rho - 1.0 / rho)
    return np.stack([a * np.sin(th), -a * np.cos(th), np.log(rho)], axis=-1)


def enneper_reference(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.stack([(0.5 * (z - z ** 3 / 3)).real, (0.5j * (z + z ** 3 / 3)).real,
                     (0.5 * z ** 2).real], axis=-1)


def minimal_catenoid_reference(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.stack([(-0.5 * (1 / z + z)).real, (0.5j * (z - 1 / z)).real, np.log(np.abs(z))],
                    axis=-1)


def catenoid_graph() -> SpacelikeGraph:
    """u = -arcsinh(|x|) over the whole plane."""
    return SpacelikeGraph(StarlikeRegion.plane(), lambda x, y: -np.arcsinh(np.hypot(x, y)),
                          "lorentzian catenoid")


# entries -------------------------------------------------------------------

def _plane() -> CatalogEntry:
    data = make_weierstrass(ParamDomain.plane(4.0), "0.2", "1", 0j, (0.0, 0.0, 0.0))
    return CatalogEntry(
        "plane", "maximal", data, _plane_reference(data),
        expected={"coplanar": True, "starlike": True, "superharmonic": True},
        chart=ChartHint(2.0, 0.5, 0.0625, 2.0),
        exhaustion=ExhaustionSpec(1.0, (10.0, 100.0, 1000.0, 1e4), 2.0, math.inf),
        description="constant Gauss map: a spacelike plane")


def _lorentzian_catenoid() -> CatalogEntry:
    dom = ParamDomain.annulus(0.05, 1.0, outer_closed=True, n_radial=48, n_angular=96)
    base = tuple(lorentzian_catenoid_reference(0.5)[0])
    data = make_weierstrass(dom, "z", "1/z", 0.5, base)
    return CatalogEntry(
        "lorentzian-catenoid", "maximal", data, lorentzian_catenoid_reference,
        expected_sites=[(("loop", 1.0), LightlikeLoop, {"collapsed": True, "conelike": True})],
        expected={"starlike": True, "superharmonic": True, "parabolicity": "parabolic-evidence"},
        chart=ChartHint(0.1, 0.03, 0.0075, 2.0),
        # the loop |z| = 1 collapses to the cone point; the end sits at z = 0
        exhaustion=ExhaustionSpec(1.0, (0.1, 0.01, 0.001, 1e-4), 0.5, 0.0),
        graph=catenoid_graph(),
        description="entire graph with a conelike singularity at the unit circle")


def _enneper() -> CatalogEntry:
    data = make_weierstrass(ParamDomain.disc(0.5), "z", "z", 0j, (0.0, 0.0, 0.0), "minimal")
    return CatalogEntry(
        "enneper", "minimal", data, enneper_reference,
        expected={"exact": True, "pipeline": True},
        description="simply connected minimal graph piece")


def _minimal_catenoid() -> CatalogEntry:
    dom = ParamDomain.annulus(0.1, 0.9)
    base = tuple(minimal_catenoid_reference(0.5)[0])
    data = make_weierstrass(dom, "z", "1/z", 0.5, base, "minimal")
    return CatalogEntry(
        "minimal-catenoid", "minimal", data, minimal_catenoid_reference,
        expected={"exact": False, "im_period": 2 * math.pi},
        description="conjugate of the height has period 2 pi")


_BUILDERS = {
    "plane": _plane,
    "lorentzian-catenoid": _lorentzian_catenoid,
    "enneper": _enneper,
    "minimal-catenoid": _minimal_catenoid,
}


def names() -> list[str]:
    return list(_BUILDERS)


def get_catalog_surface(name: str) -> CatalogEntry:
    try:
        build = _BUILDERS[name]
    except KeyError:
        raise UnknownSurface(f"unknown catalog surface {name!r}; known: {', '.join(_BUILDERS)}")
    return build()


def synthetic_branch_point() -> WeierstrassData:
    """g = z/2, f = z: |g(0)| < 1 and phi3(0) = 0."""
    return make_weierstrass(ParamDomain.disc(0.9), "z/2", "z", 0.5 + 0j)


__all__ = ["BranchPoint", "CatalogEntry", "ChartHint", "UnknownSurface", "catenoid_graph",
           "get_catalog_surface", "names", "synthetic_branch_point"]
