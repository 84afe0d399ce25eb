"""Maximal surfaces in Lorentz-Minkowski space: Weierstrass meshes, starlike
graphs, superharmonicity of log ||X||^2 and harmonic-measure exhaustions."""

from .catalog import get_catalog_surface
from .lorentz import INFINITY, CausalClass, LVec3, causal_character, minkowski_inner, stereographic
from .weierstrass import (
    ParamDomain,
    WeierstrassData,
    classify_singularity,
    dualize,
    frame_at,
    integrate_immersion,
    make_weierstrass,
)

__all__ = [
    "INFINITY", "CausalClass", "LVec3", "ParamDomain", "WeierstrassData", "causal_character",
    "classify_singularity", "dualize", "frame_at", "get_catalog_surface", "integrate_immersion",
    "make_weierstrass", "minkowski_inner", "stereographic",
]
