"""Conjugate height of Enneper's surface and the psi = dX3 identity."""
import numpy as np

from maxsurf.catalog import get_catalog_surface
from maxsurf.minimal import (
    bounded_conjugate_criterion,
    harmonic_conjugate,
    minimal_immersion,
    minimal_starlike_pipeline,
    psi_convergence,
)


def main():
    imm = minimal_immersion(get_catalog_surface("enneper").data)
    conj = harmonic_conjugate(imm)
    dev = np.max(np.abs(conj.X3 - (0.5 * imm.mesh.z ** 2).imag))
    print(f"conjugate vs Im(z^2/2): {dev:.1e}")
    for z in (0.1 + 0.2j, -0.3j, 0.25 - 0.1j):
        res, orders = psi_convergence(imm, conj, z)
        print(f"z = {z}: residuals {[f'{r:.2e}' for r in res]}, orders "
              f"{[round(p, 3) for p in orders]}")
    for eps in (0.05, 0.4):
        rep = bounded_conjugate_criterion(imm, conj, eps)
        print(f"bounded conjugate, eps = {eps}: worst slack {rep.worst_slack:.4f}, "
              f"{'PASS' if rep.passed else 'FAIL'}")
    pipe = minimal_starlike_pipeline(imm)
    print(f"pipeline: {'PASS' if pipe.passed else 'FAIL'}, dual mismatch {pipe.dual_mismatch:.1e}")


if __name__ == "__main__":
    main()
