"""Run every check on the Lorentzian catenoid and print a short summary."""
import argparse
import time

from maxsurf.catalog import get_catalog_surface
from maxsurf.graphs import graph_from_mesh, starlike_report
from maxsurf.parabolicity import harmonic_measure_sequence, superharmonic_convergence
from maxsurf.weierstrass import classify_singularity, integrate_immersion


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, default=1.0)
    args = ap.parse_args()

    entry = get_catalog_surface("lorentzian-catenoid")
    t0 = time.perf_counter()
    mesh = integrate_immersion(entry.data)
    print(f"mesh: {mesh.grid.size} vertices, max quadrature bound {mesh.error_bound.max():.1e}")

    for center in (None, 1.0):
        rep = starlike_report(graph_from_mesh(mesh, center), args.delta)
        print(f"starlike (centre {center}): {'PASS' if rep.passed else 'FAIL'}, "
              f"eps = {rep.epsilon:.7f}")
    closed = starlike_report(entry.graph, args.delta)
    print(f"starlike (closed form): eps = {closed.epsilon:.7f}")

    c = entry.chart
    sup = superharmonic_convergence(entry.data, c.center, c.half_width, c.h, 3, c.mask)
    print(f"superharmonic: orders {[round(p, 4) for p in sup.orders]}, "
          f"max closed {sup.max_closed:.3e}")

    par = harmonic_measure_sequence(entry.exhaustion)
    for r, w in zip(entry.exhaustion.radii, par.omega):
        print(f"  outer radius {r:g}: omega = {w:.6f}")
    print(f"parabolicity: {par.verdict} (limit {par.limit:.2e})")

    loop = classify_singularity(entry.data, ("loop", 1.0), mesh)
    print(f"loop |z| = 1: {loop}")
    print(f"elapsed {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
