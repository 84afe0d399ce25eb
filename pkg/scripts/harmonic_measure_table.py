"""Harmonic measure against its closed form for growing annuli and for the disc."""
import argparse
import math

from maxsurf.parabolicity import ExhaustionSpec, harmonic_measure_sequence


def table(title, spec, exact, grid):
    rep = harmonic_measure_sequence(spec, grid, grid)
    print(title)
    print(f"{'radius':>10} {'omega':>12} {'exact':>12} {'error':>9} {'CG its':>7}")
    for r, w, it in zip(spec.radii, rep.omega, rep.iterations):
        e = exact(r)
        print(f"{r:>10.4g} {w:>12.8f} {e:>12.8f} {abs(w - e):>9.1e} {it:>7d}")
    print(f"limit {rep.limit:.6f}, verdict {rep.verdict}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=256)
    args = ap.parse_args()
    table("plane, 1 < |z| < R, probe 2",
          ExhaustionSpec(1.0, (10, 100, 1000, 1e4), 2.0),
          lambda R: math.log(2) / math.log(R), args.grid)
    table("unit disc, 0.1 < |z| < R, probe 0.5",
          ExhaustionSpec(0.1, tuple(1 - 1 / k for k in (3, 5, 10, 20, 100)), 0.5, 1.0),
          lambda R: math.log(5) / math.log(10 * R), args.grid)


if __name__ == "__main__":
    main()
