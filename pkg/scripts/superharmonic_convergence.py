"""Finite-difference Laplacian of log<X,X> against the closed form, under grid halving."""
import argparse

from maxsurf.catalog import get_catalog_surface
from maxsurf.parabolicity import superharmonic_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--center", type=complex, default=0.5)
    ap.add_argument("--half-width", type=float, default=0.2)
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--levels", type=int, default=5)
    ap.add_argument("--mask", type=float, default=0.01)
    args = ap.parse_args()
    data = get_catalog_surface("lorentzian-catenoid").data
    rep = superharmonic_convergence(data, args.center, args.half_width, args.h, args.levels,
                                    args.mask)
    h = args.h
    for k, err in enumerate(rep.level_errors):
        order = f"{rep.orders[k - 1]:.4f}" if k else "-"
        print(f"h = {h / 2 ** k:<10.6g} max |fd - closed| = {err:.3e}  order {order}")
    fd, closed = rep.value_at(args.center)
    print(f"at z = {args.center}: fd {fd:.6f}, closed {closed:.6f}")


if __name__ == "__main__":
    main()
