"""maxsurf command line.

    maxsurf mesh SURFACE [--out FILE]
    maxsurf check superharmonic|starlike|cone|parabolicity|conjugate|pipeline SURFACE ...
    maxsurf classify SURFACE --site loop|point WHERE
    maxsurf dualize SURFACE [--inverse]
    maxsurf catalog list

SURFACE is a catalog name or a surface JSON file. Exit status: 0 on
success or PASS, 2 on a failed check, 1 on bad input (one line on stderr).
"""
from __future__ import annotations

import argparse
import dataclasses
import io as _io
import math
import sys
from dataclasses import replace

import numpy as np

from . import catalog
from .expr import ExprError
from .graphs import GraphError, cone_region_test, graph_from_mesh, profiles_csv, starlike_report
from .io import SurfaceFormatError, dump_json, load_surface, output_path, write_obj
from .minimal import (
    NotExact,
    PreconditionError,
    bounded_conjugate_criterion,
    harmonic_conjugate,
    minimal_immersion,
    minimal_starlike_pipeline,
)
from .parabolicity import (
    ExhaustionSpec,
    ParabolicityError,
    harmonic_measure_sequence,
    superharmonic_convergence,
)
from .weierstrass import (
    InconclusiveClassification,
    WeierstrassError,
    classify_singularity,
    dualize,
    integrate_immersion,
)

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2


class InputError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _complex(text: str) -> complex:
    vals = _floats(text)
    if len(vals) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maxsurf", description="Maximal surface toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def surface_args(sp):
        sp.add_argument("surface", help="catalog name or surface JSON file")
        sp.add_argument("--out", help="write the artifact here (relative to $MAXSURF_OUT_DIR)")
        sp.add_argument("--n-radial", type=int)
        sp.add_argument("--n-angular", type=int)

    sp = sub.add_parser("mesh", help="integrate and export an OBJ mesh")
    surface_args(sp)

    chk = sub.add_parser("check", help="run a check and print its JSON report")
    csub = chk.add_subparsers(dest="check", required=True)

    sp = csub.add_parser("superharmonic")
    surface_args(sp)
    sp.add_argument("--center", type=_complex)
    sp.add_argument("--half-width", type=float)
    sp.add_argument("--h", type=float)
    sp.add_argument("--mask", type=float)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = csub.add_parser("starlike")
    surface_args(sp)
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--rays", type=int, default=64)
    sp.add_argument("--samples", type=int, default=64)
    sp.add_argument("--center-param", type=_complex)
    sp.add_argument("--closed-form", action="store_true",
                    help="use the catalog's closed-form graph instead of the mesh")
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = csub.add_parser("cone")
    surface_args(sp)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--core-radius", type=float, default=0.0)

    sp = csub.add_parser("parabolicity")
    surface_args(sp)
    sp.add_argument("--radii", type=_floats)
    sp.add_argument("--inner", type=float)
    sp.add_argument("--probe", type=float)
    sp.add_argument("--limit", type=float)
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = csub.add_parser("conjugate")
    surface_args(sp)
    sp.add_argument("--epsilon", type=float, required=True)

    sp = csub.add_parser("pipeline")
    surface_args(sp)
    sp.add_argument("--delta", type=float)

    sp = sub.add_parser("classify", help="classify a boundary site")
    surface_args(sp)
    sp.add_argument("--site", choices=("loop", "point"), required=True)
    sp.add_argument("where", type=_complex, help="loop radius or point RE,IM")

    sp = sub.add_parser("dualize", help="emit dual Weierstrass data as JSON")
    surface_args(sp)
    sp.add_argument("--inverse", action="store_true")

    sp = sub.add_parser("catalog", help="built-in surfaces")
    sp.add_argument("action", choices=("list",))
    return p


# --------------------------------------------------------------------------

@dataclasses.dataclass
class Loaded:
    name: str
    data: object
    entry: object


def _load(args) -> Loaded:
    name, data, entry = load_surface(args.surface)
    if args.n_radial or args.n_angular:
        dom = data.domain
        dom = replace(dom, n_radial=args.n_radial or dom.n_radial,
                      n_angular=args.n_angular or dom.n_angular)
        data = replace(data, domain=dom)
    return Loaded(name, data, entry)


def _need(s: Loaded, kind: str):
    if s.data.kind != kind:
        raise InputError(f"{s.name} is {s.data.kind}; this command needs {kind} data")


def _emit(args, text: str, out) -> None:
    path = output_path(getattr(args, "out", None))
    if path is not None:
        path.write_text(text)
    out.write(text)


def _report(args, name: str, d: dict, out) -> int:
    d = dict(d)
    d["surface"] = name
    _emit(args, dump_json(d), out)
    ok = d.get("passed", d.get("status") == "PASS")
    return EXIT_OK if ok else EXIT_FAIL


def _chart(s: Loaded, args):
    hint = s.entry.chart if s.entry is not None else None
    if hint is not None:
        center, hw, h, mask = hint.center, hint.half_width, hint.h, hint.mask
    else:
        dom, bp = s.data.domain, complex(s.data.basepoint)
        room = dom.outer_radius - abs(bp) if math.isfinite(dom.outer_radius) else 1.0
        if dom.kind == "annulus":
            room = min(room, abs(bp) - dom.r_in)
        center, hw, mask = bp, 0.25 * room, 2.0
        h = hw / 4
    given = {k: getattr(args, k, None) for k in ("center", "half_width", "h", "mask")}
    return (given["center"] if given["center"] is not None else center,
            given["half_width"] if given["half_width"] is not None else hw,
            given["h"] if given["h"] is not None else h,
            given["mask"] if given["mask"] is not None else mask)


def _superharmonic(s: Loaded, args):
    center, hw, h, mask = _chart(s, args)
    return superharmonic_convergence(s.data, center, hw, h, getattr(args, "levels", 3), mask)


def _graph(s: Loaded, args):
    if getattr(args, "closed_form", False):
        if s.entry is None or s.entry.graph is None:
            raise InputError(f"{s.name} has no closed-form graph")
        return s.entry.graph
    mesh = integrate_immersion(s.data)
    return graph_from_mesh(mesh, getattr(args, "center_param", None))


def _exhaustion(s: Loaded, args) -> ExhaustionSpec:
    hint = s.entry.exhaustion if s.entry is not None else None
    radii = args.radii if getattr(args, "radii", None) else (hint.radii if hint else None)
    if not radii:
        raise InputError("--radii is required for surfaces without an exhaustion hint")
    inner = args.inner if getattr(args, "inner", None) is not None else (
        hint.inner_radius if hint else 1.0)
    probe = args.probe if getattr(args, "probe", None) is not None else (
        hint.probe if hint and hint.radii[0] == radii[0] else math.sqrt(inner * radii[0]))
    if getattr(args, "limit", None) is not None:
        limit = args.limit
    elif hint is not None and tuple(radii) == hint.radii:
        limit = hint.limit_radius
    else:
        limit = math.inf if radii[0] > inner else 0.0
    return ExhaustionSpec(inner, tuple(radii), probe, limit)


def cmd_mesh(args, out) -> int:
    s = _load(args)
    mesh = integrate_immersion(s.data)
    buf = _io.StringIO()
    write_obj(mesh, buf)
    _emit(args, buf.getvalue(), out)
    return EXIT_OK


def cmd_check(args, out) -> int:
    s = _load(args)
    which = args.check
    if which == "superharmonic":
        _need(s, "maximal")
        rep = _superharmonic(s, args)
        if args.format == "csv":
            _emit(args, rep.csv(), out)
            return EXIT_OK if rep.passed else EXIT_FAIL
        return _report(args, s.name, rep.to_dict(), out)
    if which == "starlike":
        _need(s, "maximal")
        rep = starlike_report(_graph(s, args), args.delta, args.rays, args.samples)
        if args.format == "csv":
            _emit(args, profiles_csv(rep.profiles), out)
            return EXIT_OK if rep.passed else EXIT_FAIL
        return _report(args, s.name, rep.to_dict(), out)
    if which == "cone":
        _need(s, "maximal")
        mesh = integrate_immersion(s.data)
        pts = mesh.positions
        rep = cone_region_test(pts, args.alpha)
        horiz = np.hypot(pts[:, 0], pts[:, 1])
        return _report(args, s.name, rep.to_dict(args.core_radius, horiz), out)
    if which == "parabolicity":
        rep = harmonic_measure_sequence(_exhaustion(s, args), args.grid, args.grid)
        if args.format == "csv":
            _emit(args, rep.csv(), out)
            return EXIT_OK if rep.passed else EXIT_FAIL
        return _report(args, s.name, rep.to_dict(), out)
    if which == "conjugate":
        _need(s, "minimal")
        imm = minimal_immersion(s.data)
        try:
            conj = harmonic_conjugate(imm)
        except NotExact as exc:
            d = {"check": "conjugate", "passed": False, "epsilon": args.epsilon,
                 "constant": None, "worst_slack": None, "error": f"NotExact: {exc}",
                 "period": exc.period}
            return _report(args, s.name, d, out)
        rep = bounded_conjugate_criterion(imm, conj, args.epsilon)
        return _report(args, s.name, rep.to_dict(), out)
    if which == "pipeline":
        return _pipeline(s, args, out)
    raise InputError(f"unknown check {which}")


def _pipeline(s: Loaded, args, out) -> int:
    if s.data.kind == "minimal":
        rep = minimal_starlike_pipeline(minimal_immersion(s.data), args.delta)
        d = rep.to_dict()
        d.update(check="pipeline", kind="minimal", parabolicity=None)
        return _report(args, s.name, d, out)
    star = starlike_report(_graph(s, args), args.delta or 1.0)
    sup = _superharmonic(s, args)
    hint = s.entry.exhaustion if s.entry is not None else None
    par = harmonic_measure_sequence(hint) if hint is not None else None
    passed = star.passed and sup.passed and (par is None or par.passed)
    d = {"check": "pipeline", "kind": "maximal", "passed": bool(passed),
         "starlike": star.to_dict(), "superharmonic": sup.to_dict(),
         "parabolicity": par.to_dict() if par is not None else None, "error": None}
    return _report(args, s.name, d, out)


def cmd_classify(args, out) -> int:
    s = _load(args)
    where = args.where
    site = ("loop", abs(where)) if args.site == "loop" else ("point", where)
    try:
        v = classify_singularity(s.data, site)
        details = {k: (str(x) if isinstance(x, complex) else x)
                   for k, x in dataclasses.asdict(v).items()}
        d = {"check": "classify", "site": args.site, "where": [where.real, where.imag],
             "verdict": type(v).__name__, "details": details}
        code = EXIT_OK
    except InconclusiveClassification as exc:
        d = {"check": "classify", "site": args.site, "where": [where.real, where.imag],
             "verdict": "Inconclusive", "details": {"reason": str(exc)}}
        code = EXIT_FAIL
    _report(args, s.name, d, out)
    return code


def cmd_dualize(args, out) -> int:
    s = _load(args)
    _emit(args, dump_json(dualize(s.data, args.inverse).to_dict()), out)
    return EXIT_OK


def cmd_catalog(args, out) -> int:
    for name in catalog.names():
        out.write(name + "\n")
    return EXIT_OK


COMMANDS = {"mesh": cmd_mesh, "check": cmd_check, "classify": cmd_classify,
            "dualize": cmd_dualize, "catalog": cmd_catalog}

INPUT_ERRORS = (InputError, SurfaceFormatError, ExprError, WeierstrassError, GraphError,
                ParabolicityError, PreconditionError, catalog.UnknownSurface, OSError,
                ValueError)


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return COMMANDS[args.command](args, out)
    except INPUT_ERRORS as exc:
        msg = " ".join(str(exc).split()) or type(exc).__name__
        err.write(f"maxsurf: {msg}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
