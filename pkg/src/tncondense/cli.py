"""Command-line front end.

Exit codes: 0 success, 1 validation or verification failure, 2 usage error
or unreadable input.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

import numpy as np

from . import lab
from .annulus import IndeterminateTwist
from .canonicalize import CondensedGraph, adjust, condense
from .graph import StructuralError, ValidationError, ambient_surface, validate
from .nielsen import base_relations, persistence_report, pon_count
from .serialize import (DocumentError, adjusted_to_doc, condensed_to_doc, dumps,
                        graph_or_condensed, load_json, pairs_csv, relations_dot, text_table)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_graph(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return graph_or_condensed(load_json(text, path))
    except DocumentError as exc:
        raise UsageError(str(exc)) from exc


def _read_census(path: Optional[str]):
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            doc = load_json(fh.read(), path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except DocumentError as exc:
        raise UsageError(str(exc)) from exc
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: census must map piece ids to {{period: count}} objects")
    try:
        return {int(p): {int(k): int(v) for k, v in t.items()} for p, t in doc.items()}
    except (ValueError, AttributeError) as exc:
        raise UsageError(f"{path}: census must map piece ids to {{period: count}} objects") from exc


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _plain(graph):
    return graph.graph if isinstance(graph, CondensedGraph) else graph


def _require_valid(graph, out) -> bool:
    report = validate(_plain(graph))
    if not report.ok:
        for line in report.lines():
            print(line, file=out)
        return False
    return True


# ---------------------------------------------------------------------------
# graph commands


def cmd_validate(args, out) -> int:
    graph = _read_graph(args.file)
    report = validate(_plain(graph))
    if report.ok:
        print("valid", file=out)
        return EXIT_OK
    for line in report.lines():
        print(line, file=out)
    return EXIT_FAIL


def cmd_adjust(args, out) -> int:
    graph = _read_graph(args.file)
    if not _require_valid(graph, out):
        return EXIT_FAIL
    adj = adjust(_plain(graph), args.collapse)
    _write(args.output, dumps(adjusted_to_doc(adj)))
    print(f"adjusted graph written to {args.output}", file=out)
    return EXIT_OK


def cmd_condense(args, out) -> int:
    graph = _read_graph(args.file)
    if not _require_valid(graph, out):
        return EXIT_FAIL
    cg = condense(graph)
    _write(args.output, dumps(condensed_to_doc(cg)))
    print(f"condensed graph written to {args.output}: {len(cg.orbit_inventory)} orbits", file=out)
    return EXIT_OK


CLASS_COLUMNS = ["id", "period", "members", "types", "index", "collapsible", "essential",
                 "persistent"]


def cmd_classes(args, out) -> int:
    graph = _read_graph(args.file)
    if not _require_valid(graph, out):
        return EXIT_FAIL
    census = _read_census(args.census)
    report = persistence_report(graph, args.max_period, census)
    pon = [(n, pon_count(graph, n, census)) for n in range(1, args.max_period + 1)]
    if args.format == "json":
        out.write(dumps({"classes": [c.to_dict() for c in report],
                         "pon": [{"period": n, "count": r.count, "exact": r.exact}
                                 for n, r in pon]}))
        return EXIT_OK
    out.write(text_table([c.to_dict() for c in report], CLASS_COLUMNS))
    out.write("\n")
    out.write(text_table([{"period": n, "pon": r.count, "exact": r.exact} for n, r in pon],
                         ["period", "pon", "exact"]))
    return EXIT_OK


def cmd_report(args, out) -> int:
    graph = _read_graph(args.file)
    if not _require_valid(graph, out):
        return EXIT_FAIL
    max_period = args.max_period
    if args.format == "dot":
        out.write(relations_dot(base_relations(graph, max_period)))
        return EXIT_OK
    cg = condense(graph)
    classes = persistence_report(graph, max_period)
    if args.format == "json":
        out.write(dumps({"graph": condensed_to_doc(cg),
                         "classes": [c.to_dict() for c in classes]}))
        return EXIT_OK
    genus, bdry, chi = ambient_surface(_plain(graph))
    out.write(f"surface: genus {genus}, {bdry} boundary circles, euler characteristic {chi}\n")
    out.write(f"pieces: {len(_plain(graph).pieces)}, reducing annuli: "
              f"{len(_plain(graph).annuli)}\n\n")
    out.write("condensed orbit inventory\n")
    out.write(text_table([r.to_dict() for r in cg.orbit_inventory],
                         ["id", "type", "period", "index", "site", "absorbed"]))
    out.write(f"\nclasses up to period {max_period}\n")
    out.write(text_table([c.to_dict() for c in classes], CLASS_COLUMNS))
    return EXIT_OK


# ---------------------------------------------------------------------------
# shadowing lab


def _model(args):
    try:
        return lab.LinearModel.from_entries(args.matrix)
    except lab.DomainError as exc:
        raise UsageError(str(exc)) from exc


def _emit(report: dict, args, out) -> None:
    if args.format == "json":
        out.write(dumps(report))
    else:
        width = max(len(k) for k in report)
        for k, v in report.items():
            if isinstance(v, float):
                v = f"{v:.12g}"
            out.write(f"{k.ljust(width)}  {v}\n")


def cmd_shadow(args, out) -> int:
    model = _model(args)
    exp = args.experiment
    if exp == "expansion":
        rng = np.random.default_rng(args.seed)
        pts = rng.uniform(-args.span, args.span, size=(args.samples, 2, 2))
        rep = lab.verify_expansion(model, [(p[0], p[1]) for p in pts], tol=args.tol or 1e-12)
        _emit({"experiment": exp, "ok": rep.ok, "samples": rep.samples, "lam": rep.lam,
               "worst_relative_error": rep.worst_relative_error,
               "worst_pair": [list(rep.worst_pair[0]), list(rep.worst_pair[1])],
               "tolerance": rep.tolerance}, args, out)
        return EXIT_OK if rep.ok else EXIT_FAIL
    if exp == "constant":
        if args.R is not None:
            R, parts = args.R, {}
        else:
            R, parts = lab.measure_R(lab.PerturbedMap.sinusoidal(model, args.eps, args.seed))
        C = lab.shadowing_constant(R, model.lam)
        _emit({"experiment": exp, "lam": model.lam, "R": R, "C": C, **parts}, args, out)
        return EXIT_OK
    if exp == "flip":
        rep = lab.flip_annulus_experiment(seed=args.seed, maps=args.maps,
                                          iterations=args.iterations)
        fp = rep.fixed_points
        _emit({"experiment": exp, "ok": rep.ok(args.tol or 1e-6), "seed": rep.seed,
               "max_rotation_sum": rep.max_rotation_sum,
               "rotations": [list(r) for r in rep.rotations],
               "fixed_point_status": fp.status,
               "fixed_points": [[p.x, p.y, p.index] for p in fp.points],
               "index_sum": fp.index_sum}, args, out)
        return EXIT_OK if rep.ok(args.tol or 1e-6) else EXIT_FAIL

    tol = args.tol or 1e-11
    fmap, sets, rep = lab.shadowing_experiment(model, args.eps, args.max_period, args.seed, tol)
    if args.csv:
        _write(args.csv, pairs_csv(lab.pairs_table(sets)))
    base = {"experiment": exp, "matrix": list(args.matrix), "eps": args.eps, "seed": args.seed,
            "max_period": args.max_period, "lam": rep.lam, "R": rep.R, "C": rep.C,
            "pairs": rep.pairs, "unmatched": rep.unmatched}
    if exp == "match":
        _emit({**base, "ok": rep.ok, "max_d_phi": rep.max_d_phi, "margin": rep.margin,
               "violations": rep.violations,
               "per_period": {str(k): v for k, v in rep.per_period.items()}}, args, out)
        return EXIT_OK if rep.ok else EXIT_FAIL
    if exp == "twosided":
        ts = lab.two_sided_bound_check(fmap, sets, rep.C, (-args.m_range, args.m_range))
        ok = ts.ok and rep.unmatched == 0
        _emit({**base, "ok": ok, "bound": ts.bound, "max_difference": ts.max_difference,
               "comparisons": ts.comparisons}, args, out)
        return EXIT_OK if ok else EXIT_FAIL
    if exp == "semiconj":
        sc = lab.semiconjugacy_check(fmap, sets, rep.C)
        ok = sc.ok(args.defect_tol) and rep.unmatched == 0
        _emit({**base, "ok": ok, "max_defect": sc.max_defect,
               "max_lift_deviation": sc.max_lift_deviation}, args, out)
        return EXIT_OK if ok else EXIT_FAIL
    raise UsageError(f"unknown experiment {exp}")


# ---------------------------------------------------------------------------


def _matrix(text: str) -> List[int]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("matrix must be four comma-separated integers") from exc
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("matrix must be four comma-separated integers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tncondense",
        description="Condense reducible surface maps and compute their periodic Nielsen classes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a graph document")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("adjust", help="write the adjusted graph")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--collapse", choices=["left", "right"], default=None,
                   help="collapse choice for fixed pA boundary orbits (default: keep, else left)")
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("condense", help="write the condensed graph with its orbit inventory")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_condense)

    p = sub.add_parser("classes", help="periodic Nielsen classes and minimal orbit counts")
    p.add_argument("file")
    p.add_argument("--max-period", type=int, required=True)
    p.add_argument("--census", help="JSON file mapping pA piece ids to {period: count}")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("report", help="summary of a graph")
    p.add_argument("file")
    p.add_argument("--format", choices=["text", "json", "dot"], default="text")
    p.add_argument("--max-period", type=int, default=12)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("shadow", help="numerical shadowing experiments")
    p.add_argument("experiment",
                   choices=["expansion", "constant", "match", "twosided", "semiconj", "flip"])
    p.add_argument("--matrix", type=_matrix, default=[2, 1, 1, 1])
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--max-period", type=int, default=8)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--span", type=float, default=10.0, help="sample points in [-span, span]^2")
    p.add_argument("--R", type=float, default=None, help="use this R instead of measuring it")
    p.add_argument("--m-range", type=int, default=20)
    p.add_argument("--defect-tol", type=float, default=1e-6)
    p.add_argument("--maps", type=int, default=10)
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--csv", help="also write matched pairs to this CSV file")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.set_defaults(func=cmd_shadow)
    return parser


def run(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except (ValidationError, IndeterminateTwist, StructuralError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
