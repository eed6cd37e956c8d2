"""The ghforge command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 usage, 3 schema/input errors,
4 enumeration guard exceeded, 5 oracle disagreement.  All numeric output
uses 12 significant digits and is deterministic for fixed inputs.
"""

import argparse
import json
import math
import os
import re
import sys

from .compact import cgf_distance, covering_number, gh_distance, ghp_distance, oracle_cgf
from .document import parse_space, serialize_space
from .errors import GhforgeError, SchemaError, TooLarge
from .pointed import integral_distance, pointed_distance, sequence_report
from .report import format_value

EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_GUARD = 4
EXIT_ORACLE = 5

AGREEMENT_TOL = 1e-9


def _load(path):
    try:
        with open(path, "rb") as fh:
            return parse_space(fh.read())
    except FileNotFoundError:
        raise SchemaError("$", f"no such file: {path}") from None


def _metric_fn(name):
    def pointed_value(a, b, tol):
        return pointed_distance(a, b)

    def integral_value(a, b, tol):
        return integral_distance(a, b)

    table = {
        "gh": lambda a, b, tol: gh_distance(a, b).value,
        "ghp": lambda a, b, tol: ghp_distance(a, b).value,
        "cgf": lambda a, b, tol: cgf_distance(a, b).value,
        "pointed": pointed_value,
        "integral": integral_value,
    }
    return table[name]


def _round12(value):
    """Clamp every float in a JSON-like tree to 12 significant digits."""
    if isinstance(value, float):
        if value in (math.inf, -math.inf) or value != value:
            return format_value(value)
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: _round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    return value


def _witness_json(result, A, B, tol):
    if result.witness is None:
        return None
    from .compact import feasible_at

    R, cert = result.witness
    ok, _ = feasible_at(A, B, R, result.value + tol)
    pairs = sorted((A.space.labels[i], B.space.labels[j]) for i, j in R.pairs)
    return {
        "value": result.value,
        "pairs": [list(p) for p in pairs],
        "certificate": cert,
        "verified_at_tol": bool(ok),
    }


def cmd_validate(args):
    try:
        _load(args.file)
    except GhforgeError as exc:
        print(f"invalid: {exc}")
        return EXIT_RUNTIME
    print("valid")
    return 0


def cmd_dist(args):
    A, B = _load(args.fileA), _load(args.fileB)
    if args.metric in ("pointed", "integral") and (A.origin is None or B.origin is None):
        raise SchemaError("$.origin", f"--metric {args.metric} requires pointed documents")
    if args.metric in ("gh", "ghp", "cgf") and args.witness:
        result = {"gh": gh_distance, "ghp": ghp_distance, "cgf": cgf_distance}[args.metric](A, B)
        print(format_value(result.value))
        print(json.dumps(_round12(_witness_json(result, A, B, args.tol)), indent=2, default=str))
        return 0
    value = _metric_fn(args.metric)(A, B, args.tol)
    print(format_value(value))
    if args.witness:
        print("null")  # pointed metrics carry no single-correspondence witness
    return 0


def cmd_oracle(args):
    A, B = _load(args.fileA), _load(args.fileB)
    fast = cgf_distance(A, B).value
    slow = oracle_cgf(A, B).value
    print(format_value(slow))
    agree = (fast == slow) or abs(fast - slow) <= AGREEMENT_TOL
    print(f"fast {format_value(fast)} oracle {format_value(slow)} "
          f"{'agree' if agree else 'DISAGREE'}")
    return 0 if agree else EXIT_ORACLE


def _document_files(directory, order="lexical"):
    try:
        names = sorted(f for f in os.listdir(directory) if f.endswith(".json"))
    except FileNotFoundError:
        raise SchemaError("$", f"no such directory: {directory}") from None
    if not names:
        raise SchemaError("$", f"no .json documents in {directory}")
    if order == "numeric":
        def key(name):
            m = re.search(r"\d+", name)
            return (int(m.group()) if m else math.inf, name)

        names.sort(key=key)
    return names


def _matrix_entry(task):
    files, i, j, metric = task
    A, B = _load(files[i]), _load(files[j])
    return i, j, _metric_fn(metric)(A, B, AGREEMENT_TOL)


def cmd_matrix(args):
    names = _document_files(args.dir)
    paths = [os.path.join(args.dir, f) for f in names]
    if args.metric in ("pointed", "integral"):
        for name, path in zip(names, paths):
            if _load(path).origin is None:
                raise SchemaError("$.origin", f"--metric {args.metric} requires pointed documents ({name})")
    n = len(names)
    matrix = [[0.0] * n for _ in range(n)]
    tasks = [(paths, i, j, args.metric) for i in range(n) for j in range(i + 1, n)]
    if args.jobs > 1 and tasks:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_matrix_entry, tasks))
    else:
        results = [_matrix_entry(t) for t in tasks]
    for i, j, v in results:
        matrix[i][j] = matrix[j][i] = v

    import csv

    writer = csv.writer(sys.stdout)
    writer.writerow([""] + names)
    for name, row in zip(names, matrix):
        writer.writerow([name] + [format_value(v) for v in row])
    if args.out:
        from .report import render_matrix_heatmap, write_matrix_csv

        os.makedirs(args.out, exist_ok=True)
        write_matrix_csv(os.path.join(args.out, "distances.csv"), names, matrix)
        render_matrix_heatmap(
            os.path.join(args.out, "distances.png"), names, matrix,
            f"{args.metric} distances",
        )
    return 0


def cmd_ball(args):
    from .pointed import pcball

    M = _load(args.file)
    if M.origin is None:
        raise SchemaError("$.origin", "ball requires a pointed document")
    ball = pcball(M, args.radius)
    print(json.dumps(serialize_space(ball), indent=2))
    return 0


def cmd_seq(args):
    names = _document_files(args.dir, args.order)
    spaces = [_load(os.path.join(args.dir, f)) for f in names]
    for name, S in zip(names, spaces):
        if S.origin is None:
            raise SchemaError("$.origin", f"seq requires pointed documents ({name})")
    report = _round12(sequence_report(spaces))
    report["files"] = names
    print(json.dumps(report, indent=2))
    if args.out:
        from .report import render_sequence_figures, write_matrix_csv

        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w") as fh:
            json.dump(report, fh, indent=2)
        write_matrix_csv(
            os.path.join(args.out, "pointed_distances.csv"), names, report["pointed_matrix"]
        )
        write_matrix_csv(
            os.path.join(args.out, "integral_distances.csv"), names, report["integral_matrix"]
        )
        render_sequence_figures(args.out, names, report)
    return 0


def cmd_cover(args):
    M = _load(args.file)
    result = covering_number(M.space, args.eps, exact=True if args.exact else None)
    print(result.value)
    if not result.exact:
        print("greedy upper bound (pass --exact to force the search)", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ghforge",
        description="Gromov-Hausdorff distances for finite structured metric spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a space document")
    p.add_argument("file")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("dist", help="distance between two documents")
    p.add_argument("fileA")
    p.add_argument("fileB")
    p.add_argument("--metric", choices=["gh", "ghp", "cgf", "pointed", "integral"],
                   default="cgf")
    p.add_argument("--tol", type=float, default=AGREEMENT_TOL)
    p.add_argument("--witness", action="store_true")
    p.set_defaults(fn=cmd_dist)

    p = sub.add_parser("oracle", help="brute-force oracle value and agreement check")
    p.add_argument("fileA")
    p.add_argument("fileB")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("matrix", help="CSV distance matrix over a directory")
    p.add_argument("dir")
    p.add_argument("--metric", choices=["gh", "ghp", "cgf", "pointed", "integral"],
                   default="cgf")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="directory for CSV + figure output")
    p.set_defaults(fn=cmd_matrix)

    p = sub.add_parser("ball", help="truncated ball of a pointed document")
    p.add_argument("file")
    p.add_argument("--radius", type=float, required=True)
    p.set_defaults(fn=cmd_ball)

    p = sub.add_parser("seq", help="sequence report over a directory")
    p.add_argument("dir")
    p.add_argument("--order", choices=["lexical", "numeric"], default="lexical")
    p.add_argument("--out", help="directory for JSON/CSV + figure output")
    p.set_defaults(fn=cmd_seq)

    p = sub.add_parser("cover", help="covering number of a document's space")
    p.add_argument("file")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(fn=cmd_cover)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except TooLarge as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except GhforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
