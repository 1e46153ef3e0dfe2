"""Command-line front end.

Exit status: 0 success, 1 negative verdict, 2 usage or input error,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import catalog
from .builder import saturate
from .coloring import (
    FINITE_SCALE_CAVEAT,
    build_two_coloring,
    defeat_no_limit,
    defeat_zero_limit,
    verify_certificate,
)
from .errors import BudgetExceeded, StrategyRefused, UrysohnError
from .graph import SimpleGraph
from .metric import FiniteMetricSpace, s_distance_graph
from .spectrum import (
    LimitKind,
    ProfiledSpectrum,
    Spectrum,
    as_rational,
    check_four_values,
    format_rational,
    main_theorem_classify,
)
from .symmetry import Coloring

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def load_json(arg: str):
    """``catalog:<name>``, ``-`` (stdin), a file path, or inline JSON."""
    if arg.startswith("catalog:"):
        try:
            return catalog.get(arg[len("catalog:"):]).spectrum.to_json()
        except KeyError as exc:
            raise UsageError(str(exc)) from None
    if arg == "-":
        text = sys.stdin.read()
    elif os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = arg
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"input is neither a catalog name, a file, nor JSON: {exc}") from None


def _profiled(arg: str) -> ProfiledSpectrum:
    data = load_json(arg)
    if isinstance(data, list):
        data = {"core": data}
    try:
        return ProfiledSpectrum.from_json(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"bad spectrum: {exc}") from None


def _space(data) -> FiniteMetricSpace:
    """A metric space from its JSON form, or from any object carrying one
    under ``"space"`` (certificates, amalgam results)."""
    try:
        return FiniteMetricSpace.from_json(data.get("space", data))
    except (KeyError, ValueError, TypeError, AttributeError) as exc:
        raise UsageError(f"bad metric space: {exc!r}") from None


def _emit(args, payload, text: str | None = None):
    if args.format == "text" and text is not None:
        out = text.rstrip("\n") + "\n"
    else:
        out = json.dumps(payload, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def cmd_classify(args) -> int:
    ps = _profiled(args.input)
    v = main_theorem_classify(ps)
    payload = {
        "verdict": "2" if v.is_two else "omega",
        "case": v.case,
        "rationale": v.rationale,
        "witness": [format_rational(q) for q in v.witness] if v.witness else None,
    }
    _emit(args, payload, f"D = {payload['verdict']} (case {v.case}): {v.rationale}")
    return EXIT_OK


def cmd_check_4v(args) -> int:
    ps = _profiled(args.input)
    fv = check_four_values(ps.core)
    witness = None
    if fv.witness:
        m, (a, b), (c, e) = fv.witness
        witness = {
            "common_edge": format_rational(m),
            "first_triangle": [format_rational(a), format_rational(b)],
            "second_triangle": [format_rational(c), format_rational(e)],
        }
    _emit(args, {"holds": fv.holds, "witness": witness}, "holds" if fv.holds else f"fails: {witness}")
    return EXIT_OK if fv.holds else EXIT_NEGATIVE


def cmd_build_approx(args) -> int:
    ps = _profiled(args.input)
    bound = as_rational(args.bound) if args.bound else None
    approx = saturate(ps.core, args.k, bound, min(args.max_points, args.budget_points), seed=args.seed)
    _emit(args, approx.to_json())
    return EXIT_OK


def cmd_build_coloring(args) -> int:
    ps = _profiled(args.input)
    try:
        cert = build_two_coloring(
            ps,
            ambient_points=args.ambient,
            min_points=args.min_points,
            max_points=args.budget_points,
            seed=args.seed if args.seed is not None else 0,
            max_nodes=args.budget_nodes,
        )
    except StrategyRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    print(FINITE_SCALE_CAVEAT, file=sys.stderr)
    _emit(args, cert.to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    data = load_json(args.input)
    if data.get("type") != "distinguishing_certificate":
        raise UsageError("input is not a distinguishing certificate")
    try:
        check = verify_certificate(data, max_nodes=args.budget_nodes)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed certificate: {exc!r}") from None
    text = "PASS" if check.ok else "FAIL: " + "; ".join(check.problems)
    moved = check.nontrivial_map()
    if moved:
        text += "\nnontrivial automorphism: " + json.dumps([[a, b] for a, b in moved.items()])
    _emit(args, check.to_json(), text)
    if not check.ok:
        print(text, file=sys.stderr)
    return EXIT_OK if check.ok else EXIT_NEGATIVE


def cmd_defeat(args) -> int:
    ps = _profiled(args.spectrum)
    space = _space(load_json(args.space))
    col_data = load_json(args.coloring)
    if isinstance(col_data, list):
        coloring = Coloring.from_sequence(space.points, col_data)
    else:
        coloring = Coloring.from_json(col_data)
    verdict = main_theorem_classify(ps)
    if verdict.is_two:
        print("refused: this spectrum admits a distinguishing 2-coloring", file=sys.stderr)
        return EXIT_NEGATIVE
    if ps.profile.kind is LimitKind.ZERO_LIMIT:
        dfe = defeat_zero_limit(space, coloring, ps.core)
    else:
        dfe = defeat_no_limit(space, coloring, ps.core)
    _emit(args, dfe.to_json())
    return EXIT_OK


def cmd_export_dot(args) -> int:
    data = load_json(args.input)
    if data.get("type") == "distinguishing_certificate":
        space = _space(data)
        s = as_rational(args.distance or data["strategy"]["s"])
        coloring = Coloring.from_json(data["coloring"])
        marked = [p for p in space.points if coloring[p] == 1]
        graph = s_distance_graph(space.restrict(marked), s)
    elif "dist" in data or "space" in data:
        space = _space(data)
        if not args.distance:
            raise UsageError("--distance is required to export a metric space")
        graph = s_distance_graph(space, as_rational(args.distance))
    elif "edges" in data:
        graph = SimpleGraph.from_json(data)
    else:
        raise UsageError("input is not a graph, space, or certificate")
    text = graph.to_dot(args.name)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _positive(value: str) -> int:
    n = int(value)
    if n <= 0:
        raise argparse.ArgumentTypeError("budgets must be positive")
    return n


_COMMON = {
    "format": (("--format",), {"choices": ["json", "text"]}, "json"),
    "output": (("-o", "--output"), {"help": "write the artifact to this path"}, None),
    "seed": (("--seed",), {"type": int, "help": "seed for randomized completions"}, None),
    "budget_points": (("--budget-points",), {"type": _positive}, 5000),
    "budget_nodes": (("--budget-nodes",), {"type": _positive}, 500_000),
}


def _add_common(parser, prefix: str):
    for dest, (flags, kw, _) in _COMMON.items():
        parser.add_argument(*flags, dest=prefix + dest, default=None, **kw)


def build_parser() -> argparse.ArgumentParser:
    """Shared options are accepted before or after the subcommand."""
    p = argparse.ArgumentParser(prog="urysohn", description=__doc__.splitlines()[0])
    _add_common(p, "top_")
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        c = sub.add_parser(name, help=help_text)
        _add_common(c, "")
        c.set_defaults(func=func)
        return c

    c = command("classify", cmd_classify, "distinguishing number of a profiled spectrum")
    c.add_argument("input")

    c = command("check-4v", cmd_check_4v, "4-values condition of a spectrum core")
    c.add_argument("input")

    c = command("build-approx", cmd_build_approx, "saturated finite approximation")
    c.add_argument("input")
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--bound", default=None)
    c.add_argument("--max-points", type=_positive, default=40)

    c = command("build-coloring", cmd_build_coloring, "distinguishing 2-coloring certificate")
    c.add_argument("input")
    c.add_argument("--ambient", type=_positive, default=None)
    c.add_argument("--min-points", type=int, default=40)

    c = command("verify", cmd_verify, "re-check a certificate from its space and coloring")
    c.add_argument("input")

    c = command("defeat", cmd_defeat, "color-preserving automorphism for a coloring")
    c.add_argument("--spectrum", required=True)
    c.add_argument("--space", required=True)
    c.add_argument("--coloring", required=True)

    c = command("export-dot", cmd_export_dot, "DOT export of a graph, space or certificate")
    c.add_argument("input")
    c.add_argument("--distance", default=None, help="export the graph of pairs at this distance")
    c.add_argument("--name", default="G")
    return p


def parse_args(argv=None) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    for dest, (_, _, default) in _COMMON.items():
        value = getattr(args, dest)
        if value is None:
            value = getattr(args, "top_" + dest)
        setattr(args, dest, default if value is None else value)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except UrysohnError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE


if __name__ == "__main__":
    sys.exit(main())
