"""Command-line interface.

    teexplain predict  --model M --instance 1,65,85
    teexplain explain  --model M --instance ... --kind iaxp
    teexplain max-iaxp --model M --row 3 --data train.csv --measure data --verify
    teexplain export   --model M --instance ... --what lp --output cand.lp

Exit codes: 0 ok, 1 usage, 2 model/data error, 3 budget exhausted,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import brute
from .explain import ExplanationProblem, compute_axp, compute_cxp, greedy_iaxp
from .hitset import BoundsOracle, build_candidate_oracle
from .intervals import build_interval_table, coverage_percent, make_measure, read_dataset
from .maxiaxp import compute_max_iaxp, seed_singleton_icxps
from .model import ModelError, class_weights, load_model
from .wcnf import HardUnsat, export_wcnf

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET, EXIT_INTERNAL = 0, 1, 2, 3, 4

log = logging.getLogger("teexplain")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model JSON file")
    common.add_argument("--instance", help="comma-separated feature values")
    common.add_argument("--row", type=int, help="row index into --data (0-based, header excluded)")
    common.add_argument("--data", help="training data CSV with a header row")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    explain_opts = argparse.ArgumentParser(add_help=False)
    explain_opts.add_argument("--measure", choices=("prop", "data"), default="prop")
    explain_opts.add_argument("--verify", action="store_true",
                              help="check the result against exhaustive search")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--encoding", choices=("naive", "bounds"), default="bounds")
    search.add_argument("--seed-singletons", action="store_true")

    p = _Parser(prog="teexplain", description="Formal explanations for tree ensembles")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("predict", parents=[common], help="classify an instance")
    e = sub.add_parser("explain", parents=[common, explain_opts], help="AXp, CXp or greedy iAXp")
    e.add_argument("--kind", choices=("axp", "cxp", "iaxp"), required=True)
    mx = sub.add_parser("max-iaxp", parents=[common, explain_opts, search],
                        help="maximum-coverage inflated AXp")
    mx.add_argument("--max-iter", type=int, default=10**5)
    mx.add_argument("--timeout", type=float, default=None, help="seconds")
    ex = sub.add_parser("export", parents=[common, search], help="write an encoding")
    ex.add_argument("--what", "--export", dest="what", required=True,
                    choices=("wcnf-te", "wcnf-candidates", "lp"))
    ex.add_argument("--measure", choices=("prop", "data"), default="prop")
    ex.add_argument("--opponent", help="class for wcnf-te (default: first non-predicted)")
    ex.add_argument("--scale", type=int, default=10**6, help="weight scale for WCNF output")
    return p


def _load(args):
    try:
        text = Path(args.model).read_text()
    except OSError as exc:
        raise DataError(f"cannot read model: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid model JSON: {exc}") from None
    m = len(doc.get("features") or ()) if isinstance(doc, dict) else 0
    rows = None
    if args.data:
        # columns past the model's features (labels, ids) are ignored
        try:
            _, rows = read_dataset(Path(args.data).read_text(), n_features=m)
        except (OSError, ValueError, StopIteration) as exc:
            raise DataError(f"cannot read data: {exc}") from None
        if any(len(r) != m for r in rows):
            raise DataError(f"data rows need at least {m} columns")
    te = load_model(doc, rows)
    if args.instance is not None and args.row is not None:
        raise UsageError("give either --instance or --row, not both")
    if args.instance is not None:
        try:
            point = tuple(float(x) for x in args.instance.split(","))
        except ValueError:
            raise UsageError(f"cannot parse instance {args.instance!r}") from None
    elif args.row is not None:
        if rows is None:
            raise UsageError("--row needs --data")
        if not 0 <= args.row < len(rows):
            raise UsageError(f"row {args.row} out of range (0..{len(rows) - 1})")
        point = rows[args.row]
    else:
        raise UsageError("an instance is required (--instance or --row/--data)")
    if len(point) != m:
        raise UsageError(f"instance has {len(point)} values, the model has {m} features")
    if not te.features.contains(point):
        raise UsageError("instance lies outside the feature domains")
    return te, point, rows


def _problem(args, te, point, rows) -> ExplanationProblem:
    table = build_interval_table(te)
    measure_kind = getattr(args, "measure", "prop")
    if measure_kind == "data" and rows is None:
        raise UsageError("--measure data requires --data")
    measure = make_measure(measure_kind, table, rows)
    return ExplanationProblem(te, point, measure, table)


def _query(args, point):
    q = {"command": args.command, "model": args.model, "instance": list(point)}
    for key in ("kind", "measure", "encoding", "seed_singletons", "max_iter", "timeout", "row"):
        if getattr(args, key, None) is not None:
            q[key] = getattr(args, key)
    return q


def _features_report(problem, region, features):
    out = []
    for i in features:
        entry = {"index": i, "name": problem.te.features.names[i],
                 "value": problem.instance.values[i], "interval_index": problem.cell[i]}
        if region is not None:
            l, u = region[i]
            a, b = problem.table.span(i, l, u)
            entry.update(range=[l, u], bounds=[a, b],
                         upper_closed=u == problem.table.n_intervals(i) - 1)
        out.append(entry)
    return out


def _explanation_report(problem, kind, features, region=None, fsc=None, stats=None):
    rep = {"kind": kind, "predicted": problem.te.classes[problem.target],
           "length": len(features), "features": _features_report(problem, region, features),
           "instance_intervals": list(problem.cell)}
    if fsc is not None:
        rep["fsc"] = fsc
        rep["coverage_percent"] = coverage_percent(fsc)
    if stats:
        rep["stats"] = stats
    return rep


def _verify_region(problem, region, maximum: bool):
    try:
        valid = brute.is_weak_iaxp_brute(problem, region)
        if not maximum:
            return "valid" if valid else "invalid"
        _, best = brute.max_iaxp_brute(problem)
    except ValueError as exc:
        return f"skipped: {exc}"
    if not valid:
        return "invalid"
    return "valid, maximum" if abs(problem.fsc(region) - best) <= 1e-6 else "valid, not maximum"


def _verify_axp(problem, features):
    try:
        table = brute.weak_axp_table(problem)
    except ValueError as exc:
        return f"skipped: {exc}"
    s = frozenset(features)
    if not table[s]:
        return "invalid"
    return "valid, minimal" if all(not table[s - {i}] for i in s) else "valid, not minimal"


def _verify_cxp(problem, features):
    try:
        table = brute.weak_axp_table(problem)
    except ValueError as exc:
        return f"skipped: {exc}"
    full = frozenset(range(problem.m))
    s = frozenset(features)
    if table[full - s]:
        return "invalid"
    return "valid, minimal" if all(table[full - (s - {i})] for i in s) else "valid, not minimal"


def cmd_predict(args):
    te, point, _ = _load(args)
    problem = ExplanationProblem(te, point)
    return {"query": _query(args, point), "predicted": te.classes[problem.target],
            "weights": class_weights(te, point), "instance_intervals": list(problem.cell)}, EXIT_OK


def cmd_explain(args):
    te, point, rows = _load(args)
    problem = _problem(args, te, point, rows)
    if args.kind == "axp":
        ex = compute_axp(problem)
        rep = _explanation_report(problem, ex.kind, ex.features, stats=ex.stats)
        if args.verify:
            rep["verification"] = _verify_axp(problem, ex.features)
    elif args.kind == "cxp":
        ex = compute_cxp(problem)
        if ex is None:
            raise DataError("no change of the features alters the prediction")
        rep = _explanation_report(problem, ex.kind, ex.features, stats=ex.stats)
        if args.verify:
            rep["verification"] = _verify_cxp(problem, ex.features)
    else:
        ex = greedy_iaxp(problem)
        rep = _explanation_report(problem, ex.kind, ex.features, ex.region, ex.fsc, ex.stats)
        if args.verify:
            rep["verification"] = _verify_region(problem, ex.region, maximum=False)
    return {"query": _query(args, point), **rep}, EXIT_OK


def cmd_max_iaxp(args):
    te, point, rows = _load(args)
    problem = _problem(args, te, point, rows)
    res = compute_max_iaxp(problem, args.encoding, seed=args.seed_singletons,
                           max_iter=args.max_iter, timeout=args.timeout)
    stats = {"iterations": res.iterations, "oracle_calls": res.checker_calls,
             "blocked_icxps": len(res.icxps), "seeded_icxps": res.seeded, "time": res.time}
    rep = _explanation_report(problem, "MaxiAXp" if res.maximum else "iAXp", res.features,
                              res.region, res.fsc, stats)
    rep["maximum"] = res.maximum
    if args.verbose:
        rep["trace"] = res.trace
    if args.verify:
        rep["verification"] = _verify_region(problem, res.region, maximum=res.maximum)
    return {"query": _query(args, point), **rep}, EXIT_OK if res.maximum else EXIT_BUDGET


def cmd_export(args):
    te, point, rows = _load(args)
    problem = _problem(args, te, point, rows)
    if args.what == "wcnf-te":
        enc = problem.encoding
        if args.opponent is not None:
            try:
                opp = te.class_index(args.opponent)
            except (KeyError, ValueError, IndexError):
                raise UsageError(f"unknown class {args.opponent!r}") from None
            if opp == problem.target:
                raise UsageError("the opponent must differ from the predicted class")
        else:
            opp = min(enc.objectives)
        formula, offset = enc.objectives[opp]
        header = [f"prediction {te.classes[problem.target]} vs {te.classes[opp]}",
                  f"score difference = {offset} - cost",
                  "counterexample iff cost "
                  + ("<" if opp > problem.target else "<=") + f" {offset}"]
        return export_wcnf(formula, args.scale, header + enc.describe_vars()), EXIT_OK
    oracle = build_candidate_oracle(problem, "bounds" if args.what == "lp" else args.encoding)
    if args.seed_singletons:
        seed_singleton_icxps(problem, oracle)
    if args.what == "lp":
        assert isinstance(oracle, BoundsOracle)
        return oracle.export_lp(), EXIT_OK
    return oracle.export_wcnf(args.scale), EXIT_OK


COMMANDS = {"predict": cmd_predict, "explain": cmd_explain,
            "max-iaxp": cmd_max_iaxp, "export": cmd_export}


def _emit(result, path):
    text = result if isinstance(result, str) else json.dumps(result, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        result, code = COMMANDS[args.command](args)
        _emit(result, args.output)
        return code
    except UsageError as exc:
        print(f"teexplain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, DataError, ValueError) as exc:
        print(f"teexplain: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"teexplain: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (AssertionError, HardUnsat) as exc:
        print(f"teexplain: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
