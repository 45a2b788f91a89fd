"""
Command-line front end: delta sweeps, fits, invariant checks and the geometric mechanism
"""

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import VotePrivacy, load_config
from .asymptotics import fit_inverse_sqrt
from .checks import SUITES
from .ddp import CSV_HEADER, SizeGuardError
from .dp_mechanisms import exact_dp_epsilon, exact_dp_ratio, truncated_geometric, utility
from .prob_core import VoteDistribution, format_rational, parse_rational
from .voting_rules import OBSERVABLES, build_mechanism


EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_GUARD = 3

TABLE_RULES = "plurality,2-approval,borda,stv,maximin"


class UsageError(ValueError):
    pass


def parse_n_range(text: str) -> List[int]:
    """"a..b" (inclusive) or a single n"""
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
        else:
            low = high = int(text)
    except ValueError:
        raise UsageError(f"Malformed --n {text!r}; expected a..b")
    if low < 1 or high < low:
        raise UsageError(f"Invalid n range {text!r}")
    return list(range(low, high + 1))


def parse_tie_break(text: Optional[str]) -> Optional[Tuple[int, ...]]:
    if not text:
        return None
    try:
        return tuple(int(part) for part in text.split(','))
    except ValueError:
        raise UsageError(f"Malformed --tie-break {text!r}; expected candidate indices like 2,0,1")


def _dist_bins(dist: str) -> Optional[int]:
    return None if dist.strip().lower() == "uniform" else len(dist.split(','))


def cmd_delta(args, app: VotePrivacy, out) -> int:
    n_values = parse_n_range(args.n)
    eps_ratio = parse_rational(args.eps_ratio)
    alpha = parse_rational(args.alpha) if args.alpha is not None else None
    tie_break = parse_tie_break(args.tie_break)
    # validate in-process so bad names fail fast with a usage error
    mechanism = build_mechanism(args.rule, args.observable, args.m, alpha=alpha,
                                c=_dist_bins(args.dist), tie_break=tie_break)
    VoteDistribution.parse(args.dist, mechanism.c)
    if eps_ratio < 1:
        raise UsageError(f"--eps-ratio must be >= 1, got {eps_ratio}")

    results = app.sweep(args.rule, args.observable, args.m, args.dist, n_values,
                        eps_ratio=eps_ratio, engine=args.engine, alpha=alpha, tie_break=tie_break)

    failures = [r for r in results if r.error]
    if failures:
        for r in failures:
            logging.error(f"n={r.task_id}: {r.error}")
        kinds = {r.error_kind for r in failures}
        if "guard" in kinds:
            return EXIT_GUARD
        if "usage" in kinds:
            return EXIT_USAGE
        return EXIT_CHECK_FAILED

    if args.out == "json":
        rows = [r.result.to_json(args.rule, args.observable) for r in results]
        out.write(json.dumps(rows, indent=2) + "\n")
    else:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in results:
            writer.writerow(r.result.to_csv_row(args.rule, args.observable))
    return EXIT_OK


def read_delta_csv(handle) -> Dict[Tuple[str, str, str], List[Tuple[int, Fraction]]]:
    """Group delta rows by (rule, observable, eps_ratio)"""
    reader = csv.DictReader(handle)
    missing = [col for col in CSV_HEADER if col not in (reader.fieldnames or [])]
    if missing:
        raise UsageError(f"Input CSV lacks columns {missing}")
    series: Dict[Tuple[str, str, str], List[Tuple[int, Fraction]]] = {}
    for line, row in enumerate(reader, start=2):
        try:
            n = int(row["n"])
            delta = Fraction(int(row["delta_num"]), int(row["delta_den"]))
        except (ValueError, ZeroDivisionError, TypeError):
            raise UsageError(f"Malformed CSV row {line}: {row}")
        series.setdefault((row["rule"], row["observable"], row["eps_ratio"]), []).append((n, delta))
    if not series:
        raise UsageError("Input CSV has no rows")
    return series


def cmd_fit(args, app: VotePrivacy, out) -> int:
    if args.input == "-":
        series = read_delta_csv(sys.stdin)
    else:
        try:
            with open(args.input, newline="") as handle:
                series = read_delta_csv(handle)
        except OSError as e:
            raise UsageError(f"Cannot read {args.input}: {e}")

    n_min = app.config['fit']['n_min'] if args.n_min is None else args.n_min
    n_max = app.config['fit']['n_max'] if args.n_max is None else args.n_max
    for (rule, observable, eps_ratio), samples in series.items():
        window = sorted((n, float(d)) for n, d in samples if n_min <= n <= n_max)
        if any(d <= 0 for _, d in window):
            raise UsageError(f"{rule}/{observable}: delta must be positive to fit")
        fit = fit_inverse_sqrt(window, rule=rule, observable=observable)
        record = fit.to_json()
        record["eps_ratio"] = eps_ratio
        out.write(json.dumps(record) + "\n")
    return EXIT_OK


def cmd_check(args, app: VotePrivacy, out) -> int:
    ok, suites = app.check(args.suite, seed=args.seed, cases=args.cases, n_max=args.n_max, stream=out)
    suites.print_summary()
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_geom(args, app: VotePrivacy, out) -> int:
    alpha = parse_rational(args.alpha)
    gamma = parse_rational(args.gamma)
    matrix = truncated_geometric(alpha, args.n)
    ratio = exact_dp_ratio(matrix)
    report = {
        "alpha": format_rational(alpha),
        "n": args.n,
        "ratio": format_rational(ratio),
        "epsilon": exact_dp_epsilon(matrix),
        "gamma": format_rational(gamma),
        "utility": format_rational(utility(matrix, gamma)),
        "utility_float": float(utility(matrix, gamma)),
    }
    out.write(json.dumps(report, indent=2) + "\n")
    if args.matrix:
        out.write(matrix.render() + "\n")
    return EXIT_OK


def cmd_table(args, app: VotePrivacy, out) -> int:
    rules = [r.strip() for r in args.rules.split(',') if r.strip()]
    observables = [o.strip() for o in args.observables.split(',') if o.strip()]
    n_values = parse_n_range(args.n)
    for rule in rules:
        for observable in observables:
            build_mechanism(rule, observable, args.m, c=_dist_bins(args.dist))
    fits, sweeps = app.table(rules, args.m, args.dist, n_values, observables)

    if args.csv_out:
        with open(args.csv_out, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for (rule, observable), results in sweeps.items():
                for result in results:
                    writer.writerow(result.to_csv_row(rule, observable))

    out.write(app.render_table(fits) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="votepriv",
        description="Exact distributional differential privacy of voting rules"
    )
    parser.add_argument("--config", help="JSON config file (default: $VOTEPRIV_CONFIG or ./votepriv.json)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    delta = sub.add_parser("delta", help="exact delta(n) sweep")
    delta.add_argument("--rule", required=True,
                       help="plurality | kapproval:k | veto | borda | stv | maximin | copeland | "
                            "majority | s1,...,sm")
    delta.add_argument("--observable", choices=OBSERVABLES, default="winner")
    delta.add_argument("--m", type=int, default=3, help="number of candidates")
    delta.add_argument("--dist", default="uniform", help='"uniform" or p1,p2,... rationals')
    delta.add_argument("--n", default="3..49", help="a..b inclusive")
    delta.add_argument("--eps-ratio", default="1", help="r = e^eps as an exact rational >= 1")
    delta.add_argument("--alpha", default=None, help="threshold for --rule majority (default 1/2)")
    delta.add_argument("--tie-break", default=None, help="candidate priority, e.g. 0,1,2")
    delta.add_argument("--engine", choices=("exact", "trails", "oracle"), default="exact")
    delta.add_argument("--out", choices=("csv", "json"), default="csv")
    delta.add_argument("--jobs", type=int, default=None)
    delta.set_defaults(handler=cmd_delta)

    fit = sub.add_parser("fit", help="fit delta(n) = 1/sqrt(a n + b) to a delta CSV")
    fit.add_argument("--input", required=True, help="CSV from `delta` ('-' for stdin)")
    fit.add_argument("--n-min", type=int, default=None)
    fit.add_argument("--n-max", type=int, default=None)
    fit.set_defaults(handler=cmd_fit, jobs=1)

    check = sub.add_parser("check", help="run invariant suites")
    check.add_argument("suite", choices=SUITES + ("all",))
    check.add_argument("--seed", type=int, default=None)
    check.add_argument("--cases", type=int, default=None)
    check.add_argument("--n-max", type=int, default=None)
    check.set_defaults(handler=cmd_check, jobs=1)

    geom = sub.add_parser("geom", help="truncated geometric mechanism: exact ratio and utility")
    geom.add_argument("--alpha", required=True)
    geom.add_argument("--n", type=int, required=True)
    geom.add_argument("--gamma", default="0")
    geom.add_argument("--matrix", action="store_true", help="also print the mechanism matrix")
    geom.set_defaults(handler=cmd_geom, jobs=1)

    table = sub.add_parser("table", help="sweep, fit and rank several rules")
    table.add_argument("--rules", default=TABLE_RULES)
    table.add_argument("--observables", default="winner,score")
    table.add_argument("--m", type=int, default=3)
    table.add_argument("--dist", default="uniform")
    table.add_argument("--n", default="3..49")
    table.add_argument("--csv-out", default=None, help="also write every sweep row here")
    table.add_argument("--jobs", type=int, default=None)
    table.set_defaults(handler=cmd_table)

    return parser


def setup_logging(verbose: int, config: Dict):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, str(config.get("logging", {}).get("level", "WARNING")).upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr, force=True)


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)

    config = load_config(args.config)
    setup_logging(args.verbose, config)
    try:
        app = VotePrivacy(jobs=args.jobs, config=config)
        return args.handler(args, app, out)
    except SizeGuardError as e:
        logging.error(str(e))
        return EXIT_GUARD
    except ValueError as e:
        logging.error(str(e))
        return EXIT_USAGE
