"""Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 degenerate data,
1 numerical failure (optimiser or quadrature did not converge).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .codelength import LN2, Codelength, DegenerateDataError, DomainError
from .correlation import (
    BivariateSample,
    corr_mml_alt_estimates,
    corr_mml_null_estimates,
    corr_stats,
    corr_test,
    olkin_pratt,
)
from .mml87_binomial import mml87_binomial_codelength, mml87_binomial_estimate
from .nml import nml_binomial_codelength
from .simulate import EXPERIMENTS, default_config, run_experiment
from .smml import SMML_N_CAP, BinomialObservation, log_binom, solve_smml
from .special import ConvergenceError
from .ttest import EffectSizePrior, OptimizationError, TwoSampleData, ml_alt_estimates, ttest, ttest_stats

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3


class InputError(ValueError):
    """Malformed command-line input or data file."""


# ---------------------------------------------------------------- formatting


def _num(x: float, digits: int = 6) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    out = f"{x:.{digits}f}"
    return out[1:] if out.startswith("-") and float(out) == 0 else out


def _length(c: Codelength, units: str) -> float:
    return c.in_units(units)


class Report:
    """Rows of (quantity, value, unit) written as CSV."""

    def __init__(self):
        self.rows = []

    def add(self, quantity: str, value, unit: str = "", digits: int = 6):
        text = value if isinstance(value, str) else _num(float(value), digits)
        self.rows.append((quantity, text, unit))

    def render(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("quantity", "value", "unit"))
        w.writerows(self.rows)
        return buf.getvalue()


# ------------------------------------------------------------------ ingestion


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _parse_rows(raw: bytes, path: str) -> list:
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8 text") from None
    rows = [[c.strip() for c in row] for row in csv.reader(io.StringIO(text))]
    rows = [row for row in rows if any(row)]
    if not rows:
        raise InputError(f"{path} has no data rows")
    # header: a first line with any non-numeric cell
    if not all(_is_number(c) for c in rows[0] if c):
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path} has a header but no data rows")
    for k, row in enumerate(rows):
        if len(row) != 2:
            raise InputError(f"{path}: expected 2 columns, line {k + 1} has {len(row)}")
    return rows


def _float(cell: str, path: str) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise InputError(f"{path}: {cell!r} is not a number") from None
    if not math.isfinite(v):
        raise InputError(f"{path}: non-finite value {cell!r}")
    return v


def load_two_sample(raw: bytes, path: str, layout: str = "auto") -> TwoSampleData:
    """Two groups from long (label, value) or wide (y1, y2) CSV.

    ``auto`` picks long format when the first column holds non-numeric
    labels. Wide columns may be ragged (blank cells are skipped).
    """
    rows = _parse_rows(raw, path)
    if layout == "auto":
        layout = "wide" if all(_is_number(r[0]) for r in rows if r[0]) else "long"
    if layout == "long":
        groups = {}
        for label, value in rows:
            if not label:
                raise InputError(f"{path}: missing group label")
            groups.setdefault(label, []).append(_float(value, path))
        if len(groups) != 2:
            raise InputError(f"{path}: long format needs exactly 2 groups, found {len(groups)}")
        y1, y2 = groups.values()
    else:
        y1 = [_float(a, path) for a, _ in rows if a]
        y2 = [_float(b, path) for _, b in rows if b]
    try:
        return TwoSampleData(np.array(y1), np.array(y2))
    except DegenerateDataError:
        raise
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def load_pairs(raw: bytes, path: str) -> BivariateSample:
    rows = _parse_rows(raw, path)
    if any(not a or not b for a, b in rows):
        raise InputError(f"{path}: every row needs two values")
    pairs = np.array([[_float(a, path), _float(b, path)] for a, b in rows])
    try:
        return BivariateSample(pairs)
    except DegenerateDataError:
        raise
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


# ------------------------------------------------------------------ commands


def cmd_smml_table(args) -> str:
    if not 1 <= args.n_max <= SMML_N_CAP:
        raise InputError(f"--n-max must lie in 1..{SMML_N_CAP}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "partition", "estimates", "expected_codelength", "unit"))
    for n in range(1, args.n_max + 1):
        part = solve_smml(n)
        est = "{" + ", ".join(_num(t, 3) for t in part.estimates) + "}"
        w.writerow((n, str(part), est, _num(_length(part.expected_codelength, args.units), 3), args.units))
    return buf.getvalue()


def cmd_codelengths(args) -> str:
    if args.n < 1 or args.n > SMML_N_CAP:
        raise InputError(f"n must lie in 1..{SMML_N_CAP}")
    if not 0 <= args.y <= args.n:
        raise InputError("y must lie in 0..n")
    obs = BinomialObservation(args.n, args.y)
    u = args.units
    part = solve_smml(obs.n)
    j = part.segment_of(obs.y)
    # message length for this y: assertion -log q_j plus detail
    smml_len = Codelength(-math.log(part.masses[j]) - _binomial_loglik(obs, part.estimates[j]))
    theta = mml87_binomial_estimate(obs)
    nml = nml_binomial_codelength(obs)
    rep = Report()
    rep.add("smml_estimate", part.estimates[j])
    rep.add("smml_codelength", _length(smml_len, u), u)
    rep.add("smml_expected_codelength", _length(part.expected_codelength, u), u)
    rep.add("mml87_estimate", theta)
    rep.add("mml87_codelength", _length(mml87_binomial_codelength(obs, theta), u), u)
    rep.add("nml_codelength", _length(nml.total, u), u)
    rep.add("nml_complexity", _length(Codelength(nml.log_complexity_nats), u), u)
    return rep.render()


def _binomial_loglik(obs: BinomialObservation, theta: float) -> float:
    y, n = obs.y, obs.n
    out = float(log_binom(n, y))
    if y:
        out += y * math.log(theta) if theta > 0 else -math.inf
    if n - y:
        out += (n - y) * math.log1p(-theta) if theta < 1 else -math.inf
    return out


def _add_decision(rep: Report, res, units: str) -> None:
    rep.add("I0", _length(res.i0, units), units)
    rep.add("I1", _length(res.i1, units), units)
    rep.add("difference", res.difference_nats, "nats")
    rep.add("difference", res.difference_nats / LN2, "bits")
    rep.add("threshold", res.threshold_nats, "nats")
    rep.add("decision", res.selected)
    rep.add("substantial", "yes" if res.substantial else "no")


def cmd_ttest(args) -> str:
    data = load_two_sample(args.raw_input, args.input, args.layout)
    prior = EffectSizePrior(args.prior_df, args.prior_location, args.prior_scale)
    res, null, alt = ttest(data, prior, args.threshold, with_bayes_factor=args.bayes_factor)
    st = ttest_stats(data)
    rep = Report()
    rep.add("n1", st.n1, digits=0)
    rep.add("n2", st.n2, digits=0)
    rep.add("t_statistic", st.t)
    _add_decision(rep, res, args.units)
    rep.add("null_mu", null.mu)
    rep.add("null_sigma", null.sigma)
    rep.add("alt_mu", alt.mu)
    rep.add("alt_sigma", alt.sigma)
    rep.add("alt_delta", alt.delta)
    rep.add("ml_delta", ml_alt_estimates(data).delta)
    if res.bayes_factor is not None:
        rep.add("bayes_factor_10", res.bayes_factor)
    return rep.render()


def cmd_corrtest(args) -> str:
    if not -1.0 < args.rho0 < 1.0:
        raise InputError("--rho0 must lie strictly inside (-1, 1)")
    data = load_pairs(args.raw_input, args.input)
    res = corr_test(data, args.rho0, threshold_nats=args.threshold)
    st = corr_stats(data)
    alt = corr_mml_alt_estimates(data)
    null = corr_mml_null_estimates(data, args.rho0)
    rep = Report()
    rep.add("n", st.n, digits=0)
    _add_decision(rep, res, args.units)
    rep.add("r", st.r)
    rep.add("rho_mml", alt.rho)
    if st.n >= 5:
        rep.add("rho_olkin_pratt", olkin_pratt(st.r, st.n))
    rep.add("alt_sigma1", alt.sigma1)
    rep.add("alt_sigma2", alt.sigma2)
    rep.add("null_sigma1", null.sigma1)
    rep.add("null_sigma2", null.sigma2)
    return rep.render()


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None


def cmd_simulate(args) -> str:
    if args.reps < 1:
        raise InputError("--reps must be at least 1")
    overrides = {}
    if args.grid is not None:
        overrides["grid"] = args.grid
    if args.n_values is not None:
        overrides["n_values"] = args.n_values
    if args.null_values is not None:
        overrides["null_values"] = args.null_values
    if args.threshold is not None:
        overrides["threshold_nats"] = args.threshold
    overrides["prior"] = EffectSizePrior(args.prior_df, args.prior_location, args.prior_scale)
    try:
        cfg = default_config(args.experiment, seed=args.seed, replicates=args.reps, **overrides)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    table = run_experiment(args.experiment, cfg)
    if table.redraws:
        print(f"mmlkit: {table.redraws} degenerate replicate(s) redrawn", file=sys.stderr)
    return table.to_csv()


# --------------------------------------------------------------- manifest


def _manifest(args, argv_flags: dict) -> dict:
    raw = getattr(args, "raw_input", None)
    return {
        "tool": "mmlkit",
        "version": __version__,
        "command": args.command,
        "flags": argv_flags,
        "seed": args.seed,
        "input_digest": None if raw is None else "sha256:" + hashlib.sha256(raw).hexdigest(),
    }


def _flags(args) -> dict:
    skip = {"func", "raw_input", "output", "command"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


# ------------------------------------------------------------------ parser


def _add_globals(p, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
    p.add_argument("--units", choices=("bits", "nats"), default=d("bits"), help="codelength units (default bits)")
    p.add_argument("--output", "-o", default=d(None), help="write to this file and a .manifest.json beside it")


def _add_prior(p) -> None:
    p.add_argument("--prior-df", type=float, default=1.0, help="effect size prior degrees of freedom")
    p.add_argument("--prior-location", type=float, default=0.0)
    p.add_argument("--prior-scale", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmlkit", description="Minimum message length inference tools.")
    parser.add_argument("--version", action="version", version=f"mmlkit {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("smml-table", help="optimal SMML partitions of binomial counts")
    _add_globals(p, suppress=True)
    p.add_argument("--n-max", type=int, default=30)
    p.set_defaults(func=cmd_smml_table)

    p = sub.add_parser("codelengths", help="SMML, MML87 and NML codelengths of a binomial count")
    _add_globals(p, suppress=True)
    p.add_argument("n", type=int, help="number of trials")
    p.add_argument("y", type=int, help="number of successes")
    p.set_defaults(func=cmd_codelengths)

    p = sub.add_parser("ttest", help="two-sample MML t-test")
    _add_globals(p, suppress=True)
    p.add_argument("input", help="CSV file, or - for standard input")
    p.add_argument("--layout", choices=("auto", "long", "wide"), default="auto")
    p.add_argument("--threshold", type=float, default=0.0, help="decision margin in nats")
    p.add_argument("--bayes-factor", action="store_true", help="also report BF_10")
    _add_prior(p)
    p.set_defaults(func=cmd_ttest)

    p = sub.add_parser("corrtest", help="MML test of a correlation coefficient")
    _add_globals(p, suppress=True)
    p.add_argument("input", help="CSV file with two columns, or - for standard input")
    p.add_argument("--rho0", type=float, default=0.0)
    p.add_argument("--threshold", type=float, default=0.0, help="decision margin in nats")
    p.set_defaults(func=cmd_corrtest)

    p = sub.add_parser("simulate", help="Monte Carlo experiments, CSV output")
    _add_globals(p, suppress=True)
    p.add_argument("experiment", help="one of: " + ", ".join(EXPERIMENTS))
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--grid", type=_float_list, default=None, help="comma-separated parameter grid")
    p.add_argument("--n-values", type=_int_list, default=None, help="comma-separated sample sizes")
    p.add_argument("--null-values", type=_float_list, default=None, help="tested correlations (corr-table)")
    p.add_argument("--threshold", type=float, default=None, help="extra decision margin in nats")
    _add_prior(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def _check_args(args) -> None:
    if getattr(args, "threshold", None) is not None and not args.threshold >= 0:
        raise InputError("--threshold must be a non-negative number of nats")
    if hasattr(args, "prior_scale") and not (args.prior_scale > 0 and args.prior_df > 0):
        raise InputError("prior scale and degrees of freedom must be positive")
    if args.command == "simulate" and args.experiment not in EXPERIMENTS:
        raise InputError(f"unknown experiment {args.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    if not 0 <= args.seed < 2**64:
        raise InputError("--seed must be a 64-bit unsigned integer")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _check_args(args)
        if hasattr(args, "input"):
            args.raw_input = _read_bytes(args.input)
        text = args.func(args)
    except DegenerateDataError as exc:
        print(f"mmlkit: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, DomainError, ValueError) as exc:
        print(f"mmlkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OptimizationError, ConvergenceError) as exc:
        print(f"mmlkit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    if args.output is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        with open(args.output + ".manifest.json", "w", encoding="utf-8", newline="") as fh:
            json.dump(_manifest(args, _flags(args)), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        print(f"mmlkit: cannot write {args.output}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
