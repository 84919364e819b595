"""Command-line interface: ``kntest {test,rank,baseline,simulate,bench}``.

Exit codes: for ``test`` 0 means H0 accepted and 1 rejected; every
subcommand returns 0 on success and 2 on any error.
"""

import argparse
import csv
import json
import logging
import sys
import time

import numpy as np
from scipy import stats

from . import baselines, synth
from .embeddings import OuterKernel
from .errors import InvalidArgumentError, InvalidDataError, KNTError
from .knt import FastBootstrap, SlowBootstrap, TestConfig, median_heuristic, run_test
from .linalg import Dataset, GramContext
from .models import NullModel
from .rank import RankSelectConfig, select_rank

EXIT_ACCEPT, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


class UsageError(KNTError, ValueError):
    pass


# ---------------------------------------------------------------------------
# input / output


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_csv(path):
    """Numeric matrix from a comma-separated file; a single header row is skipped."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InvalidDataError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise InvalidDataError(f"malformed CSV: {path} has no data rows")
    if not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
        if not rows:
            raise InvalidDataError(f"malformed CSV: {path} has a header but no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, r in enumerate(rows):
        if len(r) != width:
            raise InvalidDataError(f"malformed CSV: row {i + 1} has {len(r)} fields, expected {width}")
        try:
            out[i] = [float(c) for c in r]
        except ValueError:
            raise InvalidDataError(f"malformed CSV: non-numeric value in row {i + 1}") from None
    return out


def write_csv(X, fh):
    w = csv.writer(fh, lineterminator="\n")
    for row in np.atleast_2d(X):
        w.writerow([repr(float(v)) for v in row])


def load_dataset(path, mode):
    M = read_csv(path)
    if mode == "gram":
        if M.shape[0] != M.shape[1]:
            raise InvalidDataError(f"gram matrix must be square, got {M.shape[0]}x{M.shape[1]}")
        return Dataset.from_gram(M)
    return Dataset.from_vectors(M)


def emit(doc, output):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# option parsing helpers


def _kernel(args):
    if args.kernel == "exponential":
        if args.sigma is not None:
            raise UsageError("--sigma only applies to the gaussian kernel")
        return OuterKernel("exponential")
    if args.sigma is None:
        return None
    if not args.sigma > 0:
        raise UsageError(f"--sigma must be positive, got {args.sigma}")
    return OuterKernel("gaussian", args.sigma)


def _model(args):
    text = args.null_model.strip().lower().replace("_", "-")
    params = None
    if text in ("known", "known-mean"):
        if not args.params:
            raise UsageError(f"--null-model {text} needs --params FILE with the known parameters")
        try:
            with open(args.params) as fh:
                params = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read parameters file {args.params}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"parameters file {args.params} is not valid JSON: {exc}") from None
    elif args.params:
        raise UsageError("--params only applies to the known and known-mean models")
    space = "coefficients" if args.mode == "gram" else "ambient"
    try:
        return NullModel.parse(text, params, space=space)
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from None


def _check_common(args):
    if not (0.0 < args.alpha < 1.0):
        raise UsageError(f"--alpha must lie in (0, 1), got {args.alpha}")
    if args.B < 1:
        raise UsageError(f"--B must be >= 1, got {args.B}")
    if not (0 <= args.seed < 2**64):
        raise UsageError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_test(args):
    _check_common(args)
    kernel = _kernel(args)
    model = _model(args)
    config = TestConfig(kernel=kernel, model=model, alpha=args.alpha, B=args.B, seed=args.seed,
                        bootstrap=args.bootstrap, h=args.h, weights=args.weights)
    data = load_dataset(args.input, args.mode)
    report = run_test(data, config)
    emit(report.to_dict(replications=args.emit_replications), args.output)
    return EXIT_REJECT if report.reject else EXIT_ACCEPT


def cmd_rank(args):
    _check_common(args)
    if args.r_max < 1:
        raise UsageError(f"--r-max must be >= 1, got {args.r_max}")
    alpha = None if args.alpha_schedule else args.alpha
    config = RankSelectConfig(r_max=args.r_max, alpha=alpha, kernel=_kernel(args), B=args.B, seed=args.seed,
                              h=args.h, weights=args.weights)
    data = load_dataset(args.input, args.mode)
    emit(select_rank(data, config).to_dict(), args.output)
    return 0


def cmd_baseline(args):
    _check_common(args)
    if args.projections < 1:
        raise UsageError(f"--projections must be >= 1, got {args.projections}")
    if args.method != "rp" and args.projections != 1:
        raise UsageError("--projections only applies to --method rp")
    data = load_dataset(args.input, args.mode)
    if args.method == "rp":
        report = baselines.rp_test(data, args.projections, args.alpha, args.seed, args.B)
    else:
        X = data.values if data.mode == "vectors" else GramContext.from_gram(data.values).coords
        fn = baselines.hz_test if args.method == "hz" else baselines.ed_test
        report = fn(X, args.alpha, args.B, args.seed)
    emit(report.to_dict(), args.output)
    return 0


def cmd_simulate(args):
    kind = args.scenario.replace("-", "_")
    if kind == "null":
        kind = "null_gaussian"
    if args.n < 1 or args.d < 1:
        raise UsageError("--n and --d must be >= 1")
    sc = synth.Scenario(kind, args.d, args.n, args.seed, args.decay, args.r_star, args.rho)
    X = sc.generate()
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_csv(X, fh)
    else:
        write_csv(X, sys.stdout)
    return 0


def bench(sizes, B, d=2, seed=0, sigma=None):
    """Fast versus classical bootstrap at each sample size: timings and KS agreement."""
    rows = []
    for k, n in enumerate(sizes):
        X = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,))).standard_normal((n, d))
        ctx = GramContext.from_vectors(X)
        kernel = OuterKernel("gaussian", sigma if sigma is not None else median_heuristic(ctx))
        model = NullModel.full()
        t0 = time.perf_counter()
        fast = FastBootstrap(ctx, kernel, model).run(B, seed)
        t1 = time.perf_counter()
        slow = SlowBootstrap(ctx, kernel, model).run(B, seed)
        t2 = time.perf_counter()
        ks = stats.ks_2samp(fast, slow)
        rows.append({
            "n": int(n),
            "fast_s": t1 - t0,
            "slow_s": t2 - t1,
            "ratio": (t2 - t1) / max(t1 - t0, 1e-12),
            "ks_statistic": float(ks.statistic),
            "ks_pvalue": float(ks.pvalue),
            "fast_count": int(fast.size),
            "slow_count": int(slow.size),
        })
    return {"B": int(B), "d": int(d), "seed": int(seed), "results": rows}


def cmd_bench(args):
    if args.B < 1:
        raise UsageError(f"--B must be >= 1, got {args.B}")
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
    if not sizes or min(sizes) < 3:
        raise UsageError("--sizes needs sample sizes >= 3")
    if args.sigma is not None and not args.sigma > 0:
        raise UsageError(f"--sigma must be positive, got {args.sigma}")
    emit(bench(sizes, args.B, args.d, args.seed, args.sigma), args.output)
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="kntest", description="Kernel normality test and companions.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_input=True):
        if with_input:
            sp.add_argument("input", help="CSV file (vectors: one row per observation; gram: square matrix)")
            sp.add_argument("--mode", choices=("vectors", "gram"), default="vectors")
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--B", type=int, default=250, help="bootstrap / Monte Carlo replications")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output", "-o", help="write the result here instead of stdout")

    def kernel_opts(sp):
        sp.add_argument("--kernel", choices=("gaussian", "exponential"), default="gaussian")
        sp.add_argument("--sigma", type=float, default=None,
                        help="gaussian bandwidth; default 1/(2 median squared pairwise distance)")
        sp.add_argument("--h", type=float, default=1e-5, help="relative finite-difference step")
        sp.add_argument("--weights", choices=("rademacher", "normal"), default="rademacher")

    t = sub.add_parser("test", help="run the normality test")
    common(t)
    kernel_opts(t)
    t.add_argument("--null-model", default="full", help="full | known | known-mean | rank:R")
    t.add_argument("--params", help="JSON file with 'mean' and 'covariance' for known models")
    t.add_argument("--bootstrap", choices=("fast", "slow", "both"), default="fast")
    t.add_argument("--emit-replications", action="store_true")
    t.set_defaults(func=cmd_test)

    r = sub.add_parser("rank", help="sequential covariance rank selection")
    common(r)
    kernel_opts(r)
    r.add_argument("--r-max", type=int, default=10)
    r.add_argument("--alpha-schedule", action="store_true", help="use alpha = exp(-0.125 n^0.45)")
    r.set_defaults(func=cmd_rank)

    b = sub.add_parser("baseline", help="Henze-Zirkler, energy distance or random projection test")
    common(b)
    b.add_argument("--method", choices=("hz", "ed", "rp"), required=True)
    b.add_argument("--projections", type=int, default=1, help="number of random directions (rp)")
    b.set_defaults(func=cmd_baseline)

    s = sub.add_parser("simulate", help="write a simulated sample as CSV")
    s.add_argument("--scenario", required=True,
                   choices=("null", "null_gaussian", "HA1", "HA2", "lowrank", "lowrank-noisy", "lowrank_noisy"))
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--decay", choices=("exp", "poly"), default="exp")
    s.add_argument("--r-star", type=int, default=3)
    s.add_argument("--rho", type=float, default=1.0)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_simulate)

    be = sub.add_parser("bench", help="fast versus classical bootstrap comparison")
    be.add_argument("--sizes", default="200,400,800")
    be.add_argument("--B", type=int, default=100)
    be.add_argument("--d", type=int, default=2)
    be.add_argument("--sigma", type=float, default=None)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--output", "-o")
    be.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else 0
    try:
        return args.func(args)
    except (KNTError, ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
