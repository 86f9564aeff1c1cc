"""
Argument parser for the batch CLI.

Numeric defaults come from config.settings. Defaults marked "heuristic default"
are working values rather than ones taken from the reference experiments.
"""

import argparse

from config.settings import (
    ADMM_MAX_ITERS,
    ADMM_RHO,
    BETA0,
    DEFAULT_DIMS,
    DEFAULT_RANKS,
    DEFAULT_SPARSITIES,
    DIRICHLET_ALPHA,
    GRAD_TOL,
    LAMBDA_S,
    LAMBDA_X,
    LDA_LAMBDA_S,
    LDA_LAMBDA_X,
    LDA_RESTARTS,
    MAX_ITERS,
    RHO_R,
    RHO_S,
    SOLVER_THREADS,
    TOP_WORDS,
    TRIALS_PER_CELL,
)
from src.cli.config import file_defaults, read_config_file
from src.harness.phase import METHODS


def _common():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; explicit flags override it")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    common.add_argument("--stdout", action="store_true", help="print the machine-readable result to stdout")
    common.add_argument("--threads", type=int, default=SOLVER_THREADS, help="worker processes for the phase grid")
    common.add_argument("--no-timestamp", action="store_true", help="omit timestamps so reruns are byte-identical")
    common.add_argument("--seed", type=int, default=0)
    return common


def build_parser():
    """Return the top-level parser and a {name: subparser} map."""
    parser = argparse.ArgumentParser(
        prog="tensor-rpca",
        description="Nonconvex atomic-norm tensor RPCA, baselines, analysis and moment-based topic models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    commands = {}

    p = sub.add_parser("decompose", parents=[common], help="low-rank + sparse split of a TNSR tensor")
    p.add_argument("input", help="observed tensor (.tnsr)")
    p.add_argument("--rank-bound", type=int, help="number of rank-one terms R (required)")
    p.add_argument("--lambda-x", type=float, default=LAMBDA_X)
    p.add_argument("--lambda-s", type=float, default=LAMBDA_S)
    p.add_argument("--symmetric", action="store_true", help="shared factor across modes (cubic input)")
    p.add_argument("--max-iters", type=int, default=MAX_ITERS)
    p.add_argument("--grad-tol", type=float, default=GRAD_TOL, help="heuristic default")
    p.add_argument("--out-prefix", help="output prefix (default outputs/<input>.decomposed)")
    commands["decompose"] = p

    p = sub.add_parser("phase", parents=[common], help="synthetic recovery phase-transition grid")
    p.add_argument("--method", choices=METHODS, default="atomic")
    p.add_argument("--ranks", type=int, nargs="+", default=DEFAULT_RANKS)
    p.add_argument("--sparsities", type=float, nargs="+", default=DEFAULT_SPARSITIES)
    p.add_argument("--trials", type=int, default=TRIALS_PER_CELL)
    p.add_argument("--dims", type=int, nargs="+", default=list(DEFAULT_DIMS))
    p.add_argument("--out", default="outputs/phase.csv", help="per-trial CSV; the summary goes next to it")
    p.add_argument("--no-progress", dest="progress", action="store_false")
    commands["phase"] = p

    p = sub.add_parser("analyze", parents=[common], help="coherence, Tucker rank and recovery-condition report")
    p.add_argument("input", help="tensor (.tnsr)")
    p.add_argument("--factors", help="stacked CP factors (.tnsr) of the tensor; enables the alpha estimate")
    p.add_argument("--support", help="index file of the sparse support; enables the operator norm")
    p.add_argument("--m", type=int, default=0, help="support size when no --support is given")
    p.add_argument("--mu0", type=float, help="coherence bound (default: measured)")
    p.add_argument("--alpha0", type=float, help="alpha bound (default: estimated from --factors)")
    p.add_argument("--rho-r", type=float, default=RHO_R, help="heuristic default")
    p.add_argument("--rho-s", type=float, default=RHO_S, help="heuristic default")
    p.add_argument("--opnorm-method", choices=("power", "lanczos"), default="power")
    p.add_argument("--out", help="report path (default <input>.analysis.txt)")
    commands["analyze"] = p

    p = sub.add_parser("lda", parents=[common], help="method-of-moments topic model from a sparse corpus")
    p.add_argument("corpus", help="documents as wordId:count lines")
    p.add_argument("--vocab", help="one word per line")
    p.add_argument("--topics", type=int, help="number of topics k (required)")
    p.add_argument("--kprime", type=int, help="reduced dimension (default k, or oversampled)")
    p.add_argument("--oversample", action="store_true", help="pick the reduced dimension from the recovery condition")
    p.add_argument("--corruptions", type=int, default=0, help="sparse entries assumed in M3 when oversampling")
    p.add_argument("--mu0", type=float, default=1.0, help="heuristic default")
    p.add_argument("--alpha0", type=float, default=1.0, help="heuristic default")
    p.add_argument("--rho-r", type=float, default=RHO_R, help="heuristic default")
    p.add_argument("--beta0", type=float, default=BETA0, help="heuristic default")
    p.add_argument("--alpha", type=float, default=DIRICHLET_ALPHA, help="fold-in Dirichlet prior, heuristic default")
    p.add_argument("--test", help="held-out corpus for perplexity")
    p.add_argument("--restarts", type=int, default=LDA_RESTARTS, help="heuristic default")
    p.add_argument("--lambda-x", type=float, default=LDA_LAMBDA_X, help="heuristic default")
    p.add_argument("--lambda-s", type=float, default=LDA_LAMBDA_S, help="heuristic default")
    p.add_argument("--max-iters", type=int, default=MAX_ITERS)
    p.add_argument("--top-words", type=int, default=TOP_WORDS)
    p.add_argument("--out-prefix", help="output prefix (default outputs/<corpus>.lda)")
    commands["lda"] = p

    p = sub.add_parser("baseline", parents=[common], help="matricization / Tucker RPCA baselines")
    p.add_argument("input", help="observed tensor (.tnsr)")
    p.add_argument("--method", choices=("matrix", "snn", "constrained"), help="required")
    p.add_argument("--mode", type=int, default=1, help="unfolding for --method matrix")
    p.add_argument("--lam", type=float, help="matrix RPCA lambda (default 1/sqrt(max dim))")
    p.add_argument("--solver", choices=("alm", "variational"), default="alm")
    p.add_argument("--weight", type=float, help="HoRPCA-S nuclear weight (default: side lengths)")
    p.add_argument("--ranks", type=int, nargs="+", help="HoRPCA-C Tucker ranks")
    p.add_argument("--lambda-s", type=float, default=1.0, help="heuristic default")
    p.add_argument("--rho", type=float, default=ADMM_RHO, help="heuristic default")
    p.add_argument("--max-iters", type=int, default=ADMM_MAX_ITERS, help="heuristic default")
    p.add_argument("--out-prefix", help="output prefix (default outputs/<input>.<method>)")
    commands["baseline"] = p

    return parser, commands


def parse_args(argv=None):
    """Parse, then reparse with config-file values installed as subcommand defaults."""
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    subparser = commands[args.command]
    subparser.set_defaults(**file_defaults(subparser, read_config_file(args.config), args.config))
    return parser.parse_args(argv)
