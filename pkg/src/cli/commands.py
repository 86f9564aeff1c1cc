"""
Command Implementations

Purpose:
One function per subcommand. Each takes a validated RunConfig, reads and
checks every input before computing, writes its files and returns an exit
code.

Exit codes:
    0  success
    2  bad input (raised as ValueError / OSError and mapped in `src.main`)
    3  an iterative solver stopped without converging; outputs are written
"""

import logging
import sys
from pathlib import Path

import numpy as np

from src.analysis.certificates import opnorm_pomega_px, theorem1_check
from src.analysis.coherence import CoherenceReport, coherence_report, subspace_coherence
from src.analysis.projections import bases_from_kruskal, bases_from_tensor
from src.analysis.support import read_support
from src.baselines.admm import AdmmConfig
from src.baselines.horpca import horpca_c, horpca_s
from src.baselines.matrix_rpca import matrix_rpca
from src.harness.phase import run_phase, write_phase_csv
from src.moments.corpus import read_corpus, read_vocabulary
from src.moments.perplexity import per_token_perplexity, perplexity
from src.moments.reduction import oversample_k
from src.moments.topics import fit_topics, write_topics
from src.solver.atomic import lbfgs_solve, symmetric_solve
from src.solver.config import SolverConfig
from src.solver.report import format_summary, read_factors, summarize, write_report
from src.tensor_core.tnsr_io import read_tnsr, write_tnsr
from src.tensor_core.tucker import tucker_rank

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NOT_CONVERGED = 3

OUTPUT_DIR = Path("outputs")


def _prefix(value, source, tag):
    if value is not None:
        return Path(value)
    return OUTPUT_DIR / f"{Path(source).stem}.{tag}"


def _sibling(prefix, suffix):
    return prefix.with_name(prefix.name + suffix)


def _emit(cfg, text):
    if cfg.stdout:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _write_text(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text.rstrip("\n") + "\n")


def _require(cfg, *names):
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(cfg, name) is None]
    if missing:
        raise ValueError(f"{cfg.command} needs {', '.join(missing)} (flag or config file).")


def cmd_decompose(cfg):
    _require(cfg, "rank_bound")
    z = read_tnsr(cfg.input)
    solver_cfg = SolverConfig(
        rank_bound=cfg.rank_bound, lambda_x=cfg.lambda_x, lambda_s=cfg.lambda_s, order=z.ndim,
        max_iters=cfg.max_iters, grad_tol=cfg.grad_tol, symmetric=cfg.symmetric,
        seed=cfg.seed, threads=cfg.threads,
    )
    logger.info("Decomposing %s tensor from %s (rank bound %d)", z.shape, cfg.input, cfg.rank_bound)
    report = symmetric_solve(z, solver_cfg) if cfg.symmetric else lbfgs_solve(z, solver_cfg)

    prefix = _prefix(cfg.out_prefix, cfg.input, "decomposed")
    write_report(report, prefix)
    text = format_summary(summarize(report, z))
    _write_text(_sibling(prefix, ".summary.txt"), text)
    _emit(cfg, text)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_phase(cfg):
    out = Path(cfg.out)
    grid = run_phase(
        cfg.ranks, cfg.sparsities, trials=cfg.trials, method=cfg.method, base_seed=cfg.seed,
        dims=cfg.dims, threads=cfg.threads, progress=cfg.progress,
    )
    _, summary_path = write_phase_csv(grid, out, timestamp=cfg.timestamp)
    if cfg.stdout:
        _emit(cfg, grid.summary().to_csv(index=False, float_format="%.10g"))
    logger.info("Phase summary in %s", summary_path)
    return EXIT_OK


def _analysis_text(cfg, t):
    support = read_support(cfg.support, t.shape) if cfg.support is not None else None
    kruskal = read_factors(cfg.factors, t.shape) if cfg.factors is not None else None

    tucker = tucker_rank(t)
    if kruskal is not None:
        coherence = coherence_report(kruskal, seed=cfg.seed)
        bases = bases_from_kruskal(kruskal)
    else:
        bases = bases_from_tensor(t)
        modes = tuple(subspace_coherence(b) for b in bases.bases)
        coherence = CoherenceReport(
            mu=max(modes), alpha_estimate=float("nan"), mode_coherences=modes,
            ranks=bases.ranks, r_bar=tucker.r_bar,
        )

    lines = [f"dims={','.join(str(d) for d in t.shape)}", coherence.to_text()]
    m = support.m if support is not None else cfg.m
    alpha0 = cfg.alpha0 if cfg.alpha0 is not None else coherence.alpha_estimate
    mu0 = cfg.mu0 if cfg.mu0 is not None else coherence.mu
    lines.append(f"m={m}")
    if t.ndim == 3 and np.isfinite(alpha0):
        lines.append(theorem1_check(t.shape, tucker.r_bar, m, mu0, alpha0, cfg.rho_r, cfg.rho_s).to_text())
    else:
        logger.warning("Skipping the recovery-condition check: needs an order-3 tensor and alpha (pass --factors or --alpha0)")

    if support is not None:
        value = opnorm_pomega_px(bases, support, seed=cfg.seed, method=cfg.opnorm_method)
        lines.append(f"opnorm_pomega_px={value:.10g}")
    return "\n".join(lines)


def cmd_analyze(cfg):
    t = read_tnsr(cfg.input)
    text = _analysis_text(cfg, t)
    out = Path(cfg.out) if cfg.out is not None else _sibling(Path(cfg.input), ".analysis.txt")
    _write_text(out, text)
    _emit(cfg, text)
    logger.info("Wrote analysis to %s", out)
    return EXIT_OK


def cmd_lda(cfg):
    _require(cfg, "topics")
    vocabulary = read_vocabulary(cfg.vocab) if cfg.vocab is not None else None
    corpus = read_corpus(cfg.corpus, vocab_size=len(vocabulary) if vocabulary is not None else None)
    test = read_corpus(cfg.test) if cfg.test is not None else None
    if cfg.topics > corpus.vocab_size:
        raise ValueError(f"--topics {cfg.topics} exceeds the vocabulary size {corpus.vocab_size}.")

    k_prime = cfg.kprime
    if k_prime is None and cfg.oversample:
        k_prime = oversample_k(cfg.topics, cfg.corruptions, cfg.mu0, cfg.alpha0, cfg.rho_r, corpus.vocab_size)

    fit = fit_topics(
        corpus, cfg.topics, k_prime, beta0=cfg.beta0, restarts=cfg.restarts, seed=cfg.seed,
        lambda_x=cfg.lambda_x, lambda_s=cfg.lambda_s, max_iters=cfg.max_iters,
    )
    prefix = _prefix(cfg.out_prefix, cfg.corpus, "lda")
    write_topics(fit.model, prefix, vocabulary, cfg.top_words)

    metrics = {
        "documents": corpus.n_docs,
        "vocab_size": corpus.vocab_size,
        "topics": cfg.topics,
        "k_prime": fit.reduction.shape[0],
        "status": fit.report.status,
        "objective": fit.report.objective,
        "dirichlet_beta": ",".join(f"{b:.6g}" for b in fit.model.dirichlet_parameters(cfg.beta0)),
    }
    if test is not None:
        metrics["perplexity"] = perplexity(test, fit.model, cfg.alpha)
        metrics["per_token_perplexity"] = per_token_perplexity(test, fit.model, cfg.alpha)
    text = format_summary(metrics)
    _write_text(_sibling(prefix, ".metrics.txt"), text)
    _emit(cfg, text)
    return EXIT_OK if fit.report.converged else EXIT_NOT_CONVERGED


def cmd_baseline(cfg):
    _require(cfg, "method")
    z = read_tnsr(cfg.input)
    if cfg.method == "constrained" and cfg.ranks is None:
        raise ValueError("--method constrained needs --ranks.")
    admm = AdmmConfig(rho=cfg.rho, max_iters=cfg.max_iters, lambda_s=cfg.lambda_s)

    logger.info("Running %s baseline on %s tensor from %s", cfg.method, z.shape, cfg.input)
    if cfg.method == "matrix":
        result = matrix_rpca(z, mode=cfg.mode, lam=cfg.lam, cfg=admm, method=cfg.solver)
    elif cfg.method == "snn":
        result = horpca_s(z, nuclear_weight=cfg.weight, cfg=admm)
    else:
        result = horpca_c(z, cfg.ranks, cfg=admm)

    prefix = _prefix(cfg.out_prefix, cfg.input, cfg.method)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    write_tnsr(_sibling(prefix, ".lowrank.tnsr"), result.lowrank)
    write_tnsr(_sibling(prefix, ".sparse.tnsr"), result.sparse)
    summary = {
        "method": result.method,
        "iterations": result.iterations,
        "converged": result.converged,
        "primal_residual": result.primal_residual,
        "dual_residual": result.dual_residual,
        "feasibility": result.feasibility(z),
        "tucker_rank": ",".join(str(r) for r in tucker_rank(result.lowrank).ranks),
        "sparsity_percent": 100.0 * np.count_nonzero(result.sparse) / z.size,
    }
    text = format_summary(summary)
    _write_text(_sibling(prefix, ".summary.txt"), text)
    _emit(cfg, text)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


COMMANDS = {
    "decompose": cmd_decompose,
    "phase": cmd_phase,
    "analyze": cmd_analyze,
    "lda": cmd_lda,
    "baseline": cmd_baseline,
}
