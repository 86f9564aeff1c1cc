"""
Topic Recovery Module

Purpose:
Turn the symmetric decomposition of the reduced third moment back into topic
distributions, and run the whole moments pipeline end to end.

Design choices:
- Terms are ranked by weight ||f_r||^3; the k largest become topics.
- Back-mapped vectors are oriented to a positive sum, clipped at zero and
  renormalized onto the simplex.
- A term's weight is the cube of its back-mapped sum, which is the
  coefficient 2 b_i / ((b0+2)(b0+1) b0) of its topic in M3.
- The reduced tensor is scaled to unit Frobenius norm before the solve so the
  regularization weights mean the same thing for any corpus; weights are
  scaled back afterwards.
- Uniqueness of the decomposition is assumed, not verified.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment

from config.settings import (
    BETA0,
    LDA_LAMBDA_S,
    LDA_LAMBDA_X,
    LDA_RESTARTS,
    MAX_ITERS,
    NUMERICAL_RANK_TOL,
    TOP_WORDS,
)
from src.moments.estimators import estimate_moments
from src.moments.reduction import reduce_m3, reduction_matrix
from src.solver.atomic import symmetric_solve
from src.solver.config import SolverConfig
from src.tensor_core.norms import frobenius

logger = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TopicModel:
    topics: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.topics.ndim != 2 or self.topics.shape[1] != self.weights.size:
            raise ValueError(f"{self.topics.shape} topic matrix does not match {self.weights.size} weights.")
        if np.any(self.topics < 0) or np.any(np.abs(self.topics.sum(axis=0) - 1.0) > STOCHASTIC_TOL):
            raise ValueError("Topic columns must be probability vectors.")
        if np.any(self.weights < 0):
            raise ValueError("Topic weights must be nonnegative.")

    @property
    def n_topics(self):
        return self.topics.shape[1]

    @property
    def vocab_size(self):
        return self.topics.shape[0]

    def dirichlet_parameters(self, beta0):
        """Invert the M3 coefficient 2 b_i / ((b0+2)(b0+1) b0) for b_i."""
        return self.weights * (beta0 + 2.0) * (beta0 + 1.0) * beta0 / 2.0

    def top_words(self, topic, n=TOP_WORDS):
        order = np.argsort(-self.topics[:, topic], kind="stable")
        return order[:n]


def recover_topics(report, q, k_topics, scale=1.0):
    shared = report.factors.factors[0]
    gamma = np.linalg.norm(shared, axis=0) ** 3
    if gamma.size == 0 or gamma.max() == 0.0:
        raise ValueError("Decomposition has no nonzero terms.")
    live = int(np.sum(gamma > NUMERICAL_RANK_TOL * gamma.max()))
    if live < k_topics:
        raise ValueError(f"Decomposition has {live} nonzero terms, fewer than the {k_topics} topics requested.")

    chosen = np.argsort(-gamma, kind="stable")[:k_topics]
    topics, weights = [], []
    for r in chosen:
        v = np.asarray(q).T @ shared[:, r]
        total = v.sum()
        if total < 0:
            v, total = -v, -total
        v = np.maximum(v, 0.0)
        mass = v.sum()
        if mass == 0.0:
            raise ValueError(f"Term {r} maps to a vector with no positive mass.")
        topics.append(v / mass)
        weights.append(scale * total ** 3)
    return TopicModel(np.column_stack(topics), np.asarray(weights))


def match_topics(estimated, truth):
    """
    Hungarian matching of topic columns by cosine similarity.
    Returns (est_index, cosines) with est_index[j] the estimated column
    matched to truth column j.
    """
    est = np.asarray(getattr(estimated, "topics", estimated), dtype=float)
    ref = np.asarray(getattr(truth, "topics", truth), dtype=float)
    if est.shape[0] != ref.shape[0]:
        raise ValueError(f"Topic matrices over {est.shape[0]} and {ref.shape[0]} words cannot be matched.")
    est_n = est / np.maximum(np.linalg.norm(est, axis=0), 1e-300)
    ref_n = ref / np.maximum(np.linalg.norm(ref, axis=0), 1e-300)
    cos = est_n.T @ ref_n
    rows, cols = linear_sum_assignment(-cos)
    order = np.argsort(cols)
    return rows[order], cos[rows[order], cols[order]]


def write_topics(model, prefix, vocabulary=None, top_n=TOP_WORDS):
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    words = list(vocabulary) if vocabulary is not None else [str(i) for i in range(model.vocab_size)]
    if len(words) < model.vocab_size:
        raise ValueError(f"Vocabulary has {len(words)} words for {model.vocab_size} topic rows.")

    frame = pd.DataFrame(model.topics, columns=[f"topic_{k}" for k in range(model.n_topics)])
    frame.insert(0, "word", words[:model.vocab_size])
    csv_path = prefix.with_name(prefix.name + ".topics.csv")
    frame.to_csv(csv_path, index=False, float_format="%.10g")

    txt_path = prefix.with_name(prefix.name + ".top_words.txt")
    with txt_path.open("w") as handle:
        for k in range(model.n_topics):
            listed = " ".join(words[i] for i in model.top_words(k, top_n))
            handle.write(f"topic_{k} weight={model.weights[k]:.6g}: {listed}\n")
    logger.info("Wrote %d topics to %s", model.n_topics, csv_path)
    return {"topics": csv_path, "top_words": txt_path}


@dataclass(eq=False)
class TopicFit:
    model: TopicModel
    report: object
    moments: object
    reduction: np.ndarray
    scale: float


def decompose_moments(moments, k_topics, k_prime=None, restarts=LDA_RESTARTS, seed=0,
                      lambda_x=LDA_LAMBDA_X, lambda_s=LDA_LAMBDA_S, rank_bound=None, max_iters=MAX_ITERS):
    """Reduce M3 to k_prime dimensions, decompose it symmetrically and recover k_topics topics."""
    if k_topics < 1 or restarts < 1:
        raise ValueError("Need at least one topic and one restart.")
    k_prime = k_topics if k_prime is None else k_prime
    if k_prime < k_topics:
        raise ValueError(f"Reduced dimension {k_prime} is below the topic count {k_topics}.")

    q = reduction_matrix(moments.m2, k_prime)
    reduced = reduce_m3(moments.m3, q)
    scale = frobenius(reduced)
    if scale == 0.0:
        raise ValueError("Reduced third moment is zero; nothing to decompose.")

    best = None
    for restart in range(restarts):
        cfg = SolverConfig(
            rank_bound=rank_bound or k_topics, lambda_x=lambda_x, lambda_s=lambda_s,
            symmetric=True, seed=seed + restart, max_iters=max_iters,
        )
        report = symmetric_solve(reduced / scale, cfg)
        logger.info("Restart %d: objective %.6e (%s)", restart, report.objective, report.status)
        if best is None or report.objective < best.objective:
            best = report

    model = recover_topics(best, q, k_topics, scale)
    return TopicFit(model, best, moments, q, scale)


def fit_topics(corpus, k_topics, k_prime=None, beta0=BETA0, **solve_options):
    """The full pipeline from a corpus: estimate moments, then `decompose_moments`."""
    moments = estimate_moments(corpus, beta0)
    return decompose_moments(moments, k_topics, k_prime, **solve_options)
