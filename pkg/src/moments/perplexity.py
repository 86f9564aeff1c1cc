"""
Held-out likelihood and perplexity of a topic model.

Each test document's mixture theta is fitted by fold-in EM under the fixed
topics with a symmetric Dirichlet(alpha) pseudo-count, theta ∝ n_k + alpha.
The document log-likelihood is sum_w c_w log(sum_k phi_wk theta_k).

perplexity = exp(-L / d), d the vocabulary size; `per_token_perplexity`
divides by the number of scored tokens instead.
"""

import logging

import numpy as np

from config.settings import FOLD_IN_ITERS

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-300


def fold_in(phi_rows, counts, alpha, iters=FOLD_IN_ITERS):
    k = phi_rows.shape[1]
    theta = np.full(k, 1.0 / k)
    for _ in range(iters):
        probs = np.maximum(phi_rows @ theta, PROB_FLOOR)
        resp = phi_rows * theta / probs[:, None]
        nk = counts @ resp
        theta = (nk + alpha) / (nk.sum() + k * alpha)
    return theta


def held_out_log_likelihood(test, model, alpha, iters=FOLD_IN_ITERS):
    """Return (log-likelihood, scored tokens, ignored tokens)."""
    if alpha < 0:
        raise ValueError("Dirichlet alpha must be nonnegative.")
    phi = model.topics
    d = phi.shape[0]
    counts = test.counts
    total, scored, ignored = 0.0, 0.0, 0.0
    for n in range(test.n_docs):
        start, end = counts.indptr[n], counts.indptr[n + 1]
        ids = counts.indices[start:end]
        values = counts.data[start:end]
        inside = ids < d
        ignored += values[~inside].sum()
        ids, values = ids[inside], values[inside]
        if ids.size == 0:
            continue
        rows = phi[ids]
        theta = fold_in(rows, values, alpha, iters)
        total += float(values @ np.log(np.maximum(rows @ theta, PROB_FLOOR)))
        scored += values.sum()
    if ignored:
        logger.warning("Ignored %d test tokens with word ids outside the vocabulary of %d", int(ignored), d)
    return total, float(scored), float(ignored)


def perplexity(test, model, alpha, iters=FOLD_IN_ITERS):
    total, _, _ = held_out_log_likelihood(test, model, alpha, iters)
    return float(np.exp(-total / model.vocab_size))


def per_token_perplexity(test, model, alpha, iters=FOLD_IN_ITERS):
    total, scored, _ = held_out_log_likelihood(test, model, alpha, iters)
    if scored == 0:
        return 1.0
    return float(np.exp(-total / scored))
