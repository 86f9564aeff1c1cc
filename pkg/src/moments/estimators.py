"""
LDA Moment Estimators

Purpose:
Empirical and population versions of the centered LDA moments

    M1 = E[w1]
    M2 = E[w1 ⊗ w2] - b0/(b0+1) M1 ⊗ M1
    M3 = E[w1 ⊗ w2 ⊗ w3]
         - b0/(b0+2) (E[w1 ⊗ w2 ⊗ M1] + E[w1 ⊗ M1 ⊗ w2] + E[M1 ⊗ w1 ⊗ w2])
         + 2 b0^2 / ((b0+2)(b0+1)) M1 ⊗ M1 ⊗ M1

whose population values are sums of rank-one terms in the topic vectors:
M2 = sum_i b_i/((b0+1) b0) nu_i ⊗ nu_i, M3 = sum_i 2 b_i/((b0+2)(b0+1) b0) nu_i^⊗3.

Design choices:
- Cross moments use distinct token positions within a document. For counts c
  and length l the pair statistic is (c ⊗ c - diag(c)) / (l (l-1)); the
  triple statistic removes the three partial diagonals and adds back twice
  the full diagonal, over l (l-1) (l-2). Documents contribute equally.
- Documents with fewer than three tokens are skipped (counted and logged).
- Accumulation walks the corpus in row chunks of MOMENT_CHUNK_DOCS.
"""

import logging
from dataclasses import dataclass

import numpy as np

from config.settings import MIN_DOC_LENGTH, MOMENT_CHUNK_DOCS

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10


def _symmetrize3(t):
    perms = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))
    return sum(np.transpose(t, p) for p in perms) / 6.0


@dataclass(frozen=True, eq=False)
class LdaMoments:
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    beta0: float

    def __post_init__(self):
        d = self.m1.size
        if self.m2.shape != (d, d) or self.m3.shape != (d, d, d):
            raise ValueError(f"Moment shapes {self.m2.shape}, {self.m3.shape} do not match vocabulary {d}.")
        scale = max(1.0, float(np.abs(self.m2).max(initial=0.0)))
        if np.abs(self.m2 - self.m2.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise ValueError("Second moment is not symmetric.")
        if np.abs(self.m3 - np.transpose(self.m3, (1, 0, 2))).max(initial=0.0) > SYMMETRY_TOL * scale or \
                np.abs(self.m3 - np.transpose(self.m3, (0, 2, 1))).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise ValueError("Third moment is not symmetric.")

    @property
    def vocab_size(self):
        return self.m1.size


@dataclass(frozen=True, eq=False)
class RawMoments:
    """Uncentered E[w1], E[w1 ⊗ w2], E[w1 ⊗ w2 ⊗ w3] and how many documents fed them."""

    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    n_docs: int
    n_skipped: int


def raw_moments(corpus, chunk_docs=MOMENT_CHUNK_DOCS):
    d = corpus.vocab_size
    e1 = np.zeros(d)
    e2 = np.zeros((d, d))
    e3 = np.zeros((d, d, d))
    lengths = corpus.doc_lengths
    keep = np.flatnonzero(lengths >= MIN_DOC_LENGTH)
    skipped = corpus.n_docs - keep.size
    if skipped:
        logger.warning("Skipped %d documents with fewer than %d tokens", skipped, MIN_DOC_LENGTH)
    if keep.size == 0:
        raise ValueError("No document has enough tokens to estimate third moments.")

    diag = np.arange(d)
    for start in range(0, keep.size, chunk_docs):
        rows = keep[start:start + chunk_docs]
        c = corpus.counts[rows].toarray()
        l = lengths[rows]
        w1 = 1.0 / l
        w2 = 1.0 / (l * (l - 1))
        w3 = 1.0 / (l * (l - 1) * (l - 2))

        e1 += w1 @ c
        e2 += np.einsum("n,ni,nj->ij", w2, c, c)
        e2[diag, diag] -= w2 @ c

        e3 += np.einsum("n,ni,nj,nk->ijk", w3, c, c, c)
        pairs = np.einsum("n,ni,nk->ik", w3, c, c)
        e3[diag, diag, :] -= pairs
        e3[diag, :, diag] -= pairs
        e3[:, diag, diag] -= pairs.T
        e3[diag, diag, diag] += 2.0 * (w3 @ c)
        logger.debug("Accumulated moments over %d/%d documents", min(start + chunk_docs, keep.size), keep.size)

    n = keep.size
    e2 = (e2 + e2.T) / (2.0 * n)
    return RawMoments(e1 / n, e2, _symmetrize3(e3) / n, int(n), int(skipped))


def center_moments(raw, beta0):
    if not beta0 > 0:
        raise ValueError("beta0 must be positive.")
    m1 = raw.e1
    outer11 = np.multiply.outer(m1, m1)
    m2 = raw.e2 - beta0 / (beta0 + 1.0) * outer11

    cross = (
        np.multiply.outer(raw.e2, m1)
        + np.transpose(np.multiply.outer(raw.e2, m1), (0, 2, 1))
        + np.multiply.outer(m1, raw.e2)
    )
    m3 = (
        raw.e3
        - beta0 / (beta0 + 2.0) * cross
        + 2.0 * beta0 ** 2 / ((beta0 + 2.0) * (beta0 + 1.0)) * np.multiply.outer(outer11, m1)
    )
    return LdaMoments(m1, m2, _symmetrize3(m3), float(beta0))


def estimate_moments(corpus, beta0, chunk_docs=MOMENT_CHUNK_DOCS):
    if not beta0 > 0:
        raise ValueError("beta0 must be positive.")
    raw = raw_moments(corpus, chunk_docs)
    logger.info("Estimated moments from %d documents (%d skipped)", raw.n_docs, raw.n_skipped)
    return center_moments(raw, beta0)


def population_moments(topics, beta):
    topics = np.asarray(topics, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if topics.ndim != 2 or topics.shape[1] != beta.size:
        raise ValueError(f"{topics.shape} topic matrix does not match {beta.size} Dirichlet parameters.")
    if np.any(beta <= 0):
        raise ValueError("Dirichlet parameters must be positive.")
    beta0 = float(beta.sum())
    m1 = topics @ beta / beta0
    w2 = beta / ((beta0 + 1.0) * beta0)
    w3 = 2.0 * beta / ((beta0 + 2.0) * (beta0 + 1.0) * beta0)
    m2 = (topics * w2) @ topics.T
    m3 = np.einsum("r,ir,jr,kr->ijk", w3, topics, topics, topics)
    return LdaMoments(m1, m2, _symmetrize3(m3), beta0)
