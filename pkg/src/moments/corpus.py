"""
Corpus Module

Purpose:
Bag-of-words documents for the method-of-moments topic pipeline, read from
the sparse text format or drawn from a synthetic LDA model.

File format:
    one document per line, `wordId:count` pairs separated by spaces;
    word ids are 0-based; a blank line is an empty document.
The vocabulary file holds one word per line, line i naming word id i.

Design choices:
- Counts are held as a scipy CSR matrix (documents x vocabulary) so moment
  accumulation can walk it in row chunks.
- Parse errors name the file and line number.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Corpus:
    vocab_size: int
    counts: sparse.csr_matrix

    def __post_init__(self):
        if self.vocab_size < 1:
            raise ValueError("Vocabulary size must be positive.")
        if self.counts.shape[1] != self.vocab_size:
            raise ValueError(
                f"Count matrix has {self.counts.shape[1]} columns for a vocabulary of {self.vocab_size}."
            )
        if self.counts.nnz and (self.counts.data.min() < 0 or np.any(self.counts.data != np.round(self.counts.data))):
            raise ValueError("Word counts must be nonnegative integers.")

    @classmethod
    def from_docs(cls, docs, vocab_size):
        """Build from a list of {word_id: count} dicts."""
        rows, cols, vals = [], [], []
        for n, doc in enumerate(docs):
            for word, count in doc.items():
                rows.append(n)
                cols.append(int(word))
                vals.append(count)
        index = (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))
        counts = sparse.csr_matrix((np.asarray(vals, dtype=float), index), shape=(len(docs), vocab_size))
        counts.sum_duplicates()
        return cls(vocab_size, counts)

    @classmethod
    def from_dense(cls, counts):
        counts = np.asarray(counts, dtype=float)
        return cls(counts.shape[1], sparse.csr_matrix(counts))

    @property
    def n_docs(self):
        return self.counts.shape[0]

    @property
    def doc_lengths(self):
        return np.asarray(self.counts.sum(axis=1)).ravel()

    @property
    def n_tokens(self):
        return float(self.counts.sum())


def _parse_pair(token, where):
    word, sep, count = token.partition(":")
    if not sep:
        raise ValueError(f"{where}: expected wordId:count, got '{token}'.")
    try:
        word_id, value = int(word), int(count)
    except ValueError:
        raise ValueError(f"{where}: non-integer entry '{token}'.") from None
    if word_id < 0 or value < 0:
        raise ValueError(f"{where}: negative entry '{token}'.")
    return word_id, value


def read_corpus(path, vocab_size=None):
    """
    Read a sparse-format corpus. Without `vocab_size` the vocabulary is
    sized by the largest word id; with it, larger ids are an error.
    """
    path = Path(path)
    docs = []
    with path.open() as handle:
        for line_no, line in enumerate(handle, start=1):
            doc = {}
            for token in line.split():
                word_id, value = _parse_pair(token, f"{path}:{line_no}")
                if vocab_size is not None and word_id >= vocab_size:
                    raise ValueError(f"{path}:{line_no}: word id {word_id} outside vocabulary of {vocab_size}.")
                doc[word_id] = doc.get(word_id, 0) + value
            docs.append(doc)

    if vocab_size is None:
        vocab_size = 1 + max((max(doc) for doc in docs if doc), default=-1)
        if vocab_size == 0:
            raise ValueError(f"{path}: corpus has no words.")
    logger.info("Read %d documents over %d words from %s", len(docs), vocab_size, path)
    return Corpus.from_docs(docs, vocab_size)


def read_vocabulary(path):
    with Path(path).open() as handle:
        return [line.rstrip("\n") for line in handle]


def write_corpus(path, corpus):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    counts = corpus.counts
    with path.open("w") as handle:
        for n in range(corpus.n_docs):
            start, end = counts.indptr[n], counts.indptr[n + 1]
            pairs = sorted(zip(counts.indices[start:end], counts.data[start:end]))
            handle.write(" ".join(f"{w}:{int(c)}" for w, c in pairs) + "\n")


def sample_lda_corpus(topics, beta, n_docs, doc_length, seed=None):
    """
    Draw documents from LDA: h ~ Dirichlet(beta), then `doc_length` words
    i.i.d. from topics @ h.
    """
    topics = np.asarray(topics, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if topics.shape[1] != beta.size:
        raise ValueError(f"{topics.shape[1]} topics but {beta.size} Dirichlet parameters.")
    if np.any(beta <= 0):
        raise ValueError("Dirichlet parameters must be positive.")
    if doc_length < 1 or n_docs < 0:
        raise ValueError("Need a positive document length and a nonnegative document count.")

    rng = np.random.default_rng(seed)
    mixtures = rng.dirichlet(beta, size=n_docs)
    word_probs = mixtures @ topics.T
    word_probs /= word_probs.sum(axis=1, keepdims=True)
    counts = rng.multinomial(doc_length, word_probs)
    return Corpus(topics.shape[0], sparse.csr_matrix(counts.astype(float)))
