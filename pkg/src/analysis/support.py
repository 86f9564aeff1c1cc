"""
Support Sets

Purpose:
The support Omega of the sparse component, and the projections P_Omega and
P_Omega_perp onto and off it.

Design choices:
- Entries are kept as F-order linear indices, sorted and deduplicated, so
  "sorted ascending in layout order" holds by construction.
- Index triples are recovered on demand with np.unravel_index.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.tensor_core.errors import DimensionMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SupportSet:
    dims: tuple
    linear: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise ValueError(f"Support dims must be positive, got {dims}.")
        linear = np.unique(np.asarray(self.linear, dtype=np.int64).ravel())
        size = int(np.prod(dims))
        if linear.size and (linear[0] < 0 or linear[-1] >= size):
            raise ValueError(f"Support index out of range for dims {dims}.")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "linear", linear)

    @classmethod
    def from_linear(cls, dims, linear):
        return cls(dims, linear)

    @classmethod
    def from_indices(cls, dims, indices):
        """Build from an (m, K) array of index tuples."""
        dims = tuple(int(d) for d in dims)
        indices = np.asarray(indices, dtype=np.int64).reshape(-1, len(dims))
        for k, d in enumerate(dims):
            if indices.size and (indices[:, k].min() < 0 or indices[:, k].max() >= d):
                raise ValueError(f"Support index out of range along mode {k + 1} (size {d}).")
        if indices.size == 0:
            return cls(dims, np.empty(0, dtype=np.int64))
        linear = np.ravel_multi_index(tuple(indices.T), dims, order="F")
        return cls(dims, linear)

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask, dtype=bool)
        return cls(mask.shape, np.flatnonzero(mask.ravel(order="F")))

    @property
    def m(self):
        return int(self.linear.size)

    @property
    def n_complement(self):
        return int(np.prod(self.dims)) - self.m

    def indices(self):
        if self.m == 0:
            return np.empty((0, len(self.dims)), dtype=np.int64)
        return np.column_stack(np.unravel_index(self.linear, self.dims, order="F"))

    def mask(self):
        flat = np.zeros(int(np.prod(self.dims)), dtype=bool)
        flat[self.linear] = True
        return flat.reshape(self.dims, order="F")


def _check_dims(t, s):
    if tuple(t.shape) != s.dims:
        raise DimensionMismatchError(f"Tensor dims {t.shape} do not match support dims {s.dims}.")


def project_support(t, s):
    t = np.asarray(t, dtype=float)
    _check_dims(t, s)
    return np.where(s.mask(), t, 0.0)


def project_support_complement(t, s):
    t = np.asarray(t, dtype=float)
    _check_dims(t, s)
    return np.where(s.mask(), 0.0, t)


def read_support(path, dims):
    """One whitespace-separated 0-based index tuple per line; '#' starts a comment."""
    rows = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != len(dims):
            raise ValueError(f"{path}:{line_no}: expected {len(dims)} indices, got {len(parts)}.")
        try:
            rows.append([int(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: non-integer index.") from exc
    support = SupportSet.from_indices(dims, np.array(rows, dtype=np.int64).reshape(-1, len(dims)))
    logger.debug("Read support of size %d from %s", support.m, path)
    return support
