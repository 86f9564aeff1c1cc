"""
Synthetic Instances

Purpose:
Generate the low-rank plus sparse test tensors of the recovery experiment:
X = sum_r a_r ⊗ b_r ⊗ c_r with i.i.d. N(0, 1) factor entries, S supported
on a uniformly random m-subset with i.i.d. N(0, 1) values, Z = X + S.

Design choices:
- Every trial draws from its own generator seeded by `trial_seed`, so a
  trial is reproducible regardless of which worker runs it.
- The Tucker rank of X is checked per instance against min(R, d_k).
"""

import logging
from dataclasses import dataclass

import numpy as np

from config.settings import DEFAULT_DIMS
from src.analysis.support import SupportSet
from src.tensor_core.kruskal import KruskalTensor, dense_from_kruskal
from src.tensor_core.tucker import tucker_rank

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthSpec:
    r_true: int
    m: int
    dims: tuple = DEFAULT_DIMS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.r_true < 1:
            raise ValueError(f"True rank must be at least 1, got {self.r_true}.")
        if not 0 <= self.m <= int(np.prod(self.dims)):
            raise ValueError(f"Support size {self.m} does not fit dims {self.dims}.")
        if self.seed < 0:
            raise ValueError("Seeds must be nonnegative.")


@dataclass(frozen=True, eq=False)
class SynthInstance:
    lowrank: np.ndarray
    sparse: np.ndarray
    observed: np.ndarray
    support: SupportSet
    factors: KruskalTensor

    def __iter__(self):
        yield self.lowrank
        yield self.sparse
        yield self.observed
        yield self.support


def trial_seed(base_seed, rank_index, sparsity_index, trial):
    """Deterministic 32-bit seed for one grid trial."""
    sequence = np.random.SeedSequence([int(base_seed), int(rank_index), int(sparsity_index), int(trial)])
    return int(sequence.generate_state(1)[0])


def sparsity_to_support_size(fraction, dims):
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"Sparsity fraction must lie in [0, 1], got {fraction}.")
    return int(round(fraction * int(np.prod(dims))))


def gen_instance(spec):
    rng = np.random.default_rng(spec.seed)
    factors = KruskalTensor(tuple(rng.standard_normal((d, spec.r_true)) for d in spec.dims))
    lowrank = dense_from_kruskal(factors)

    size = int(np.prod(spec.dims))
    support = SupportSet.from_linear(spec.dims, rng.choice(size, size=spec.m, replace=False))
    flat = np.zeros(size)
    flat[support.linear] = rng.standard_normal(support.m)
    sparse = flat.reshape(spec.dims, order="F")
    return SynthInstance(lowrank, sparse, lowrank + sparse, support, factors)


def check_tucker_rank(instance):
    """True when every mode rank equals min(R, d_k); a mismatch is logged."""
    expected = tuple(min(instance.factors.rank, d) for d in instance.lowrank.shape)
    ranks = tucker_rank(instance.lowrank).ranks
    if ranks != expected:
        logger.warning("Instance Tucker rank %s differs from the expected %s", ranks, expected)
        return False
    return True
