"""Even-parity targets, terminal inputs and Hamming fitness."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Chromosome, ContractError, TruthVector, check_k, pack_bits, popcount_xor


@lru_cache(maxsize=None)
def parity_targets(k: int) -> TruthVector:
    check_k(k)
    cases = np.arange(1 << k, dtype=np.uint64)
    return TruthVector(k, pack_bits(np.bitwise_count(cases) % 2 == 0, k))


@lru_cache(maxsize=None)
def terminal_vector(k: int, j: int) -> TruthVector:
    """Input ``d_j``: bit ``c`` is bit ``j`` of the case index."""
    check_k(k)
    if not 0 <= j < k:
        raise ContractError(f"terminal index {j} out of range for k={k}")
    cases = np.arange(1 << k, dtype=np.uint64)
    return TruthVector(k, pack_bits((cases >> np.uint64(j)) & np.uint64(1), k))


@lru_cache(maxsize=None)
def terminal_words(k: int) -> np.ndarray:
    """All terminal vectors stacked as a (k, n_words) array."""
    out = np.stack([terminal_vector(k, j).words for j in range(k)])
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ParityProblem:
    k: int
    target: TruthVector

    @classmethod
    def even(cls, k: int) -> ParityProblem:
        return cls(k, parity_targets(k))


def fitness(c: Chromosome, p: ParityProblem) -> int:
    """Hamming distance to the target; 0 means solved."""
    if c.values.k != p.k:
        raise ContractError(f"chromosome k={c.values.k} vs problem k={p.k}")
    return popcount_xor(c.values, p.target)
