"""Koza computational-effort statistics over a batch of runs."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Sequence

from .core import ContractError
from .engine import RunRecord

DEFAULT_Z = 0.99

# Ratios within this many ulps of an integer are treated as that integer.
_CEIL_ULPS = 4


def success_counts(records: Sequence[RunRecord], generations: int) -> list[int]:
    """Ns(i) for i = 0..generations: runs solved at or before generation i."""
    if not records:
        raise ContractError("no run records")
    hist = [0] * (generations + 1)
    for r in records:
        if r.solved_at is not None and r.solved_at <= generations:
            hist[r.solved_at] += 1
    out, acc = [], 0
    for h in hist:
        acc += h
        out.append(acc)
    return out


def cumulative_probability(ns_i: int, n_total: int) -> float:
    if n_total < 1:
        raise ContractError("n_total must be at least 1")
    if not 0 <= ns_i <= n_total:
        raise ContractError(f"Ns(i)={ns_i} outside [0, {n_total}]")
    return ns_i / n_total


def _ceil_tolerant(x: float) -> int:
    nearest = round(x)
    if abs(x - nearest) <= _CEIL_ULPS * sys.float_info.epsilon * max(1.0, abs(x)):
        return int(nearest)
    return math.ceil(x)


def runs_required(p: float, z: float = DEFAULT_Z) -> int | None:
    """R(z): independent runs needed to succeed with probability z.

    None when p == 0; 1 when p == 1.
    """
    if not 0.0 < z < 1.0:
        raise ContractError(f"z must be in (0, 1), got {z}")
    if not 0.0 <= p <= 1.0:
        raise ContractError(f"p must be in [0, 1], got {p}")
    if p == 0.0:
        return None
    if p == 1.0:
        return 1
    return max(1, _ceil_tolerant(math.log(1.0 - z) / math.log(1.0 - p)))


def effort(pop_size: int, generation: int, runs: int) -> int:
    """I(M, i, z) = M * R(z) * i, with i counted from 1."""
    return pop_size * runs * generation


@dataclass(frozen=True)
class EffortRow:
    generation: int
    ns: int
    p: float
    r: int | None
    effort: int | None


@dataclass(frozen=True)
class EffortReport:
    rows: tuple[EffortRow, ...]
    min_effort: tuple[int, int] | None
    z: float
    pop_size: int
    n_total: int


def min_effort(rows: Sequence[EffortRow]) -> tuple[int, int] | None:
    """(I*, i*) over rows with i >= 1 and a defined effort; ties keep the smaller i."""
    best = None
    for row in rows:
        if row.generation < 1 or row.effort is None:
            continue
        if best is None or row.effort < best[0]:
            best = (row.effort, row.generation)
    return best


def effort_report(records: Sequence[RunRecord], pop_size: int, generations: int,
                  z: float = DEFAULT_Z) -> EffortReport:
    ns = success_counts(records, generations)
    n_total = len(records)
    rows = []
    for i, n in enumerate(ns):
        p = cumulative_probability(n, n_total)
        r = runs_required(p, z)
        rows.append(EffortRow(i, n, p, r, None if r is None else effort(pop_size, i, r)))
    return EffortReport(tuple(rows), min_effort(rows), z, pop_size, n_total)
