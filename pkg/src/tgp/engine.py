"""Generational TGP loop over a population stored as a (M, words) uint64 array.

The best individual of each generation is copied into slot 0 of the next
one unless ``elitism`` is off; without it the best is routinely lost and
efforts come out an order of magnitude above the reference values.

Every generation draws all of its randomness in a few batched calls: the
insertion coin per slot, the gate symbol per slot, the terminal per slot, and
2*M tournaments. Slots are still independent, so this is the per-slot
procedure evaluated in bulk.

Random streams come from numpy's PCG64. Run ``i`` of an experiment with base
seed ``s`` uses ``derive_seed(s, i)``, the first 64-bit word of
``SeedSequence(s, spawn_key=(i,))``.
"""

from __future__ import annotations

import os
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    GATES_MAX,
    KOZA4,
    Chromosome,
    ContractError,
    FunctionSymbol,
    GateSet,
    TruthVector,
    apply_gate,
    gate_words,
    get_gate_set,
    saturating_add,
    window_mask,
)
from .parity import ParityProblem, terminal_vector, terminal_words
from .trace import TERMINAL, TraceArena, netlist, render_expression

_GATES_MAX = np.uint64(GATES_MAX)
SOLUTION_RENDER_DEPTH = 12


@dataclass(frozen=True)
class RunConfig:
    k: int
    pop_size: int
    generations: int
    p_insert: float = 0.05
    tournament_size: int = 2
    gate_set: GateSet = KOZA4
    seed: int = 0
    tracing: bool = False
    parsimony: bool = False
    elitism: bool = True
    stop_on_solve: bool = False

    def __post_init__(self):
        if isinstance(self.gate_set, str):
            object.__setattr__(self, "gate_set", get_gate_set(self.gate_set))
        if self.pop_size < 1 or self.generations < 1:
            raise ContractError("pop_size and generations must be positive")
        if not 0.0 <= self.p_insert <= 1.0:
            raise ContractError(f"p_insert must be in [0, 1], got {self.p_insert}")
        if not 1 <= self.tournament_size <= self.pop_size:
            raise ContractError("tournament_size must be in [1, pop_size]")
        if not 0 <= self.seed < 2**64:
            raise ContractError("seed must be an unsigned 64-bit integer")
        TruthVector.zeros(self.k)  # validates k


@dataclass(frozen=True)
class RunRecord:
    solved_at: int | None
    best_fitness_per_generation: tuple[int, ...]
    seed_used: int
    run_index: int = 0
    solution: str | None = None
    netlist: dict | None = field(default=None, compare=False, repr=False)
    solve_seconds: float | None = field(default=None, compare=False, repr=False)
    elapsed_seconds: float | None = field(default=None, compare=False, repr=False)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(base: int, run_index: int) -> int:
    ss = np.random.SeedSequence(base, spawn_key=(run_index,))
    return int(ss.generate_state(1, np.uint64)[0])


def hamming_rows(words: np.ndarray, target: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words ^ target).sum(axis=1, dtype=np.int64)


class Population(Sequence):
    """M chromosomes in columnar form; indexing yields ``Chromosome`` views.

    ``parents`` holds the (a, b) source indices of each slot in the previous
    generation, -1 where unused (insertions, unary gates, the elite slot,
    generation 0). ``inserted`` flags slots filled by the insertion operator.
    """

    def __init__(self, k, words, gates, trace=None, fitness=None, parents=None,
                 inserted=None):
        self.inserted = inserted
        self.k = k
        self.words = words
        self.gates = gates
        self.trace = trace
        self.fitness = fitness
        self.parents = parents

    def __len__(self):
        return len(self.words)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        tr = None if self.trace is None else int(self.trace[i])
        return Chromosome(TruthVector(self.k, self.words[i]), int(self.gates[i]), tr)

    @classmethod
    def from_chromosomes(cls, chroms: Sequence[Chromosome]) -> Population:
        if not chroms:
            raise ContractError("population must not be empty")
        k = chroms[0].values.k
        if any(c.values.k != k for c in chroms):
            raise ContractError("chromosomes have different k")
        words = np.stack([c.values.words for c in chroms])
        gates = np.array([c.gates for c in chroms], dtype=np.uint64)
        traced = all(c.trace is not None for c in chroms)
        trace = np.array([c.trace for c in chroms], dtype=np.int64) if traced else None
        return cls(k, words, gates, trace)

    def fitness_against(self, problem: ParityProblem) -> np.ndarray:
        if problem.k != self.k:
            raise ContractError(f"population k={self.k} vs problem k={problem.k}")
        if self.fitness is None:
            self.fitness = hamming_rows(self.words, problem.target.words)
        return self.fitness


def init_population(cfg: RunConfig, rng: np.random.Generator,
                    trace_arena: TraceArena | None = None) -> Population:
    M, k = cfg.pop_size, cfg.k
    j = rng.integers(0, k, M)
    words = terminal_words(k)[j].copy()
    trace = None
    if trace_arena is not None:
        trace = trace_arena.extend(np.full(M, TERMINAL), j, np.full(M, -1))
    return Population(k, words, np.zeros(M, dtype=np.uint64), trace)


def crossover(symbol: FunctionSymbol, parents: Sequence[Chromosome],
              trace_arena: TraceArena | None = None) -> Chromosome:
    values = apply_gate(symbol, [p.values for p in parents])
    gates = min(GATES_MAX, sum(p.gates for p in parents) + 1)
    trace = None
    if trace_arena is not None:
        if any(p.trace is None for p in parents):
            raise ContractError("tracing requires traced parents")
        trace = trace_arena.add_op(symbol.name, [p.trace for p in parents])
    return Chromosome(values, gates, trace)


def insertion(cfg: RunConfig, rng: np.random.Generator,
              trace_arena: TraceArena | None = None) -> Chromosome:
    j = int(rng.integers(0, cfg.k))
    trace = None if trace_arena is None else trace_arena.add_terminal(j)
    return Chromosome(terminal_vector(cfg.k, j), 0, trace)


def tournament_winners(samples: np.ndarray, fitnesses: np.ndarray,
                       gates: np.ndarray | None = None,
                       parsimony: bool = False) -> np.ndarray:
    """Winner index of each row of sampled indices.

    Lowest fitness wins. Ties go to the lowest gate count when ``parsimony``
    is set, then to the earliest sampled position.
    """
    samples = np.atleast_2d(samples)
    f = np.asarray(fitnesses)[samples]
    cand = f == f.min(axis=1, keepdims=True)
    if parsimony:
        g = np.asarray(gates, dtype=np.uint64)[samples]
        gmin = np.where(cand, g, _GATES_MAX).min(axis=1, keepdims=True)
        cand &= g == gmin
    pos = np.argmax(cand, axis=1)
    return samples[np.arange(len(samples)), pos]


def _tournaments(fitnesses, gates, n, size, rng, parsimony):
    samples = rng.integers(0, len(fitnesses), size=(n, size))
    return tournament_winners(samples, fitnesses, gates, parsimony)


def tournament_select(pop: Sequence[Chromosome], fitnesses: Sequence[int], size: int,
                      rng: np.random.Generator, parsimony: bool = False) -> int:
    if len(pop) == 0 or len(fitnesses) != len(pop):
        raise ContractError("fitnesses must align with a non-empty population")
    if size < 1:
        raise ContractError("tournament size must be positive")
    gates = pop.gates if isinstance(pop, Population) else [c.gates for c in pop]
    return int(_tournaments(np.asarray(fitnesses), np.asarray(gates, dtype=np.uint64),
                            1, size, rng, parsimony)[0])


def step_generation(pop: Population, cfg: RunConfig, rng: np.random.Generator,
                    problem: ParityProblem,
                    trace_arena: TraceArena | None = None) -> Population:
    if len(pop) != cfg.pop_size:
        raise ContractError(f"population has {len(pop)} members, expected {cfg.pop_size}")
    M, k, gs = cfg.pop_size, cfg.k, cfg.gate_set
    fit = pop.fitness_against(problem)

    insert = rng.random(M) < cfg.p_insert
    sym = rng.integers(0, len(gs), M)
    term = rng.integers(0, k, M)
    parents = _tournaments(fit, pop.gates, 2 * M, cfg.tournament_size, rng,
                           cfg.parsimony).reshape(M, 2)

    unary = gs.arities[sym] == 1
    pa = parents[:, 0]
    pb = np.where(unary, pa, parents[:, 1])
    words = gate_words(gs.tables[sym][:, None], pop.words[pa], pop.words[pb],
                       window_mask(k))
    words[insert] = terminal_words(k)[term[insert]]

    gb = np.where(unary, np.uint64(0), pop.gates[pb])
    gates = saturating_add(saturating_add(pop.gates[pa], gb), np.uint64(1))
    gates[insert] = 0

    parents[:, 1] = np.where(unary, -1, parents[:, 1])
    parents[insert] = -1

    keep = np.ones(M, dtype=bool)
    if cfg.elitism:
        best = int(np.argmin(fit))
        words[0], gates[0], parents[0] = pop.words[best], pop.gates[best], (-1, -1)
        insert[0] = keep[0] = False

    trace = None
    if trace_arena is not None:
        trace = np.empty(M, dtype=np.int64)
        op = np.where(insert, TERMINAL, sym)
        a = np.where(insert, term, pop.trace[pa])
        b = np.where(insert | unary, -1, pop.trace[pb])
        trace[keep] = trace_arena.extend(op[keep], a[keep], b[keep])
        if cfg.elitism:
            trace[0] = pop.trace[best]

    new = Population(k, words, gates, trace, parents=parents, inserted=insert)
    new.fitness_against(problem)
    return new


GenerationHook = Callable[[int, Population, "TraceArena | None"], None]


def run(cfg: RunConfig, problem: ParityProblem,
        on_generation: GenerationHook | None = None) -> RunRecord:
    """Evolve one run. Generation 0 is the initial population; ``solved_at``
    is the first generation holding a fitness-0 individual."""
    if cfg.k != problem.k:
        raise ContractError(f"config k={cfg.k} vs problem k={problem.k}")
    start = time.perf_counter()
    rng = make_rng(cfg.seed)
    arena = TraceArena(cfg.gate_set, capacity=cfg.pop_size * 8) if cfg.tracing else None
    pop = init_population(cfg, rng, arena)
    fit = pop.fitness_against(problem)
    if on_generation:
        on_generation(0, pop, arena)

    best: list[int] = []
    solved_at = solve_seconds = None
    solution = net = None

    def capture(gen, fit):
        nonlocal solved_at, solve_seconds, solution, net
        solved_at = gen
        solve_seconds = time.perf_counter() - start
        if arena is not None:
            node = int(pop.trace[int(np.argmin(fit))])
            solution = render_expression(arena, node, SOLUTION_RENDER_DEPTH)
            net = netlist(arena, node, cfg.k)

    if fit.min() == 0:
        capture(0, fit)
    for gen in range(1, cfg.generations + 1):
        if solved_at is not None and cfg.stop_on_solve:
            break
        pop = step_generation(pop, cfg, rng, problem, arena)
        b = int(pop.fitness.min())
        best.append(b)
        if on_generation:
            on_generation(gen, pop, arena)
        if solved_at is None and b == 0:
            capture(gen, pop.fitness)

    return RunRecord(
        solved_at=solved_at,
        best_fitness_per_generation=tuple(best),
        seed_used=cfg.seed,
        solution=solution,
        netlist=net,
        solve_seconds=solve_seconds,
        elapsed_seconds=time.perf_counter() - start,
    )


def _run_indexed(args):
    cfg, problem, i = args
    rec = run(replace(cfg, seed=derive_seed(cfg.seed, i)), problem)
    return replace(rec, run_index=i)


def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def run_many(cfg: RunConfig, problem: ParityProblem, runs: int,
             jobs: int | None = None) -> list[RunRecord]:
    """Independent runs with per-run seeds derived from ``cfg.seed``.

    Results come back ordered by run index whatever ``jobs`` is.
    """
    if runs < 1:
        raise ContractError("runs must be positive")
    jobs = default_jobs() if jobs is None else jobs
    tasks = [(cfg, problem, i) for i in range(runs)]
    if jobs <= 1 or runs == 1:
        return [_run_indexed(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, runs)) as pool:
        return list(pool.map(_run_indexed, tasks))
