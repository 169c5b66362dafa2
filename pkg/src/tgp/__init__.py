"""Traceless genetic programming for even-parity circuits."""

from .core import (
    ALL16,
    KOZA4,
    Chromosome,
    ContractError,
    FunctionSymbol,
    GateSet,
    TruthVector,
    apply_gate,
    get_gate_set,
    popcount_xor,
)
from .engine import (
    Population,
    RunConfig,
    RunRecord,
    crossover,
    init_population,
    insertion,
    run,
    run_many,
    step_generation,
    tournament_select,
)
from .metrics import (
    EffortReport,
    cumulative_probability,
    effort,
    effort_report,
    min_effort,
    runs_required,
    success_counts,
)
from .parity import ParityProblem, fitness, parity_targets, terminal_vector
from .trace import TraceArena, count_ops, eval_trace, render_expression

__all__ = [name for name in dir() if not name.startswith("_")]
