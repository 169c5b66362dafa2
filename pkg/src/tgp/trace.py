"""Optional program recorder.

Each offspring appends one node that points at its parents' nodes, so the
arena is a DAG in topological order and grows linearly with M * G even though
the expanded trees grow exponentially.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GATES_MAX, ContractError, GateSet, TruthVector, apply_gate
from .parity import terminal_vector

# Marker in the op column for terminal nodes.
TERMINAL = -1


@dataclass(frozen=True)
class Terminal:
    j: int


@dataclass(frozen=True)
class Op:
    symbol: str
    children: tuple[int, ...]


TraceNode = Terminal | Op


class TraceArena:
    """Append-only node store backed by growable numpy columns."""

    def __init__(self, gate_set: GateSet, capacity: int = 1024):
        self.gate_set = gate_set
        self._op = np.empty(capacity, dtype=np.int16)
        self._a = np.empty(capacity, dtype=np.int64)
        self._b = np.empty(capacity, dtype=np.int64)
        self._n = 0

    def __len__(self):
        return self._n

    def _reserve(self, extra: int) -> None:
        need = self._n + extra
        if need <= len(self._op):
            return
        cap = max(need, 2 * len(self._op))
        for name in ("_op", "_a", "_b"):
            old = getattr(self, name)
            new = np.empty(cap, dtype=old.dtype)
            new[: self._n] = old[: self._n]
            setattr(self, name, new)

    def extend(self, op: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Append a batch of nodes; returns their ids.

        ``op`` is TERMINAL or a symbol index; ``a`` is the terminal index or
        first child; ``b`` is the second child or -1.
        """
        n = len(op)
        for child_col, is_child in ((a, op != TERMINAL), (b, b >= 0)):
            kids = child_col[is_child]
            if kids.size and (kids.min() < 0 or kids.max() >= self._n):
                raise ContractError("child reference must point to an earlier node")
        self._reserve(n)
        s = slice(self._n, self._n + n)
        self._op[s], self._a[s], self._b[s] = op, a, b
        self._n += n
        return np.arange(s.start, s.stop, dtype=np.int64)

    def add_terminal(self, j: int) -> int:
        return int(self.extend(np.array([TERMINAL]), np.array([j]), np.array([-1]))[0])

    def add_op(self, symbol: str, children: list[int] | tuple[int, ...]) -> int:
        idx = self.gate_set.index(symbol)
        if len(children) != self.gate_set[idx].arity:
            raise ContractError(f"{symbol} needs {self.gate_set[idx].arity} children")
        b = children[1] if len(children) == 2 else -1
        return int(self.extend(np.array([idx]), np.array([children[0]]), np.array([b]))[0])

    def _check(self, node: int) -> None:
        if not 0 <= node < self._n:
            raise ContractError(f"dangling trace reference {node} (arena size {self._n})")

    def node(self, i: int) -> TraceNode:
        self._check(i)
        op = int(self._op[i])
        if op == TERMINAL:
            return Terminal(int(self._a[i]))
        kids = (int(self._a[i]),) if self._b[i] < 0 else (int(self._a[i]), int(self._b[i]))
        return Op(self.gate_set[op].name, kids)

    def children(self, i: int) -> tuple[int, ...]:
        if self._op[i] == TERMINAL:
            return ()
        return (int(self._a[i]),) if self._b[i] < 0 else (int(self._a[i]), int(self._b[i]))

    def reachable(self, node: int) -> list[int]:
        """Ids reachable from ``node``, sorted ascending (a topological order)."""
        self._check(node)
        seen = {node}
        stack = [node]
        while stack:
            for c in self.children(stack.pop()):
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return sorted(seen)


def _postorder(arena: TraceArena, node: int, memo: dict):
    """Yield ids under ``node`` missing from ``memo``, children before parents."""
    arena._check(node)
    stack = [node]
    while stack:
        i = stack[-1]
        if i in memo:
            stack.pop()
            continue
        pending = [c for c in arena.children(i) if c not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        yield i  # caller fills memo[i] before resuming


def eval_trace(arena: TraceArena, node: int, k: int, memo: dict | None = None) -> TruthVector:
    """Evaluate the program rooted at ``node`` over all 2**k cases.

    Pass the same ``memo`` across calls to share work between roots.
    """
    memo = {} if memo is None else memo
    for i in _postorder(arena, node, memo):
        n = arena.node(i)
        if isinstance(n, Terminal):
            memo[i] = terminal_vector(k, n.j)
        else:
            sym = arena.gate_set[arena.gate_set.index(n.symbol)]
            memo[i] = apply_gate(sym, [memo[c] for c in n.children])
    return memo[node]


def count_ops(arena: TraceArena, node: int, memo: dict | None = None) -> int:
    """Gate count of the tree expansion of ``node``, saturating at GATES_MAX."""
    memo = {} if memo is None else memo
    for i in _postorder(arena, node, memo):
        kids = arena.children(i)
        memo[i] = min(GATES_MAX, 1 + sum(memo[c] for c in kids)) if kids else 0
    return memo[node]


def count_distinct_ops(arena: TraceArena, node: int) -> int:
    """Number of distinct operator nodes in the shared DAG."""
    return sum(1 for i in arena.reachable(node) if arena.children(i))


ELLIPSIS = "…"


def render_length_bound(max_depth: int, name_width: int) -> int:
    """Upper bound on ``len(render_expression(...))``.

    At most ``2**max_depth - 1`` operators and ``2**max_depth`` leaf tokens are
    written; an operator costs its name plus 3 characters, a leaf at most
    ``max(name_width, 23)`` plus a separating space.
    """
    ops = 2**max_depth - 1
    leaves = 2**max_depth
    return ops * (name_width + 3) + leaves * (max(name_width, 23) + 1)


def render_expression(arena: TraceArena, node: int, max_depth: int = 12) -> str:
    """Prefix rendering such as ``(NAND (AND d0 d1) d2)``.

    Subtrees below ``max_depth`` operator levels collapse to ``…[n]`` where n
    is the subtree's gate count.
    """
    if max_depth < 1:
        raise ContractError("max_depth must be positive")
    arena._check(node)
    counts: dict = {}
    out: list[str] = []
    # explicit stack: deep lineages exceed the recursion limit
    stack: list[tuple[int, int] | str] = [(node, 0)]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        i, depth = item
        n = arena.node(i)
        if isinstance(n, Terminal):
            out.append(f"d{n.j}")
        elif depth >= max_depth:
            out.append(f"{ELLIPSIS}[{count_ops(arena, i, counts)}]")
        else:
            out.append(f"({n.symbol} ")
            stack.append(")")
            for pos in range(len(n.children) - 1, -1, -1):
                stack.append((n.children[pos], depth + 1))
                if pos:
                    stack.append(" ")
    return "".join(out)


def netlist(arena: TraceArena, node: int, k: int) -> dict:
    """Reachable sub-DAG of ``node`` renumbered from 0, children first."""
    ids = arena.reachable(node)
    remap = {old: new for new, old in enumerate(ids)}
    nodes = []
    for old in ids:
        n = arena.node(old)
        if isinstance(n, Terminal):
            nodes.append({"id": remap[old], "op": f"d{n.j}"})
        else:
            nodes.append(
                {"id": remap[old], "op": n.symbol, "in": [remap[c] for c in n.children]}
            )
    return {
        "k": k,
        "gate_set": arena.gate_set.name,
        "output": remap[node],
        "gates_tree": count_ops(arena, node),
        "gates_dag": count_distinct_ops(arena, node),
        "nodes": nodes,
    }
