"""Truth vectors, gate symbols and the word-parallel gate kernel.

A truth vector holds one output bit per fitness case. Case ``c`` lives in bit
``c % 64`` of word ``c // 64`` (little-endian word order). Vectors shorter than
a word keep every bit above ``2**k - 1`` cleared.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

WORD_BITS = 64
MAX_K = 16
GATES_MAX = (1 << 64) - 1

_ALL_ONES = np.uint64(GATES_MAX)
_ZERO = np.uint64(0)


class ContractError(ValueError):
    """Raised when an operation's preconditions are violated."""


def check_k(k: int) -> None:
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ContractError(f"k must be an integer, got {k!r}")
    if not 1 <= k <= MAX_K:
        raise ContractError(f"k must be in [1, {MAX_K}], got {k}")


def n_words(k: int) -> int:
    return max(1, (1 << k) // WORD_BITS)


@lru_cache(maxsize=None)
def window_mask(k: int) -> np.ndarray:
    """Per-word mask of the bits that belong to the ``2**k`` case window."""
    check_k(k)
    m = 1 << k
    if m >= WORD_BITS:
        mask = np.full(n_words(k), _ALL_ONES, dtype=np.uint64)
    else:
        mask = np.array([(1 << m) - 1], dtype=np.uint64)
    mask.flags.writeable = False
    return mask


def pack_bits(bits: Sequence[bool] | np.ndarray, k: int) -> np.ndarray:
    check_k(k)
    arr = np.asarray(bits, dtype=bool)
    m = 1 << k
    if arr.shape != (m,):
        raise ContractError(f"expected {m} bits for k={k}, got shape {arr.shape}")
    padded = np.zeros(n_words(k) * WORD_BITS, dtype=bool)
    padded[:m] = arr
    return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, k: int) -> np.ndarray:
    raw = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[: 1 << k].astype(bool)


class TruthVector:
    """Immutable packed vector of ``2**k`` output bits."""

    __slots__ = ("k", "words")

    def __init__(self, k: int, words: np.ndarray | Sequence[int]):
        check_k(k)
        arr = np.array(words, dtype=np.uint64)
        if arr.shape != (n_words(k),):
            raise ContractError(
                f"k={k} needs {n_words(k)} words, got shape {arr.shape}"
            )
        if np.any(arr & ~window_mask(k)):
            raise ContractError("padding bits beyond 2**k must be zero")
        arr.flags.writeable = False
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "words", arr)

    def __setattr__(self, name, value):
        raise AttributeError("TruthVector is immutable")

    def __reduce__(self):
        return (TruthVector, (self.k, np.array(self.words)))

    @classmethod
    def from_int(cls, k: int, value: int) -> TruthVector:
        check_k(k)
        if value < 0 or value >> (1 << k):
            raise ContractError(f"value does not fit in {1 << k} bits")
        words = [(value >> (WORD_BITS * w)) & GATES_MAX for w in range(n_words(k))]
        return cls(k, words)

    @classmethod
    def from_bits(cls, k: int, bits: Iterable[bool]) -> TruthVector:
        return cls(k, pack_bits(list(bits), k))

    @classmethod
    def zeros(cls, k: int) -> TruthVector:
        check_k(k)
        return cls(k, np.zeros(n_words(k), dtype=np.uint64))

    @property
    def m(self) -> int:
        return 1 << self.k

    def to_int(self) -> int:
        return sum(int(w) << (WORD_BITS * i) for i, w in enumerate(self.words))

    def bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.k)

    def bit(self, c: int) -> int:
        if not 0 <= c < self.m:
            raise IndexError(c)
        return int(self.words[c // WORD_BITS] >> np.uint64(c % WORD_BITS)) & 1

    def complement(self) -> TruthVector:
        return TruthVector(self.k, ~self.words & window_mask(self.k))

    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def __eq__(self, other):
        if not isinstance(other, TruthVector):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.k, self.words.tobytes()))

    def __repr__(self):
        width = max(1, self.m // 4)
        return f"TruthVector(k={self.k}, 0x{self.to_int():0{width}x})"


@dataclass(frozen=True)
class FunctionSymbol:
    """A boolean gate. ``semantics[2*a + b]`` is the output for inputs (a, b);
    unary symbols index by the single input."""

    name: str
    arity: int
    semantics: tuple[int, ...]

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ContractError(f"{self.name}: arity must be 1 or 2")
        if len(self.semantics) != 1 << self.arity:
            raise ContractError(
                f"{self.name}: semantics needs {1 << self.arity} entries"
            )
        if any(v not in (0, 1) for v in self.semantics):
            raise ContractError(f"{self.name}: semantics must be 0/1")

    @property
    def table(self) -> int:
        """4-bit table over (a, b) with bit ``2*a + b``; unary ignores b."""
        if self.arity == 2:
            t = self.semantics
        else:
            g0, g1 = self.semantics
            t = (g0, g0, g1, g1)
        return sum(v << i for i, v in enumerate(t))

    @classmethod
    def binary(cls, name: str, table: int) -> FunctionSymbol:
        return cls(name, 2, tuple((table >> i) & 1 for i in range(4)))


@dataclass(frozen=True)
class GateSet:
    name: str
    symbols: tuple[FunctionSymbol, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ContractError("gate set must not be empty")
        names = [s.name for s in self.symbols]
        if len(set(names)) != len(names):
            raise ContractError(f"duplicate symbol names in {names}")

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i: int) -> FunctionSymbol:
        return self.symbols[i]

    def index(self, name: str) -> int:
        for i, s in enumerate(self.symbols):
            if s.name == name:
                return i
        raise KeyError(name)

    @property
    def tables(self) -> np.ndarray:
        return np.array([s.table for s in self.symbols], dtype=np.int64)

    @property
    def arities(self) -> np.ndarray:
        return np.array([s.arity for s in self.symbols], dtype=np.int64)


# Names for the 16 two-input functions, indexed by 4-bit table.
BINARY_NAMES = (
    "FALSE", "NOR", "NA_AND_B", "NOT_A", "A_AND_NB", "NOT_B", "XOR", "NAND",
    "AND", "XNOR", "B", "NA_OR_B", "A", "A_OR_NB", "OR", "TRUE",
)

AND = FunctionSymbol.binary("AND", 0b1000)
OR = FunctionSymbol.binary("OR", 0b1110)
NAND = FunctionSymbol.binary("NAND", 0b0111)
NOR = FunctionSymbol.binary("NOR", 0b0001)
XOR = FunctionSymbol.binary("XOR", 0b0110)
NOT = FunctionSymbol("NOT", 1, (1, 0))
IDENTITY = FunctionSymbol("ID", 1, (0, 1))

KOZA4 = GateSet("koza4", (AND, OR, NAND, NOR))
ALL16 = GateSet(
    "all16",
    tuple(FunctionSymbol.binary(n, t) for t, n in enumerate(BINARY_NAMES)),
)
GATE_SETS = {g.name: g for g in (KOZA4, ALL16)}


def get_gate_set(name: str) -> GateSet:
    try:
        return GATE_SETS[name]
    except KeyError:
        raise ContractError(
            f"unknown gate set {name!r}; choose from {sorted(GATE_SETS)}"
        ) from None


def _table_masks(tables):
    """Expand table bits into all-ones/all-zero word masks (broadcastable)."""
    t = np.asarray(tables, dtype=np.int64)
    return [np.where((t >> i) & 1, _ALL_ONES, _ZERO) for i in range(4)]


def gate_words(tables, a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Shannon expansion of a 4-entry table over operand words.

    ``tables`` is a scalar or an array broadcastable against ``a``/``b`` rows;
    a constant 13 bitwise operations per word regardless of the gate.
    """
    t0, t1, t2, t3 = _table_masks(tables)
    nb = ~b
    hi = (t3 & b) | (t2 & nb)
    lo = (t1 & b) | (t0 & nb)
    return ((a & hi) | (~a & lo)) & mask


def apply_gate(symbol: FunctionSymbol, operands: Sequence[TruthVector]) -> TruthVector:
    if len(operands) != symbol.arity:
        raise ContractError(
            f"{symbol.name} takes {symbol.arity} operands, got {len(operands)}"
        )
    k = operands[0].k
    if any(op.k != k for op in operands):
        raise ContractError("operands have different k")
    a = operands[0].words
    b = operands[1].words if symbol.arity == 2 else a
    return TruthVector(k, gate_words(symbol.table, a, b, window_mask(k)))


def popcount_xor(a: TruthVector, b: TruthVector) -> int:
    if a.k != b.k:
        raise ContractError(f"k mismatch: {a.k} vs {b.k}")
    return int(np.bitwise_count(a.words ^ b.words).sum())


def saturating_add(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """uint64 addition clamped at GATES_MAX."""
    s = x + y
    return np.where(s < x, _ALL_ONES, s)


@dataclass(frozen=True)
class Chromosome:
    values: TruthVector
    gates: int = 0
    trace: int | None = None

    @property
    def saturated(self) -> bool:
        return self.gates >= GATES_MAX
