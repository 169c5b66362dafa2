import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tgp.core import (
    ALL16,
    AND,
    KOZA4,
    NAND,
    NOR,
    NOT,
    Chromosome,
    ContractError,
    FunctionSymbol,
    GateSet,
    TruthVector,
    apply_gate,
    get_gate_set,
    n_words,
    popcount_xor,
    window_mask,
)


def reference_gate(symbol, operands):
    """Per-bit evaluation straight from the symbol's truth table."""
    k = operands[0].k
    cols = [op.bits() for op in operands]
    out = []
    for c in range(1 << k):
        if symbol.arity == 2:
            out.append(symbol.semantics[2 * int(cols[0][c]) + int(cols[1][c])])
        else:
            out.append(symbol.semantics[int(cols[0][c])])
    return TruthVector.from_bits(k, out)


@st.composite
def vectors(draw, k=None, count=1):
    k = draw(st.integers(1, 8)) if k is None else k
    m = 1 << k
    return [TruthVector.from_int(k, draw(st.integers(0, (1 << m) - 1))) for _ in range(count)]


def tv(k, value):
    return TruthVector.from_int(k, value)


class TestTruthVector:
    def test_layout_and_roundtrip(self):
        v = TruthVector.from_bits(3, [1, 0, 0, 1, 0, 1, 1, 0])
        assert v.to_int() == 0b01101001
        assert [v.bit(c) for c in range(8)] == [1, 0, 0, 1, 0, 1, 1, 0]
        assert list(v.bits()) == [True, False, False, True, False, True, True, False]

    def test_multiword_little_endian(self):
        value = (1 << 70) | 1
        v = tv(7, value)
        assert n_words(7) == 2
        assert list(v.words) == [1, 1 << 6]
        assert v.to_int() == value

    def test_padding_must_be_zero(self):
        with pytest.raises(ContractError):
            TruthVector(2, [1 << 4])

    def test_value_too_wide(self):
        with pytest.raises(ContractError):
            tv(2, 1 << 4)

    @pytest.mark.parametrize("k", [0, 17, -1])
    def test_k_range(self, k):
        with pytest.raises(ContractError):
            TruthVector.zeros(k)

    def test_k16_supported(self):
        v = TruthVector.zeros(16).complement()
        assert v.popcount() == 1 << 16

    def test_equality_and_hash(self):
        assert tv(3, 5) == tv(3, 5)
        assert tv(3, 5) != tv(3, 6)
        assert tv(2, 5) != tv(3, 5)
        assert len({tv(3, 5), tv(3, 5), tv(3, 6)}) == 2

    def test_immutable(self):
        v = tv(3, 5)
        with pytest.raises(AttributeError):
            v.k = 4
        with pytest.raises(ValueError):
            v.words[0] = 1

    def test_complement_stays_in_window(self):
        assert tv(2, 0b1010).complement() == tv(2, 0b0101)


class TestGateSets:
    def test_koza4(self):
        assert [s.name for s in KOZA4] == ["AND", "OR", "NAND", "NOR"]
        assert all(s.arity == 2 for s in KOZA4)

    def test_all16_distinct(self):
        assert len(ALL16) == 16
        assert sorted(s.table for s in ALL16) == list(range(16))
        assert len({s.name for s in ALL16}) == 16

    def test_lookup(self):
        assert get_gate_set("koza4") is KOZA4
        with pytest.raises(ContractError):
            get_gate_set("nope")

    def test_duplicate_names_rejected(self):
        with pytest.raises(ContractError):
            GateSet("dup", (AND, AND))

    def test_empty_rejected(self):
        with pytest.raises(ContractError):
            GateSet("empty", ())

    def test_semantics_length_checked(self):
        with pytest.raises(ContractError):
            FunctionSymbol("BAD", 2, (0, 1))
        with pytest.raises(ContractError):
            FunctionSymbol("BAD", 3, (0,) * 8)


class TestApplyGate:
    def test_and_example(self):
        assert apply_gate(AND, [tv(2, 0b1010), tv(2, 0b1001)]) == tv(2, 0b1000)

    @given(vectors())
    def test_nor_self_is_not(self, vs):
        (v,) = vs
        assert apply_gate(NOR, [v, v]) == v.complement()

    def test_unary(self):
        assert apply_gate(NOT, [tv(2, 0b1010)]) == tv(2, 0b0101)

    def test_arity_mismatch(self):
        with pytest.raises(ContractError):
            apply_gate(AND, [tv(2, 1)])
        with pytest.raises(ContractError):
            apply_gate(NOT, [tv(2, 1), tv(2, 1)])

    def test_k_mismatch(self):
        with pytest.raises(ContractError):
            apply_gate(AND, [tv(2, 1), tv(3, 1)])

    def test_nand_random_64bit(self):
        rng = np.random.default_rng(0)
        for k in (6, 7, 8):
            for _ in range(20):
                a = TruthVector(k, rng.integers(0, 2**64, n_words(k), dtype=np.uint64))
                b = TruthVector(k, rng.integers(0, 2**64, n_words(k), dtype=np.uint64))
                assert apply_gate(NAND, [a, b]) == reference_gate(NAND, [a, b])

    @settings(max_examples=300)
    @given(st.integers(1, 8).flatmap(lambda k: vectors(k=k, count=2)), st.sampled_from(ALL16.symbols))
    def test_matches_per_bit_reference(self, ab, sym):
        assert apply_gate(sym, ab) == reference_gate(sym, ab)

    @given(st.integers(1, 8).flatmap(lambda k: vectors(k=k, count=2)), st.sampled_from(ALL16.symbols))
    def test_padding_untouched(self, ab, sym):
        r = apply_gate(sym, ab)
        assert not np.any(r.words & ~window_mask(r.k))

    @given(st.integers(1, 8).flatmap(lambda k: vectors(k=k, count=2)))
    def test_de_morgan(self, ab):
        assert apply_gate(NAND, ab) == apply_gate(AND, ab).complement()


class TestPopcountXor:
    def test_examples(self):
        a = tv(2, 0b1010)
        assert popcount_xor(a, a) == 0
        assert popcount_xor(a, a.complement()) == 4
        assert popcount_xor(a, tv(2, 0b1001)) == 2

    def test_k_mismatch(self):
        with pytest.raises(ContractError):
            popcount_xor(tv(2, 0), tv(3, 0))

    @given(st.integers(1, 8).flatmap(lambda k: vectors(k=k, count=3)))
    def test_metric_axioms(self, abc):
        a, b, c = abc
        assert popcount_xor(a, b) == popcount_xor(b, a)
        assert popcount_xor(a, a) == 0
        assert popcount_xor(a, c) <= popcount_xor(a, b) + popcount_xor(b, c)
        assert 0 <= popcount_xor(a, b) <= 1 << a.k


def test_chromosome_defaults():
    c = Chromosome(tv(2, 1))
    assert c.gates == 0 and c.trace is None and not c.saturated
