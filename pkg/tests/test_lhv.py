import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellforge.inequalities import BellCoefficients, build_standard, flip_outcomes, permute_settings
from bellforge.lhv import (
    DeterministicStrategy,
    EnumerationCapError,
    EvaluationError,
    all_strategy_values,
    lhv_bound,
    lhv_bound_recursive,
    strategy_value,
    verify_identity,
)
from bellforge.reproduce import table_representative
from bellforge.signs import SignFunction

from oracles import brute_lhv, tensor_value


@st.composite
def small_tensors(draw):
    n = draw(st.integers(2, 3))
    shape = tuple(draw(st.integers(1, 3)) for _ in range(n))
    flat = draw(st.lists(st.integers(-5, 5), min_size=int(np.prod(shape)), max_size=int(np.prod(shape))))
    return np.array(flat, dtype=np.int64).reshape(shape)


def test_strategy_index_layout():
    s = DeterministicStrategy(((1, -1), (-1, -1)))
    # party 1 holds the high bits, bit k set means setting k+1 gives -1
    assert s.index == 0b10_11
    assert DeterministicStrategy.from_index(s.index, (2, 2)) == s


@pytest.mark.parametrize("shape", [(2, 2), (3, 2, 2), (4, 4, 2)])
def test_strategy_index_bijection(shape):
    total = 1 << sum(shape)
    seen = set()
    for i in range(0, total, max(1, total // 300)):
        s = DeterministicStrategy.from_index(i, shape)
        assert s.index == i and s.settings == shape
        seen.add(s.outcomes)
    assert len(seen) == len(range(0, total, max(1, total // 300)))
    with pytest.raises(ValueError):
        DeterministicStrategy.from_index(total, shape)


def test_strategy_rejects_non_sign():
    with pytest.raises(ValueError):
        DeterministicStrategy(((1, 0),))


def test_all_values_are_in_index_order():
    ineq = table_representative("2x2x2")
    vals = all_strategy_values(ineq)
    for i in range(0, len(vals), 7):
        strat = DeterministicStrategy.from_index(i, ineq.settings)
        assert vals[i] == strategy_value(ineq, strat) == tensor_value(ineq.coefficients, strat.outcomes)


@pytest.mark.parametrize("name, bound", [("2x2x2", 2), ("3x3x2", 4), ("4x4x2", 4)])
def test_table_bounds(name, bound):
    ineq = table_representative(name)
    res = lhv_bound(ineq)
    assert res.bound == bound
    assert abs(strategy_value(ineq, res.witness)) == bound
    assert lhv_bound_recursive(ineq) == bound


def test_chsh_value_multiset():
    chsh = build_standard(SignFunction.from_values([1, 1, 1, -1]))
    report = verify_identity(chsh, 4)
    assert report.holds
    assert report.values == {-4: 8, 4: 8}
    assert lhv_bound(chsh).bound == 4


def test_identity_failure_is_reported():
    ineq = BellCoefficients(np.array([[1, 1], [1, -1]]))
    report = verify_identity(ineq, 4)
    assert not report and report.values == {-2: 8, 2: 8}


@settings(max_examples=40, deadline=None)
@given(small_tensors())
def test_enumeration_agrees_with_oracles(c):
    ineq = BellCoefficients(c)
    fast = lhv_bound(ineq).bound
    assert fast == lhv_bound_recursive(ineq) == brute_lhv(c)


@settings(max_examples=20, deadline=None)
@given(small_tensors(), st.integers(1, 5))
def test_chunking_gives_same_result(c, chunks):
    ineq = BellCoefficients(c)
    a, b = lhv_bound(ineq), lhv_bound(ineq, chunks=chunks)
    assert a.bound == b.bound and a.witness == b.witness


def test_float_coefficients():
    c = np.array([[0.5, 0.25], [0.25, -0.5]])
    assert lhv_bound(BellCoefficients(c)).bound == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(small_tensors(), st.randoms(use_true_random=False))
def test_bound_invariances(c, rnd):
    ineq = BellCoefficients(c)
    perms = [rnd.sample(range(m), m) for m in c.shape]
    flips = [[rnd.choice((1, -1)) for _ in range(m)] for m in c.shape]
    base = lhv_bound(ineq).bound
    assert lhv_bound(permute_settings(ineq, perms)).bound == base
    assert lhv_bound(flip_outcomes(ineq, flips)).bound == base
    assert lhv_bound(BellCoefficients(-c)).bound == base
    assert lhv_bound(BellCoefficients(3 * c)).bound == 3 * base


def test_cap_is_enforced():
    ineq = BellCoefficients(np.zeros((8, 8, 8), dtype=np.int64))
    with pytest.raises(EnumerationCapError):
        lhv_bound(ineq, cap=1 << 20)
    with pytest.raises(EnumerationCapError):
        lhv_bound_recursive(ineq, cap=1 << 20)


def test_shape_mismatch():
    with pytest.raises(EvaluationError):
        strategy_value(table_representative("2x2x2"), DeterministicStrategy(((1,), (1,), (1,))))


def test_witness_serialises():
    res = lhv_bound(table_representative("3x3x2"))
    d = res.witness.to_dict()
    assert DeterministicStrategy.from_index(d["index"], (4, 4, 2)).outcomes == tuple(map(tuple, d["outcomes"]))
