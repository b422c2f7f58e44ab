import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellforge.signs import ConstructionError, SignFunction, sign_tuples


@st.composite
def sign_functions(draw, max_arity=4):
    k = draw(st.integers(1, max_arity))
    return SignFunction(k, draw(st.integers(0, SignFunction.count(k) - 1)))


def test_tuple_order_puts_plus_first():
    assert sign_tuples(2) == [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def test_mask_bit_layout():
    # bit t describes the t-th tuple, set bit means +1
    s = SignFunction.from_values([1, 1, 1, -1])
    assert s.mask == 0b0111
    assert s(-1, -1) == -1 and s(1, -1) == 1
    assert SignFunction.constant(2, 1).mask == 15
    assert SignFunction.constant(2, -1).mask == 0


@given(sign_functions())
def test_encode_decode_roundtrip(s):
    assert SignFunction.from_values(s.values()) == s
    assert [s(*t) for t in sign_tuples(s.arity)] == s.values()


@given(sign_functions())
def test_table_matches_call(s):
    table = s.table()
    for t in sign_tuples(s.arity):
        assert table[tuple(0 if x == 1 else 1 for x in t)] == s(*t)


@given(sign_functions())
def test_negation(s):
    assert (-s).values() == [-v for v in s.values()]
    assert -(-s) == s


def test_counts():
    assert SignFunction.count(2) == 16
    assert SignFunction.count(3) == 256
    assert len(list(SignFunction.all(2))) == 16


@pytest.mark.parametrize(
    "build",
    [
        lambda: SignFunction(0, 0),
        lambda: SignFunction(2, 16),
        lambda: SignFunction(2, -1),
        lambda: SignFunction.from_values([1, -1, 1]),
        lambda: SignFunction.from_values([1, 0]),
        lambda: SignFunction(2, 3)(1),
        lambda: SignFunction(1, 1)(2),
    ],
)
def test_invalid(build):
    with pytest.raises(ConstructionError):
        build()


def test_dict_roundtrip():
    s = SignFunction(3, 0b10010110)
    assert SignFunction.from_dict(s.to_dict()) == s
