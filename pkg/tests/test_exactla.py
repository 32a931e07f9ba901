from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tractorlab.exactla import RowSpace, flatten, matmul, nullspace, rank, rref, transpose, unflatten


def gauss_rank(rows):
    """Independent oracle: plain Fraction elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
    return r


def test_rank_examples():
    assert rank([]) == 0
    assert rank([[1, 2], [2, 4]]) == 1
    assert rank([[1, 0], [0, Fraction(1, 3)]]) == 2


def test_rref_examples():
    R, r = rref([[2, 4], [1, 3]])
    assert r == 2 and R == [[1, 0], [0, 1]]
    R, r = rref([[0, 0, 0]])
    assert r == 0 and R == []


def test_nullspace_examples():
    assert nullspace([[1, 1]]) == [[-1, 1]]
    assert nullspace([], width=2) == [[1, 0], [0, 1]]
    with pytest.raises(ValueError):
        nullspace([])


def test_matrix_helpers():
    a = [[1, 2], [3, 4]]
    assert matmul(a, [[1, 0], [0, 1]]) == a
    assert transpose(a) == [[1, 3], [2, 4]]
    assert unflatten(flatten(a), 2) == a


def test_rowspace():
    s = RowSpace(3)
    assert s.add([1, 0, 0])
    assert not s.add([2, 0, 0])
    assert s.contains([0, 0, 0])
    assert s.add([0, 1, 1])
    assert s.contains([1, 2, 2]) and not s.contains([0, 0, 1])
    assert s.dim == 2
    with pytest.raises(ValueError):
        s.contains([1, 2])


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.data())
def test_rank_nullity_against_oracle(nr, nc, data):
    rows = [[data.draw(rationals) for _ in range(nc)] for _ in range(nr)]
    r = rank(rows)
    assert r == gauss_rank(rows)
    ker = nullspace(rows)
    assert len(ker) == nc - r
    for v in ker:
        assert all(sum((a * b for a, b in zip(row, v)), Fraction(0)) == 0 for row in rows)
    assert gauss_rank(ker) == len(ker) if ker else True


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(rationals, min_size=3, max_size=3), min_size=1, max_size=5))
def test_rowspace_dim_matches_rank(vectors):
    s = RowSpace(3, vectors)
    assert s.dim == gauss_rank(vectors)
    assert all(s.contains(v) for v in vectors)
