from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from curvgraph.exactalg import (
    Echelon, ExactError, KappaPoly, PolyM, RatFuncM, echelon, rat, rat_arith,
    reduce_against,
)

rats = st.fractions(max_denominator=50).filter(lambda x: abs(x) < 1000)
polys = st.lists(st.integers(-5, 5), min_size=1, max_size=4).map(PolyM)
nonzero_polys = polys.filter(lambda p: not p.is_zero())


@given(rats, rats, rats)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert rat_arith(rat_arith(a, b, "mul"), c, "mul") == a * b * c


def test_division_by_zero_raises():
    with pytest.raises(ExactError):
        rat_arith(Fraction(1), Fraction(0), "div")
    with pytest.raises(ExactError):
        RatFuncM(PolyM((1,)), PolyM(()))


def test_rat_parses_strings():
    assert rat("3/4") == Fraction(3, 4)
    assert rat(2) == 2


def test_polym_basics():
    m = PolyM.m()
    p = 2 * m ** 2 - 3
    assert str(p) == "2*m^2-3"
    assert p.degree == 2
    assert PolyM(()).degree == -1
    assert p(Fraction(1, 2)) == Fraction(-5, 2)
    q, r = p.divmod(m - 1)
    assert q * (m - 1) + r == p
    assert PolyM.gcd(m * m - 1, m * m - 2 * m + 1) == m - 1


@given(nonzero_polys, nonzero_polys)
def test_ratfunc_inverse(p, q):
    x = RatFuncM(p, q)
    assert x * RatFuncM(q, p) == RatFuncM(1)


@given(nonzero_polys, nonzero_polys, polys, st.integers(-7, 7))
def test_substitution_is_a_homomorphism(p, q, r, x):
    assume(q(x) != 0)
    f = RatFuncM(p, q) + RatFuncM(r)
    g = RatFuncM(p, q) * RatFuncM(r)
    assert f(x) == Fraction(p(x)) / q(x) + r(x)
    assert g(x) == Fraction(p(x)) / q(x) * r(x)


def test_ratfunc_normal_form():
    m = PolyM.m()
    x = RatFuncM(2 * m - 2, -(m * m - m))
    assert x.den == m * m - m or x.den.lead() == 1
    assert x == RatFuncM(PolyM((-2,)), m)
    with pytest.raises(ExactError):
        x(0)


def test_kappa_poly():
    k = KappaPoly.kappa()
    m = RatFuncM.m()
    p = KappaPoly.monomial(RatFuncM(-2) / m, 1) * k
    assert p.coeff(2) == RatFuncM(-2) / m
    assert p(4, 2) == -2
    assert (p - p).is_zero()


def _bareiss_rank(rows, width):
    """Fraction-free elimination on integer-scaled dense rows."""
    mat = []
    for r in rows:
        den = 1
        for x in r.values():
            den = den * x.denominator // __import__("math").gcd(den, x.denominator)
        mat.append([int(r.get(j, 0) * den) for j in range(width)])
    rank, prev = 0, 1
    for col in range(width):
        piv = next((i for i in range(rank, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        for i in range(rank + 1, len(mat)):
            mat[i] = [(mat[rank][col] * mat[i][j] - mat[i][col] * mat[rank][j]) // prev
                      for j in range(width)]
        prev = mat[rank][col]
        rank += 1
    return rank


sparse_rows = st.lists(
    st.dictionaries(st.integers(0, 6), st.fractions(max_denominator=4).filter(bool), max_size=4),
    max_size=8,
)


@given(sparse_rows)
def test_rank_matches_fraction_free_oracle(rows):
    assert echelon(rows, 7).rank == _bareiss_rank(rows, 7)


@given(sparse_rows)
def test_echelon_is_idempotent(rows):
    e = echelon(rows, 7)
    again = echelon(e.basis, 7)
    assert again.basis == e.basis
    assert again.pivots == e.pivots


@given(sparse_rows, st.dictionaries(st.integers(0, 6), st.integers(-3, 3), max_size=5))
def test_reduce_kills_pivots_and_stays_in_coset(rows, v):
    e = echelon(rows, 7)
    r = reduce_against(e, v)
    assert not set(r) & set(e.pivots)
    diff = {k: Fraction(v.get(k, 0)) - r.get(k, 0) for k in range(7)}
    assert not e.reduce(diff)


def test_reduce_edge_cases():
    e = echelon([{0: Fraction(1), 2: Fraction(1)}], 3)
    assert reduce_against(e, {0: 2, 2: 2}) == {}
    assert reduce_against(Echelon(3), {1: 5}) == {1: 5}
    with pytest.raises(ValueError):
        reduce_against(e, {0: 1}, width=4)


def test_leftmost_pivot_rule():
    e = echelon([{1: Fraction(2), 2: Fraction(1)}, {0: Fraction(1), 1: Fraction(1)}], 3)
    assert e.pivots == [0, 1]
    assert e.basis[1] == {1: 1, 2: Fraction(1, 2)}
