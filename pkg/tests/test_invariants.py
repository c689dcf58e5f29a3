import random
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvgraph.algebra import GraphPoly, expand_tetravalent
from curvgraph.curvature import (
    CurvatureError, constant_model, direct_sum, make_einstein, norm_sq,
    random_model, ricci, scalar, sym_norm_sq, theta3_numeric, zero_model,
)
from curvgraph.exactalg import KappaPoly, PolyM, RatFuncM
from curvgraph.graphs import EMPTY, build_graph, disjoint_union, enumerate_degree
from curvgraph.ihx import ihx_relations, normal_form, reduce_poly
from curvgraph.invariants import (
    DUMBBELL, SEC_NORM, SQ_CROSS, SQ_PAR, THETA, THETA_SQ, SymbolicMismatch,
    const_value, const_value_symbolic, degree3_generators, delta_m,
    double_r_square, einstein_identity, einstein_reduce, einstein_step,
    eval_ext, eval_graph, eval_poly, gauss_bonnet_sphere, hitchin_thorpe4,
    moment_poly, moment_value, pfaffian_defn_eval, pfaffian_poly,
    psi_defn_eval, reducible_edges, split_einstein, theta3_poly,
)

m = PolyM.m()


def test_low_degree_values():
    R = random_model(5, 3, 1)
    k = scalar(R)
    assert eval_graph(THETA, R) == pytest.approx(-2 * k)
    assert eval_graph(DUMBBELL, R) == pytest.approx(4 * k)
    assert eval_graph(SQ_PAR, R) == pytest.approx(8 * sym_norm_sq(ricci(R)))
    assert eval_graph(SQ_CROSS, R) == pytest.approx(-24 * norm_sq(R))
    assert eval_graph(EMPTY, R) == 1.0


def test_sec_norm_graph_and_tetravalent_evaluation():
    R = random_model(4, 3, 2)
    assert 0.25 * eval_graph(SEC_NORM, R) == pytest.approx(12 * norm_sq(R))
    assert eval_ext(double_r_square(), R) == pytest.approx(norm_sq(R))
    assert eval_poly(expand_tetravalent(double_r_square()), R) == pytest.approx(norm_sq(R))


@pytest.mark.parametrize("mm", [3, 4])
def test_strategies_agree(mm):
    R = random_model(mm, 3, mm)
    for n in (1, 2, 3):
        for g in enumerate_degree(n):
            a, b = eval_graph(g, R, "naive"), eval_graph(g, R, "scheduled")
            assert a == pytest.approx(b, rel=1e-10, abs=1e-12)
    with pytest.raises(ValueError):
        eval_graph(THETA, R, "fastest")


def test_multiplicative_under_disjoint_union():
    R = random_model(5, 2, 4)
    for g in enumerate_degree(1) + enumerate_degree(2):
        for h in enumerate_degree(1):
            assert eval_graph(disjoint_union(g, h), R) == pytest.approx(eval_graph(g, R) * eval_graph(h, R))


def test_connected_graphs_are_additive():
    R1, R2 = random_model(3, 2, 5), random_model(3, 3, 6)
    S = direct_sum(R1, R2)
    for g in enumerate_degree(3, True):
        assert eval_graph(g, S) == pytest.approx(eval_graph(g, R1) + eval_graph(g, R2), rel=1e-9)


def test_padding_does_not_change_values():
    from curvgraph.curvature import pad
    R = random_model(4, 3, 7)
    for g in enumerate_degree(2):
        assert eval_graph(g, pad(R, 2)) == pytest.approx(eval_graph(g, R), rel=1e-12)


# -- curvature derivation ---------------------------------------------------

def test_delta_low_degree():
    assert delta_m(GraphPoly.of(THETA)) == GraphPoly({EMPTY: -2 * m * (m - 1)}, "polym")
    assert reduce_poly(delta_m(GraphPoly.of(SQ_PAR))) == GraphPoly({THETA: -4 * (m - 1)}, "polym")
    assert reduce_poly(delta_m(GraphPoly.of(SQ_CROSS))) == GraphPoly({THETA: PolyM((12,))}, "polym")


def test_degree3_fingerprints():
    g = degree3_generators()
    want = [
        {SQ_PAR: -6 * (m - 1)},
        {SQ_PAR: -(4 * m - 6), THETA_SQ: PolyM((-2,))},
        {SQ_PAR: PolyM((12,)), SQ_CROSS: -2 * (m - 1)},
        {SQ_PAR: PolyM((12,)), SQ_CROSS: PolyM((6,))},
        {SQ_PAR: PolyM((-6,)), SQ_CROSS: PolyM((24,))},
    ]
    for h, w in zip(g, want):
        assert normal_form(delta_m(GraphPoly.of(h))) == GraphPoly(w, "polym")
    # the antipodal hexagon is the last one
    assert g[4] == build_graph([[0, 1, 2, 3, 4, 5]], [[0, 3], [1, 4], [2, 5]])


small = [g for n in (1, 2) for g in enumerate_degree(n)]


@given(st.sampled_from(small), st.sampled_from(small))
def test_delta_is_a_derivation(g, h):
    p, q = GraphPoly.of(g).lift("polym"), GraphPoly.of(h).lift("polym")
    assert delta_m(p * q) == delta_m(p) * q + p * delta_m(q)


def test_delta_preserves_relations():
    for n in (2, 3):
        for r in ihx_relations(n):
            assert normal_form(delta_m(r)).is_zero()


def _substitute(p, mm):
    return p.map_coeffs(lambda c: Fraction(c(mm)), "rat")


@pytest.mark.parametrize("g", small, ids=str)
def test_delta_is_the_constant_curvature_derivative(g):
    mm, h = 4, 1e-5
    R = random_model(mm, 3, 11)
    C = constant_model(mm, 1.0)
    fd = (eval_graph(g, R + h * C) - eval_graph(g, R - h * C)) / (2 * h)
    exact = eval_poly(_substitute(delta_m(GraphPoly.of(g)), mm), R)
    assert fd == pytest.approx(exact, rel=1e-5, abs=1e-6)


def test_const_value_symbolic_hexagons():
    g = degree3_generators()
    den = PolyM((0, 0, 1)) * (m - 1) * (m - 1)
    assert const_value_symbolic(GraphPoly.of(g[3]))[3] == RatFuncM(8 * (2 * m - 5), den)
    assert const_value_symbolic(GraphPoly.of(g[4]))[3] == RatFuncM(-8 * (m + 11), den)


@pytest.mark.parametrize("mm", [3, 4, 5, 6])
def test_const_value_matches_evaluation(mm):
    kappa = 2.5
    R = constant_model(mm, kappa / (mm * (mm - 1)))
    for n in (1, 2, 3):
        for g in enumerate_degree(n):
            want = eval_graph(g, R)
            assert const_value(GraphPoly.of(g), mm, kappa) == pytest.approx(want, rel=1e-9, abs=1e-9 * kappa ** n)


# -- Pfaffian and moments ---------------------------------------------------

def test_pfaffian_low_degree():
    assert pfaffian_poly(0) == GraphPoly.one()
    assert pfaffian_poly(1) == GraphPoly({THETA: Fraction(-1, 12), DUMBBELL: Fraction(1, 12)})
    assert reduce_poly(pfaffian_poly(1)) == GraphPoly({THETA: Fraction(-1, 4)})
    assert eval_poly(pfaffian_poly(2), constant_model(4, 1)) == pytest.approx(3)
    assert eval_poly(pfaffian_poly(2), constant_model(3, 1)) == pytest.approx(0, abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_every_class_appears_in_pfaffian(n):
    p = pfaffian_poly(n)
    assert all(p.coeff(g) != 0 for g in enumerate_degree(n))


def test_moment_polynomials():
    assert moment_poly(1) == GraphPoly({THETA: Fraction(-1, 2)})
    want = GraphPoly({THETA_SQ: Fraction(1, 8), SQ_PAR: Fraction(1, 2), SQ_CROSS: Fraction(-1, 4)})
    assert reduce_poly(moment_poly(2)) == want
    for mm in (4, 5, 6):
        assert eval_poly(moment_poly(2), constant_model(mm, 1)) == pytest.approx(mm * (mm - 1) * (mm + 1) * (mm + 2) / 2)


def _connected_part(p):
    return GraphPoly({g: c for g, c in p.items() if g.n > 0 and len(__import__("curvgraph.graphs", fromlist=["x"]).connected_components(g)) == 1})


def test_generating_series_are_exponentials():
    from curvgraph.algebra import exp_trunc
    for family in (pfaffian_poly, moment_poly):
        series = sum((family(n) for n in range(1, 4)), GraphPoly.one())
        assert exp_trunc(_connected_part(series), 3) == GraphPoly(series.terms, max_degree=3)


@pytest.mark.parametrize("seed", range(3))
def test_pfaffian_oracle(seed):
    for mm in (4, 5):
        R = random_model(mm, 3, 100 + seed)
        for n in (1, 2):
            assert pfaffian_defn_eval(n, R) == pytest.approx(eval_poly(pfaffian_poly(n), R), rel=1e-9)
    assert pfaffian_defn_eval(1, R) == pytest.approx(scalar(R) / 2)


@pytest.mark.parametrize("seed", range(3))
def test_moment_oracle(seed):
    for mm in (4, 5):
        R = random_model(mm, 3, 200 + seed)
        for n in (1, 2, 3):
            assert psi_defn_eval(n, R) == pytest.approx(eval_poly(moment_poly(n), R), rel=1e-9)
    assert psi_defn_eval(1, R) == pytest.approx(scalar(R))
    assert psi_defn_eval(2, constant_model(5, 1)) == pytest.approx(420)


def test_frozen_oracle_values():
    R = random_model(4, 3, 0)
    assert pfaffian_defn_eval(2, R) == pytest.approx(-0.209843916019859, rel=1e-10)
    assert psi_defn_eval(3, R) == pytest.approx(-30692.971905996783, rel=1e-10)
    assert theta3_numeric(R) == pytest.approx(-60.39680684801472, rel=1e-10)


def test_oracles_refuse_large_n():
    with pytest.raises(ValueError):
        pfaffian_defn_eval(4, constant_model(8))
    with pytest.raises(ValueError):
        psi_defn_eval(4, constant_model(8))


@pytest.mark.parametrize("mm", range(3, 9))
def test_moments_of_unit_sphere(mm):
    for n in (1, 2, 3):
        assert moment_value(n, constant_model(mm, 1)) == pytest.approx(1, rel=1e-9)
    assert moment_value(2, constant_model(mm, -0.5)) == pytest.approx(0.25)


def test_gauss_bonnet():
    for mm in (2, 4, 6):
        assert gauss_bonnet_sphere(mm) == pytest.approx(2, abs=1e-9)
    with pytest.raises(ValueError):
        gauss_bonnet_sphere(3)


# -- cubic invariant and Einstein reduction ---------------------------------

@pytest.mark.parametrize("seed", range(6))
def test_theta3_polynomial(seed):
    R = random_model(4 + seed % 3, 3, 300 + seed)
    assert eval_poly(theta3_poly(), R) == pytest.approx(theta3_numeric(R), rel=1e-9)


def test_theta3_on_special_models():
    assert eval_poly(theta3_poly(), zero_model(4)) == 0
    assert eval_poly(theta3_poly(), constant_model(5)) == pytest.approx(0, abs=1e-9)


def test_einstein_reduce_examples():
    k = KappaPoly.kappa()
    M = RatFuncM.m()
    assert einstein_reduce(GraphPoly.of(THETA)) == GraphPoly({EMPTY: k * (-2)}, "kappa")
    assert einstein_reduce(GraphPoly.of(SQ_PAR)) == GraphPoly({EMPTY: k * k * (RatFuncM(4) / M)}, "kappa")
    assert einstein_reduce(GraphPoly.of(SQ_CROSS)) == GraphPoly.of(SQ_CROSS).lift("kappa")
    with pytest.raises(NotImplementedError):
        einstein_reduce(pfaffian_poly(4))


def test_einstein_step_needs_parallel_black_edge():
    assert reducible_edges(SQ_CROSS) == []
    with pytest.raises(ValueError):
        einstein_step(SQ_CROSS, (0, 2))


def _all_orders(g):
    """Every result obtainable by contracting qualifying edges in any order."""
    @lru_cache(maxsize=None)
    def go(h):
        edges = reducible_edges(h)
        if not edges:
            return frozenset([GraphPoly.of(h).lift("kappa")])
        out = set()
        for e in edges:
            h2, f = einstein_step(h, e)
            for rest in go_poly(reduce_poly(GraphPoly.of(h2).lift("kappa"))):
                out.add(rest * GraphPoly({EMPTY: f}, "kappa"))
        return frozenset(out)

    def go_poly(p):
        results = [GraphPoly.zero("kappa")]
        for h, c in p.items():
            results = [r + q * GraphPoly({EMPTY: c}, "kappa") for r in results for q in go(h)]
        return {reduce_poly(r) for r in results}

    return go_poly(reduce_poly(GraphPoly.of(g).lift("kappa")))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_einstein_reduction_is_confluent(n):
    for g in enumerate_degree(n):
        outcomes = _all_orders(g)
        assert len(outcomes) == 1, str(g)
        assert outcomes == {einstein_reduce(GraphPoly.of(g))}
        rng = random.Random(n)
        shuffled = einstein_reduce(GraphPoly.of(g), chooser=lambda h, es: rng.choice(es))
        assert shuffled in outcomes


def _eval_kappa_poly(p, R):
    mm, k = R.m, scalar(R)
    return sum(float(c(mm, k)) * eval_graph(g, R) for g, c in p.items())


@pytest.mark.parametrize("mm", [4, 6])
def test_einstein_reduction_is_numerically_exact(mm):
    E = make_einstein(random_model(mm, 3, 40 + mm))
    for n in (1, 2, 3):
        for g in enumerate_degree(n):
            want = eval_graph(g, E)
            got = _eval_kappa_poly(einstein_reduce(GraphPoly.of(g)), E)
            assert got == pytest.approx(want, rel=1e-8, abs=1e-8 * abs(scalar(E)) ** n), str(g)


def test_einstein_identity_reports():
    for mm in (3, 5, 8):
        rep = einstein_identity(constant_model(mm, 1))
        assert rep["numeric_pass"] and rep["symbolic_pass"]
    rep = einstein_identity(direct_sum(constant_model(2, 1), constant_model(2, 1)))
    assert rep["relative_gap"] < 1e-9
    rep = einstein_identity(make_einstein(random_model(6, 3, 1)))
    assert rep["relative_gap"] < 1e-9
    with pytest.raises(CurvatureError):
        einstein_identity(random_model(5, 3, 1))


def test_per_polynomial_expansions():
    from curvgraph.invariants import _kp, per_poly_einstein_expansions
    out = per_poly_einstein_expansions()
    g = degree3_generators()
    assert out["pf3"].scalar == _kp(3, (40, -12, 1), (0, 0, 48))
    assert out["pf3"].norm == _kp(1, (-8, 1), (0, 4))
    assert out["psi0_3"].scalar == _kp(3, (40, 12, 1), (0, 0, 6))
    assert out["psi0_3"].norm == _kp(1, (48, 6), (0, 1))
    assert out["theta3"].scalar.is_zero()
    assert out["theta3"].norm == _kp(1, (2,), (0, 1))
    cub = {k: {h: c.coeff(0) for h, c in v.cubic.items()} for k, v in out.items()}
    assert cub["pf3"] == {g[4]: RatFuncM(Fraction(-1, 432)), g[3]: RatFuncM(Fraction(-5, 432))}
    assert cub["psi0_3"] == {g[4]: RatFuncM(Fraction(-1, 6)), g[3]: RatFuncM(Fraction(-1, 6))}
    assert cub["theta3"] == {g[4]: RatFuncM(Fraction(1, 72)), g[3]: RatFuncM(Fraction(-1, 18))}


def test_hitchin_thorpe():
    for seed in range(3):
        assert hitchin_thorpe4(random_model(4, 3, seed))["pass"]
    assert hitchin_thorpe4(constant_model(4))["lhs"] == pytest.approx(-12)
    assert hitchin_thorpe4(zero_model(4))["lhs"] == 0
    with pytest.raises(CurvatureError):
        hitchin_thorpe4(constant_model(5))
