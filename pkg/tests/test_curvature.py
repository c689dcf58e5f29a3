import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvgraph.curvature import (
    CurvatureError, CurvModel, SymForm, constant_model, der_sym, direct_sum,
    grassmann_moment_mc, hamilton_Q, is_einstein, make_einstein,
    model_from_json, model_to_json, nk_product, norm_sq, pad, phi_minus,
    phi_plus, polarize_from_sectional, pr_project, q_star, q_star_vector,
    random_model, random_orthogonal, ricci, rotate, scalar, sec_extrema_estimate,
    sectional, sym_norm_sq, theta3_numeric, traceless_ricci, validate, zero_model,
)

models = st.builds(random_model, st.integers(3, 6), st.integers(1, 4), st.integers(0, 10 ** 6))


def test_constant_model_values():
    R = constant_model(4, 1.0)
    assert scalar(R) == pytest.approx(12)
    assert norm_sq(R) == pytest.approx(6)
    assert sym_norm_sq(ricci(R)) == pytest.approx(18)
    assert sectional(R, [1, 0, 0, 0], [0, 1, 0, 0]) == pytest.approx(1)
    for m in (3, 5, 7):
        assert scalar(constant_model(m, 2.0)) == pytest.approx(2 * m * (m - 1))


def test_nk_square_of_metric():
    g = SymForm.identity(5)
    assert np.allclose(nk_product(g, g).comp, -2 * constant_model(5, 1).comp)
    a = SymForm(4, np.outer([1, 2, 0, 1], [1, 2, 0, 1]))
    assert np.allclose(nk_product(a, a).comp, 0)


@given(models)
def test_constructors_are_algebraic(R):
    validate(R, 1e-10)
    validate(phi_plus(R), 1e-10)


def test_validate_rejects_garbage():
    rng = np.random.default_rng(0)
    with pytest.raises(CurvatureError):
        validate(CurvModel(3, "R", rng.standard_normal((3,) * 4)))
    with pytest.raises(CurvatureError):
        CurvModel(3, "R", np.zeros((3, 3, 3)))


def test_seed_stability():
    assert np.array_equal(random_model(5, 3, 42).comp, random_model(5, 3, 42).comp)
    assert not np.any(random_model(4, 0, 1).comp)


@given(models)
def test_phi_inverse_and_norm(R):
    assert np.allclose(phi_minus(phi_plus(R)).comp, R.comp, atol=1e-12 * max(1, np.abs(R.comp).max()))
    assert norm_sq(phi_plus(R)) == pytest.approx(12 * norm_sq(R), rel=1e-12)


def test_sec_of_constant_model():
    m = 3
    d = np.eye(m)
    want = (4 * np.einsum("ij,kl->ijkl", d, d) - 2 * np.einsum("ik,jl->ijkl", d, d)
            - 2 * np.einsum("il,jk->ijkl", d, d))
    assert np.allclose(phi_plus(constant_model(m, 1)).comp, want)
    S = phi_plus(random_model(4, 2, 5))
    X, U = np.eye(4)[0], np.eye(4)[1]
    R = phi_minus(S)
    assert 0.25 * S.comp[0, 0, 1, 1] == pytest.approx(R.comp[0, 1, 1, 0])


def test_kind_mismatch():
    with pytest.raises(CurvatureError):
        phi_minus(random_model(3, 1, 1))
    with pytest.raises(CurvatureError):
        ricci(phi_plus(random_model(3, 1, 1)))


def test_polarization():
    R = random_model(3, 3, 9)
    assert np.allclose(polarize_from_sectional(R), R.comp, atol=1e-10)


def test_pr_projection():
    rng = np.random.default_rng(4)
    S = rng.standard_normal((4,) * 4)
    S = S + S.transpose(1, 0, 2, 3)
    S = S + S.transpose(0, 1, 3, 2)
    P = pr_project(S)
    validate(P, 1e-10)
    assert np.allclose(pr_project(P.comp).comp, P.comp)
    Sec = phi_plus(random_model(4, 3, 1))
    assert np.allclose(pr_project(Sec.comp).comp, Sec.comp)


def test_orthogonal_frame_change():
    R = random_model(5, 3, 3)
    F = random_orthogonal(5, np.random.default_rng(1))
    RF = rotate(R, F)
    validate(RF)
    assert scalar(RF) == pytest.approx(scalar(R))
    assert norm_sq(RF) == pytest.approx(norm_sq(R))


def test_direct_sum_and_padding():
    R1, R2 = random_model(3, 2, 1), random_model(2, 2, 2)
    S = direct_sum(R1, R2)
    assert S.m == 5
    assert scalar(S) == pytest.approx(scalar(R1) + scalar(R2))
    assert norm_sq(pad(R1, 3)) == pytest.approx(norm_sq(R1))


@given(models)
def test_q_star_on_vectors_is_half_ricci(R):
    X = np.arange(1, R.m + 1, dtype=float)
    assert np.allclose(q_star_vector(R, X), 0.5 * ricci(R).matrix @ X)


@pytest.mark.parametrize("seed", range(4))
def test_hamilton_decomposition(seed):
    R = random_model(4 + seed % 3, 3, seed)
    lhs = q_star(R, R).comp
    rhs = 0.5 * der_sym(ricci(R), R).comp + hamilton_Q(R).comp
    assert np.allclose(lhs, rhs, atol=1e-10 * np.abs(lhs).max())


def test_theta3_values():
    assert theta3_numeric(zero_model(4)) == 0
    # a constant-curvature tensor is fixed by every rotation, so the
    # infinitesimal action inside q(R)*R kills it
    for m in (3, 4, 5):
        assert theta3_numeric(constant_model(m, 1.0)) == pytest.approx(0, abs=1e-12)
    assert theta3_numeric(random_model(4, 3, 1)) != pytest.approx(0)


def test_make_einstein():
    R = random_model(5, 3, 8)
    assert not is_einstein(R)
    E = make_einstein(R)
    validate(E)
    assert is_einstein(E)
    assert scalar(E) == pytest.approx(scalar(R))
    assert sym_norm_sq(traceless_ricci(E)) < 1e-20 * scalar(E) ** 2 + 1e-24


def test_monte_carlo_constant_curvature():
    mean, se = grassmann_moment_mc(constant_model(5, 1), 2, 10_000)
    assert mean == pytest.approx(1.0, abs=1e-9)
    mean, se = grassmann_moment_mc(random_model(4, 3, 2), 1, 20_000, seed=3)
    assert abs(mean - scalar(random_model(4, 3, 2)) / 12) < 4 * se
    # same seed, same draw
    assert grassmann_moment_mc(random_model(4, 3, 2), 2, 5000, seed=1) == \
        grassmann_moment_mc(random_model(4, 3, 2), 2, 5000, seed=1)


def test_sectional_rejects_degenerate_plane():
    with pytest.raises(CurvatureError):
        sectional(constant_model(3), [1, 0, 0], [2, 0, 0])


def test_extrema_estimate():
    assert sec_extrema_estimate([0.7], 2.0) == pytest.approx((0.7, 0.7))
    hi, lo = sec_extrema_estimate([2.0, 4.0, 8.0], 3.0)
    assert hi == pytest.approx(2.0) and lo == pytest.approx(2.0)
    with pytest.raises(CurvatureError):
        sec_extrema_estimate([], 1.0)
    with pytest.raises(CurvatureError):
        sec_extrema_estimate([2.0, 4.0, 8.0], 1.0)


def test_json_models():
    R = model_from_json({"type": "nk_random", "m": 4, "terms": 2, "seed": 5})
    assert np.array_equal(R.comp, random_model(4, 2, 5).comp)
    back = model_from_json(model_to_json(R))
    assert np.array_equal(back.comp, R.comp)
    S = model_from_json(json.dumps({"type": "direct_sum", "parts": [
        {"type": "constant", "m": 2, "c": 1}, {"type": "constant", "m": 2, "c": 1}]}))
    assert S.m == 4 and is_einstein(S)
    E = model_from_json({"type": "einstein", "base": {"type": "nk_random", "m": 5, "seed": 1}})
    assert is_einstein(E)
    with pytest.raises(CurvatureError):
        model_from_json({"type": "explicit", "m": 2, "comp": [0, 1]})
    with pytest.raises(CurvatureError):
        model_from_json({"type": "hyperbolic"})
