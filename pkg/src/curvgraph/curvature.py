"""Algebraic and sectional curvature tensors in an orthonormal frame.

Components are dense ``m x m x m x m`` float arrays indexed ``[i,j,k,l]``
for ``R(e_i, e_j; e_k, e_l)``.  The metric is the identity, so raising and
lowering indices is free.  Norms follow one convention throughout: a
four-tensor has ``|T|^2 = 1/4 sum T^2`` and a symmetric two-tensor
``|a|^2 = 1/2 sum a^2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "CurvatureError", "CurvModel", "SymForm", "validate", "constant_model",
    "zero_model", "nk_product", "random_model", "phi_plus", "phi_minus", "ricci",
    "scalar", "norm_sq", "sym_norm_sq", "traceless_ricci", "direct_sum", "pad",
    "rotate", "q_star", "q_star_vector", "der_sym", "hamilton_Q",
    "theta3_numeric", "make_einstein", "is_einstein", "sectional",
    "grassmann_moment_mc", "sec_extrema_estimate", "polarize_from_sectional",
    "pr_project", "model_from_json", "model_to_json", "random_orthogonal",
]

ALGEBRAIC = "R"
SECTIONAL = "Sec"


class CurvatureError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CurvModel:
    m: int
    kind: str
    comp: np.ndarray

    def __post_init__(self):
        comp = np.asarray(self.comp, dtype=float)
        if comp.shape != (self.m,) * 4:
            raise CurvatureError(f"components must have shape {(self.m,) * 4}, got {comp.shape}")
        if self.kind not in (ALGEBRAIC, SECTIONAL):
            raise CurvatureError(f"unknown kind {self.kind!r}")
        comp.setflags(write=False)
        object.__setattr__(self, "comp", comp)

    def __add__(self, other: "CurvModel") -> "CurvModel":
        _same(self, other)
        return CurvModel(self.m, self.kind, self.comp + other.comp)

    def __sub__(self, other: "CurvModel") -> "CurvModel":
        _same(self, other)
        return CurvModel(self.m, self.kind, self.comp - other.comp)

    def __mul__(self, c: float) -> "CurvModel":
        return CurvModel(self.m, self.kind, self.comp * c)

    __rmul__ = __mul__


def _same(a: CurvModel, b: CurvModel):
    if a.m != b.m or a.kind != b.kind:
        raise CurvatureError("models differ in dimension or kind")


def _need(R: CurvModel, kind: str = ALGEBRAIC):
    if R.kind != kind:
        raise CurvatureError(f"expected a {kind} tensor, got {R.kind}")


class SymForm:
    """Symmetric bilinear form; only the upper triangle is stored."""

    def __init__(self, m: int, comp):
        a = np.asarray(comp, dtype=float)
        if a.shape != (m, m):
            raise CurvatureError(f"symmetric form must be {m}x{m}")
        self.m = m
        self._iu = np.triu_indices(m)
        self.upper = a[self._iu].copy()

    @property
    def matrix(self) -> np.ndarray:
        a = np.zeros((self.m, self.m))
        a[self._iu] = self.upper
        return a + np.triu(a, 1).T

    @classmethod
    def identity(cls, m: int) -> "SymForm":
        return cls(m, np.eye(m))

    def trace(self) -> float:
        return float(np.trace(self.matrix))


def validate(T: CurvModel, tol: float = 1e-10) -> None:
    """Raise :class:`CurvatureError` if the symmetries of ``T.kind`` fail."""
    c = T.comp
    scale = max(float(np.max(np.abs(c))), 1.0) if c.size else 1.0
    lim = tol * scale

    def check(x, what):
        err = float(np.max(np.abs(x))) if x.size else 0.0
        if err > lim:
            raise CurvatureError(f"{what} violated by {err:.3g}")

    if T.kind == ALGEBRAIC:
        check(c + c.transpose(1, 0, 2, 3), "antisymmetry in the first pair")
        check(c + c.transpose(0, 1, 3, 2), "antisymmetry in the second pair")
        check(c - c.transpose(2, 3, 0, 1), "pair symmetry")
        check(c + c.transpose(1, 2, 0, 3) + c.transpose(2, 0, 1, 3), "first Bianchi identity")
    else:
        check(c - c.transpose(1, 0, 2, 3), "symmetry in the first pair")
        check(c - c.transpose(0, 1, 3, 2), "symmetry in the second pair")
        check(c - c.transpose(2, 3, 0, 1), "pair symmetry")
        idx = np.arange(T.m)
        check(c[idx, idx, idx, :], "S(X,X;X,V) = 0")


# ---------------------------------------------------------------------------
# constructors

def constant_model(m: int, c: float = 1.0) -> CurvModel:
    """R(X,Y;U,V) = -c (g(X,U)g(Y,V) - g(X,V)g(Y,U))."""
    if m < 2:
        raise CurvatureError("dimension must be at least 2")
    d = np.eye(m)
    comp = -c * (np.einsum("ik,jl->ijkl", d, d) - np.einsum("il,jk->ijkl", d, d))
    return CurvModel(m, ALGEBRAIC, comp)


def zero_model(m: int) -> CurvModel:
    return CurvModel(m, ALGEBRAIC, np.zeros((m,) * 4))


def nk_product(a: SymForm, b: SymForm) -> CurvModel:
    """(a x b)(X,Y;U,V) = a(X,U)b(Y,V) - a(X,V)b(Y,U) - a(Y,U)b(X,V) + a(Y,V)b(X,U)."""
    if a.m != b.m:
        raise CurvatureError("forms of different dimension")
    A, B = a.matrix, b.matrix
    comp = (np.einsum("ik,jl->ijkl", A, B) - np.einsum("il,jk->ijkl", A, B)
            - np.einsum("jk,il->ijkl", A, B) + np.einsum("jl,ik->ijkl", A, B))
    return CurvModel(a.m, ALGEBRAIC, comp)


def random_model(m: int, terms: int = 3, seed: int = 0) -> CurvModel:
    """Signed sum of Nomizu-Kulkarni squares of random symmetric forms."""
    rng = np.random.default_rng(seed)
    comp = np.zeros((m,) * 4)
    for _ in range(terms):
        x = rng.standard_normal((m, m))
        a = SymForm(m, (x + x.T) / 2)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        comp = comp + sign * nk_product(a, a).comp
    return CurvModel(m, ALGEBRAIC, comp)


def random_orthogonal(m: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    return q * np.sign(np.diag(r))


def rotate(T: CurvModel, F: np.ndarray) -> CurvModel:
    """Components of ``T`` in the frame given by the columns of ``F``."""
    comp = np.einsum("ai,bj,ck,dl,abcd->ijkl", F, F, F, F, T.comp, optimize=True)
    return CurvModel(T.m, T.kind, comp)


# ---------------------------------------------------------------------------
# conversions and contractions

def phi_plus(R: CurvModel) -> CurvModel:
    """Sec(X,Y;U,V) = -2 (R(X,U;Y,V) + R(X,V;Y,U))."""
    _need(R, ALGEBRAIC)
    c = R.comp
    return CurvModel(R.m, SECTIONAL, -2.0 * (c.transpose(0, 2, 1, 3) + c.transpose(0, 2, 3, 1)))


def phi_minus(S: CurvModel) -> CurvModel:
    """R(X,Y;U,V) = -1/6 (S(X,U;Y,V) - S(X,V;Y,U))."""
    _need(S, SECTIONAL)
    c = S.comp
    return CurvModel(S.m, ALGEBRAIC, -(c.transpose(0, 2, 1, 3) - c.transpose(0, 2, 3, 1)) / 6.0)


def ricci(R: CurvModel) -> SymForm:
    """Ric(Y,U) = sum_i R(e_i, Y; U, e_i)."""
    _need(R, ALGEBRAIC)
    return SymForm(R.m, np.einsum("ijki->jk", R.comp))


def scalar(R: CurvModel) -> float:
    return float(np.einsum("ijji->", R.comp))


def norm_sq(T: CurvModel) -> float:
    return 0.25 * float(np.sum(T.comp ** 2))


def sym_norm_sq(a: SymForm) -> float:
    return 0.5 * float(np.sum(a.matrix ** 2))


def traceless_ricci(R: CurvModel) -> SymForm:
    ric = ricci(R).matrix
    return SymForm(R.m, ric - np.trace(ric) / R.m * np.eye(R.m))


def direct_sum(R1: CurvModel, R2: CurvModel) -> CurvModel:
    _need(R1, ALGEBRAIC)
    _need(R2, ALGEBRAIC)
    m1, m2 = R1.m, R2.m
    comp = np.zeros((m1 + m2,) * 4)
    comp[:m1, :m1, :m1, :m1] = R1.comp
    comp[m1:, m1:, m1:, m1:] = R2.comp
    return CurvModel(m1 + m2, ALGEBRAIC, comp)


def pad(R: CurvModel, k: int) -> CurvModel:
    """R plus a flat factor of dimension ``k``."""
    if k == 0:
        return R
    return direct_sum(R, CurvModel(k, ALGEBRAIC, np.zeros((k,) * 4)))


def polarize_from_sectional(R: CurvModel) -> np.ndarray:
    """Rebuild all components of R from values R(A,B;B,A) alone."""
    m = R.m
    c = R.comp

    def q(A, B):
        return np.einsum("i,j,k,l,ijkl->", A, B, B, A, c)

    E = np.eye(m)
    out = np.zeros((m,) * 4)
    for x in range(m):
        for y in range(m):
            for u in range(m):
                for v in range(m):
                    X, Y, U, V = E[x], E[y], E[u], E[v]
                    s = (q(X + V, Y + U) - q(X + U, Y + V)
                         - q(X + V, Y - U) + q(X + U, Y - V)
                         - q(X - V, Y + U) + q(X - U, Y + V)
                         + q(X - V, Y - U) - q(X - U, Y - V))
                    out[x, y, u, v] = s / 24.0
    return out


def pr_project(S: np.ndarray) -> CurvModel:
    """Projection of a Sym2 (x) Sym2 tensor onto sectional curvature tensors.

    6 pr S(X,Y;U,V) = 2S(X,Y;U,V) + 2S(U,V;X,Y) - S(X,U;Y,V) - S(X,V;Y,U)
                      - S(Y,U;X,V) - S(Y,V;X,U)
    """
    S = np.asarray(S, dtype=float)
    m = S.shape[0]
    out = (2 * S + 2 * S.transpose(2, 3, 0, 1)
           - S.transpose(0, 2, 1, 3) - S.transpose(0, 2, 3, 1)
           - S.transpose(2, 0, 1, 3) - S.transpose(2, 0, 3, 1)) / 6.0
    return CurvModel(m, SECTIONAL, out)


# ---------------------------------------------------------------------------
# the standard curvature term

def _skew_act(A: np.ndarray, T: np.ndarray) -> np.ndarray:
    """(A * T)(X1..X4) = -sum_i T(.., A Xi, ..) with (A e_a) = sum_k A[k,a] e_k."""
    return -(np.einsum("ka,kbcd->abcd", A, T) + np.einsum("kb,akcd->abcd", A, T)
             + np.einsum("kc,abkd->abcd", A, T) + np.einsum("kd,abck->abcd", A, T))


def q_star(R: CurvModel, T: CurvModel) -> CurvModel:
    """q(R)*T = 1/4 sum_{mu,nu} (e_mu ^ e_nu) * (R_{mu nu} * T).

    ``R_{mu nu}`` is the skew endomorphism ``U -> R(e_mu, e_nu; U, .)`` and
    ``e_mu ^ e_nu`` maps ``U`` to ``g(e_mu,U) e_nu - g(e_nu,U) e_mu``.
    """
    _need(R, ALGEBRAIC)
    if R.m != T.m:
        raise CurvatureError("dimension mismatch")
    m = R.m
    c = T.comp
    out = np.zeros_like(c)
    for mu in range(m):
        for nu in range(m):
            if mu == nu:
                continue
            A = R.comp[mu, nu].T  # A[k,u] = R[mu,nu,u,k]
            if not np.any(A):
                continue
            B = np.zeros((m, m))
            B[nu, mu] = 1.0
            B[mu, nu] = -1.0
            out += _skew_act(B, _skew_act(A, c))
    return CurvModel(m, T.kind, out / 4.0)


def q_star_vector(R: CurvModel, X: np.ndarray) -> np.ndarray:
    """The same Casimir-type operator acting on a vector."""
    m = R.m
    out = np.zeros(m)
    for mu in range(m):
        for nu in range(m):
            A = R.comp[mu, nu].T
            B = np.zeros((m, m))
            B[nu, mu] = 1.0
            B[mu, nu] = -1.0
            out += B @ (A @ X)
    return out / 4.0


def der_sym(a: SymForm, T: CurvModel) -> CurvModel:
    """Derivation extension of a symmetric endomorphism to four-tensors."""
    A = a.matrix
    c = T.comp
    out = (np.einsum("ka,kbcd->abcd", A, c) + np.einsum("kb,akcd->abcd", A, c)
           + np.einsum("kc,abkd->abcd", A, c) + np.einsum("kd,abck->abcd", A, c))
    return CurvModel(T.m, T.kind, out)


def hamilton_Q(R: CurvModel) -> CurvModel:
    """Quadratic term Q(R)(X,Y;U,V) = 2 <R_XY, R_UV> + 2 sum_mu (
    <R_{mu X} U, R_{mu Y} V> - <R_{mu X} V, R_{mu Y} U>)."""
    _need(R, ALGEBRAIC)
    c = R.comp
    first = np.einsum("xyuk,pquk->xypq", c, c)  # 2 * (1/2 sum) on skew matrices
    second = np.einsum("mxuk,myvk->xyuv", c, c)
    return CurvModel(R.m, ALGEBRAIC, first + 2.0 * (second - second.transpose(0, 1, 3, 2)))


def theta3_numeric(R: CurvModel) -> float:
    """<q(R)*R, R> with the four-tensor inner product 1/4 sum."""
    return 0.25 * float(np.sum(q_star(R, R).comp * R.comp))


# ---------------------------------------------------------------------------
# Einstein projection

def is_einstein(R: CurvModel, tol: float = 1e-8) -> bool:
    ric = ricci(R).matrix
    r0 = traceless_ricci(R).matrix
    return float(np.max(np.abs(r0))) <= tol * max(float(np.max(np.abs(ric))), 1e-300)


def make_einstein(R: CurvModel) -> CurvModel:
    """Add t (Ric0 x g) with t solving the linear condition Ric0(result) = 0."""
    _need(R, ALGEBRAIC)
    r0 = traceless_ricci(R)
    if not np.any(np.abs(r0.matrix) > 0):
        return R
    corr = nk_product(r0, SymForm.identity(R.m))
    C = traceless_ricci(corr).matrix
    cc = float(np.sum(C * C))
    if cc <= 1e-24 * max(float(np.sum(r0.matrix ** 2)), 1e-300):
        raise CurvatureError("correction does not change the traceless Ricci part (m = 2?)")
    t = -float(np.sum(r0.matrix * C)) / cc
    return CurvModel(R.m, ALGEBRAIC, R.comp + t * corr.comp)


# ---------------------------------------------------------------------------
# sectional curvature sampling

def sectional(R: CurvModel, X, Y) -> float:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    area = float(X @ X * (Y @ Y) - (X @ Y) ** 2)
    if area < 1e-12:
        raise CurvatureError("X and Y span no plane")
    return float(np.einsum("i,j,k,l,ijkl->", X, Y, Y, X, R.comp)) / area


def grassmann_moment_mc(R: CurvModel, n: int, samples: int = 10_000, seed: int = 0,
                        block: int = 10_000) -> Tuple[float, float]:
    """Mean and standard error of sec^n over uniformly random planes."""
    _need(R, ALGEBRAIC)
    ss = np.random.SeedSequence(seed)
    nblocks = max(1, -(-samples // block))
    vals = []
    left = samples
    for child in ss.spawn(nblocks):
        k = min(block, left)
        left -= k
        rng = np.random.default_rng(child)
        X = rng.standard_normal((k, R.m))
        Y = rng.standard_normal((k, R.m))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        Y -= np.sum(X * Y, axis=1, keepdims=True) * X
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        sec = np.einsum("si,sj,sk,sl,ijkl->s", X, Y, Y, X, R.comp, optimize=True)
        vals.append(sec ** n)
    v = np.concatenate(vals)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def sec_extrema_estimate(moments: Sequence[float], shift: float) -> Tuple[float, float]:
    """Moment-based estimates of the largest and smallest sectional curvature.

    ``moments[n-1]`` is the n-th moment; with N = len(moments) this returns
    ``-L + (sum_n C(N,n) psi_n L^(N-n))^(1/N)`` and its mirror image.  Both
    converge to the true extrema only as N grows.
    """
    N = len(moments)
    if N == 0:
        raise CurvatureError("need at least one moment")
    psi = [1.0] + [float(x) for x in moments]
    up = sum(math.comb(N, k) * psi[k] * shift ** (N - k) for k in range(N + 1))
    down = sum(math.comb(N, k) * (-1) ** k * psi[k] * shift ** (N - k) for k in range(N + 1))
    if up < 0 or down < 0:
        raise CurvatureError("negative radicand; increase the shift")
    return -shift + up ** (1.0 / N), shift - down ** (1.0 / N)


# ---------------------------------------------------------------------------
# JSON model specs

def model_from_json(spec) -> CurvModel:
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("type")
    if kind == "constant":
        return constant_model(int(spec["m"]), float(spec.get("c", 1.0)))
    if kind == "nk_random":
        return random_model(int(spec["m"]), int(spec.get("terms", 3)), int(spec.get("seed", 0)))
    if kind == "direct_sum":
        parts = [model_from_json(p) for p in spec["parts"]]
        if not parts:
            raise CurvatureError("direct_sum needs parts")
        out = parts[0]
        for p in parts[1:]:
            out = direct_sum(out, p)
        return out
    if kind == "explicit":
        m = int(spec["m"])
        comp = np.asarray(spec["comp"], dtype=float)
        if comp.size != m ** 4:
            raise CurvatureError(f"explicit model needs {m ** 4} components, got {comp.size}")
        R = CurvModel(m, ALGEBRAIC, comp.reshape((m,) * 4))
        validate(R)
        return R
    if kind == "einstein":
        return make_einstein(model_from_json(spec["base"]))
    raise CurvatureError(f"unknown model type {kind!r}")


def model_to_json(R: CurvModel) -> str:
    return json.dumps({"type": "explicit", "m": R.m, "comp": R.comp.reshape(-1).tolist()})
