"""Generalized conditional expectations and block-spin-flip Markov semigroups.

Modular objects are used through their finite-dimensional closed forms:
``sigma_t(f) = rho^{it} f rho^{-it}`` and the Connes cocycle
``(D phi1 : D phi2)_t = rho1^{it} rho2^{-it}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import (
    LocalOperator,
    Region,
    SupportError,
    embed,
    op_norm,
    partial_trace,
    random_operator,
)
from .gibbs import DensityOperator, NonPositiveDensityError
from .lp import kms_inner

__all__ = [
    "KINDS",
    "SingularMarginalError",
    "SuperoperatorError",
    "Superoperator",
    "partial_trace_ce",
    "kraus_map",
    "inner_automorphism",
    "transpose_map",
    "jordan_map",
    "custom_map",
    "apply",
    "rn_cocycle",
    "cocycle_analytic_extension",
    "modular_automorphism",
    "equivalence_constant",
    "equivalence_witness",
    "marginal_density",
    "block_spin_gce",
    "GCEReport",
    "gce_property_report",
    "markov_generator",
    "semigroup_apply",
    "superoperator_matrix",
    "generator_spectrum",
    "choi_matrix",
    "is_completely_positive",
]

KINDS = ("partial_trace_ce", "generalized_ce", "kraus", "inner_auto", "transpose",
         "jordan", "generator", "custom")

MATRICIZE_CAP = 64


class SuperoperatorError(ValueError):
    pass


class SingularMarginalError(NonPositiveDensityError):
    pass


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Linear map on the operators of ``ambient``.

    ``data`` holds whatever defines the map: ``X`` for partial traces,
    ``gamma`` and ``X`` for generalized conditional expectations, the Kraus
    list ``W``, the unitary ``u``, or the list ``maps`` summed by a
    generator.
    """

    kind: str
    ambient: Region
    data: dict = field(default_factory=dict)
    n: int = 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SuperoperatorError(f"unknown superoperator kind {self.kind!r}")
        d = self.data
        if self.kind == "kraus" and not d.get("W"):
            raise SuperoperatorError("Kraus map needs at least one operator")
        if self.kind == "inner_auto":
            u = d["u"]
            if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-12):
                raise SuperoperatorError("inner automorphism needs a unitary")
        if self.kind == "generalized_ce":
            g = LocalOperator(self.ambient, d["gamma"], self.n)
            defect = op_norm(partial_trace(g.H @ g, d["X"]).matrix - np.eye(g.dim))
            if defect > 1e-10:
                raise SuperoperatorError(f"Tr_X(gamma* gamma) deviates from 1 by {defect:.2e}")

    @property
    def dim(self) -> int:
        return self.n ** len(self.ambient)

    def __call__(self, f: LocalOperator) -> LocalOperator:
        return apply(self, f)


def _unitary_like(m) -> np.ndarray:
    return np.asarray(m.matrix if isinstance(m, LocalOperator) else m, dtype=complex)


def partial_trace_ce(ambient, X, n: int = 2) -> Superoperator:
    """The trace-preserving conditional expectation ``Tr_X``."""
    return Superoperator("partial_trace_ce", Region(ambient), {"X": Region(X)}, n)


def kraus_map(W, ambient, n: int = 2) -> Superoperator:
    """``f -> sum_i W_i* f W_i``."""
    return Superoperator("kraus", Region(ambient), {"W": [_unitary_like(w) for w in W]}, n)


def inner_automorphism(u, ambient, n: int = 2) -> Superoperator:
    """``f -> u* f u``."""
    return Superoperator("inner_auto", Region(ambient), {"u": _unitary_like(u)}, n)


def transpose_map(ambient, n: int = 2) -> Superoperator:
    return Superoperator("transpose", Region(ambient), {}, n)


def jordan_map(ambient, u=None, transpose: bool = False, n: int = 2) -> Superoperator:
    """Jordan *-automorphism ``f -> u* J(f) u`` with ``J`` the identity or transpose."""
    dim = n ** len(Region(ambient))
    u = np.eye(dim, dtype=complex) if u is None else _unitary_like(u)
    if not np.allclose(u.conj().T @ u, np.eye(dim), atol=1e-12):
        raise SuperoperatorError("Jordan map needs a unitary")
    return Superoperator("jordan", Region(ambient), {"u": u, "transpose": bool(transpose)}, n)


def custom_map(fn: Callable[[np.ndarray], np.ndarray], ambient, n: int = 2) -> Superoperator:
    return Superoperator("custom", Region(ambient), {"fn": fn}, n)


def _apply_matrix(E: Superoperator, m: np.ndarray) -> np.ndarray:
    d, kind = E.data, E.kind
    if kind == "partial_trace_ce":
        return partial_trace(LocalOperator(E.ambient, m, E.n), d["X"]).matrix
    if kind == "generalized_ce":
        g = d["gamma"]
        return partial_trace(LocalOperator(E.ambient, g.conj().T @ m @ g, E.n), d["X"]).matrix
    if kind == "kraus":
        return sum(w.conj().T @ m @ w for w in d["W"])
    if kind == "inner_auto":
        u = d["u"]
        return u.conj().T @ m @ u
    if kind == "transpose":
        return m.T.copy()
    if kind == "jordan":
        u = d["u"]
        return u.conj().T @ (m.T if d["transpose"] else m) @ u
    if kind == "generator":
        return sum(_apply_matrix(F, m) for F in d["maps"]) - len(d["maps"]) * m
    return np.asarray(d["fn"](m), dtype=complex)


def apply(E: Superoperator, f: LocalOperator) -> LocalOperator:
    """Evaluate ``E`` on ``f`` (embedded into the ambient region)."""
    if f.n != E.n:
        raise SuperoperatorError("site dimension of operator and map differ")
    if not f.support.issubset(E.ambient):
        raise SupportError(f"operator on {f.support!r} lies outside {E.ambient!r}")
    m = embed(f, E.ambient).matrix
    return LocalOperator(E.ambient, _apply_matrix(E, m), E.n)


# -- modular theory at finite dimension ---------------------------------------


def _power(rho: LocalOperator, a) -> np.ndarray:
    w, v = rho.eigh
    if w[0] <= 0:
        raise NonPositiveDensityError(f"density has eigenvalue {w[0]:.3e}")
    return (v * np.power(w.astype(complex), a)) @ v.conj().T


def _same_ambient(rho1, rho2):
    if rho1.support != rho2.support or rho1.dim != rho2.dim:
        raise SupportError(f"densities live on {rho1.support!r} and {rho2.support!r}")


def rn_cocycle(rho1: LocalOperator, rho2: LocalOperator, t) -> LocalOperator:
    """Connes cocycle ``V_t = rho1^{it} rho2^{-it}`` (``t`` may be complex)."""
    _same_ambient(rho1, rho2)
    return LocalOperator(rho1.support, _power(rho1, 1j * t) @ _power(rho2, -1j * t), rho1.n)


def cocycle_analytic_extension(rho1: LocalOperator, rho2: LocalOperator) -> LocalOperator:
    """``xi = V_{-i/2} = rho1^{1/2} rho2^{-1/2}``."""
    _same_ambient(rho1, rho2)
    return LocalOperator(rho1.support, _power(rho1, 0.5) @ _power(rho2, -0.5), rho1.n)


def modular_automorphism(rho: LocalOperator, f: LocalOperator, t) -> LocalOperator:
    """``sigma_t(f) = rho^{it} f rho^{-it}``."""
    m = embed(f, rho.support).matrix
    return LocalOperator(rho.support, _power(rho, 1j * t) @ m @ _power(rho, -1j * t), rho.n)


def _relative_spectrum(rho1, rho2):
    _same_ambient(rho1, rho2)
    r = _power(rho1, -0.5)
    A = r @ rho2.matrix @ r
    w, v = np.linalg.eigh(0.5 * (A + A.conj().T))
    return w, v, r


def equivalence_constant(rho1: LocalOperator, rho2: LocalOperator) -> float:
    """Smallest ``c`` with ``phi1/c <= phi2 <= c phi1`` on positive operators."""
    w, _, _ = _relative_spectrum(rho1, rho2)
    return float(max(w[-1], 1.0 / w[0]))


def equivalence_witness(rho1: LocalOperator, rho2: LocalOperator) -> LocalOperator:
    """Positive ``f`` attaining ``phi2(f)/phi1(f)`` at the extreme ratio that sets ``c``."""
    w, v, r = _relative_spectrum(rho1, rho2)
    k = -1 if w[-1] >= 1.0 / w[0] else 0
    P = np.outer(v[:, k], v[:, k].conj())
    return LocalOperator(rho1.support, r @ P @ r, rho1.n)


def marginal_density(rho: LocalOperator, X) -> DensityOperator:
    """Density ``Tr_X rho`` of the state ``phi o Tr_X``, kept in the ambient algebra."""
    m = partial_trace(rho, X)
    return DensityOperator(m.support, 0.5 * (m.matrix + m.matrix.conj().T), m.n)


def block_spin_gce(rho: LocalOperator, X) -> Superoperator:
    """``E(f) = Tr_X(gamma* f gamma)`` with ``gamma = rho^{1/2} (Tr_X rho)^{-1/2}``."""
    X = X if isinstance(X, Region) else Region(X)
    if not X.issubset(rho.support):
        raise SupportError(f"block {X!r} is not inside {rho.support!r}")
    marg = partial_trace(rho, X)
    w, v = marg.eigh
    if w[0] <= 1e-300:
        raise SingularMarginalError(f"marginal Tr_X rho has eigenvalue {w[0]:.3e}")
    gamma = _power(rho, 0.5) @ ((v * w**-0.5) @ v.conj().T)
    return Superoperator("generalized_ce", rho.support, {"gamma": gamma, "X": X}, rho.n)


@dataclass(frozen=True)
class GCEReport:
    unital: float
    positivity: float
    symmetry: float

    def passed(self, unital_tol=1e-12, positivity_tol=1e-10, symmetry_tol=1e-8) -> bool:
        return (self.unital < unital_tol and self.positivity < positivity_tol
                and self.symmetry < symmetry_tol)


def gce_property_report(E: Superoperator, rho1: LocalOperator, samples: int = 200,
                        seed=0, pairs: int | None = None) -> GCEReport:
    """Largest violations of ``E(1) = 1``, ``E(f*f) >= 0`` and KMS symmetry.

    Symmetry is measured in ``<f, g>_1 = Tr(rho1^{1/2} f* rho1^{1/2} g)``.
    """
    if E.kind not in ("generalized_ce", "partial_trace_ce"):
        raise SuperoperatorError(f"property report needs a conditional expectation, not {E.kind}")
    pairs = samples // 2 if pairs is None else pairs
    one = np.eye(E.dim)
    unital = float(np.abs(_apply_matrix(E, one) - one).max())
    rng = np.random.default_rng(seed)
    positivity = 0.0
    for _ in range(samples):
        f = random_operator(E.ambient, rng, E.n).matrix
        ef = _apply_matrix(E, f.conj().T @ f)
        lo = np.linalg.eigvalsh(0.5 * (ef + ef.conj().T))[0]
        positivity = max(positivity, -lo)
    symmetry = 0.0
    for _ in range(pairs):
        f = random_operator(E.ambient, rng, E.n)
        g = random_operator(E.ambient, rng, E.n)
        lhs = kms_inner(apply(E, f), g, rho1, 0.5)
        rhs = kms_inner(f, apply(E, g), rho1, 0.5)
        symmetry = max(symmetry, abs(lhs - rhs))
    return GCEReport(unital, positivity, symmetry)


def markov_generator(*maps: Superoperator) -> Superoperator:
    """``L = sum_X (E_X - id)`` over the given unital maps (one map: ``E - id``)."""
    if not maps:
        raise SuperoperatorError("generator needs at least one map")
    ambient = maps[0].ambient
    for E in maps:
        if E.ambient != ambient or E.n != maps[0].n:
            raise SuperoperatorError("all maps of a generator must share the ambient algebra")
        if E.kind == "generator":
            raise SuperoperatorError("nested generators are not supported")
    return Superoperator("generator", ambient, {"maps": list(maps)}, maps[0].n)


def semigroup_apply(L: Superoperator, f: LocalOperator, t: float,
                    tol: float = 1e-14) -> LocalOperator:
    """``P_t f = exp(tL) f`` for ``L = sum_X E_X - m id``.

    Uses ``exp(tL) = exp(-mt) sum_k t^k/k! K^k`` with ``K = sum_X E_X``
    without building the superoperator.  Terms are summed until the current
    one drops below ``tol * ||f||`` past the peak of the Poisson weights.
    """
    if L.kind != "generator":
        raise SuperoperatorError("semigroup_apply needs a generator")
    if t < 0:
        raise ValueError("t must be non-negative")
    maps = L.data["maps"]
    m = len(maps)
    x = embed(f, L.ambient).matrix
    if t == 0:
        return LocalOperator(L.ambient, x.copy(), L.n)
    scale = max(np.abs(x).max(), 1e-300)
    # log-space Poisson weights avoid overflow for large m t
    term = x
    total = np.exp(-m * t) * x
    k = 0
    while True:
        k += 1
        term = sum(_apply_matrix(E, term) for E in maps)
        weight = math.exp(k * math.log(t) - math.lgamma(k + 1) - m * t)
        contrib = weight * term
        total = total + contrib
        if k > m * t and np.abs(contrib).max() < tol * scale:
            break
        if k > 10000:
            raise RuntimeError("semigroup series did not converge")
    return LocalOperator(L.ambient, total, L.n)


# -- dense diagnostics (small ambient algebras only) --------------------------


def superoperator_matrix(E: Superoperator) -> np.ndarray:
    """Matrix of ``E`` on row-major vectorized operators (ambient dim <= 64)."""
    dim = E.dim
    if dim > MATRICIZE_CAP:
        raise SuperoperatorError(f"matricization limited to dimension {MATRICIZE_CAP}")
    S = np.empty((dim * dim, dim * dim), dtype=complex)
    for idx in range(dim * dim):
        unit = np.zeros(dim * dim, dtype=complex)
        unit[idx] = 1
        S[:, idx] = _apply_matrix(E, unit.reshape(dim, dim)).ravel()
    return S


def generator_spectrum(L: Superoperator) -> np.ndarray:
    return np.linalg.eigvals(superoperator_matrix(L))


def choi_matrix(E: Superoperator) -> np.ndarray:
    """``sum_ij |i><j| ⊗ E(|i><j|)``."""
    dim = E.dim
    if dim > MATRICIZE_CAP:
        raise SuperoperatorError(f"Choi matrix limited to dimension {MATRICIZE_CAP}")
    C = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            eij = np.zeros((dim, dim), dtype=complex)
            eij[i, j] = 1
            C[i * dim:(i + 1) * dim, j * dim:(j + 1) * dim] = _apply_matrix(E, eij)
    return C


def is_completely_positive(E: Superoperator, tol: float = 1e-10) -> bool:
    C = choi_matrix(E)
    return bool(np.linalg.eigvalsh(0.5 * (C + C.conj().T))[0] >= -tol)
