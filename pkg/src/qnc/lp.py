"""Two-parameter non-commutative L_p norms of a faithful state.

For a density ``rho`` (normalized trace one), ``p >= 1`` and ``s`` in
``[0, 1]``::

    ||f||_{p,s} = (Tr |rho^{(1-s)/p} f rho^{s/p}|^p)^{1/p}

The matching sesquilinear pairing is ``<f, g>_s = Tr(rho^s f* rho^{1-s} g)``,
so that ``||f||_{2,s}^2 = <f, f>_s`` for every ``s`` and Hölder's inequality
``|<g, f>_s| <= ||g||_{q,s} ||f||_{p,s}`` holds with ``1/p + 1/q = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .algebra import LocalOperator, Region, SupportError, embed, op_norm
from .gibbs import NonPositiveDensityError, Potential, gibbs_density

__all__ = [
    "EIGEN_FLOOR",
    "NonNestedVolumesError",
    "HolderReport",
    "fractional_power",
    "lps_norm",
    "schatten_norm",
    "kms_inner",
    "holder_check",
    "conjugate_exponent",
    "duality_norm_estimate",
    "monotonicity_sweep",
]

EIGEN_FLOOR = 1e-300


class NonNestedVolumesError(ValueError):
    pass


def _spectrum(rho: LocalOperator) -> tuple[np.ndarray, np.ndarray]:
    w, v = rho.eigh
    if w[0] <= EIGEN_FLOOR:
        raise NonPositiveDensityError(
            f"density eigenvalue {w[0]:.3e} is below the floor {EIGEN_FLOOR:g}"
        )
    return w, v


def _power_matrix(rho: LocalOperator, a: float) -> np.ndarray:
    if a == 0:
        return np.eye(rho.dim)
    w, v = _spectrum(rho)
    return (v * w**a) @ v.conj().T


def fractional_power(rho: LocalOperator, a: float) -> LocalOperator:
    """``rho**a`` for a strictly positive ``rho`` via its eigen-decomposition."""
    return LocalOperator(rho.support, _power_matrix(rho, a), rho.n)


def schatten_norm(m: np.ndarray, p: float, normalized: bool = True) -> float:
    """Schatten ``p``-norm from singular values, optionally w.r.t. ``Tr 1 = 1``."""
    sv = np.linalg.svd(np.asarray(m), compute_uv=False)
    if np.isinf(p):
        return float(sv.max(initial=0.0))
    scale = 1.0 / len(sv) if normalized else 1.0
    top = sv.max(initial=0.0)
    if top == 0:
        return 0.0
    # factor out the largest singular value to keep sv**p finite
    return float(top * (scale * np.sum((sv / top) ** p)) ** (1.0 / p))


def _check_params(p: float, s: float) -> None:
    if not (p >= 1):
        raise ValueError(f"p must be >= 1, got {p}")
    if not (0 <= s <= 1):
        raise ValueError(f"s must lie in [0, 1], got {s}")


def _lift(f: LocalOperator, rho: LocalOperator) -> np.ndarray:
    if not f.support.issubset(rho.support):
        raise SupportError(f"operator on {f.support!r} lies outside {rho.support!r}")
    return embed(f, rho.support).matrix


def lps_norm(f: LocalOperator, rho: LocalOperator, p: float, s: float) -> float:
    """``||f||_{L_{p,s}(rho)}``; ``p = inf`` gives the operator norm of ``f``."""
    _check_params(p, s)
    m = _lift(f, rho)
    if np.isinf(p):
        return op_norm(m)
    g = _power_matrix(rho, (1 - s) / p) @ m @ _power_matrix(rho, s / p)
    return schatten_norm(g, p)


def kms_inner(f: LocalOperator, g: LocalOperator, rho: LocalOperator, s: float = 0.5) -> complex:
    """``Tr(rho^s f* rho^{1-s} g)``, the pairing that squares to ``||.||_{2,s}``."""
    if not 0 <= s <= 1:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    a, b = _lift(f, rho), _lift(g, rho)
    m = _power_matrix(rho, s) @ a.conj().T @ _power_matrix(rho, 1 - s) @ b
    return complex(np.trace(m) / rho.dim)


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1)


@dataclass(frozen=True)
class HolderReport:
    pairing: complex
    norm_f: float
    norm_g: float
    ratio: float

    @property
    def ok(self) -> bool:
        return self.ratio <= 1 + 1e-10


def holder_check(f, g, rho, p: float, s: float) -> HolderReport:
    """Ratio ``|<g, f>_s| / (||g||_{q,s} ||f||_{p,s})`` (0 when either norm vanishes)."""
    if not p > 1:
        raise ValueError("Hölder check needs p > 1")
    q = conjugate_exponent(p)
    pair = kms_inner(g, f, rho, s)
    nf, ng = lps_norm(f, rho, p, s), lps_norm(g, rho, q, s)
    denom = nf * ng
    ratio = abs(pair) / denom if denom > 0 else 0.0
    return HolderReport(pair, nf, ng, ratio)


def duality_norm_estimate(f: LocalOperator, rho: LocalOperator, p: float, s: float,
                          sample_count: int = 200, seed=0, diagonal: bool = False,
                          refine: bool = True) -> float:
    """Lower estimate of ``sup_{||g||_q <= 1} |<g, f>_s|``.

    The candidates are ``g = 1`` plus ``sample_count`` complex Gaussian
    matrices (diagonal ones if ``diagonal``); with ``refine`` the best
    candidate is then improved by local ascent.  By Hölder the result never
    exceeds ``lps_norm(f, rho, p, s)``.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    _check_params(p, s)
    q = conjugate_exponent(p)
    m = _lift(f, rho)
    dim = rho.dim
    left = _power_matrix(rho, s)
    right = _power_matrix(rho, 1 - s)
    lq, rq = _power_matrix(rho, (1 - s) / q), _power_matrix(rho, s / q)
    # <g, f>_s = Tr(rho^s g* rho^{1-s} f) = Tr(g* K) with K below
    K = right @ m @ left / dim

    def ratio(g: np.ndarray) -> float:
        ng = schatten_norm(lq @ g @ rq, q)
        if ng == 0:
            return 0.0
        return abs(np.vdot(g, K)) / ng

    rng = np.random.default_rng(seed)
    best_g, best = np.eye(dim, dtype=complex), ratio(np.eye(dim, dtype=complex))
    for _ in range(sample_count):
        if diagonal:
            g = np.diag(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
        else:
            g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        r = ratio(g)
        if r > best:
            best_g, best = g, r
    if not refine:
        return float(best)

    if diagonal:
        def unpack(x):
            return np.diag(x[:dim] + 1j * x[dim:])
        x0 = np.concatenate([np.diag(best_g).real, np.diag(best_g).imag])
    else:
        def unpack(x):
            half = dim * dim
            return (x[:half] + 1j * x[half:]).reshape(dim, dim)
        x0 = np.concatenate([best_g.real.ravel(), best_g.imag.ravel()])
    res = minimize(lambda x: -ratio(unpack(x)), x0, method="BFGS",
                   options={"gtol": 1e-12, "maxiter": 2000})
    return float(max(best, -res.fun))


def _as_region(v) -> Region:
    return v if isinstance(v, Region) else Region(v)


def monotonicity_sweep(phi: Potential, beta: float, f: LocalOperator, volumes,
                       p: float, s: float) -> list[float]:
    """``[||f||_{p,s}(rho_Λ) for Λ in volumes]`` over nested volumes."""
    volumes = [_as_region(v) for v in volumes]
    for a, b in zip(volumes, volumes[1:]):
        if not a.issubset(b):
            raise NonNestedVolumesError(f"{a!r} is not contained in {b!r}")
    if volumes and not f.support.issubset(volumes[0]):
        raise NonNestedVolumesError(f"observable support {f.support!r} not in {volumes[0]!r}")
    return [lps_norm(f, gibbs_density(phi, v, beta), p, s) for v in volumes]
