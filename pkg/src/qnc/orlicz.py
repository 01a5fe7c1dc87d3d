"""Generalized singular values and (non-commutative) Orlicz norms.

At finite dimension the generalized singular value function ``t -> mu_t(f)``
is a decreasing step function whose steps are the distinct singular values
of ``f`` with widths equal to the trace mass of their spectral projections.
It is stored as a :class:`SingularProfile`.  Two routes to the Orlicz norm
are provided and cross-checked:

* :func:`luxemburg_norm` evaluates ``tau(phi(|f|/lam))`` by functional
  calculus on ``|f|`` (Kunze's construction);
* :func:`ddp_norm` applies the commutative Luxemburg norm to ``mu(f)``
  (the Dodds–Dodds–de Pagter construction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import LocalOperator, TraceSpec, op_norm, random_operator

__all__ = [
    "MERGE_RTOL",
    "OrliczFunction",
    "LemmaViolation",
    "BracketError",
    "ClassMismatchError",
    "SingularProfile",
    "singular_profile",
    "classical_rearrangement",
    "step_compare",
    "trace_phi",
    "trace_phi_sides",
    "function_norm",
    "luxemburg_norm",
    "ddp_norm",
    "kunze_membership",
    "AxiomReport",
    "function_norm_axiom_check",
    "ContractionReport",
    "contraction_report",
]

#: Singular values closer than this (relative to the largest) form one step.
MERGE_RTOL = 1e-12


class LemmaViolation(ArithmeticError):
    pass


class BracketError(RuntimeError):
    pass


class ClassMismatchError(ValueError):
    pass


# -- Orlicz functions ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OrliczFunction:
    """Convex ``phi: [0, inf) -> [0, inf]`` with ``phi(0) = 0``.

    Use the constructors :meth:`power`, :meth:`exp_minus_one`,
    :meth:`cosh_minus_one`, :meth:`llogl` and :meth:`custom`.  Arguments
    above ``b_phi`` evaluate to ``inf``.
    """

    kind: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    a_phi: float = 0.0
    b_phi: float = math.inf
    params: dict = field(default_factory=dict)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.full(u.shape, np.inf)
        ok = u <= self.b_phi
        if np.any(ok):
            # large arguments overflow to inf, which is the right value here
            with np.errstate(over="ignore"):
                out[ok] = self.fn(u[ok])
        return out if out.ndim else float(out)

    @classmethod
    def power(cls, p: float) -> "OrliczFunction":
        if p < 1:
            raise ValueError("power Orlicz function needs p >= 1")
        return cls("power", lambda u: u**p, params={"p": float(p)})

    @classmethod
    def exp_minus_one(cls) -> "OrliczFunction":
        return cls("exp_minus_one", np.expm1)

    @classmethod
    def cosh_minus_one(cls) -> "OrliczFunction":
        # cosh(u) - 1 = 2 sinh(u/2)^2, accurate near 0
        return cls("cosh_minus_one", lambda u: 2.0 * np.sinh(0.5 * u) ** 2)

    @classmethod
    def llogl(cls) -> "OrliczFunction":
        """``u log(1 + u)``."""
        return cls("llogl", lambda u: u * np.log1p(u))

    @classmethod
    def custom(cls, knots: Sequence[Sequence[float]], finite_tail: bool = False,
               tol: float = 1e-12) -> "OrliczFunction":
        """Piecewise-linear ``phi`` through ``knots = [[u, phi(u)], ...]``.

        The first knot must be ``(0, 0)``.  Beyond the last knot ``phi`` is
        ``inf`` (so ``b_phi`` is the last abscissa) unless ``finite_tail``, in
        which case the last segment is continued linearly.
        """
        k = np.asarray(knots, dtype=float)
        if k.ndim != 2 or k.shape[1] != 2 or len(k) < 2:
            raise ValueError("knots must be a list of at least two [u, phi(u)] pairs")
        u, v = k[:, 0], k[:, 1]
        if u[0] != 0 or v[0] != 0:
            raise ValueError("first knot must be (0, 0)")
        if np.any(np.diff(u) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        if np.any(v < 0):
            raise ValueError("Orlicz function must be non-negative")
        slopes = np.diff(v) / np.diff(u)
        if np.any(np.diff(slopes) < -tol * (1 + np.abs(slopes[:-1]))):
            raise ValueError("knots do not define a convex function")
        if np.any(slopes < -tol):
            raise ValueError("Orlicz function must be non-decreasing")
        if finite_tail and slopes[-1] <= 0:
            raise ValueError("a finite tail needs a positive final slope")
        if np.all(v == 0) and finite_tail:
            raise ValueError("Orlicz function is identically zero")
        zero = u[v == 0]
        a_phi = float(zero.max())
        b_phi = math.inf if finite_tail else float(u[-1])

        def fn(x):
            y = np.interp(x, u, v)
            if finite_tail:
                tail = x > u[-1]
                y = np.where(tail, v[-1] + slopes[-1] * (x - u[-1]), y)
            return y

        return cls("custom", fn, a_phi=a_phi, b_phi=b_phi,
                   params={"knots": k.tolist(), "finite_tail": finite_tail})

    @classmethod
    def from_spec(cls, spec: dict) -> "OrliczFunction":
        kind = spec.get("kind")
        if kind == "power":
            return cls.power(spec["p"])
        if kind == "exp_minus_one":
            return cls.exp_minus_one()
        if kind == "cosh_minus_one":
            return cls.cosh_minus_one()
        if kind == "llogl":
            return cls.llogl()
        if kind == "custom":
            return cls.custom(spec["knots"], spec.get("finite_tail", False))
        raise ValueError(f"unknown Orlicz kind {kind!r}")

    def label(self) -> str:
        if self.kind == "power":
            return f"power({self.params['p']:g})"
        return self.kind


# -- singular value profiles --------------------------------------------------


@dataclass(frozen=True)
class SingularProfile:
    """Right-continuous decreasing step function ``t -> mu_t``.

    ``values[k]`` holds on the interval of length ``weights[k]``; past
    ``sum(weights)`` and up to ``total_mass`` the function is zero.
    """

    values: np.ndarray
    weights: np.ndarray
    total_mass: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if v.shape != w.shape:
            raise ValueError("values and weights differ in length")
        if np.any(w <= 0) or np.any(v <= 0) or np.any(np.diff(v) >= 0):
            raise ValueError("profile needs strictly decreasing positive values and positive weights")
        if w.sum() > self.total_mass * (1 + 1e-12) + 1e-300:
            raise ValueError("step weights exceed the total mass")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @property
    def breaks(self) -> np.ndarray:
        """Right endpoints of the steps."""
        return np.cumsum(self.weights)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breaks, t, side="right")
        vals = np.append(self.values, 0.0)
        return vals[np.minimum(idx, len(self.values))]

    def scaled(self, c: float) -> "SingularProfile":
        c = abs(c)
        if c == 0:
            return SingularProfile(np.empty(0), np.empty(0), self.total_mass)
        return SingularProfile(c * self.values, self.weights, self.total_mass)

    def truncated(self, k: int) -> "SingularProfile":
        """The first ``k`` steps, zero afterwards."""
        return SingularProfile(self.values[:k], self.weights[:k], self.total_mass)


def _merge(values: np.ndarray, masses: np.ndarray, total: float) -> SingularProfile:
    order = np.argsort(-values, kind="stable")
    values, masses = values[order], masses[order]
    top = values[0] if len(values) else 0.0
    keep = values > MERGE_RTOL * top
    values, masses = values[keep], masses[keep]
    vs, ws = [], []
    for v, w in zip(values, masses):
        if vs and vs[-1] - v <= MERGE_RTOL * top:
            # weighted mean keeps sum phi(v) w accurate to first order
            vs[-1] = (vs[-1] * ws[-1] + v * w) / (ws[-1] + w)
            ws[-1] += w
        else:
            vs.append(float(v))
            ws.append(float(w))
    return SingularProfile(np.array(vs), np.array(ws), float(total))


def _matrix(f) -> np.ndarray:
    return f.matrix if isinstance(f, LocalOperator) else np.asarray(f, dtype=complex)


def _is_diagonal(m: np.ndarray) -> bool:
    return not np.any(m - np.diag(np.diag(m)))


def singular_profile(f, trace: TraceSpec = TraceSpec()) -> SingularProfile:
    """``mu(f)``: singular values in decreasing order weighted by trace mass."""
    m = _matrix(f)
    dim = m.shape[0]
    masses = trace.masses(dim)
    if trace.kind == "weighted":
        if not _is_diagonal(m):
            raise ValueError("weighted traces are only supported for diagonal operators")
        return _merge(np.abs(np.diag(m)), masses, masses.sum())
    sv = np.linalg.svd(m, compute_uv=False)
    return _merge(sv, masses, masses.sum())


def classical_rearrangement(values, weights, total_mass: float | None = None) -> SingularProfile:
    """Decreasing rearrangement of the step function ``values`` on intervals ``weights``."""
    v = np.abs(np.asarray(values, dtype=float))
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("step widths must be positive")
    total = float(w.sum()) if total_mass is None else float(total_mass)
    if len(v) == 0:
        return SingularProfile(np.empty(0), np.empty(0), total)
    return _merge(v, w, total)


def step_compare(f: SingularProfile, g: SingularProfile) -> float:
    """``max_t (f(t) - g(t))`` over the common refinement of the steps."""
    pts = np.union1d(np.concatenate([[0.0], f.breaks]), np.concatenate([[0.0], g.breaks]))
    if len(pts) == 0:
        return 0.0
    return float(np.max(f(pts) - g(pts)))


# -- trace of phi(|f|) and Luxemburg norms ------------------------------------


def _abs_spectrum(f, trace: TraceSpec) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of ``|f|`` (eigenvalues clipped at zero)."""
    m = _matrix(f)
    if trace.kind == "weighted":
        if not _is_diagonal(m):
            raise ValueError("weighted traces are only supported for diagonal operators")
        return np.abs(np.diag(m)), np.eye(m.shape[0])
    a = m.conj().T @ m
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return np.sqrt(np.clip(w, 0, None)), v


def _kunze_trace(s: np.ndarray, vecs: np.ndarray, masses: np.ndarray, phi, scale: float):
    """``tau(phi(|f|/scale))`` by functional calculus: ``sum_j tau(P_j) phi(s_j/scale)``."""
    vals = phi(s / scale)
    if np.any(np.isinf(vals)):
        return math.inf
    # tau(V diag(vals) V*) = sum_i mass_i (V diag(vals) V*)_ii
    diag = np.einsum("ij,j,ij->i", vecs, vals, vecs.conj()).real
    return float(masses @ diag)


def _profile_trace(profile: SingularProfile, phi, scale: float):
    vals = phi(profile.values / scale)
    if np.any(np.isinf(vals)):
        return math.inf
    return float(vals @ profile.weights)


def trace_phi_sides(f, phi: OrliczFunction, trace: TraceSpec = TraceSpec()) -> tuple[float, float]:
    """``(tau(phi(|f|)), sum_k phi(mu_k) w_k)`` computed independently."""
    s, vecs = _abs_spectrum(f, trace)
    masses = trace.masses(len(s))
    lhs = _kunze_trace(s, vecs, masses, phi, 1.0)
    rhs = _profile_trace(singular_profile(f, trace), phi, 1.0)
    return lhs, rhs


def trace_phi(f, phi: OrliczFunction, trace: TraceSpec = TraceSpec(), rtol: float = 1e-10) -> float:
    """``tau(phi(|f|))``, checked against the integral of ``phi(mu_t(f))``."""
    lhs, rhs = trace_phi_sides(f, phi, trace)
    if math.isinf(lhs) or math.isinf(rhs):
        if not (math.isinf(lhs) and math.isinf(rhs)):
            raise LemmaViolation(f"one side infinite: {lhs} vs {rhs}")
        return math.inf
    if abs(lhs - rhs) > rtol * max(abs(lhs), abs(rhs), 1e-300):
        raise LemmaViolation(f"tau(phi(|f|)) = {lhs!r} but integral of phi(mu) = {rhs!r}")
    return lhs


def _gauge(constraint: Callable[[float], float], top: float, phi: OrliczFunction,
           rtol: float, max_iter: int) -> float:
    """``inf{lam > 0: constraint(lam) <= 1}`` for a non-increasing constraint."""
    floor = top / phi.b_phi if math.isfinite(phi.b_phi) else 0.0
    lam = top
    if constraint(lam) <= 1:
        hi, lo = lam, lam / 4
        n = 0
        while lo > floor and constraint(lo) <= 1:
            hi, lo = lo, lo / 4
            n += 1
            if n > 2000:
                raise BracketError(f"no infeasible lower bracket below {hi!r}")
        lo = max(lo, floor)
    else:
        lo, hi = lam, lam * 4
        n = 0
        while constraint(hi) > 1:
            lo, hi = hi, hi * 4
            n += 1
            if n > 2000:
                raise BracketError(f"constraint still {constraint(hi)!r} at lambda={hi!r}")
    for _ in range(max_iter):
        if hi - lo <= rtol * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if constraint(mid) <= 1:
            hi = mid
        else:
            lo = mid
    return hi


def function_norm(profile: SingularProfile, phi: OrliczFunction, rtol: float = 1e-15,
                  max_iter: int = 200) -> float:
    """Luxemburg norm of a step function given by its decreasing profile."""
    if len(profile.values) == 0:
        return 0.0
    return _gauge(lambda lam: _profile_trace(profile, phi, lam), float(profile.values[0]),
                  phi, rtol, max_iter)


def luxemburg_norm(f, phi: OrliczFunction, trace: TraceSpec = TraceSpec(),
                   rtol: float = 1e-15, max_iter: int = 200) -> float:
    """``inf{lam > 0 : tau(phi(|f|/lam)) <= 1}`` by bisection."""
    s, vecs = _abs_spectrum(f, trace)
    top = float(s.max(initial=0.0))
    if top == 0:
        return 0.0
    masses = trace.masses(len(s))
    return _gauge(lambda lam: _kunze_trace(s, vecs, masses, phi, lam), top, phi, rtol, max_iter)


def ddp_norm(f, phi: OrliczFunction, trace: TraceSpec = TraceSpec()) -> float:
    """``rho_phi(mu(f))``, the rearrangement-invariant route to the same norm."""
    return function_norm(singular_profile(f, trace), phi)


def kunze_membership(f, phi: OrliczFunction, trace: TraceSpec = TraceSpec()) -> float:
    """A ``lam > 0`` with ``tau(phi(lam |f|)) < inf``.

    At finite dimension every operator qualifies: ``lam = 1`` when
    ``b_phi = inf``, otherwise half the threshold ``b_phi / max mu``.
    """
    top = op_norm(_matrix(f))
    if math.isinf(phi.b_phi) or top == 0:
        return 1.0
    return 0.5 * phi.b_phi / top


# -- function norm axioms -----------------------------------------------------


def _pointwise(f: SingularProfile, g: SingularProfile, op) -> SingularProfile:
    pts = np.union1d(f.breaks, g.breaks)
    left = np.concatenate([[0.0], pts[:-1]])
    vals = op(f(left), g(left))
    return classical_rearrangement(vals, np.diff(np.concatenate([[0.0], pts])),
                                   max(f.total_mass, g.total_mass))


@dataclass
class AxiomReport:
    zero: bool = True
    positivity: bool = True
    homogeneity: float = 0.0
    triangle: float = 0.0
    monotonicity: float = 0.0
    fatou: float = 0.0
    fatou_monotone: bool = True

    def passed(self, tol: float = 1e-10, fatou_tol: float = 1e-8) -> bool:
        return (self.zero and self.positivity and self.fatou_monotone
                and self.homogeneity <= tol and self.triangle <= tol
                and self.monotonicity <= tol and self.fatou <= fatou_tol)


def function_norm_axiom_check(phi: OrliczFunction, sample_profiles: Sequence[SingularProfile],
                              seed=0) -> AxiomReport:
    """Check the Banach function norm axioms of ``rho_phi`` on sample profiles.

    Violations are relative.  Pairs are formed from consecutive samples; for
    monotonicity ``g = max(f, h)`` dominates ``f`` pointwise.  The Fatou
    probe follows the increasing step truncations of each sample.
    """
    rep = AxiomReport()
    rng = np.random.default_rng(seed)
    samples = list(sample_profiles)
    if samples:
        empty = SingularProfile(np.empty(0), np.empty(0), samples[0].total_mass)
        rep.zero = function_norm(empty, phi) == 0.0
    for i, f in enumerate(samples):
        nf = function_norm(f, phi)
        if len(f.values) and not nf > 0:
            rep.positivity = False
        c = float(rng.uniform(0.1, 10.0))
        rep.homogeneity = max(rep.homogeneity,
                              abs(function_norm(f.scaled(c), phi) - c * nf) / max(c * nf, 1e-300))
        h = samples[(i + 1) % len(samples)]
        nh = function_norm(h, phi)
        nsum = function_norm(_pointwise(f, h, np.add), phi)
        rep.triangle = max(rep.triangle, (nsum - nf - nh) / max(nf + nh, 1e-300))
        g = _pointwise(f, h, np.maximum)
        rep.monotonicity = max(rep.monotonicity, (nf - function_norm(g, phi)) / max(nf, 1e-300))
        seq = [function_norm(f.truncated(k), phi) for k in range(len(f.values) + 1)]
        if np.any(np.diff(seq) < -1e-12 * max(nf, 1e-300)):
            rep.fatou_monotone = False
        rep.fatou = max(rep.fatou, abs(seq[-1] - nf) / max(nf, 1e-300))
    return rep


# -- contraction classes ------------------------------------------------------


@dataclass
class ContractionReport:
    map_class: int
    bound: float
    max_ratio: float
    min_ratio: float
    step_violation: float
    bound_note: str
    isometry: bool

    def passed(self, tol: float = 1e-9) -> bool:
        if self.isometry:
            return abs(self.max_ratio - 1) <= tol and abs(self.min_ratio - 1) <= tol
        return self.max_ratio <= self.bound + tol and self.step_violation <= tol


def _classify(T) -> tuple[int, float, list[np.ndarray]]:
    dim = T.dim
    if T.kind == "inner_auto":
        return 1, 1.0, []
    if T.kind in ("transpose", "jordan"):
        return 4, 1.0, []
    if T.kind == "kraus":
        W = T.data["W"]
        unit = sum(w.conj().T @ w for w in W)
        if not np.allclose(unit, np.eye(dim), atol=1e-10):
            raise ClassMismatchError("Kraus map is not unital: sum W_i* W_i != 1")
        bound = float(sum(op_norm(w) ** 2 for w in W))
        return (3 if len(W) == 1 else 2), bound, W
    raise ClassMismatchError(f"{T.kind} maps are not covered by the contraction classes")


def contraction_report(T, phi: OrliczFunction, trace: TraceSpec = TraceSpec(),
                       samples: int = 100, seed=0) -> ContractionReport:
    """Worst ratio ``||T f||_phi / ||f||_phi`` over random ``f`` with its bound.

    Class 1 (inner automorphisms) and class 4 (transpose / Jordan
    automorphisms) are isometries.  For Kraus sums the bound is
    ``sum_i ||W_i||^2`` (class 2, class 3 for a single isometric ``W``),
    derived from ``mu_t(W* f W) <= ||W||^2 mu_t(f)``, which is also checked
    step by step.
    """
    from .condexp import apply

    cls, bound, W = _classify(T)
    rng = np.random.default_rng(seed)
    hi, lo, step = 0.0, math.inf, 0.0
    for _ in range(samples):
        f = random_operator(T.ambient, rng, T.n)
        nf = luxemburg_norm(f, phi, trace)
        r = luxemburg_norm(apply(T, f), phi, trace) / nf
        hi, lo = max(hi, r), min(lo, r)
        mu_f = singular_profile(f, trace)
        for w in W:
            lhs = singular_profile(w.conj().T @ f.matrix @ w, trace)
            step = max(step, step_compare(lhs, mu_f.scaled(op_norm(w) ** 2)) / mu_f.values[0])
    note = {
        1: "exact: singular values are unitarily invariant",
        2: "derived: triangle inequality with mu_t(W* f W) <= ||W||^2 mu_t(f)",
        3: "derived: single Kraus operator, mu_t(V* f V) <= ||V||^2 mu_t(f)",
        4: "exact: transpose and unitary conjugation preserve singular values",
    }[cls]
    return ContractionReport(cls, bound, hi, lo, step, note, cls in (1, 4))
