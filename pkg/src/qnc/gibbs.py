"""Interaction potentials, finite-volume Hamiltonians and Gibbs states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    LocalOperator,
    Region,
    SupportError,
    embed,
    normalized_trace,
    op_norm,
    partial_trace,
    pauli,
)

__all__ = [
    "DensityOperator",
    "NonPositiveDensityError",
    "Potential",
    "potential_ising",
    "potential_heisenberg",
    "potential_norm1",
    "potential_norm_exp",
    "hamiltonian",
    "gibbs_density",
    "gibbs_expectation",
    "hermitian_function",
    "heisenberg_evolve",
    "compatibility_defect",
]


class NonPositiveDensityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DensityOperator(LocalOperator):
    """Faithful density: strictly positive, normalized trace one."""

    def __post_init__(self):
        super().__post_init__()
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-10 * (1 + np.abs(m).max()):
            raise NonPositiveDensityError("density operator is not Hermitian")
        w = self.eigh[0]
        if w[0] <= 0:
            raise NonPositiveDensityError(f"density has non-positive eigenvalue {w[0]:.3e}")
        tr = normalized_trace(self).real
        if abs(tr - 1) > 1e-10:
            raise NonPositiveDensityError(f"density has normalized trace {tr!r}, expected 1")

    @classmethod
    def from_operator(cls, f: LocalOperator) -> "DensityOperator":
        if isinstance(f, DensityOperator):
            return f
        return cls(f.support, f.matrix, f.n)

    @property
    def op(self) -> LocalOperator:
        return LocalOperator(self.support, self.matrix, self.n)


@dataclass(frozen=True)
class Potential:
    """Finite-range interaction ``{Phi_X}``.

    For a translation-covariant potential each term is a template region
    anchored at the origin together with its Hermitian matrix; ``Phi_X`` is
    the sum of all terms whose translate equals ``X``.  Without translation
    covariance the term regions are absolute.
    """

    terms: tuple[tuple[Region, np.ndarray], ...]
    d: int = 1
    n: int = 2
    translation_covariant: bool = True
    range: int = field(default=None)

    def __post_init__(self):
        terms = []
        for region, m in self.terms:
            region = region if isinstance(region, Region) else Region(region)
            m = np.array(m, dtype=complex)
            if m.shape != (self.n ** len(region),) * 2:
                raise ValueError(f"term on {region!r} has shape {m.shape}")
            if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
                raise ValueError(f"term on {region!r} is not Hermitian")
            if region.dim not in (None, self.d):
                raise ValueError(f"term on {region!r} does not live in dimension {self.d}")
            m.flags.writeable = False
            terms.append((region, m))
        object.__setattr__(self, "terms", tuple(terms))
        diam = max((r.diameter() for r, _ in terms), default=0)
        if self.range is None:
            object.__setattr__(self, "range", diam)
        elif diam > self.range:
            raise ValueError(f"a term has diameter {diam} > declared range {self.range}")

    def grouped(self) -> dict[Region, np.ndarray]:
        """Templates (or absolute regions) with coinciding terms summed."""
        out: dict[Region, np.ndarray] = {}
        for region, m in self.terms:
            if self.translation_covariant and len(region):
                region = region.translate([-c for c in region.sites[0]])
            out[region] = out.get(region, 0) + m
        return out

    def local_terms(self, volume: Region) -> list[tuple[Region, np.ndarray]]:
        """All ``(X, Phi_X)`` with ``X`` inside ``volume`` (free boundary)."""
        out = []
        vol = set(volume.sites)
        for tmpl, m in self.grouped().items():
            if len(tmpl) == 0:
                continue
            if not self.translation_covariant:
                if tmpl.issubset(volume):
                    out.append((tmpl, m))
                continue
            anchor = tmpl.sites[0]
            for site in volume.sites:
                shift = [a - b for a, b in zip(site, anchor)]
                X = tmpl.translate(shift)
                if set(X.sites) <= vol:
                    out.append((X, m))
        return out


def potential_heisenberg(Jx: float, Jy: float, Jz: float, h: float = 0.0,
                         d: int = 1) -> Potential:
    """Nearest-neighbour XYZ model ``-(Jx sx sx + Jy sy sy + Jz sz sz) - h sz``."""
    sx, sy, sz = pauli("x"), pauli("y"), pauli("z")
    bond = -(Jx * np.kron(sx, sx) + Jy * np.kron(sy, sy) + Jz * np.kron(sz, sz))
    origin = (0,) * d
    terms = []
    for axis in range(d):
        e = tuple(int(k == axis) for k in range(d))
        terms.append((Region([origin, e]), bond))
    terms.append((Region([origin]), -h * sz))
    return Potential(tuple(terms), d=d, n=2, range=1)


def potential_ising(J: float, h: float = 0.0, d: int = 1) -> Potential:
    return potential_heisenberg(0.0, 0.0, J, h, d=d)


def _site_sums(phi: Potential, weight) -> float:
    groups = phi.grouped()
    if phi.translation_covariant:
        # |X| translates of a template contain any given site
        return float(sum(len(X) * weight(X) * op_norm(m) for X, m in groups.items()))
    per_site: dict = {}
    for X, m in groups.items():
        for s in X.sites:
            per_site[s] = per_site.get(s, 0.0) + weight(X) * op_norm(m)
    return max(per_site.values(), default=0.0)


def potential_norm1(phi: Potential) -> float:
    """``sup_i sum_{X ∋ i} ||Phi_X||``."""
    return _site_sums(phi, lambda X: 1.0)


def potential_norm_exp(phi: Potential, lam: float) -> float:
    """``sup_i sum_{X ∋ i} exp(lam |X|) ||Phi_X||``."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return _site_sums(phi, lambda X: np.exp(lam * len(X)))


def hamiltonian(phi: Potential, volume) -> LocalOperator:
    """``H_Lambda = sum_{X ⊆ Lambda} Phi_X`` with free boundary conditions."""
    volume = volume if isinstance(volume, Region) else Region(volume)
    dim = phi.n ** len(volume)
    H = LocalOperator(volume, np.zeros((dim, dim)), phi.n)
    for X, m in phi.local_terms(volume):
        H = H + embed(LocalOperator(X, m, phi.n), volume)
    return H


def hermitian_function(H: LocalOperator, fn) -> LocalOperator:
    """Apply a scalar function to a Hermitian operator by diagonalization."""
    w, v = H.eigh
    return LocalOperator(H.support, (v * fn(w)) @ v.conj().T, H.n)


def gibbs_density(phi: Potential, volume, beta: float) -> DensityOperator:
    """``exp(-beta H) / Tr exp(-beta H)`` with the normalized trace."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    H = hamiltonian(phi, volume)
    w, v = H.eigh
    x = -beta * w
    boltz = np.exp(x - x.max())
    boltz *= len(boltz) / boltz.sum()
    m = (v * boltz) @ v.conj().T
    return DensityOperator(H.support, 0.5 * (m + m.conj().T), H.n)


def gibbs_expectation(rho: LocalOperator, f: LocalOperator) -> complex:
    """``omega(f) = Tr(rho f)``."""
    if not f.support.issubset(rho.support):
        raise SupportError(f"observable on {f.support!r} lies outside {rho.support!r}")
    return normalized_trace(rho @ embed(f, rho.support))


def heisenberg_evolve(f: LocalOperator, H: LocalOperator, t: float) -> LocalOperator:
    """``alpha_t(f) = exp(itH) f exp(-itH)``."""
    target = f.support | H.support
    H = embed(H, target)
    w, v = H.eigh
    u = (v * np.exp(1j * t * w)) @ v.conj().T
    m = embed(f, target).matrix
    return LocalOperator(target, u @ m @ u.conj().T, f.n)


def compatibility_defect(phi: Potential, beta: float, lam1, lam2) -> float:
    """Operator-norm distance ``||Tr_{Λ2\\Λ1} rho_Λ2 - rho_Λ1 ⊗ 1||``.

    Exactly zero only for non-interacting potentials; for interacting ones
    this measures how far finite-volume Gibbs densities are from a
    compatible family.
    """
    lam1 = lam1 if isinstance(lam1, Region) else Region(lam1)
    lam2 = lam2 if isinstance(lam2, Region) else Region(lam2)
    if not lam1.issubset(lam2):
        raise SupportError(f"{lam1!r} is not contained in {lam2!r}")
    rho2 = gibbs_density(phi, lam2, beta)
    rho1 = gibbs_density(phi, lam1, beta)
    return op_norm(partial_trace(rho2, lam2 - lam1) - embed(rho1, lam2))
