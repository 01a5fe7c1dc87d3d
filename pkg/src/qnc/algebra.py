"""Finite-volume quasi-local algebra.

Local operators are dense matrices tagged with the lattice region they act
on.  Tensor legs follow the lexicographic order of the site coordinates, so
``LocalOperator(Region.chain(2), np.kron(a, b))`` is ``a`` on site 0 and ``b``
on site 1.  All traces are normalized (``Tr 1 = 1``) unless a
:class:`TraceSpec` says otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DIM_CAP",
    "DimensionCapError",
    "SupportError",
    "OperatorFormatError",
    "Lattice",
    "Region",
    "LocalOperator",
    "TraceSpec",
    "PAULI",
    "pauli",
    "identity",
    "site_operator",
    "embed",
    "normalized_trace",
    "partial_trace",
    "reduce_operator",
    "is_hermitian",
    "is_positive",
    "op_norm",
    "random_operator",
    "random_hermitian",
    "random_state",
    "operator_to_dict",
    "operator_from_dict",
    "save_operator",
    "load_operator",
]

#: Largest matrix dimension the library will materialize (12 spin-1/2 sites).
DIM_CAP = 4096


class DimensionCapError(ValueError):
    pass


class SupportError(ValueError):
    pass


class OperatorFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Integer lattice of dimension ``d`` with ``n``-level sites."""

    d: int = 1
    n: int = 2

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"lattice dimension must be a positive integer, got {self.d}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"site dimension must be an integer >= 2, got {self.n}")


def _as_site(s) -> tuple[int, ...]:
    if isinstance(s, (int, np.integer)):
        return (int(s),)
    return tuple(int(c) for c in s)


@dataclass(frozen=True)
class Region:
    """Finite set of lattice sites in canonical (lexicographic) order.

    Sites may be given as integers (1-D shorthand) or coordinate tuples.
    """

    sites: tuple[tuple[int, ...], ...] = ()

    def __init__(self, sites: Iterable = ()):
        raw = [_as_site(s) for s in sites]
        canon = sorted(set(raw))
        if len(raw) != len(canon):
            raise ValueError("duplicate sites in region")
        if canon and len({len(s) for s in canon}) != 1:
            raise ValueError("all sites of a region must have the same dimension")
        object.__setattr__(self, "sites", tuple(canon))

    @classmethod
    def chain(cls, length: int, start: int = 0, d: int = 1) -> "Region":
        """Sites ``start .. start+length-1`` along the first axis."""
        return cls((start + i,) + (0,) * (d - 1) for i in range(length))

    @property
    def dim(self) -> int | None:
        return len(self.sites[0]) if self.sites else None

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, site):
        return _as_site(site) in set(self.sites)

    def issubset(self, other: "Region") -> bool:
        return set(self.sites) <= set(other.sites)

    def __le__(self, other):
        return self.issubset(other)

    def __or__(self, other: "Region") -> "Region":
        return Region(set(self.sites) | set(other.sites))

    def __and__(self, other: "Region") -> "Region":
        return Region(set(self.sites) & set(other.sites))

    def __sub__(self, other: "Region") -> "Region":
        return Region(set(self.sites) - set(other.sites))

    def translate(self, shift: Sequence[int]) -> "Region":
        return Region(tuple(a + b for a, b in zip(s, shift)) for s in self.sites)

    def index(self, site) -> int:
        return self.sites.index(_as_site(site))

    def diameter(self) -> int:
        """Largest sup-norm distance between two sites (0 for fewer than two)."""
        if len(self.sites) < 2:
            return 0
        arr = np.array(self.sites)
        return int(np.max(arr.max(axis=0) - arr.min(axis=0)))

    def __repr__(self):
        if self.sites and len(self.sites[0]) == 1:
            return f"Region({[s[0] for s in self.sites]})"
        return f"Region({list(self.sites)})"


def _check_dim(n: int, k: int) -> int:
    dim = n**k
    if dim > DIM_CAP:
        raise DimensionCapError(
            f"{k} sites of dimension {n} need a {dim}x{dim} matrix, above the cap {DIM_CAP}"
        )
    return dim


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """Dense operator ``matrix`` acting on the sites of ``support``.

    Arithmetic between operators with different supports embeds both into
    the union of the supports first.
    """

    support: Region
    matrix: np.ndarray
    n: int = 2

    def __post_init__(self):
        if not isinstance(self.support, Region):
            object.__setattr__(self, "support", Region(self.support))
        dim = _check_dim(self.n, len(self.support))
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match {len(self.support)} sites "
                f"of dimension {self.n} (expected {(dim, dim)})"
            )
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def H(self) -> "LocalOperator":
        return LocalOperator(self.support, self.matrix.conj().T, self.n)

    def adjoint(self) -> "LocalOperator":
        return self.H

    def _binary(self, other, fn):
        if isinstance(other, LocalOperator):
            if other.n != self.n:
                raise ValueError("site dimensions differ")
            target = self.support | other.support
            a, b = embed(self, target), embed(other, target)
            return LocalOperator(target, fn(a.matrix, b.matrix), self.n)
        return NotImplemented

    def __matmul__(self, other):
        return self._binary(other, np.matmul)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, c):
        if isinstance(c, LocalOperator):
            return NotImplemented
        return LocalOperator(self.support, c * self.matrix, self.n)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return LocalOperator(self.support, self.matrix / c, self.n)

    def __neg__(self):
        return LocalOperator(self.support, -self.matrix, self.n)

    def allclose(self, other: "LocalOperator", atol: float = 1e-12) -> bool:
        target = self.support | other.support
        return np.allclose(embed(self, target).matrix, embed(other, target).matrix,
                           rtol=0, atol=atol)

    def __repr__(self):
        return f"LocalOperator(support={self.support!r}, dim={self.dim})"

    @cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigen-decomposition of the Hermitian part."""
        m = self.matrix
        return np.linalg.eigh(0.5 * (m + m.conj().T))


@dataclass(frozen=True)
class TraceSpec:
    """Which trace to use on a matrix algebra.

    ``normalized`` gives total mass 1, ``standard`` gives mass equal to the
    dimension, ``weighted`` assigns the given positive masses to the basis
    vectors (meaningful for the commutative, diagonal case only).
    """

    kind: str = "normalized"
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("normalized", "standard", "weighted"):
            raise ValueError(f"unknown trace kind {self.kind!r}")
        if self.kind == "weighted":
            if self.weights is None or len(self.weights) == 0:
                raise ValueError("weighted trace needs weights")
            if any(w <= 0 for w in self.weights):
                raise ValueError("trace weights must be strictly positive")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def masses(self, dim: int) -> np.ndarray:
        """Trace mass of each of the ``dim`` basis projections."""
        if self.kind == "normalized":
            return np.full(dim, 1.0 / dim)
        if self.kind == "standard":
            return np.ones(dim)
        if len(self.weights) != dim:
            raise ValueError(f"{len(self.weights)} trace weights for dimension {dim}")
        return np.asarray(self.weights)

    def total_mass(self, dim: int) -> float:
        return float(self.masses(dim).sum())


PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(name: str) -> np.ndarray:
    """Pauli matrix by name (``"x"``, ``"sx"``, ``"sigma_x"`` all work)."""
    key = name.lower().replace("sigma_", "").replace("sigma", "").lstrip("s") or "i"
    if key not in PAULI:
        raise KeyError(f"unknown Pauli matrix {name!r}")
    return PAULI[key].copy()


def identity(region, n: int = 2) -> LocalOperator:
    region = region if isinstance(region, Region) else Region(region)
    return LocalOperator(region, np.eye(_check_dim(n, len(region))), n)


def site_operator(matrix, site, n: int | None = None) -> LocalOperator:
    """Single-site operator placed at ``site``."""
    matrix = np.asarray(matrix, dtype=complex)
    return LocalOperator(Region([site]), matrix, n or matrix.shape[0])


def _legs(tensor_rank: int, perm: Sequence[int]) -> list[int]:
    return list(perm) + [p + tensor_rank for p in perm]


def embed(f: LocalOperator, target) -> LocalOperator:
    """Return ``f`` tensored with the identity on ``target \\ support(f)``."""
    target = target if isinstance(target, Region) else Region(target)
    if not f.support.issubset(target):
        raise SupportError(f"support {f.support!r} is not contained in {target!r}")
    if f.support == target:
        return f
    n = f.n
    rest = target - f.support
    _check_dim(n, len(target))
    m = np.kron(f.matrix, np.eye(n ** len(rest)))
    order = list(f.support.sites) + list(rest.sites)
    k = len(order)
    # leg j of the result is site target.sites[j]
    perm = [order.index(s) for s in target.sites]
    t = m.reshape((n,) * (2 * k)).transpose(_legs(k, perm))
    return LocalOperator(target, t.reshape(n**k, n**k), n)


def normalized_trace(f: LocalOperator) -> complex:
    return complex(np.trace(f.matrix) / f.dim)


def reduce_operator(f: LocalOperator, X) -> LocalOperator:
    """Normalized partial trace over ``X`` as an operator on ``support \\ X``."""
    X = X if isinstance(X, Region) else Region(X)
    if not X.issubset(f.support):
        raise SupportError(f"cannot trace out {X!r}: not inside support {f.support!r}")
    if len(X) == 0:
        return f
    n, k = f.n, len(f.support)
    keep = f.support - X
    traced = [f.support.index(s) for s in X.sites]
    kept = [f.support.index(s) for s in keep.sites]
    t = f.matrix.reshape((n,) * (2 * k)).transpose(
        kept + traced + [k + i for i in kept] + [k + i for i in traced]
    )
    dk, dx = n ** len(kept), n ** len(traced)
    t = t.reshape(dk, dx, dk, dx)
    return LocalOperator(keep, np.einsum("ajbj->ab", t) / dx, n)


def partial_trace(f: LocalOperator, X) -> LocalOperator:
    """Normalized partial trace ``Tr_X f``, kept in the ambient algebra of ``f``.

    The result is ``(Tr_X f) ⊗ 1_X`` on ``support(f)``, so the map is unital
    and a projection onto the subalgebra of ``support \\ X``.
    """
    return embed(reduce_operator(f, X), f.support)


def op_norm(f: LocalOperator | np.ndarray) -> float:
    m = f.matrix if isinstance(f, LocalOperator) else np.asarray(f)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def is_hermitian(f: LocalOperator, tol: float = 1e-12) -> bool:
    m = f.matrix
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * (1 + op_norm(f)))


def is_positive(f: LocalOperator, tol: float = 1e-12) -> bool:
    if not is_hermitian(f, tol):
        return False
    m = f.matrix
    lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
    return bool(lo >= -tol * (1 + op_norm(f)))


def _region(region) -> Region:
    return region if isinstance(region, Region) else Region(region)


def random_operator(region, seed, n: int = 2) -> LocalOperator:
    """Complex Gaussian (Ginibre) operator on ``region``."""
    region = _region(region)
    dim = _check_dim(n, len(region))
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return LocalOperator(region, g / np.sqrt(2), n)


def random_hermitian(region, seed, n: int = 2) -> LocalOperator:
    g = random_operator(region, seed, n).matrix
    return LocalOperator(_region(region), 0.5 * (g + g.conj().T), n)


def random_state(region, seed, n: int = 2, eps: float = 1e-6):
    """Random faithful density ``(g*g + eps)/Tr(g*g + eps)`` (normalized trace 1)."""
    from .gibbs import DensityOperator

    g = random_operator(region, seed, n).matrix
    m = g.conj().T @ g + eps * np.eye(g.shape[0])
    m = m / (np.trace(m).real / m.shape[0])
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(_region(region), m, n)


# -- operator file format -----------------------------------------------------


def operator_to_dict(f: LocalOperator, d: int | None = None) -> dict:
    d = d or f.support.dim or 1
    return {
        "lattice": {"d": d, "n": f.n},
        "support": [list(s) for s in f.support.sites],
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in f.matrix],
    }


def operator_from_dict(doc: dict) -> LocalOperator:
    try:
        lat = Lattice(**doc["lattice"])
        sites = [tuple(s) for s in doc["support"]]
        raw = doc["matrix"]
    except (KeyError, TypeError) as exc:
        raise OperatorFormatError(f"malformed operator document: {exc}") from exc
    if any(len(s) != lat.d for s in sites):
        raise OperatorFormatError(f"support sites must have {lat.d} coordinates")
    dim = lat.n ** len(sites)
    if len(raw) != dim or any(len(row) != dim for row in raw):
        raise OperatorFormatError(
            f"matrix must be {dim}x{dim} for {len(sites)} sites of dimension {lat.n}"
        )
    m = np.array([[complex(re, im) for re, im in row] for row in raw], dtype=complex)
    region = Region(sites)
    if list(region.sites) != sites:
        raise OperatorFormatError("support sites must be listed in lexicographic order")
    return LocalOperator(region, m, lat.n)


def save_operator(f: LocalOperator, path, d: int | None = None) -> None:
    Path(path).write_text(json.dumps(operator_to_dict(f, d), indent=1))


def load_operator(path) -> LocalOperator:
    return operator_from_dict(json.loads(Path(path).read_text()))
