import numpy as np
import pytest

from qnc.algebra import LocalOperator, Region, embed, identity, random_hermitian, site_operator, pauli
from qnc.gibbs import (
    DensityOperator,
    NonPositiveDensityError,
    Potential,
    compatibility_defect,
    gibbs_density,
    gibbs_expectation,
    hamiltonian,
    heisenberg_evolve,
    potential_heisenberg,
    potential_ising,
    potential_norm1,
    potential_norm_exp,
)

from oracles import SX, SZ, chain_hamiltonian, gibbs

# Operator-norm distance ||Tr_{2,3} rho_{0..3} - rho_{0,1} ⊗ 1|| computed with
# tests/oracles.py (brute-force partial trace, scipy expm), Ising J=1, beta=0.2.
DEFECT_ISING_H02 = 0.011637613453104878


def test_ising_bond_matrix():
    phi = potential_ising(1.0, 0.0)
    bond = phi.grouped()[Region([0, 1])]
    np.testing.assert_allclose(bond, -np.kron(SZ, SZ))
    np.testing.assert_allclose(np.diag(bond).real, [-1, 1, 1, -1])


def test_heisenberg_bond_commutes_with_swap():
    bond = potential_heisenberg(0.7, 0.7, 0.7).grouped()[Region([0, 1])]
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.abs(bond @ swap - swap @ bond).max() < 1e-14


def test_zero_potential_terms_vanish():
    assert all(not np.any(m) for m in potential_ising(0, 0).grouped().values())
    assert potential_norm1(potential_ising(0, 0)) == 0
    assert potential_norm_exp(potential_ising(0, 0), 0.3) == 0


@pytest.mark.parametrize("J,h,expected", [(1.0, 0.0, 2.0), (1.0, 0.5, 2.5)])
def test_potential_norm1(J, h, expected):
    assert potential_norm1(potential_ising(J, h)) == pytest.approx(expected, abs=1e-14)


def test_potential_norm1_two_dimensions():
    # each site lies in 4 nearest-neighbour bonds on the square lattice
    assert potential_norm1(potential_ising(1.0, 0.0, d=2)) == pytest.approx(4.0)


def test_potential_norm_exp():
    lam = 0.3
    assert potential_norm_exp(potential_ising(1.0, 0.0), lam) == pytest.approx(2 * np.exp(2 * lam))
    phi = potential_heisenberg(0.3, -1.2, 0.8, 0.4)
    assert potential_norm_exp(phi, 1e-8) == pytest.approx(potential_norm1(phi), rel=1e-7)


def test_non_covariant_potential_norm():
    phi = Potential(((Region([0, 1]), np.kron(SZ, SZ)), (Region([1]), 2 * SX)),
                    translation_covariant=False)
    assert potential_norm1(phi) == pytest.approx(3.0)
    H = hamiltonian(phi, Region.chain(3))
    np.testing.assert_allclose(H.matrix, np.kron(np.kron(SZ, SZ), np.eye(2))
                               + 2 * np.kron(np.kron(np.eye(2), SX), np.eye(2)))


def test_hamiltonian_two_site_ising():
    H = hamiltonian(potential_ising(1.3, 0.0), Region.chain(2))
    np.testing.assert_allclose(H.matrix, np.diag([-1.3, 1.3, 1.3, -1.3]))


def test_hamiltonian_empty_volume():
    H = hamiltonian(potential_ising(1.0, 0.5), Region())
    assert H.matrix.shape == (1, 1) and H.matrix[0, 0] == 0


@pytest.mark.parametrize("N", [2, 3, 5])
def test_hamiltonian_matches_kron_oracle(N):
    rng = np.random.default_rng(N)
    Jx, Jy, Jz, h = rng.normal(size=4)
    H = hamiltonian(potential_heisenberg(Jx, Jy, Jz, h), Region.chain(N))
    np.testing.assert_allclose(H.matrix, chain_hamiltonian(N, Jx, Jy, Jz, h), atol=1e-13)
    assert np.abs(H.matrix - H.matrix.conj().T).max() < 1e-12


def test_hamiltonian_extension_only_adds_boundary_terms():
    phi = potential_heisenberg(0.5, 1.0, -0.3, 0.2)
    small, big = Region.chain(3), Region.chain(4)
    diff = hamiltonian(phi, big) - embed(hamiltonian(phi, small), big)
    boundary = [(X, m) for X, m in phi.local_terms(big) if not X.issubset(small)]
    assert all(3 in X for X, _ in boundary)
    expected = sum(embed(LocalOperator(X, m), big).matrix for X, m in boundary)
    np.testing.assert_allclose(diff.matrix, expected, atol=1e-13)


def test_gibbs_infinite_temperature():
    rho = gibbs_density(potential_heisenberg(1, 1, 1, 0.3), Region.chain(3), 0.0)
    np.testing.assert_allclose(rho.matrix, np.eye(8), atol=1e-15)


def test_gibbs_single_site_field():
    beta, h = 0.7, 0.4
    rho = gibbs_density(potential_ising(0.0, h), Region([0]), beta)
    expected = np.diag([np.exp(beta * h), np.exp(-beta * h)]) / np.cosh(beta * h)
    np.testing.assert_allclose(rho.matrix, expected, atol=1e-14)
    z = site_operator(pauli("z"), 0)
    assert gibbs_expectation(rho, z).real == pytest.approx(np.tanh(beta * h), abs=1e-14)


@pytest.mark.parametrize("beta", [0.1, 1.0, 3.0])
def test_gibbs_matches_expm(beta):
    rho = gibbs_density(potential_heisenberg(0.4, 1.0, 0.8, 0.3), Region.chain(4), beta)
    np.testing.assert_allclose(rho.matrix, gibbs(4, beta, Jx=0.4, Jy=1.0, Jz=0.8, h=0.3),
                               atol=1e-11)


def test_gibbs_large_beta():
    rho = gibbs_density(potential_ising(1.0, 0.1), Region.chain(6), 20.0)
    assert np.isfinite(rho.matrix).all() and np.linalg.eigvalsh(rho.matrix)[0] > 0
    # Boltzmann weights below the double range cannot give a faithful density
    with pytest.raises(NonPositiveDensityError):
        gibbs_density(potential_ising(1.0, 0.1), Region.chain(6), 400.0)


def test_gibbs_properties():
    phi = potential_heisenberg(1.0, 0.6, 0.3, 0.5)
    vol = Region.chain(4)
    beta = 0.8
    rho = gibbs_density(phi, vol, beta)
    H = hamiltonian(phi, vol)
    assert np.abs(H.matrix @ rho.matrix - rho.matrix @ H.matrix).max() < 1e-12
    # eigenvalues are exp(-beta spec(H)) up to normalization
    e = np.linalg.eigvalsh(H.matrix)
    boltz = np.exp(-beta * e)
    boltz *= len(boltz) / boltz.sum()
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(rho.matrix)), np.sort(boltz), atol=1e-10)
    assert gibbs_expectation(rho, identity(vol)) == pytest.approx(1, abs=1e-14)


def test_density_validation():
    with pytest.raises(NonPositiveDensityError):
        DensityOperator(Region([0]), np.diag([2.0, 0.0]))
    with pytest.raises(NonPositiveDensityError):
        DensityOperator(Region([0]), np.diag([1.0, 2.0]))


def test_expectation_free_state():
    rho = gibbs_density(potential_ising(1.0), Region.chain(2), 0.0)
    f = random_hermitian([0, 1], 3)
    assert gibbs_expectation(rho, f) == pytest.approx(np.trace(f.matrix) / 4, abs=1e-14)


def test_expectation_support_error():
    rho = gibbs_density(potential_ising(1.0), Region.chain(2), 0.3)
    with pytest.raises(ValueError):
        gibbs_expectation(rho, site_operator(pauli("z"), 5))


def test_kms_identity():
    phi = potential_heisenberg(1.0, 0.5, 0.2, 0.3)
    vol = Region.chain(3)
    rho = gibbs_density(phi, vol, 0.9)
    f, g = random_hermitian(vol, 1), random_hermitian(vol, 2)
    r, ri = rho.matrix, np.linalg.inv(rho.matrix)
    lhs = np.trace(r @ f.matrix @ g.matrix)
    rhs = np.trace(r @ g.matrix @ (r @ f.matrix @ ri))
    assert abs(lhs - rhs) < 1e-8


def test_heisenberg_dynamics():
    vol = Region.chain(3)
    H = hamiltonian(potential_heisenberg(1.0, 0.4, 0.7, 0.2), vol)
    f, g = random_hermitian(vol, 5), random_hermitian(vol, 6)
    assert heisenberg_evolve(f, H, 0.0).allclose(f)
    assert heisenberg_evolve(H, H, 1.7).allclose(H, 1e-12)
    rng = np.random.default_rng(0)
    for _ in range(10):
        t, s = rng.uniform(-2, 2, size=2)
        lhs = heisenberg_evolve(f, H, t) @ heisenberg_evolve(g, H, t)
        assert lhs.allclose(heisenberg_evolve(f @ g, H, t), 1e-10)
        two = heisenberg_evolve(heisenberg_evolve(f, H, s), H, t)
        assert two.allclose(heisenberg_evolve(f, H, t + s), 1e-10)
        back = heisenberg_evolve(heisenberg_evolve(f, H, t), H, -t)
        assert back.allclose(f, 1e-10)
    u = np.linalg.eigh(H.matrix)
    w, v = u
    U = (v * np.exp(1j * 0.3 * w)) @ v.conj().T
    np.testing.assert_allclose(heisenberg_evolve(f, H, 0.3).matrix,
                               U @ f.matrix @ U.conj().T, atol=1e-12)


def test_heisenberg_evolve_local_observable():
    vol = Region.chain(3)
    H = hamiltonian(potential_ising(1.0, 0.0), vol)
    z = site_operator(pauli("z"), 1)
    assert heisenberg_evolve(z, H, 2.3).allclose(embed(z, vol))


def test_compatibility_defect():
    assert compatibility_defect(potential_ising(0.0, 0.7), 1.0, [0, 1], [0, 1, 2, 3]) < 1e-13
    assert compatibility_defect(potential_heisenberg(1, 1, 1, 0), 0.0, [0], [0, 1, 2]) < 1e-13
    # zero-field open Ising chains happen to be exactly compatible
    assert compatibility_defect(potential_ising(1.0, 0.0), 0.2, [0, 1], [0, 1, 2, 3]) < 1e-13
    value = compatibility_defect(potential_ising(1.0, 0.2), 0.2, [0, 1], [0, 1, 2, 3])
    assert value == pytest.approx(DEFECT_ISING_H02, rel=1e-9)
    with pytest.raises(ValueError):
        compatibility_defect(potential_ising(1.0), 0.2, [0, 5], [0, 1])
