import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qnc.algebra import LocalOperator, Region, identity, random_hermitian, random_operator, random_state, site_operator, pauli
from qnc.gibbs import DensityOperator, NonPositiveDensityError, gibbs_density, hamiltonian, heisenberg_evolve, potential_heisenberg, potential_ising
from qnc.lp import (
    NonNestedVolumesError,
    duality_norm_estimate,
    fractional_power,
    holder_check,
    kms_inner,
    lps_norm,
    monotonicity_sweep,
)

from oracles import SZ, gibbs, mpow, on_site, schatten_normalized

seeds = st.integers(min_value=0, max_value=2**32 - 1)
unit = st.floats(min_value=0.0, max_value=1.0)
exponents = st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0])

VOL = Region.chain(2)


def heis_rho(beta=0.7, N=2):
    return gibbs_density(potential_heisenberg(1.0, 0.6, 0.3, 0.4), Region.chain(N), beta)


def test_fractional_power_examples():
    rho = DensityOperator(Region([0]), np.diag([1.5, 0.5]))
    np.testing.assert_allclose(fractional_power(rho, 0).matrix, np.eye(2))
    np.testing.assert_allclose(fractional_power(rho, 1).matrix, rho.matrix, atol=1e-15)
    np.testing.assert_allclose(fractional_power(rho, 0.5).matrix,
                               np.diag([np.sqrt(1.5), np.sqrt(0.5)]), atol=1e-15)


@given(seeds, st.floats(-1, 1), st.floats(-1, 1))
@settings(max_examples=30, deadline=None)
def test_fractional_power_group_law(seed, a, b):
    rho = random_state(VOL, seed)
    lhs = fractional_power(rho, a).matrix @ fractional_power(rho, b).matrix
    np.testing.assert_allclose(lhs, fractional_power(rho, a + b).matrix, atol=1e-9)


def test_fractional_power_floor():
    bad = LocalOperator(Region([0]), np.diag([2.0, 0.0]))
    with pytest.raises(NonPositiveDensityError):
        fractional_power(bad, 0.5)


def test_unit_norm_example_grid():
    rho = heis_rho()
    one = identity(VOL)
    for p in (1, 1.5, 2, 3, 4):
        for s in (0, 0.25, 0.5, 0.75, 1):
            assert lps_norm(one, rho, p, s) == pytest.approx(1.0, abs=1e-12)


def test_free_state_is_normalized_schatten():
    rho = gibbs_density(potential_ising(1.0), Region([0]), 0.0)
    f = site_operator(np.diag([3.0, 1.0]), 0)
    assert lps_norm(f, rho, 2, 0.3) == pytest.approx(np.sqrt(5), abs=1e-14)


def test_p_infinity_is_operator_norm():
    rho = heis_rho()
    f = random_operator(VOL, 4)
    assert lps_norm(f, rho, np.inf, 0.5) == pytest.approx(np.linalg.norm(f.matrix, 2))


@pytest.mark.parametrize("p,s", [(1, 0.0), (1.5, 0.3), (2, 0.5), (3, 1.0), (4, 0.75)])
def test_lps_norm_matches_dense_oracle(p, s):
    r = gibbs(3, 0.6, Jx=0.5, Jy=1.0, Jz=0.2, h=0.3)
    rho = DensityOperator(Region.chain(3), r)
    f = random_operator(Region.chain(3), 17)
    expected = schatten_normalized(mpow(r, (1 - s) / p) @ f.matrix @ mpow(r, s / p), p)
    assert lps_norm(f, rho, p, s) == pytest.approx(expected, rel=1e-12)


def test_local_observable_is_embedded():
    r = gibbs(3, 0.6, h=0.3)
    rho = DensityOperator(Region.chain(3), r)
    z = site_operator(pauli("z"), 1)
    expected = schatten_normalized(mpow(r, 0.25) @ on_site(SZ, 1, 3) @ mpow(r, 0.25), 2)
    assert lps_norm(z, rho, 2, 0.5) == pytest.approx(expected, rel=1e-13)


def test_kms_inner_examples():
    rho = heis_rho()
    one = identity(VOL)
    assert kms_inner(one, one, rho, 0.5) == pytest.approx(1.0, abs=1e-14)
    free = gibbs_density(potential_ising(1.0), VOL, 0.0)
    f, g = random_operator(VOL, 1), random_operator(VOL, 2)
    hs = np.trace(f.matrix.conj().T @ g.matrix) / 4
    assert kms_inner(f, g, free, 0.5) == pytest.approx(hs, abs=1e-14)


@given(seeds, unit)
@settings(max_examples=40, deadline=None)
def test_kms_inner_positive_and_hermitian(seed, s):
    rho = random_state(VOL, seed)
    f, g = random_operator(VOL, seed + 1), random_operator(VOL, seed + 2)
    assert kms_inner(f, f, rho, s).real > 0
    assert abs(kms_inner(f, f, rho, s).imag) < 1e-12
    assert abs(kms_inner(f, g, rho, s) - np.conj(kms_inner(g, f, rho, s))) < 1e-12


@given(seeds, unit)
@settings(max_examples=40, deadline=None)
def test_p2_norm_squares_to_pairing(seed, s):
    rho = random_state(VOL, seed)
    f = random_operator(VOL, seed + 7)
    assert lps_norm(f, rho, 2, s) ** 2 == pytest.approx(kms_inner(f, f, rho, s).real, rel=1e-10)


@given(seeds, exponents, unit)
@settings(max_examples=60, deadline=None)
def test_norm_axioms(seed, p, s):
    rho = random_state(VOL, seed)
    f, g = random_operator(VOL, seed + 1), random_operator(VOL, seed + 2)
    c = 0.3 - 1.7j
    nf = lps_norm(f, rho, p, s)
    assert lps_norm(c * f, rho, p, s) == pytest.approx(abs(c) * nf, rel=1e-10)
    assert lps_norm(f + g, rho, p, s) <= nf + lps_norm(g, rho, p, s) + 1e-10
    assert lps_norm(0 * f, rho, p, s) == 0
    assert nf > 0


@given(seeds, exponents, unit)
@settings(max_examples=40, deadline=None)
def test_adjoint_flips_s(seed, p, s):
    rho = random_state(VOL, seed)
    f = random_operator(VOL, seed + 3)
    assert lps_norm(f.H, rho, p, s) == pytest.approx(lps_norm(f, rho, p, 1 - s), rel=1e-10)


@given(seeds, st.floats(-3, 3), exponents, unit)
@settings(max_examples=30, deadline=None)
def test_hamiltonian_dynamics_is_isometric(seed, t, p, s):
    phi = potential_heisenberg(1.0, 0.6, 0.3, 0.4)
    rho = gibbs_density(phi, VOL, 0.8)
    H = hamiltonian(phi, VOL)
    f = random_operator(VOL, seed)
    assert lps_norm(heisenberg_evolve(f, H, t), rho, p, s) == pytest.approx(
        lps_norm(f, rho, p, s), rel=1e-10)


@given(seeds, unit)
@settings(max_examples=30, deadline=None)
def test_norm_increases_with_p(seed, s):
    rho = random_state(VOL, seed)
    f = random_operator(VOL, seed + 5)
    # needs the unit-trace normalization and placements whose exponents sum to 1/p
    ps = [1, 1.5, 2, 3, 4, 8]
    vals = [lps_norm(f, rho, p, 0.5) for p in ps]
    assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))


def test_holder_examples():
    rho = heis_rho()
    one = identity(VOL)
    assert holder_check(one, one, rho, 3, 0.5).ratio == pytest.approx(1.0, abs=1e-12)
    assert holder_check(random_operator(VOL, 1), 0 * one, rho, 3, 0.5).ratio == 0


@given(seeds, st.sampled_from([1.5, 2.0, 3.0]), unit)
@settings(max_examples=60, deadline=None)
def test_holder_inequality(seed, p, s):
    rho = random_state(VOL, seed)
    f, g = random_hermitian(VOL, seed + 1), random_hermitian(VOL, seed + 2)
    assert holder_check(f, g, rho, p, s).ratio <= 1 + 1e-10


def test_duality_estimate_unit():
    rho = heis_rho()
    est = duality_norm_estimate(identity(VOL), rho, 1.5, 0.5, sample_count=20, seed=0,
                                refine=False)
    assert est == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_duality_estimate_is_lower_bound(seed):
    rho = random_state(VOL, seed)
    f = random_operator(VOL, seed + 10)
    norm = lps_norm(f, rho, 1.5, 0.3)
    raw = duality_norm_estimate(f, rho, 1.5, 0.3, sample_count=50, seed=seed, refine=False)
    refined = duality_norm_estimate(f, rho, 1.5, 0.3, sample_count=50, seed=seed)
    assert raw <= refined <= norm * (1 + 1e-10)


def test_duality_estimate_diagonal_oracle():
    # classical weighted l_p duality: sup is the l_p norm of rho^{1/p} f
    r = np.array([1.6, 0.9, 0.7, 0.8])
    rho = DensityOperator(VOL, np.diag(r))
    fd = np.array([2.0, -1.0, 0.5j, 3.0])
    f = LocalOperator(VOL, np.diag(fd))
    for p in (1.2, 1.5, 1.8):
        classical = np.mean(np.abs(r ** (1 / p) * fd) ** p) ** (1 / p)
        est = duality_norm_estimate(f, rho, p, 0.4, sample_count=100, seed=1, diagonal=True)
        assert est == pytest.approx(classical, abs=1e-6)
        assert est <= classical * (1 + 1e-10)


def test_monotonicity_sweep_zero_potential():
    phi = potential_ising(0.0, 0.0)
    f = random_hermitian([0], 3)
    vals = monotonicity_sweep(phi, 0.5, f, [Region.chain(k) for k in range(1, 5)], 3, 0.5)
    assert max(vals) - min(vals) < 1e-12


def test_monotonicity_sweep_single_volume():
    f = site_operator(pauli("z"), 0)
    assert len(monotonicity_sweep(potential_ising(1.0), 0.5, f, [Region.chain(3)], 2, 0.5)) == 1


def test_monotonicity_sweep_ising():
    # sz commutes with every Ising density and squares to one, so all norms are 1
    f = site_operator(pauli("z"), 0)
    vals = monotonicity_sweep(potential_ising(1.0, 0.0), 0.5, f,
                              [Region.chain(k) for k in range(2, 7)], 2, 0.5)
    np.testing.assert_allclose(vals, 1.0, atol=1e-12)


# p=2, s=1/2 norms of sx at site 0 for the XXX chain (h=0.2, beta=0.5), from
# tests/oracles.py; the sequence is NOT monotone (free boundary densities are
# not a compatible family), recorded as a regression baseline.
HEISENBERG_SWEEP = [0.930505438533065, 0.9347743078753614, 0.9342873348557413,
                    0.9342405969224344, 0.934215329860333]


def test_monotonicity_sweep_heisenberg_baseline():
    f = site_operator(pauli("x"), 0)
    vals = monotonicity_sweep(potential_heisenberg(1, 1, 1, 0.2), 0.5, f,
                              [Region.chain(k) for k in range(2, 7)], 2, 0.5)
    np.testing.assert_allclose(vals, HEISENBERG_SWEEP, rtol=1e-10)


def test_monotonicity_sweep_rejects_non_nested():
    f = site_operator(pauli("z"), 0)
    with pytest.raises(NonNestedVolumesError):
        monotonicity_sweep(potential_ising(1.0), 0.5, f, [Region([0, 1]), Region([0, 2])], 2, 0.5)
    with pytest.raises(NonNestedVolumesError):
        monotonicity_sweep(potential_ising(1.0), 0.5, f, [Region([1, 2])], 2, 0.5)


def test_parameter_validation():
    rho = heis_rho()
    with pytest.raises(ValueError):
        lps_norm(identity(VOL), rho, 0.5, 0.5)
    with pytest.raises(ValueError):
        lps_norm(identity(VOL), rho, 2, 1.5)
