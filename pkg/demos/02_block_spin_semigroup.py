"""
Block-spin conditional expectations and their Markov semigroup
==============================================================

Forms the generalized conditional expectation that traces out one site of
a Heisenberg chain, sums two of them into a generator and follows an
observable to equilibrium.
"""

import math

from qnc import Region, gibbs_density, gibbs_expectation, identity, kms_inner, pauli, potential_heisenberg, site_operator
from qnc.condexp import (
    block_spin_gce,
    equivalence_constant,
    gce_property_report,
    marginal_density,
    markov_generator,
    semigroup_apply,
)

vol = Region.chain(4)
rho = gibbs_density(potential_heisenberg(1.0, 0.7, 0.4, 0.3), vol, beta=0.5)

E0, E3 = block_spin_gce(rho, [0]), block_spin_gce(rho, [3])
rep = gce_property_report(E0, rho, samples=50)
print("E(1)-1, positivity, symmetry:", rep.unital, rep.positivity, rep.symmetry)

L = markov_generator(E0, E3)
f = site_operator(pauli("x"), 0) @ site_operator(pauli("x"), 1)
eq = gibbs_expectation(rho, f).real
# the expectation is conserved; the two end blocks never touch the middle sites,
# so the distance to the constant levels off instead of going to zero
print(f"\nequilibrium value {eq:.6f}")
print("   t   <P_t f>     distance")
for t in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0):
    pf = semigroup_apply(L, f, t)
    diff = pf - eq * identity(vol)
    dist = math.sqrt(kms_inner(diff, diff, rho, 0.5).real)
    print(f"{t:4.2f}  {gibbs_expectation(rho, pf).real:.6f}  {dist:.3e}")

# how far the block-spin marginal is from the full state
c = equivalence_constant(rho, marginal_density(rho, [0]))
print("\nequivalence constant to the marginal on site 0:", c)
