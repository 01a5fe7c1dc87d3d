"""
Gibbs states and weighted L_p norms on a spin chain
===================================================

Builds Ising and Heisenberg Gibbs densities on short open chains and
tabulates the L_{p,s} norms of a local observable as the volume grows.
"""

import numpy as np

from qnc import Region, gibbs_density, lps_norm, pauli, potential_heisenberg, potential_ising, site_operator
from qnc.gibbs import compatibility_defect

# sigma_z commutes with every Ising density, so its norms are all 1
ising = potential_ising(J=1.0, h=0.2)
sz = site_operator(pauli("z"), 0)
rho = gibbs_density(ising, Region.chain(4), beta=0.5)
print("Ising ||sz||_{3,1/2} on 4 sites:", lps_norm(sz, rho, 3, 0.5))

# a non-commuting observable in the XXX chain
xxx = potential_heisenberg(1.0, 1.0, 1.0, h=0.2)
sx = site_operator(pauli("x"), 0)
print("\nsize   p=2      p=3      p=4")
for n in range(2, 7):
    rho = gibbs_density(xxx, Region.chain(n), beta=0.5)
    row = [lps_norm(sx, rho, p, 0.5) for p in (2, 3, 4)]
    print(f"{n:>4}  " + "  ".join(f"{v:.5f}" for v in row))

# free-boundary densities are not a compatible family in general
print("\ncompatibility defect, Ising h=0.2, beta=0.2:",
      compatibility_defect(ising, 0.2, [0, 1], [0, 1, 2, 3]))
print("same with h=0:", compatibility_defect(potential_ising(1.0, 0.0), 0.2, [0, 1], [0, 1, 2, 3]))

# p = infinity is the operator norm
print("\np=inf:", lps_norm(sx, rho, np.inf, 0.5))
