"""
Orlicz norms of matrices
========================

Compares the two routes to the Luxemburg norm (functional calculus and
singular value rearrangement) and checks how a few unital maps act on it.
"""

import math

import numpy as np

from qnc import OrliczFunction, Region, luxemburg_norm, random_operator
from qnc.condexp import inner_automorphism, kraus_map, transpose_map
from qnc.orlicz import contraction_report, ddp_norm, singular_profile

f = np.diag([3.0, 1.0])
print("||diag(3,1)|| power(2):", luxemburg_norm(f, OrliczFunction.power(2)), "vs", math.sqrt(5))
print("||1|| exp(u)-1:", luxemburg_norm(np.eye(2), OrliczFunction.exp_minus_one()),
      "vs", 1 / math.log(2))

g = random_operator(Region.chain(2), seed=3)
prof = singular_profile(g)
print("\nsingular profile values:", np.round(prof.values, 4), "weights:", prof.weights)
for phi in (OrliczFunction.power(1.5), OrliczFunction.cosh_minus_one(), OrliczFunction.llogl(),
            OrliczFunction.custom([[0, 0], [1, 0.5], [2, 2]])):
    print(f"{phi.label():>16}: Kunze {luxemburg_norm(g, phi):.15f}  rearranged {ddp_norm(g, phi):.15f}")

vol = Region.chain(2)
rng = np.random.default_rng(0)
u = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
w = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
maps = {"inner": inner_automorphism(u, vol), "transpose": transpose_map(vol),
        "kraus": kraus_map([np.sqrt(0.5) * u, np.sqrt(0.5) * w], vol)}
print()
for name, T in maps.items():
    rep = contraction_report(T, OrliczFunction.exp_minus_one(), samples=50)
    print(f"{name:>9}: class {rep.map_class}, ratio in [{rep.min_ratio:.6f}, {rep.max_ratio:.6f}],"
          f" bound {rep.bound:.3f}")
