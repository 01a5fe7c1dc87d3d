"""Independent reference computations used by the tests.

Everything here works on plain numpy arrays for 1-D chains with sites
0..N-1 and builds operators with explicit Kronecker products, so it shares
no code with the library.
"""

import numpy as np
from scipy.linalg import expm

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def kron_all(ops):
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def on_site(op, i, N):
    ops = [I2] * N
    ops[i] = op
    return kron_all(ops)


def chain_hamiltonian(N, Jx=0.0, Jy=0.0, Jz=1.0, h=0.0):
    H = np.zeros((2**N, 2**N), dtype=complex)
    for i in range(N - 1):
        for J, s in ((Jx, SX), (Jy, SY), (Jz, SZ)):
            H -= J * on_site(s, i, N) @ on_site(s, i + 1, N)
    for i in range(N):
        H -= h * on_site(SZ, i, N)
    return H


def gibbs(N, beta, **couplings):
    """Gibbs density with normalized trace one, via scipy's expm."""
    r = expm(-beta * chain_hamiltonian(N, **couplings))
    return r / (np.trace(r) / 2**N)


def ptrace_site(m, i, N):
    """Normalized partial trace over site i, re-embedded with the identity."""
    t = m.reshape([2] * (2 * N))
    red = np.trace(t, axis1=i, axis2=N + i) / 2
    red = red.reshape(2 ** (N - 1), 2 ** (N - 1))
    # put the identity back on site i by brute-force index loops
    out = np.zeros_like(m)
    for a in range(2**N):
        for b in range(2**N):
            ba = [(a >> (N - 1 - k)) & 1 for k in range(N)]
            bb = [(b >> (N - 1 - k)) & 1 for k in range(N)]
            if ba[i] != bb[i]:
                continue
            ra = int("".join(str(x) for k, x in enumerate(ba) if k != i) or "0", 2)
            rb = int("".join(str(x) for k, x in enumerate(bb) if k != i) or "0", 2)
            out[a, b] = red[ra, rb]
    return out


def mpow(m, a):
    w, v = np.linalg.eigh(m)
    return (v * w.astype(complex) ** a) @ v.conj().T


def schatten_normalized(m, p):
    sv = np.linalg.svd(m, compute_uv=False)
    return (np.mean(sv**p)) ** (1 / p)


def classical_orlicz(values, weights, phi, lo=1e-9, hi=1e9):
    """Luxemburg norm of a weighted sequence by brentq on the constraint."""
    from scipy.optimize import brentq

    values = np.abs(np.asarray(values, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if not values.any():
        return 0.0
    F = lambda lam: float(np.sum(weights * phi(values / lam))) - 1.0
    return brentq(F, lo * values.max(), hi * values.max(), xtol=1e-300, rtol=1e-15)
