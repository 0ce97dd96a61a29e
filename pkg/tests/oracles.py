"""Independent reference implementations used by the tests.

Everything here is deliberately naive: dense matrices, explicit loops,
``numpy.linalg`` and ``scipy.linalg.expm``. Nothing imports from the
package under test.
"""

import math

import numpy as np
from scipy.linalg import expm


def ladder(d):
    a = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        a[n - 1, n] = math.sqrt(n)
    return a


def coherent(z, d):
    return np.array([np.exp(-abs(z) ** 2 / 2) * z**n / math.sqrt(math.factorial(n)) for n in range(d)], dtype=complex)


def squeezed(r, d):
    # exp((r/2)(a^dag^2 - a^2))|0> on a padded space, then cropped
    big = d + 120
    a = ladder(big)
    s = expm(0.5 * r * (a.conj().T @ a.conj().T - a @ a))
    return s[:d, 0].copy()


def thermal(nbar, d):
    return np.array([nbar**n / (nbar + 1) ** (n + 1) for n in range(d)])


def tmsv(r, d):
    lam = math.tanh(r)
    psi = np.zeros((d, d), dtype=complex)
    for n in range(d):
        psi[n, n] = lam**n / math.cosh(r)
    return psi


def dense_rho(kind, params, d):
    """Dense unnormalized-by-truncation density matrix on d x d levels."""
    if kind == "cc":
        psi = np.kron(coherent(params[0], d), coherent(params[1], d))
    elif kind == "ss":
        psi = np.kron(squeezed(params[0], d), squeezed(params[1], d))
    elif kind == "tmsv":
        psi = tmsv(params[0], d).reshape(-1)
    elif kind == "vac":
        psi = np.zeros(d * d, dtype=complex)
        psi[0] = 1
    elif kind == "tt":
        return np.diag(np.kron(thermal(params[0], d), thermal(params[1], d))).astype(complex)
    else:
        raise ValueError(kind)
    return np.outer(psi, psi.conj())


def dpa_dense(rho, phi, d):
    """(A rho A^dagger) with A = a1^dag + e^{i phi} a2^dag, unnormalized."""
    ad = ladder(d).conj().T
    eye = np.eye(d)
    a = np.kron(ad, eye) + np.exp(1j * phi) * np.kron(eye, ad)
    return a @ rho @ a.conj().T


def partial_transpose_loops(x):
    """Partial transpose on mode 2 of a 4x4 matrix, by explicit indices."""
    out = np.zeros((4, 4), dtype=complex)
    for k1 in range(2):
        for k2 in range(2):
            for l1 in range(2):
                for l2 in range(2):
                    out[2 * k1 + l2, 2 * l1 + k2] = x[2 * k1 + k2, 2 * l1 + l2]
    return out


def npt_dense(rho, d):
    idx = [0 * d + 0, 0 * d + 1, 1 * d + 0, 1 * d + 1]
    x = rho[np.ix_(idx, idx)]
    x = x / np.trace(x).real
    ev = np.linalg.eigvalsh(partial_transpose_loops(x))
    return -2 * ev[ev < -1e-11].sum()


def displacement_expm(beta, d, pad=60):
    a = ladder(d + pad)
    return expm(beta * a.conj().T - np.conj(beta) * a)[:d, :d]


def wln_vacuum_after():
    """ln(4 e^{-1/2} - 1): radial integral of |W| for one photon in one mode."""
    return math.log(4 * math.exp(-0.5) - 1)
