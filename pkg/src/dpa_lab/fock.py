"""Truncated Fock-space primitives.

Single-mode operators are dense ``(d, d)`` complex arrays over the basis
``|0>, ..., |d-1>``. Two-mode objects use the row-major product index
``n1 * d2 + n2``. Arrays handed out by the cached constructors are
read-only so callers cannot corrupt the cache.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import ContractError, InvalidDimensionError

HERMITIAN_ATOL = 1e-12


@dataclass(frozen=True)
class FockCutoff:
    """Per-mode Fock dimensions of a two-mode truncated space."""

    d1: int
    d2: int

    def __post_init__(self):
        for name in ("d1", "d2"):
            value = getattr(self, name)
            if int(value) != value or value < 2:
                raise InvalidDimensionError(f"{name} must be an integer >= 2, got {value!r}")

    @property
    def dim(self):
        return self.d1 * self.d2

    def index(self, n1, n2):
        return n1 * self.d2 + n2


@dataclass(frozen=True)
class PhasePoint:
    """A point ``(q1, p1, q2, p2)`` of two-mode phase space.

    The complex amplitudes are ``beta_j = (q_j + i p_j) / sqrt(2)``.
    """

    q1: float
    p1: float
    q2: float
    p2: float

    @classmethod
    def from_betas(cls, beta1, beta2):
        s = np.sqrt(2.0)
        return cls(s * beta1.real, s * beta1.imag, s * beta2.real, s * beta2.imag)

    @property
    def beta1(self):
        return complex(self.q1, self.p1) / np.sqrt(2.0)

    @property
    def beta2(self):
        return complex(self.q2, self.p2) / np.sqrt(2.0)

    def as_array(self):
        return np.array([self.q1, self.p1, self.q2, self.p2], dtype=float)


def _check_dim(d):
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"cutoff must be an integer >= 2, got {d!r}")
    return int(d)


def _frozen(a):
    a.setflags(write=False)
    return a


@lru_cache(maxsize=64)
def creation_matrix(d):
    """Matrix of a^dagger truncated to ``d`` levels.

    Entry ``(n + 1, n)`` is ``sqrt(n + 1)``; the top level ``|d-1>`` is
    mapped to zero, so amplitude pushed beyond the cutoff is dropped.
    """
    d = _check_dim(d)
    a_dag = np.zeros((d, d), dtype=complex)
    n = np.arange(d - 1)
    a_dag[n + 1, n] = np.sqrt(n + 1.0)
    return _frozen(a_dag)


@lru_cache(maxsize=64)
def annihilation_matrix(d):
    return _frozen(creation_matrix(d).T.copy())


@lru_cache(maxsize=64)
def number_matrix(d):
    d = _check_dim(d)
    return _frozen(np.diag(np.arange(d, dtype=float)).astype(complex))


@lru_cache(maxsize=64)
def parity_matrix(d):
    """Diagonal matrix of ``(-1)^n``."""
    d = _check_dim(d)
    return _frozen(np.diag((-1.0) ** np.arange(d)).astype(complex))


def displacement_matrix(beta, d):
    """Truncated matrix of ``D(beta) = exp(beta a^dagger - beta* a)``.

    Elements come from the associated-Laguerre closed form
    ``<m|D|n> = sqrt(n!/m!) beta^(m-n) exp(-|beta|^2/2) L_n^(m-n)(|beta|^2)``
    for ``m >= n`` (and its mirror for ``m < n``), so each entry is exact
    up to rounding regardless of ``d``. Only the truncation of the
    operator itself (not of its entries) limits unitarity.
    """
    d = _check_dim(d)
    beta = complex(beta)
    if not np.isfinite(beta.real) or not np.isfinite(beta.imag):
        raise ContractError(f"displacement amplitude must be finite, got {beta!r}")
    x = abs(beta) ** 2
    if x == 0.0:
        return np.eye(d, dtype=complex)
    m = np.arange(d)[:, None]
    n = np.arange(d)[None, :]
    low = np.minimum(m, n)
    k = np.abs(m - n)
    log_prefactor = 0.5 * (gammaln(low + 1.0) - gammaln(low + k + 1.0)) + k * np.log(abs(beta)) - x / 2
    unit = beta / abs(beta)
    phase = np.where(m >= n, unit**k, (-np.conj(unit)) ** k)
    return np.exp(log_prefactor) * eval_genlaguerre(low, k, x) * phase


def displaced_parity(beta, d):
    """``D(beta) P D(beta)^dagger`` restricted to ``d`` levels.

    Uses the operator identity ``D(b) P D(-b) = D(2b) P``, which avoids
    the inner sum over intermediate levels that a product of truncated
    matrices would cut off.
    """
    return displacement_matrix(2.0 * complex(beta), d) * np.diag(parity_matrix(d)).real[None, :]


def _check_hermitian(m, atol):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > atol:
        raise ContractError(f"matrix is not Hermitian (max |M - M^H| = {dev:.3e})")
    return m


def jacobi_eigh(m, atol=HERMITIAN_ATOL, max_sweeps=60):
    """Eigen-decomposition of a small Hermitian matrix by cyclic Jacobi.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns. Pairs are visited in a fixed row-major order,
    so results are bit-reproducible across runs.
    """
    a = _check_hermitian(m, atol).copy()
    size = a.shape[0]
    if size > 8:
        raise ContractError(f"jacobi_eigh is for matrices of size <= 8, got {size}")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(size, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(np.triu(a, 1)) ** 2))
        if off <= 1e-17 * scale:
            break
        for p in range(size - 1):
            for q in range(p + 1, size):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                # phase rotation makes the pivot real, then a real Givens rotation kills it
                e = apq / mag
                j = np.eye(size, dtype=complex)
                j[p, p] = c
                j[q, q] = c * np.conj(e)
                j[p, q] = s
                j[q, p] = -s * np.conj(e)
                a = j.conj().T @ a @ j
                a[p, q] = a[q, p] = 0.0
                v = v @ j
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigenvalues(m, atol=HERMITIAN_ATOL):
    """Ascending real eigenvalues of a Hermitian matrix of size <= 8."""
    return jacobi_eigh(m, atol=atol)[0]
