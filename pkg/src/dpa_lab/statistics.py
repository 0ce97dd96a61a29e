"""Joint photon-number distributions and the discorrelation test."""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, TruncationError
from .states import CoherentPair, DpaParams, output_state

DIAGONAL_EPS = 1e-10
MARGINAL_EPS = 1e-6


@dataclass(frozen=True)
class JpndTable:
    """``p[n1, n2] = <n1, n2|rho|n1, n2>`` for ``n1, n2 <= n_max``."""

    n_max: int
    p: np.ndarray
    marginal1: np.ndarray
    marginal2: np.ndarray
    captured_mass: float

    def diagonal(self):
        return np.diag(self.p).copy()


@dataclass(frozen=True)
class DiscorrelationVerdict:
    discorrelated: bool
    max_diagonal: float
    min_marginal_mass: float
    eps: float
    # coincidence probability the marginals would give if the modes were independent
    marginal_overlap: float


def max_window(rho):
    """Largest ``n_max`` clear of the top Fock level of either mode."""
    return min(rho.cutoff.d1, rho.cutoff.d2) - 2


def jpnd(rho, n_max=None):
    """Joint photon-number distribution of a truncated two-mode state.

    Marginals are sums of the windowed table, so ``marginal1.sum()`` equals
    ``captured_mass``.
    """
    limit = max_window(rho)
    if n_max is None:
        n_max = limit
    if n_max < 0:
        raise ContractError("n_max must be >= 0")
    if n_max > limit:
        raise TruncationError(
            f"n_max={n_max} reaches the truncation edge (limit {limit})", required_cutoff=n_max + 2
        )
    p = np.array(rho.populations()[: n_max + 1, : n_max + 1])
    p.setflags(write=False)
    m1 = p.sum(axis=1)
    m2 = p.sum(axis=0)
    return JpndTable(n_max=n_max, p=p, marginal1=m1, marginal2=m2, captured_mass=float(p.sum()))


def discorrelation_verdict(table, eps=DIAGONAL_EPS, marginal_eps=MARGINAL_EPS):
    """Discorrelated when no ``P[n, n]`` reaches ``eps`` while both marginals
    carry more than ``marginal_eps`` of probability."""
    max_diag = float(np.max(np.diag(table.p)))
    min_marginal = float(min(table.marginal1.sum(), table.marginal2.sum()))
    overlap = float(np.dot(table.marginal1, table.marginal2))
    return DiscorrelationVerdict(
        discorrelated=bool(max_diag < eps and min_marginal > marginal_eps),
        max_diagonal=max_diag,
        min_marginal_mass=min_marginal,
        eps=eps,
        marginal_overlap=overlap,
    )


def diagonal_vs_phase(spec, n, phi_grid, cutoff=None):
    """``P[n, n]`` of the photon-added coherent pair at each phase."""
    if not isinstance(spec, CoherentPair):
        raise ContractError("diagonal_vs_phase expects a CoherentPair")
    out = []
    for phi in phi_grid:
        rho = output_state(spec, DpaParams(phi), cutoff)
        if n > max_window(rho):
            raise TruncationError(f"n={n} is beyond the statistics window", required_cutoff=n + 2)
        out.append(float(rho.populations()[n, n]))
    return out
