"""Single-photon-subspace NPT witness.

The state is projected onto ``{|00>, |01>, |10>, |11>}`` (in that order),
normalized to unit trace, partially transposed on mode 2, and the NPT is
``-2`` times the sum of the negative eigenvalues of the result.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, WitnessUndefinedError
from .fock import hermitian_eigenvalues
from .states import CoherentPair, SqueezedPair, ThermalPair, Tmsv, VacuumPair, normalization_closed

NEGATIVE_THRESHOLD = 1e-11
RANGE_SLACK = 1e-9
STAGES = ("before", "after")


@dataclass(frozen=True)
class SubspaceWitness:
    x: np.ndarray
    x_pt: np.ndarray
    t: float
    eigenvalues_pt: np.ndarray
    npt: float


def partial_transpose(x):
    """Transpose mode 2 of a 4x4 two-qubit matrix.

    ``x_pt[(k1, l2), (l1, k2)] = x[(k1, k2), (l1, l2)]``.
    """
    x = np.asarray(x)
    return x.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def npt_from_eigenvalues(eigenvalues, threshold=NEGATIVE_THRESHOLD):
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    raw = -2.0 * eigenvalues[eigenvalues < -threshold].sum()
    if raw > 1.0 + RANGE_SLACK:
        raise ContractError(f"NPT {raw!r} exceeds 1; the witness matrix is not a valid state")
    return float(min(max(raw, 0.0), 1.0))


def witness_from_matrix(x_raw, threshold=NEGATIVE_THRESHOLD):
    """Build the witness from an unnormalized 4x4 subspace block."""
    x_raw = np.asarray(x_raw, dtype=complex)
    t = float(np.trace(x_raw).real)
    if t <= 0:
        raise WitnessUndefinedError("state has no population in the {0,1}x{0,1} subspace")
    x = x_raw / t
    x = 0.5 * (x + x.conj().T)
    x_pt = partial_transpose(x)
    eig = hermitian_eigenvalues(x_pt)
    return SubspaceWitness(x=x, x_pt=x_pt, t=t, eigenvalues_pt=eig, npt=npt_from_eigenvalues(eig, threshold))


def subspace_witness(rho, threshold=NEGATIVE_THRESHOLD):
    """NPT witness of a truncated two-mode density."""
    if min(rho.cutoff.d1, rho.cutoff.d2) < 3:
        raise ContractError("the witness needs at least 3 Fock levels per mode")
    return witness_from_matrix(rho.block(2), threshold)


def npt_closed(spec, params, stage="after"):
    """Closed-form NPT before or after photon addition."""
    if stage not in STAGES:
        raise ContractError(f"stage must be one of {STAGES}, got {stage!r}")
    if stage == "before":
        if isinstance(spec, Tmsv):
            lam = abs(spec.lam)
            return 2.0 * lam / (1.0 + lam**2)
        return 0.0
    if isinstance(spec, CoherentPair):
        return 2.0 / normalization_closed(spec, params)
    if isinstance(spec, ThermalPair):
        a, gamma = _thermal_a_gamma(spec)
        return (math.sqrt(4 * a * a + gamma * gamma) - gamma) / (2 * a + gamma)
    if isinstance(spec, (SqueezedPair, Tmsv, VacuumPair)):
        return 1.0
    raise ContractError(f"no closed-form NPT for {type(spec).__name__}")


def _thermal_a_gamma(spec):
    n1, n2 = spec.nbar1, spec.nbar2
    return (1 + n1) * (1 + n2), n1 + n2 + 2 * n1 * n2


def _pure_block(c):
    c = np.asarray(c, dtype=complex)
    return np.outer(c, c.conj()) / np.vdot(c, c).real


def witness_closed(spec, params, stage="after"):
    """Closed-form partially transposed witness matrix ``X^T2``.

    Built from the analytic subspace elements of each family, independent of
    any Fock-space construction.
    """
    e = params.phase
    bell = 0.5 * np.array([[0, 0, 0, e], [0, 1, 0, 0], [0, 0, 1, 0], [np.conj(e), 0, 0, 0]], dtype=complex)
    if stage == "before":
        if isinstance(spec, CoherentPair):
            z1, z2 = complex(spec.z1), complex(spec.z2)
            return partial_transpose(_pure_block([1, z2, z1, z1 * z2]))
        if isinstance(spec, ThermalPair):
            n1, n2 = spec.nbar1, spec.nbar2
            b = (1 + 2 * n1) * (1 + 2 * n2)
            return np.diag([(1 + n1) * (1 + n2), (1 + n1) * n2, n1 * (1 + n2), n1 * n2]).astype(complex) / b
        if isinstance(spec, (SqueezedPair, VacuumPair)):
            return np.diag([1, 0, 0, 0]).astype(complex)
        if isinstance(spec, Tmsv):
            return partial_transpose(_pure_block([1, 0, 0, spec.lam]))
    elif stage == "after":
        if isinstance(spec, CoherentPair):
            s = complex(spec.z1) + np.conj(e) * complex(spec.z2)
            return partial_transpose(_pure_block([0, e, 1, e * s]))
        if isinstance(spec, ThermalPair):
            a, gamma = _thermal_a_gamma(spec)
            x = np.array([[0, 0, 0, a * e], [0, a, 0, 0], [0, 0, a, 0], [a * np.conj(e), 0, 0, gamma]], dtype=complex)
            return x / (2 * a + gamma)
        if isinstance(spec, (SqueezedPair, Tmsv, VacuumPair)):
            return bell
    raise ContractError(f"no closed-form witness for {spec!r} at stage {stage!r}")


def closed_pt_eigenvalues(spec, params, stage="after"):
    """Closed-form eigenvalue list of ``X^T2``, sorted ascending."""
    if stage == "before":
        if isinstance(spec, (CoherentPair, SqueezedPair, VacuumPair)):
            vals = [1.0, 0.0, 0.0, 0.0]
        elif isinstance(spec, ThermalPair):
            n1, n2 = spec.nbar1, spec.nbar2
            b = (1 + 2 * n1) * (1 + 2 * n2)
            vals = [n1 * n2 / b, (1 + n1) * (1 + n2) / b, n1 * (1 + n2) / b, (1 + n1) * n2 / b]
        elif isinstance(spec, Tmsv):
            lam = spec.lam
            den = 1 + lam * lam
            vals = [1 / den, -lam / den, lam * lam / den, lam / den]
        else:
            raise ContractError(f"no closed-form eigenvalues for {spec!r}")
    elif stage == "after":
        if isinstance(spec, CoherentPair):
            n = normalization_closed(spec, params)
            root = math.sqrt(max(1.0 - 4.0 / n**2, 0.0))
            vals = [-1 / n, 1 / n, 0.5 * (1 - root), 0.5 * (1 + root)]
        elif isinstance(spec, ThermalPair):
            a, gamma = _thermal_a_gamma(spec)
            root = math.sqrt(4 * a * a + gamma * gamma)
            den = 2 * a + gamma
            vals = [a / den, a / den, -0.5 * (root - gamma) / den, 0.5 * (root + gamma) / den]
        elif isinstance(spec, (SqueezedPair, Tmsv, VacuumPair)):
            vals = [-0.5, 0.5, 0.5, 0.5]
        else:
            raise ContractError(f"no closed-form eigenvalues for {spec!r}")
    else:
        raise ContractError(f"stage must be one of {STAGES}, got {stage!r}")
    return np.sort(np.array(vals, dtype=float))
