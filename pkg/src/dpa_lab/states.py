"""Input light states and delocalized photon addition.

Four input families are supported (two coherent states, two thermal
states, two single-mode squeezed vacua, a two-mode squeezed vacuum) plus
the two-mode vacuum they all reduce to at zero parameters. Pure states are
kept as ``(d1, d2)`` amplitude arrays; the thermal family is stored as a
sparse density matrix, since its populations need far more Fock levels
than a dense ``(d1 d2)^2`` matrix can afford.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import ClassVar, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import gammainc

from .errors import ContractError, TruncationError
from .fock import FockCutoff, creation_matrix

log = logging.getLogger(__name__)

EPS_TRUNC = 1e-10
# Default cutoffs aim well below EPS_TRUNC. Pure states need the stricter
# target: coherences with the dropped tail enter phase-space expectations at
# amplitude level, i.e. as sqrt(tail).
TAIL_TARGET = 1e-13
TAIL_TARGET_PURE = 1e-16
MAX_CUTOFF = 400
TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# state specifications


@dataclass(frozen=True)
class CoherentPair:
    z1: complex = 0.0
    z2: complex = 0.0
    family: ClassVar[str] = "cc"

    @property
    def mode_means(self):
        return abs(self.z1) ** 2, abs(self.z2) ** 2


@dataclass(frozen=True)
class ThermalPair:
    nbar1: float = 0.0
    nbar2: float = 0.0
    family: ClassVar[str] = "tt"

    def __post_init__(self):
        if self.nbar1 < 0 or self.nbar2 < 0:
            raise ContractError("thermal mean photon numbers must be >= 0")

    @property
    def mode_means(self):
        return float(self.nbar1), float(self.nbar2)


@dataclass(frozen=True)
class SqueezedPair:
    r1: float = 0.0
    r2: float = 0.0
    family: ClassVar[str] = "ss"

    @property
    def lam1(self):
        return math.tanh(self.r1)

    @property
    def lam2(self):
        return math.tanh(self.r2)

    @property
    def kappa1(self):
        return math.cosh(self.r1) ** 2

    @property
    def kappa2(self):
        return math.cosh(self.r2) ** 2

    @property
    def mode_means(self):
        return math.sinh(self.r1) ** 2, math.sinh(self.r2) ** 2


@dataclass(frozen=True)
class Tmsv:
    r: float = 0.0
    family: ClassVar[str] = "tmsv"

    @property
    def lam(self):
        return math.tanh(self.r)

    @property
    def kappa(self):
        return math.cosh(self.r) ** 2

    @property
    def mode_means(self):
        m = math.sinh(self.r) ** 2
        return m, m


@dataclass(frozen=True)
class VacuumPair:
    family: ClassVar[str] = "vac"

    @property
    def mode_means(self):
        return 0.0, 0.0


StateSpec = Union[CoherentPair, ThermalPair, SqueezedPair, Tmsv, VacuumPair]
FAMILIES = {cls.family: cls for cls in (CoherentPair, ThermalPair, SqueezedPair, Tmsv, VacuumPair)}


def nbar_total(spec):
    """Total input mean photon number of ``spec``."""
    return sum(spec.mode_means)


def is_zero_parameter(spec):
    return nbar_total(spec) == 0.0


@dataclass(frozen=True)
class DpaParams:
    """Superposition phase of the addition operator, reduced to [0, 2pi)."""

    phi: float = 0.0

    def __post_init__(self):
        phi = math.fmod(float(self.phi), TWO_PI)
        if phi < 0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @property
    def phase(self):
        return complex(math.cos(self.phi), math.sin(self.phi))


@dataclass(frozen=True)
class EnergyBudget:
    nbar_total: float
    symmetric: bool = True

    def __post_init__(self):
        if self.nbar_total < 0:
            raise ContractError("energy budget must be >= 0")


def budget_to_spec(family, budget, split=None):
    """Spec of ``family`` whose total input mean photon number is ``budget``.

    ``split`` is the share given to mode 1 (ignored for the two-mode
    squeezed vacuum). It defaults to 0.5 for a symmetric budget. Coherent
    amplitudes are real and non-negative.
    """
    if not isinstance(budget, EnergyBudget):
        budget = EnergyBudget(float(budget))
    if split is None:
        if not budget.symmetric:
            raise ContractError("an asymmetric budget needs an explicit split")
        split = 0.5
    if not 0.0 <= split <= 1.0:
        raise ContractError(f"split must lie in [0, 1], got {split}")
    n1 = split * budget.nbar_total
    n2 = budget.nbar_total - n1
    if family == "cc":
        return CoherentPair(math.sqrt(n1), math.sqrt(n2))
    if family == "tt":
        return ThermalPair(n1, n2)
    if family == "ss":
        return SqueezedPair(math.asinh(math.sqrt(n1)), math.asinh(math.sqrt(n2)))
    if family == "tmsv":
        return Tmsv(math.asinh(math.sqrt(budget.nbar_total / 2.0)))
    if family == "vac":
        if budget.nbar_total != 0:
            raise ContractError("the vacuum pair only has a zero budget")
        return VacuumPair()
    raise ContractError(f"unknown family {family!r}")


def normalization_closed(spec, params):
    """Closed-form trace of ``A rho A^dagger`` for the four families."""
    e = np.conj(params.phase)
    if isinstance(spec, CoherentPair):
        return abs(spec.z1 + e * spec.z2) ** 2 + 2.0
    if isinstance(spec, ThermalPair):
        return spec.nbar1 + spec.nbar2 + 2.0
    if isinstance(spec, SqueezedPair):
        return spec.kappa1 + spec.kappa2
    if isinstance(spec, Tmsv):
        return 2.0 * spec.kappa
    if isinstance(spec, VacuumPair):
        return 2.0
    raise ContractError(f"no closed-form normalization for {type(spec).__name__}")


# --------------------------------------------------------------------------
# single-mode distributions


def _coherent_amplitudes(z, d):
    z = complex(z)
    c = np.empty(d, dtype=complex)
    c[0] = math.exp(-abs(z) ** 2 / 2)
    for n in range(1, d):
        c[n] = c[n - 1] * z / math.sqrt(n)
    return c


def _coherent_tail(z, d):
    x = abs(z) ** 2
    return 0.0 if x == 0 else float(gammainc(d, x))


def _squeezed_amplitudes(r, d):
    lam = math.tanh(r)
    c = np.zeros(d, dtype=complex)
    c[0] = (1.0 - lam**2) ** 0.25
    for n in range(2, d, 2):
        c[n] = c[n - 2] * lam * math.sqrt((n - 1) * n) / n
    return c


def _squeezed_tail(r, d):
    lam = math.tanh(r)
    if lam == 0:
        return 0.0
    # continue the recurrence past the cutoff; terms decay geometrically
    start = d + (d % 2)
    amp = _squeezed_amplitudes(r, start + 1)[start].real if start > 0 else 1.0
    tail, n = 0.0, start
    while True:
        term = amp * amp
        tail += term
        if term < 1e-18 * max(tail, 1e-300) or term < 1e-300:
            break
        amp *= lam * math.sqrt((n + 1) * (n + 2)) / (n + 2)
        n += 2
    return tail


def _thermal_probs(nbar, d):
    if nbar == 0:
        p = np.zeros(d)
        p[0] = 1.0
        return p
    ratio = nbar / (nbar + 1.0)
    return ratio ** np.arange(d) / (nbar + 1.0)


def _thermal_tail(nbar, d):
    return 0.0 if nbar == 0 else (nbar / (nbar + 1.0)) ** d


def _mode_tail(spec, mode, d):
    """Population above level ``d - 1`` in one mode's marginal."""
    if isinstance(spec, CoherentPair):
        return _coherent_tail((spec.z1, spec.z2)[mode], d)
    if isinstance(spec, ThermalPair):
        return _thermal_tail((spec.nbar1, spec.nbar2)[mode], d)
    if isinstance(spec, SqueezedPair):
        return _squeezed_tail((spec.r1, spec.r2)[mode], d)
    if isinstance(spec, Tmsv):
        return math.tanh(spec.r) ** (2 * d)
    return 0.0


def tail_mass(spec, cutoff):
    """Input population lost by truncating ``spec`` to ``cutoff``."""
    if isinstance(spec, Tmsv):
        return math.tanh(spec.r) ** (2 * min(cutoff.d1, cutoff.d2))
    t1 = _mode_tail(spec, 0, cutoff.d1)
    t2 = _mode_tail(spec, 1, cutoff.d2)
    return t1 + t2 - t1 * t2


def _required_mode_cutoff(spec, mode, target):
    d = 2
    while _mode_tail(spec, mode, d) > target:
        d += 1
        if d > MAX_CUTOFF:
            raise TruncationError(f"no cutoff <= {MAX_CUTOFF} reaches tail {target:g}", required_cutoff=None)
    return d


def default_cutoff(spec, target=None):
    """Per-mode cutoffs for ``spec``.

    Takes the larger of ``max(12, ceil(6 + 6 nbar + 5 sqrt(nbar + 1)))`` and
    the smallest dimension whose tail is below ``target``, plus two levels
    of headroom for the added photon.
    """
    if target is None:
        target = TAIL_TARGET if isinstance(spec, ThermalPair) else TAIL_TARGET_PURE
    dims = []
    for mode, nbar in enumerate(spec.mode_means):
        heuristic = max(12, math.ceil(6 + 6 * nbar + 5 * math.sqrt(nbar + 1)))
        dims.append(max(heuristic, _required_mode_cutoff(spec, mode, target / 2) + 2))
    if isinstance(spec, Tmsv):
        dims = [max(dims)] * 2
    return FockCutoff(*dims)


# --------------------------------------------------------------------------
# two-mode density


@dataclass(frozen=True, eq=False)
class TwoModeDensity:
    """Truncated two-mode state.

    Exactly one of ``ket`` (a ``(d1, d2)`` amplitude array, for pure
    states) or ``op`` (a sparse ``(d1 d2, d1 d2)`` matrix) is set.
    ``tail_mass`` is the population lost to truncation before
    renormalization. ``numerator_trace`` is set by :func:`apply_dpa`.
    """

    cutoff: FockCutoff
    ket: Optional[np.ndarray] = None
    op: Optional[sp.csr_matrix] = None
    tail_mass: float = 0.0
    numerator_trace: Optional[float] = None
    spec: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        if (self.ket is None) == (self.op is None):
            raise ContractError("exactly one of ket or op must be given")
        if self.ket is not None:
            if self.ket.shape != (self.cutoff.d1, self.cutoff.d2):
                raise ContractError(f"ket shape {self.ket.shape} does not match {self.cutoff}")
            self.ket.setflags(write=False)
        elif self.op.shape != (self.cutoff.dim, self.cutoff.dim):
            raise ContractError(f"operator shape {self.op.shape} does not match {self.cutoff}")

    @classmethod
    def from_matrix(cls, matrix, cutoff, tail_mass=0.0):
        """Wrap a user-supplied density matrix (dense or sparse)."""
        m = sp.csr_matrix(matrix, dtype=complex)
        return cls(cutoff=cutoff, op=m, tail_mass=tail_mass)

    @property
    def is_pure(self):
        return self.ket is not None

    @property
    def dim(self):
        return self.cutoff.dim

    def to_dense(self):
        if self.is_pure:
            v = self.ket.reshape(-1)
            return np.outer(v, v.conj())
        return self.op.toarray()

    def trace(self):
        if self.is_pure:
            return float(np.sum(np.abs(self.ket) ** 2))
        return float(self.op.diagonal().real.sum())

    def populations(self):
        """``(d1, d2)`` array of ``<n1, n2|rho|n1, n2>``."""
        if self.is_pure:
            return np.abs(self.ket) ** 2
        return self.op.diagonal().real.reshape(self.cutoff.d1, self.cutoff.d2)

    def element(self, k1, k2, l1, l2):
        """``<k1, k2|rho|l1, l2>``."""
        if self.is_pure:
            return complex(self.ket[k1, k2] * np.conj(self.ket[l1, l2]))
        return complex(self.op[self.cutoff.index(k1, k2), self.cutoff.index(l1, l2)])

    def block(self, levels):
        """Dense matrix of the sub-space ``{|n1, n2>: n1, n2 < levels}``.

        Rows and columns are ordered ``n1 * levels + n2``.
        """
        if levels > min(self.cutoff.d1, self.cutoff.d2):
            raise ContractError("block larger than the truncated space")
        if self.is_pure:
            v = self.ket[:levels, :levels].reshape(-1)
            return np.outer(v, v.conj())
        idx = np.array([self.cutoff.index(a, b) for a in range(levels) for b in range(levels)])
        return self.op[idx][:, idx].toarray()

    def swapped(self):
        """The state with modes 1 and 2 exchanged."""
        cut = FockCutoff(self.cutoff.d2, self.cutoff.d1)
        if self.is_pure:
            return TwoModeDensity(cut, ket=self.ket.T.copy(), tail_mass=self.tail_mass)
        coo = self.op.tocoo()
        d1, d2 = self.cutoff.d1, self.cutoff.d2

        def perm(i):
            return (i % d2) * d1 + i // d2

        op = sp.csr_matrix((coo.data, (perm(coo.row), perm(coo.col))), shape=self.op.shape)
        return TwoModeDensity(cut, op=op, tail_mass=self.tail_mass)


def build_input(spec, cutoff=None, eps_trunc=EPS_TRUNC):
    """Truncated Fock representation of an input state.

    The state is renormalized to unit trace; the population removed by the
    truncation is kept in ``tail_mass``. Raises :class:`TruncationError`
    when that population reaches ``eps_trunc``.
    """
    if cutoff is None:
        cutoff = default_cutoff(spec)
    elif not isinstance(cutoff, FockCutoff):
        cutoff = FockCutoff(int(cutoff), int(cutoff))
    d1, d2 = cutoff.d1, cutoff.d2

    tail = tail_mass(spec, cutoff)
    if tail >= eps_trunc:
        need = default_cutoff(spec, target=eps_trunc / 10)
        raise TruncationError(
            f"cutoff {d1}x{d2} loses population {tail:.3e} >= {eps_trunc:g}; "
            f"try {need.d1}x{need.d2}",
            required_cutoff=need,
            tail_mass=tail,
        )

    if isinstance(spec, ThermalPair):
        p = np.outer(_thermal_probs(spec.nbar1, d1), _thermal_probs(spec.nbar2, d2)).reshape(-1)
        kept = p.sum()
        op = sp.diags(p / kept, format="csr").astype(complex)
        rho = TwoModeDensity(cutoff, op=op, tail_mass=tail, spec=spec)
    else:
        if isinstance(spec, CoherentPair):
            ket = np.outer(_coherent_amplitudes(spec.z1, d1), _coherent_amplitudes(spec.z2, d2))
        elif isinstance(spec, SqueezedPair):
            ket = np.outer(_squeezed_amplitudes(spec.r1, d1), _squeezed_amplitudes(spec.r2, d2))
        elif isinstance(spec, Tmsv):
            lam = math.tanh(spec.r)
            ket = np.zeros((d1, d2), dtype=complex)
            n = np.arange(min(d1, d2))
            ket[n, n] = math.sqrt(1.0 - lam**2) * lam**n
        elif isinstance(spec, VacuumPair):
            ket = np.zeros((d1, d2), dtype=complex)
            ket[0, 0] = 1.0
        else:
            raise ContractError(f"unsupported state spec {spec!r}")
        kept = float(np.sum(np.abs(ket) ** 2))
        rho = TwoModeDensity(cutoff, ket=ket / math.sqrt(kept), tail_mass=tail, spec=spec)
    if tail > 0:
        log.debug("renormalized %s on %dx%d (tail %.3e, kept %.15f)", spec, d1, d2, tail, kept)
    return rho


def dpa_operator(cutoff, params):
    """Sparse matrix of ``a1^dagger + exp(i phi) a2^dagger`` on the product space."""
    a1 = sp.csr_matrix(creation_matrix(cutoff.d1))
    a2 = sp.csr_matrix(creation_matrix(cutoff.d2))
    return (sp.kron(a1, sp.identity(cutoff.d2)) + params.phase * sp.kron(sp.identity(cutoff.d1), a2)).tocsr()


def apply_dpa(rho_in, params):
    """Apply delocalized photon addition and renormalize.

    Returns the output density; its ``numerator_trace`` holds
    ``Tr(A rho A^dagger)`` before normalization, for comparison with
    :func:`normalization_closed`.
    """
    if not isinstance(params, DpaParams):
        params = DpaParams(params)
    cut = rho_in.cutoff
    if rho_in.is_pure:
        psi = rho_in.ket
        out = creation_matrix(cut.d1) @ psi + params.phase * (psi @ creation_matrix(cut.d2).T)
        numerator = float(np.sum(np.abs(out) ** 2))
        if numerator <= 0:
            raise ContractError("photon addition annihilated the state")
        return TwoModeDensity(
            cut, ket=out / math.sqrt(numerator), tail_mass=rho_in.tail_mass, numerator_trace=numerator
        )
    a = dpa_operator(cut, params)
    out = (a @ rho_in.op @ a.conj().T).tocsr()
    out.eliminate_zeros()
    numerator = float(out.diagonal().real.sum())
    if numerator <= 0:
        raise ContractError("photon addition annihilated the state")
    return TwoModeDensity(cut, op=out / numerator, tail_mass=rho_in.tail_mass, numerator_trace=numerator)


def output_state(spec, params, cutoff=None):
    """Convenience: ``apply_dpa(build_input(spec), params)``."""
    return apply_dpa(build_input(spec, cutoff), params)
