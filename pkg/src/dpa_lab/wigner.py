"""Wigner functions before and after photon addition, and their negativity.

Phase-space points are arrays whose last axis is ``(q1, p1, q2, p2)``,
with ``beta_j = (q_j + i p_j) / sqrt(2)``. Every input Wigner function here
is a Gaussian normalized so that ``integral W d^2beta1 d^2beta2 = 1``, where
``d^2beta = dRe(beta) dIm(beta) = dq dp / 2``. After addition the Wigner
function is the input Gaussian times ``T / N`` with
``T = k |w(beta)|^2 - k0`` and ``w`` a real-affine complex form.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContractError, ConvergenceError, RegionError
from .fock import PhasePoint, displaced_parity
from .states import (
    CoherentPair,
    DpaParams,
    SqueezedPair,
    ThermalPair,
    Tmsv,
    VacuumPair,
    build_input,
    apply_dpa,
    nbar_total,
    normalization_closed,
)

PEAK = 4.0 / math.pi**2
SQRT2 = math.sqrt(2.0)
IMAG_TOL = 1e-10


def _as_points(point):
    if isinstance(point, PhasePoint):
        return point.as_array()
    pts = np.asarray(point, dtype=float)
    if pts.shape[-1] != 4:
        raise ContractError(f"phase-space points need a trailing axis of 4, got shape {pts.shape}")
    return pts


def _betas(pts):
    b1 = (pts[..., 0] + 1j * pts[..., 1]) / SQRT2
    b2 = (pts[..., 2] + 1j * pts[..., 3]) / SQRT2
    return b1, b2


# --------------------------------------------------------------------------
# analytic forms


def input_kernel(spec, b1, b2):
    """Gaussian Wigner function of the input state at ``(beta1, beta2)``."""
    if isinstance(spec, CoherentPair):
        return PEAK * np.exp(-2 * np.abs(spec.z1 - b1) ** 2 - 2 * np.abs(spec.z2 - b2) ** 2)
    if isinstance(spec, ThermalPair):
        g1, g2 = 2 * spec.nbar1 + 1, 2 * spec.nbar2 + 1
        return PEAK / (g1 * g2) * np.exp(-2 / g1 * np.abs(b1) ** 2 - 2 / g2 * np.abs(b2) ** 2)
    if isinstance(spec, SqueezedPair):
        return PEAK * np.exp(
            -2 * spec.kappa1 * np.abs(spec.lam1 * b1 - np.conj(b1)) ** 2
            - 2 * spec.kappa2 * np.abs(spec.lam2 * b2 - np.conj(b2)) ** 2
        )
    if isinstance(spec, Tmsv):
        lam = spec.lam
        return PEAK * np.exp(
            -2 * spec.kappa * (np.abs(lam * b1 - np.conj(b2)) ** 2 + np.abs(lam * b2 - np.conj(b1)) ** 2)
        )
    if isinstance(spec, VacuumPair):
        return PEAK * np.exp(-2 * (np.abs(b1) ** 2 + np.abs(b2) ** 2))
    raise ContractError(f"no analytic Wigner function for {spec!r}")


def ng_form(spec, params):
    """``(k, w, k0)`` such that the non-Gaussian factor is ``k |w(b1, b2)|^2 - k0``."""
    e = np.conj(params.phase)
    if isinstance(spec, VacuumPair):
        spec = CoherentPair(0.0, 0.0)
    if isinstance(spec, CoherentPair):
        z1, z2 = spec.z1, spec.z2
        return 1.0, lambda b1, b2: (z1 - 2 * b1) + e * (z2 - 2 * b2), 2.0
    if isinstance(spec, ThermalPair):
        e1 = (spec.nbar1 + 1) / (2 * spec.nbar1 + 1)
        e2 = (spec.nbar2 + 1) / (2 * spec.nbar2 + 1)
        return 4.0, lambda b1, b2: e1 * b1 + e * e2 * b2, e1 + e2
    if isinstance(spec, SqueezedPair):
        k1, k2, l1, l2 = spec.kappa1, spec.kappa2, spec.lam1, spec.lam2
        # (b - lam b*) rather than (lam b - b*): the latter pairs with exp(+i phi)
        return (
            4.0,
            lambda b1, b2: k1 * (b1 - l1 * np.conj(b1)) + e * k2 * (b2 - l2 * np.conj(b2)),
            k1 + k2,
        )
    if isinstance(spec, Tmsv):
        lam, kap = spec.lam, spec.kappa
        return (
            4.0 * kap**2,
            lambda b1, b2: (lam * b1 - np.conj(b2)) + e * (lam * b2 - np.conj(b1)),
            2.0 * kap,
        )
    raise ContractError(f"no non-Gaussian factor for {spec!r}")


def ng_factor(spec, params, b1, b2):
    k, w, k0 = ng_form(spec, params)
    return k * np.abs(w(b1, b2)) ** 2 - k0


def gaussian_moments(spec):
    """Mean and covariance of the input Wigner function in ``(q1, p1, q2, p2)``."""
    if isinstance(spec, CoherentPair):
        z1, z2 = complex(spec.z1), complex(spec.z2)
        mean = SQRT2 * np.array([z1.real, z1.imag, z2.real, z2.imag])
        return mean, 0.5 * np.eye(4)
    if isinstance(spec, ThermalPair):
        g1, g2 = 2 * spec.nbar1 + 1, 2 * spec.nbar2 + 1
        return np.zeros(4), 0.5 * np.diag([g1, g1, g2, g2])
    if isinstance(spec, SqueezedPair):
        s1, s2 = math.exp(2 * spec.r1), math.exp(2 * spec.r2)
        return np.zeros(4), 0.5 * np.diag([s1, 1 / s1, s2, 1 / s2])
    if isinstance(spec, Tmsv):
        c, s = math.cosh(2 * spec.r), math.sinh(2 * spec.r)
        z = np.diag([1.0, -1.0])
        cov = 0.5 * np.block([[c * np.eye(2), s * z], [s * z, c * np.eye(2)]])
        return np.zeros(4), cov
    if isinstance(spec, VacuumPair):
        return np.zeros(4), 0.5 * np.eye(4)
    raise ContractError(f"no Gaussian moments for {spec!r}")


def wigner_analytic(spec, params, stage, point):
    """Closed-form Wigner function; ``point`` is a PhasePoint or ``(..., 4)`` array."""
    pts = _as_points(point)
    b1, b2 = _betas(pts)
    w_in = input_kernel(spec, b1, b2)
    if stage == "before":
        out = w_in
    elif stage == "after":
        out = ng_factor(spec, params, b1, b2) / normalization_closed(spec, params) * w_in
    else:
        raise ContractError(f"stage must be 'before' or 'after', got {stage!r}")
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# displaced-parity evaluation


def _check_region(beta, d, mode):
    if abs(beta) ** 2 > d / 4.0:
        raise RegionError(
            f"|beta{mode}|^2 = {abs(beta) ** 2:.3g} exceeds cutoff/4 = {d / 4:.3g}",
            required_cutoff=math.ceil(4 * abs(beta) ** 2),
        )


def _numeric_point(rho, b1, b2, coo):
    pi1 = displaced_parity(b1, rho.cutoff.d1)
    pi2 = displaced_parity(b2, rho.cutoff.d2)
    if rho.is_pure:
        psi = rho.ket
        val = np.sum(np.conj(psi) * (pi1 @ psi @ pi2.T))
    else:
        rows, cols, data = coo
        d2 = rho.cutoff.d2
        val = np.sum(data * pi1[cols // d2, rows // d2] * pi2[cols % d2, rows % d2])
    return PEAK * val


def wigner_numeric(rho, point, check_region=True):
    """Wigner function as the expectation of the product of displaced parities.

    Evaluates ``(4/pi^2) Tr[rho (D(2b1) P1) x (D(2b2) P2)]`` on the
    truncated state. Accepts a PhasePoint or a ``(..., 4)`` array.
    """
    pts = _as_points(point)
    flat = pts.reshape(-1, 4)
    coo = None
    if not rho.is_pure:
        m = rho.op.tocoo()
        coo = (m.row, m.col, m.data)
    out = np.empty(len(flat))
    for i, row in enumerate(flat):
        b1, b2 = _betas(row)
        if check_region:
            _check_region(b1, rho.cutoff.d1, 1)
            _check_region(b2, rho.cutoff.d2, 2)
        val = _numeric_point(rho, complex(b1), complex(b2), coo)
        if abs(val.imag) > IMAG_TOL:
            raise ContractError(f"Wigner value has imaginary part {val.imag:.3e}; state is not Hermitian")
        out[i] = val.real
    if pts.ndim == 1:
        return float(out[0])
    return out.reshape(pts.shape[:-1])


@dataclass
class WignerEvaluator:
    """Wigner function of one state, analytic or numeric.

    ``mode='numeric'`` builds the truncated state lazily unless ``rho`` is
    given.
    """

    spec: object
    params: DpaParams = field(default_factory=DpaParams)
    stage: str = "after"
    mode: str = "analytic"
    rho: Optional[object] = None
    cutoff: Optional[object] = None

    def __post_init__(self):
        if self.stage not in ("before", "after"):
            raise ContractError(f"stage must be 'before' or 'after', got {self.stage!r}")
        if self.mode not in ("analytic", "numeric"):
            raise ContractError(f"mode must be 'analytic' or 'numeric', got {self.mode!r}")
        if not isinstance(self.params, DpaParams):
            self.params = DpaParams(self.params)

    def state(self):
        if self.rho is None:
            rho = build_input(self.spec, self.cutoff)
            if self.stage == "after":
                rho = apply_dpa(rho, self.params)
            self.rho = rho
        return self.rho

    def __call__(self, points):
        if self.mode == "analytic":
            return wigner_analytic(self.spec, self.params, self.stage, points)
        return wigner_numeric(self.state(), points)


# --------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureConfig:
    """Tensor Gauss-Legendre settings for phase-space integrals.

    The box ``[-L, L]^4`` lives in whitened coordinates ``u`` where the
    input Gaussian is standard normal (``x = mean + chol(cov) u``), so ``L``
    counts standard deviations. ``None`` picks
    ``max(5, 3 + 2 sqrt(nbar_total + 1))``.
    """

    box_halfwidth: Optional[float] = None
    nodes_per_axis: int = 24
    max_doublings: int = 4
    tol_wln: float = 2e-3

    def __post_init__(self):
        if self.nodes_per_axis < 2 or self.nodes_per_axis % 2:
            raise ContractError("nodes_per_axis must be even and >= 2")
        if self.max_doublings < 1:
            raise ContractError("max_doublings must be >= 1")

    def halfwidth(self, nbar):
        floor = 3 + 2 * math.sqrt(nbar + 1)
        if self.box_halfwidth is None:
            return max(5.0, floor)
        if self.box_halfwidth < floor:
            raise ContractError(f"box half-width {self.box_halfwidth} is below {floor:.3f}")
        return float(self.box_halfwidth)


@dataclass(frozen=True)
class WlnResult:
    value: float
    integral: float
    nodes_per_axis: int
    halfwidth: float
    delta: float
    history: tuple


def gauss_legendre(n, halfwidth):
    x, w = np.polynomial.legendre.leggauss(n)
    return x * halfwidth, w * halfwidth


def _whitening(spec):
    mean, cov = gaussian_moments(spec)
    chol = np.linalg.cholesky(cov)
    return mean, chol, abs(np.linalg.det(chol))


def _affine_form(w, mean, chol):
    """Real 2x4 matrix ``B`` and offset ``c`` with ``w(mean + chol u) = B u + c`` (as (Re, Im))."""

    def at(x):
        b1, b2 = _betas(x)
        v = complex(w(b1, b2))
        return np.array([v.real, v.imag])

    c = at(mean)
    cols = [at(mean + chol[:, i]) - c for i in range(4)]
    return np.column_stack(cols), c


def _factorized_integral(spec, params, stage, n, halfwidth, absolute=True):
    """Tensor Gauss-Legendre integral of W over all four quadratures.

    In whitened coordinates rotated so that the non-Gaussian factor depends
    on the first two axes only, the 4D tensor rule factorizes exactly into
    a 2D rule times two 1D Gaussian sums. Returns the integral with respect
    to ``d^2beta1 d^2beta2``.
    """
    mean, chol, jac = _whitening(spec)
    b1, b2 = _betas(mean)
    peak = float(input_kernel(spec, b1, b2))
    x, wts = gauss_legendre(n, halfwidth)
    gauss = np.exp(-0.5 * x * x)
    side = float(np.dot(wts, gauss))
    v1, v2 = np.meshgrid(x, x, indexing="ij")
    w2 = np.outer(wts, wts)
    radial = np.exp(-0.5 * (v1 * v1 + v2 * v2))
    if stage == "before":
        core = radial
    else:
        k, form, k0 = ng_form(spec, params)
        b, c = _affine_form(form, mean, chol)
        # orthonormal basis whose first two vectors span the row space of b
        q, _ = np.linalg.qr(np.column_stack([b.T, np.eye(4)]))
        b_rot = b @ q[:, :2]
        re = b_rot[0, 0] * v1 + b_rot[0, 1] * v2 + c[0]
        im = b_rot[1, 0] * v1 + b_rot[1, 1] * v2 + c[1]
        core = (k * (re * re + im * im) - k0) / normalization_closed(spec, params) * radial
    if absolute:
        core = np.abs(core)
    total = np.sum(w2 * core) * side * side
    return float(total * peak * jac / 4.0)


def integrate_tensor(func, mean, chol, n, halfwidth, absolute=True, chunk=4096):
    """Plain 4D tensor Gauss-Legendre integral of ``func`` over whitened coordinates.

    ``func`` takes ``(m, 4)`` arrays of ``(q1, p1, q2, p2)``. Returns the
    integral with respect to ``d^2beta1 d^2beta2``. Cost is ``n^4``
    evaluations, so this is meant for small ``n`` cross-checks.
    """
    x, wts = gauss_legendre(n, halfwidth)
    grid = np.stack(np.meshgrid(x, x, x, x, indexing="ij"), axis=-1).reshape(-1, 4)
    weight = np.einsum("i,j,k,l->ijkl", wts, wts, wts, wts).reshape(-1)
    total = 0.0
    for start in range(0, len(grid), chunk):
        pts = mean + grid[start : start + chunk] @ chol.T
        vals = np.asarray(func(pts), dtype=float)
        if absolute:
            vals = np.abs(vals)
        total += float(np.dot(weight[start : start + chunk], vals))
    return total * abs(np.linalg.det(chol)) / 4.0


def phase_space_integral(evaluator, quad=None, nodes=None, absolute=True):
    """Integral of ``W`` (or ``|W|``) at one node count, no refinement."""
    quad = quad or QuadratureConfig()
    n = nodes or quad.nodes_per_axis
    halfwidth = quad.halfwidth(nbar_total(evaluator.spec))
    if evaluator.mode == "analytic":
        return _factorized_integral(evaluator.spec, evaluator.params, evaluator.stage, n, halfwidth, absolute)
    mean, chol, _ = _whitening(evaluator.spec)
    return integrate_tensor(evaluator, mean, chol, n, halfwidth, absolute)


def wln(evaluator, quad=None):
    """Wigner logarithmic negativity ``ln integral |W| d^2beta1 d^2beta2``.

    Doubles the node count from ``quad.nodes_per_axis`` until two
    successive estimates differ by less than ``quad.tol_wln``; raises
    :class:`ConvergenceError` after ``quad.max_doublings`` doublings.
    """
    quad = quad or QuadratureConfig()
    halfwidth = quad.halfwidth(nbar_total(evaluator.spec))
    n = quad.nodes_per_axis
    history = [(n, math.log(phase_space_integral(evaluator, quad, n)))]
    for _ in range(quad.max_doublings):
        n *= 2
        integral = phase_space_integral(evaluator, quad, n)
        history.append((n, math.log(integral)))
        delta = abs(history[-1][1] - history[-2][1])
        if delta < quad.tol_wln:
            return WlnResult(
                value=history[-1][1],
                integral=integral,
                nodes_per_axis=n,
                halfwidth=halfwidth,
                delta=delta,
                history=tuple(history),
            )
    raise ConvergenceError(
        f"WLN did not converge to {quad.tol_wln:g} within {quad.max_doublings} doublings",
        estimates=[h[1] for h in history[-2:]],
    )


# --------------------------------------------------------------------------
# sections

AXES = ("q1", "p1", "q2", "p2")


@dataclass(frozen=True)
class SectionGrid:
    """Values of W on a uniform 2D slice of phase space.

    ``values[i, j]`` is at ``(axis1[i], axis2[j])``.
    """

    plane: tuple
    fixed: dict
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray


def section_grid(evaluator, plane=("q1", "q2"), fixed=None, extent=4.0, resolution=161):
    """Evaluate W on a ``resolution x resolution`` grid over ``[-extent, extent]^2``."""
    if len(plane) != 2 or plane[0] == plane[1] or any(a not in AXES for a in plane):
        raise ContractError(f"plane must name two distinct axes from {AXES}, got {plane!r}")
    fixed = dict(fixed or {})
    for name in fixed:
        if name not in AXES or name in plane:
            raise ContractError(f"cannot fix axis {name!r} for plane {plane!r}")
    axis = np.linspace(-extent, extent, resolution)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.zeros(g1.shape + (4,))
    for i, name in enumerate(AXES):
        pts[..., i] = fixed.get(name, 0.0)
    pts[..., AXES.index(plane[0])] = g1
    pts[..., AXES.index(plane[1])] = g2
    values = np.asarray(evaluator(pts), dtype=float)
    return SectionGrid(
        plane=tuple(plane),
        fixed={a: float(fixed.get(a, 0.0)) for a in AXES if a not in plane},
        axis1=axis,
        axis2=axis.copy(),
        values=values,
    )
