import math

import numpy as np
import pytest

from dpa_lab.errors import ContractError, ConvergenceError, RegionError
from dpa_lab.fock import FockCutoff, PhasePoint
from dpa_lab.states import (
    CoherentPair,
    DpaParams,
    SqueezedPair,
    ThermalPair,
    Tmsv,
    VacuumPair,
    budget_to_spec,
    build_input,
    output_state,
)
from dpa_lab.wigner import (
    PEAK,
    QuadratureConfig,
    WignerEvaluator,
    gaussian_moments,
    integrate_tensor,
    ng_factor,
    phase_space_integral,
    section_grid,
    wigner_analytic,
    wigner_numeric,
    wln,
)

import oracles

ORIGIN = PhasePoint(0, 0, 0, 0)
SPECS = [CoherentPair(1.0, 0.5 + 0.3j), ThermalPair(1.0, 0.5), SqueezedPair(0.6, 0.3), Tmsv(0.7), VacuumPair()]


def _points(n, radius, seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(-radius, radius, size=(n, 4))


def _disc_points(n, radius, seed):
    """Points with |beta_j| <= radius in both modes."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(size=(n, 2)))
    a = rng.uniform(0, 2 * math.pi, size=(n, 2))
    b = r * np.exp(1j * a) * math.sqrt(2)
    return np.stack([b[:, 0].real, b[:, 0].imag, b[:, 1].real, b[:, 1].imag], axis=-1)


def test_vacuum_output_at_origin():
    assert wigner_analytic(VacuumPair(), DpaParams(0.3), "after", ORIGIN) == pytest.approx(-PEAK)
    assert PEAK == pytest.approx(0.405285, abs=1e-6)


def test_coherent_peak():
    z1, z2 = 0.8 - 0.2j, 1.1 + 0.4j
    p = PhasePoint.from_betas(z1, z2)
    assert wigner_analytic(CoherentPair(z1, z2), DpaParams(0), "before", p) == pytest.approx(PEAK, abs=1e-15)


@pytest.mark.parametrize("phi", [0.0, 1.0, math.pi])
def test_zero_amplitude_coherent_is_vacuum(phi):
    pts = _points(50, 3, 1)
    a = wigner_analytic(CoherentPair(0, 0), DpaParams(phi), "after", pts)
    b = wigner_analytic(VacuumPair(), DpaParams(phi), "after", pts)
    assert np.abs(a - b).max() < 1e-15


def test_numeric_vacuum_values():
    assert wigner_numeric(build_input(VacuumPair()), ORIGIN) == pytest.approx(PEAK, abs=1e-14)
    assert wigner_numeric(output_state(VacuumPair(), DpaParams(2.0)), ORIGIN) == pytest.approx(-PEAK, abs=1e-14)


def test_thermal_grid_cross_check():
    spec, params = ThermalPair(1, 1), DpaParams(math.pi / 2)
    rho = output_state(spec, params)
    axis = np.linspace(-1.5, 1.5, 5)
    pts = np.array([[q1, p1, 0.3, -0.2] for q1 in axis for p1 in axis])
    assert np.abs(wigner_analytic(spec, params, "after", pts) - wigner_numeric(rho, pts)).max() < 1e-8


@pytest.mark.parametrize("stage", ["before", "after"])
@pytest.mark.parametrize("spec", SPECS)
def test_analytic_matches_numeric(spec, stage):
    params = DpaParams(0.9)
    ev_n = WignerEvaluator(spec, params, stage, "numeric")
    rho = ev_n.state()
    pts = _disc_points(30, min(math.sqrt(min(rho.cutoff.d1, rho.cutoff.d2) / 4), 2.5), 3)
    diff = np.abs(WignerEvaluator(spec, params, stage)(pts) - ev_n(pts))
    assert diff.max() < 1e-7


@pytest.mark.parametrize("spec", SPECS)
def test_bounded_by_peak(spec):
    vals = wigner_analytic(spec, DpaParams(2.4), "after", _points(400, 3, 4))
    assert np.all(np.abs(vals) <= PEAK + 1e-9)


@pytest.mark.parametrize("spec", SPECS)
@pytest.mark.parametrize("phi", [0.0, math.pi / 2, math.pi])
def test_sign_follows_non_gaussian_factor(spec, phi):
    pts = _points(300, 3, 5)
    w = wigner_analytic(spec, DpaParams(phi), "after", pts)
    b1 = (pts[:, 0] + 1j * pts[:, 1]) / math.sqrt(2)
    b2 = (pts[:, 2] + 1j * pts[:, 3]) / math.sqrt(2)
    t = ng_factor(spec, DpaParams(phi), b1, b2)
    mask = np.abs(w) > 1e-300
    assert np.all(np.sign(w[mask]) == np.sign(t[mask]))


def test_region_guard():
    rho = build_input(VacuumPair())
    d = rho.cutoff.d1
    far = PhasePoint.from_betas(complex(math.sqrt(d / 4) + 0.1, 0), 0)
    with pytest.raises(RegionError) as info:
        wigner_numeric(rho, far)
    assert info.value.required_cutoff > d


def test_displaced_parity_against_expm_for_single_mode():
    # one-mode check of the numeric path: W(beta) = (2/pi) <D P D^+> via a padded exponential
    d, beta = 12, 0.4 - 0.3j
    rho = output_state(CoherentPair(0.5, 0.0), DpaParams(0.0))
    big = oracles.displacement_expm(beta, d + 40, pad=60)
    parity = np.diag((-1.0) ** np.arange(d + 40))
    pi1 = (big @ parity @ big.conj().T)[: rho.cutoff.d1, : rho.cutoff.d1]
    ket = rho.ket
    want = (4 / math.pi**2) * np.vdot(ket, pi1 @ ket @ np.diag((-1.0) ** np.arange(rho.cutoff.d2))).real
    got = wigner_numeric(rho, PhasePoint.from_betas(beta, 0))
    assert got == pytest.approx(want, abs=1e-10)


@pytest.mark.parametrize("spec", SPECS[:4])
def test_gaussian_moments_match_kernel(spec):
    mean, cov = gaussian_moments(spec)
    x = mean + np.array([0.3, -0.2, 0.1, 0.4])
    d = x - mean
    gauss = math.exp(-0.5 * d @ np.linalg.solve(cov, d)) / (math.sqrt(np.linalg.det(cov)) * (2 * math.pi) ** 2)
    # density in (q, p) coordinates is W / 4 with W normalized against d^2beta = dq dp / 2
    assert wigner_analytic(spec, DpaParams(0), "before", x) / 4 == pytest.approx(gauss, rel=1e-12)


def test_wln_vacuum_after():
    res = wln(WignerEvaluator(VacuumPair(), DpaParams(0.0)))
    assert res.value == pytest.approx(oracles.wln_vacuum_after(), abs=5e-3)
    assert res.value == pytest.approx(0.3551, abs=5e-3)
    assert res.delta < 2e-3


@pytest.mark.parametrize("spec", SPECS[:4])
def test_wln_of_gaussian_input_is_zero(spec):
    assert abs(wln(WignerEvaluator(spec, DpaParams(0), "before")).value) < 2e-3


@pytest.mark.parametrize("stage", ["before", "after"])
@pytest.mark.parametrize("spec", SPECS)
def test_integral_of_w_is_one(spec, stage):
    ev = WignerEvaluator(spec, DpaParams(1.2), stage)
    assert phase_space_integral(ev, nodes=96, absolute=False) == pytest.approx(1.0, abs=2e-3)


def test_tensor_rule_agrees_with_factorized_rule():
    ev = WignerEvaluator(CoherentPair(0.6, 0.2), DpaParams(2.0))
    mean, cov = gaussian_moments(ev.spec)
    # different frames give different rules, so compare converged values
    brute = integrate_tensor(ev, mean, np.linalg.cholesky(cov), 48, 5.5)
    fast = phase_space_integral(ev, QuadratureConfig(box_halfwidth=5.5), nodes=384)
    assert brute == pytest.approx(fast, rel=1e-4)
    smooth = integrate_tensor(ev, mean, np.linalg.cholesky(cov), 24, 5.5, absolute=False)
    assert smooth == pytest.approx(1.0, abs=1e-5)


def test_numeric_evaluator_integrates_to_one():
    # same coarse rule on both paths; the box corners need |beta|^2 = 12.5
    params = DpaParams(0.5)
    ev = WignerEvaluator(VacuumPair(), params, "after", "numeric", cutoff=FockCutoff(52, 52))
    mean, cov = gaussian_moments(VacuumPair())
    chol = np.linalg.cholesky(cov)
    numeric = integrate_tensor(ev, mean, chol, 8, 5.0, absolute=False)
    analytic = integrate_tensor(WignerEvaluator(VacuumPair(), params), mean, chol, 8, 5.0, absolute=False)
    assert numeric == pytest.approx(analytic, abs=1e-9)
    fine = integrate_tensor(WignerEvaluator(VacuumPair(), params), mean, chol, 16, 5.0, absolute=False)
    assert fine == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("nt", [1.0, 2.0, 3.0])
def test_wln_coherent_symmetric_at_pi(nt):
    assert wln(WignerEvaluator(budget_to_spec("cc", nt), DpaParams(math.pi))).value == pytest.approx(0.35, abs=0.01)


def test_wln_coherent_increasing_in_phase():
    spec = budget_to_spec("cc", 2.0)
    vals = [wln(WignerEvaluator(spec, DpaParams(phi))).value for phi in np.linspace(0, math.pi, 9)]
    assert np.all(np.diff(vals) > 0)


def test_wln_convergence_failure_reports_estimates():
    quad = QuadratureConfig(nodes_per_axis=2, max_doublings=1, tol_wln=1e-12)
    with pytest.raises(ConvergenceError) as info:
        wln(WignerEvaluator(budget_to_spec("cc", 3.0), DpaParams(math.pi)), quad)
    assert len(info.value.estimates) == 2


def test_quadrature_config_validation():
    with pytest.raises(ContractError):
        QuadratureConfig(nodes_per_axis=7)
    with pytest.raises(ContractError):
        QuadratureConfig(box_halfwidth=3.0).halfwidth(4.0)
    assert QuadratureConfig().halfwidth(0.0) == 5.0
    assert QuadratureConfig().halfwidth(8.0) == pytest.approx(9.0)


def test_vacuum_section_minimum_at_origin():
    grid = section_grid(WignerEvaluator(VacuumPair(), DpaParams(0)), resolution=41)
    i, j = np.unravel_index(np.argmin(grid.values), grid.values.shape)
    assert grid.axis1[i] == 0 and grid.axis2[j] == 0
    assert grid.values[i, j] == pytest.approx(-PEAK)
    assert np.allclose(np.diff(grid.axis1), grid.axis1[1] - grid.axis1[0])


def test_tmsv_section_non_negative():
    grid = section_grid(WignerEvaluator(Tmsv(0.9), DpaParams(0), "before"), resolution=41)
    assert grid.values.min() >= 0


def test_coherent_section_has_negative_region():
    grid = section_grid(WignerEvaluator(CoherentPair(math.sqrt(1.5), math.sqrt(1.5)), DpaParams(math.pi)))
    assert grid.values.min() < -0.01
    assert grid.values.shape == (161, 161)
    assert np.abs(grid.values).max() <= PEAK + 1e-9


def test_section_plane_validation():
    ev = WignerEvaluator(VacuumPair())
    with pytest.raises(ContractError):
        section_grid(ev, plane=("q1", "q1"))
    with pytest.raises(ContractError):
        section_grid(ev, plane=("q1", "q2"), fixed={"q1": 1.0})
    g = section_grid(ev, plane=("p1", "p2"), fixed={"q1": 0.5}, resolution=5)
    assert g.fixed == {"q1": 0.5, "q2": 0.0}


def test_evaluator_validation():
    with pytest.raises(ContractError):
        WignerEvaluator(VacuumPair(), stage="middle")
    with pytest.raises(ContractError):
        WignerEvaluator(VacuumPair(), mode="exact")
