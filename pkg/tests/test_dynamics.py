from pathlib import Path

import numpy as np
import pytest

from euler3body import (CollisionError, ConfigurationState, DomainError, EnergyParams,
                        FourierLoop, MassTriple, OrbitTimeSeries, circle_loop, closure_error,
                        collinearity_drift, compare_orbits, eom_residual_spectral,
                        integrate, random_loop, read_orbit, series_from_loop)
from euler3body.config import ratio_defect
from euler3body.dynamics import initial_state, reverse, separation_variation
from euler3body.functionals import total_energy

R_KEPLER = 10 ** (1 / 3)


def rotation(axis, angle):
    axis = np.asarray(axis, float) / np.linalg.norm(axis)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def test_eom_residual_circular_orbit(equal, circular_orbit):
    m, g = equal
    assert circular_orbit.T == pytest.approx(1.98692, abs=1e-5)
    newton, perturbed = eom_residual_spectral(circular_orbit, g, m, EnergyParams(-2.5))
    assert newton <= 1e-8
    assert perturbed == newton


def test_eom_residual_wrong_frequency(equal, circular_orbit):
    m, g = equal
    newton, _ = eom_residual_spectral(circular_orbit.with_period(circular_orbit.T / 2), g, m,
                                      EnergyParams(-2.5))
    assert newton >= 0.5


def test_eom_residual_perturbed_differs(equal, circular_orbit):
    m, g = equal
    newton, perturbed = eom_residual_spectral(circular_orbit, g, m, EnergyParams(-2.5, 1e-2))
    assert perturbed > 1e-3 and newton <= 1e-8


def test_integrate_circular_orbit_one_period(equal, circular_orbit):
    m, g = equal
    start = initial_state(circular_orbit, g, m)
    series = integrate(start, m, None, 4096, circular_orbit.T)
    assert len(series) == 4097 and series.times[-1] == circular_orbit.T
    y0, y1 = start.phase_vector(), series.states[-1].phase_vector()
    assert np.linalg.norm(y1 - y0) <= 1e-8 * np.linalg.norm(y0)
    energies = [total_energy(s, m, EnergyParams(0.0)) for s in series.states]
    assert max(energies) - min(energies) <= 1e-8
    assert collinearity_drift(series, 0.5) <= 1e-8


def test_closure_step_halving_is_fourth_order(equal, circular_orbit):
    m, g = equal
    errs = [closure_error(circular_orbit, g, m, None, n) for n in (256, 512, 1024)]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    for r in ratios:
        assert 12 < r < 20


def test_closure_error_of_circular_orbit(equal, circular_orbit):
    m, g = equal
    assert closure_error(circular_orbit, g, m, None, 4096) <= 1e-8


def test_closure_error_of_non_solution(equal):
    m, g = equal
    loop = circle_loop(1.0, K=3)
    loop = loop.with_flat(loop.flat + random_loop(3, 1, 0.3).flat)
    assert closure_error(loop, g, m, None, 1024) > 0.1


def test_rest_state_falls_along_the_line():
    m = MassTriple(1, 1, 1)
    start = ConfigurationState([[-1, 0, 0], [1, 0, 0], [0, 0, 0]])
    series = integrate(start, m, None, 100, 0.2)
    q = np.array([s.positions for s in series.states])
    assert np.all(q[..., 1:] == 0)
    assert q[-1, 0, 0] > -1 and q[-1, 1, 0] < 1


def test_collision_aborts():
    m = MassTriple(1, 1, 1)
    start = ConfigurationState([[-1, 0, 0], [1, 0, 0], [0, 0, 0]])
    with pytest.raises(CollisionError):
        integrate(start, m, None, 2000, 10.0)


def test_integrate_validation():
    start = ConfigurationState(np.eye(3))
    with pytest.raises(DomainError):
        integrate(start, MassTriple(1, 1, 1), None, 0, 1.0)
    with pytest.raises(DomainError):
        integrate(start, MassTriple(1, 1, 1), None, 10, -1.0)


def test_time_reversal(m123):
    m, g = m123
    w = np.sqrt(g.kepler_constant)
    loop = circle_loop(1.0, T=2 * np.pi / w)
    start = initial_state(loop, g, m)
    there = integrate(start, m, None, 2048, loop.T).states[-1]
    back = integrate(reverse(there), m, None, 2048, loop.T).states[-1]
    y0 = start.phase_vector()
    assert np.linalg.norm(reverse(back).phase_vector() - y0) <= 1e-10 * np.linalg.norm(y0)


def test_rotational_equivariance(m123):
    m, g = m123
    loop = circle_loop(1.0, T=2 * np.pi / np.sqrt(g.kepler_constant))
    loop = loop.with_flat(loop.flat * 1.0)
    start = initial_state(loop, g, m)
    Q = rotation([1, 2, 3], 0.7)
    rotated = ConfigurationState(start.positions @ Q.T, start.velocities @ Q.T)
    a = integrate(start, m, EnergyParams(-1.0, 1e-2), 600, 3.0)
    b = integrate(rotated, m, EnergyParams(-1.0, 1e-2), 600, 3.0)
    for n in (100, 350, 600):
        np.testing.assert_allclose(b.states[n].positions, a.states[n].positions @ Q.T, atol=1e-10)
        np.testing.assert_allclose(b.states[n].velocities, a.states[n].velocities @ Q.T, atol=1e-10)


def test_off_ratio_start_drifts(equal, circular_orbit):
    m, g = equal
    start = initial_state(circular_orbit, g, m)
    q = start.positions.copy()
    q[2] = q[0] + 0.4995 * (q[1] - q[0])
    q -= m.array @ q / m.M
    series = integrate(ConfigurationState(q, start.velocities), m, None, 2048, circular_orbit.T)
    assert ratio_defect(series.states[0], 0.5) < 1e-3
    assert collinearity_drift(series, 0.5) > 1e-3


def test_single_instant_drift_is_ratio_defect():
    st_ = ConfigurationState([[0, 0, 0], [1, 0, 0], [0.3, 0.1, 0]])
    series = OrbitTimeSeries([0.0], [st_])
    assert collinearity_drift(series, 0.5) == ratio_defect(st_, 0.5)


def test_time_series_validation():
    st_ = ConfigurationState(np.eye(3))
    with pytest.raises(DomainError):
        OrbitTimeSeries([0.0, 0.0], [st_, st_])
    with pytest.raises(DomainError):
        OrbitTimeSeries([1.0], [st_])
    with pytest.raises(DomainError):
        OrbitTimeSeries([0.0, 1.0], [st_])
    assert len(OrbitTimeSeries([], [])) == 0


def test_spectral_series_is_collinear_and_central(m123):
    m, g = m123
    series = series_from_loop(random_loop(4, 9), g, m, 64)
    assert collinearity_drift(series, g.lambda0) <= 1e-12
    assert series.phase_array().shape == (64, 18)


def test_compare_critical_circle(equal):
    m, g = equal
    rep = compare_orbits(circle_loop(R_KEPLER, K=16), g, m)
    assert abs(rep.action_gap_f1) <= 1e-12 * rep.kepler_bound
    assert rep.separation_variation <= 1e-12
    assert rep.is_kepler_minimizer_like


def test_compare_eccentric_loop(equal):
    m, g = equal
    ellipse = FourierLoop.from_harmonics(2 * np.pi, {1: ((1.1 * R_KEPLER, 0, 0),
                                                         (0, R_KEPLER / 1.1, 0))})
    rep = compare_orbits(ellipse, g, m)
    assert 0 < rep.action_gap_f1 < 0.01 * rep.kepler_bound
    assert rep.separation_variation > 0.1
    assert not rep.is_kepler_minimizer_like


def test_separation_variation_zero_loop():
    with pytest.raises(DomainError):
        separation_variation(circle_loop().scaled(0.0))


def circle_gap_closed_form(eps, s=5.0, a=0.5, p=9.0, h=-1.25):
    """f1 gap to the Kepler bound of the rescaled critical circle, equal masses.

    The circle has radius -s/(2h) at period 2 pi; its virial frequency is
    w^2 = (s/R - 2 (eps/h) p / R^2) / (a R^2), and on a circle traversed in
    time 2 pi/w, f1 = T (w^2 R^2 / 2 + C / R) with C = s/a.
    """
    C, R = s / a, -s / (2 * h)
    w2 = (s / R - 2 * (eps / h) * p / R**2) / (a * R**2)
    T = 2 * np.pi / np.sqrt(w2)
    return T * (w2 * R**2 / 2 + C / R) - 1.5 * (2 * np.pi) ** (2 / 3) * C ** (2 / 3) * T ** (1 / 3)


@pytest.mark.parametrize("eps,name", [(1e-2, "saddle.eps0.01.json"), (1e-3, "saddle.eps0.001.json")])
def test_saddle_gap_matches_circle_closed_form(eps, name):
    record = read_orbit(Path(__file__).parent / "data" / name)
    report = compare_orbits(record.loop, record.geometry, record.masses)
    assert report.action_gap_f1 == pytest.approx(circle_gap_closed_form(eps), rel=1e-3)


def test_saddle_gap_scales_like_eps_squared():
    ratio = circle_gap_closed_form(1e-2) / circle_gap_closed_form(1e-3)
    assert ratio == pytest.approx(100, rel=0.02)
    # the distinction threshold 1e-6 A (about 4.2e-5) lies between the two
    assert circle_gap_closed_form(1e-3) < 4.2e-5 < circle_gap_closed_form(1e-2)
