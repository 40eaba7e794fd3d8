import math

import numpy as np
import pytest

from gnheat import MaterialParams, Profile, solve
from gnheat.diagnostics import (
    convergence_study,
    dispersion_roots,
    fit_damped_oscillation,
    fitted_order,
    measure_decay_rate,
    measure_frequency,
    measure_mode,
    mode_index,
    oracle,
)
from gnheat.errors import ConfigurationError, InsufficientSignalError
from gnheat.solvers import Budgets, Model, Trajectory

from conftest import periodic_grid, sine_scenario


def synthetic(theta_of_t_x, times, n=64):
    grid = periodic_grid(n)
    th = np.array([theta_of_t_x(t, grid.x) for t in times])
    z = np.zeros_like(th)
    zeros = np.zeros(len(times))
    return Trajectory(Model.CLASSICAL, grid, times[1] - times[0], len(times) - 1, times, th, z, z, z, z,
                      Budgets(zeros, zeros, zeros, zeros, zeros))


def test_dispersion_type2_limit():
    r = dispersion_roots(MaterialParams(kappa_star=4.0), 1.0)
    assert r.roots == (2j, -2j)
    assert r.damping == 0.0 and r.frequency == 2.0


def test_dispersion_fourier_limit():
    r = dispersion_roots(MaterialParams(kappa=1.0), 1.0)
    assert sorted(z.real for z in r.roots) == [-1.0, 0.0]
    assert all(z.imag == 0 for z in r.roots)


def test_dispersion_type3_values():
    r = dispersion_roots(MaterialParams(kappa=0.1, kappa_star=1.0), 1.0)
    oracle_roots = np.roots([1.0, 0.1, 1.0])  # independent polynomial root finder
    assert r.roots[0].real == -0.05
    assert r.roots[0].imag == pytest.approx(math.sqrt(1 - 0.0025), rel=1e-15)
    np.testing.assert_allclose(sorted(r.roots, key=lambda z: z.imag), sorted(oracle_roots, key=lambda z: z.imag))


@pytest.mark.parametrize("kappa, ks, k", [(0.1, 1.0, 1.0), (3.0, 0.5, 2.0), (1e-8, 10.0, 7.0), (5.0, 1e-6, 0.3)])
def test_dispersion_residual(kappa, ks, k):
    assert dispersion_roots(MaterialParams(lam=0.7, kappa=kappa, kappa_star=ks), k).residual() <= 1e-12


def test_dispersion_continuity_as_kappa_vanishes():
    p = MaterialParams(lam=2.0, kappa_star=3.0)
    target = 1.5 * math.sqrt(3.0 / 2.0)
    prev = None
    for kappa in [1.0, 0.1, 0.01, 1e-3, 1e-5]:
        r = dispersion_roots(p.replace(kappa=kappa), 1.5)
        gap = abs(r.damping) + abs(r.frequency - target)
        if prev is not None:
            assert gap < prev
        prev = gap
    assert prev < 1e-5


def test_dispersion_rejects_zero_wavenumber():
    with pytest.raises(ValueError):
        dispersion_roots(MaterialParams(), 0.0)


def test_decay_rate_exact_exponential():
    times = np.linspace(0, 2, 101)
    tr = synthetic(lambda t, x: 1.0 + 0.1 * math.exp(-0.7 * t) * np.sin(2 * x + 0.3), times)
    assert measure_decay_rate(tr, 2.0) == pytest.approx(-0.7, abs=1e-10)


def test_decay_rate_damped_standing_wave():
    times = np.linspace(0, 30, 1501)
    tr = synthetic(lambda t, x: 1.0 + 0.1 * math.exp(-0.05 * t) * math.cos(0.9 * t + 0.4) * np.sin(x), times)
    fit = measure_mode(tr, 1.0)
    assert fit.oscillating
    assert fit.rate == pytest.approx(-0.05, abs=1e-9)
    assert fit.frequency == pytest.approx(0.9, abs=1e-9)


def test_decay_rate_travelling_wave():
    times = np.linspace(0, 20, 801)
    tr = synthetic(lambda t, x: 2.0 + 0.1 * math.exp(-0.02 * t) * np.sin(x - 1.3 * t), times)
    fit = measure_mode(tr, 1.0)
    assert fit.rate == pytest.approx(-0.02, abs=1e-8)
    assert fit.frequency == pytest.approx(1.3, abs=1e-8)


def test_decay_rate_needs_signal():
    tr = synthetic(lambda t, x: np.ones_like(x), np.linspace(0, 1, 20))
    with pytest.raises(InsufficientSignalError):
        measure_decay_rate(tr, 1.0)


def test_mode_index_validation():
    g = periodic_grid(64)
    assert mode_index(g, 3.0) == 3
    with pytest.raises(ValueError):
        mode_index(g, 1.5)


def test_frequency_from_zero_crossings():
    times = np.linspace(0, 10, 2001)
    tr = synthetic(lambda t, x: 1.0 + 0.1 * math.sin(2.0 * t) * np.sin(x), times)
    assert measure_frequency(tr, 16) == pytest.approx(2.0, rel=1e-5)


def test_frequency_of_constant_signal_is_insufficient():
    tr = synthetic(lambda t, x: np.ones_like(x), np.linspace(0, 1, 20))
    with pytest.raises(InsufficientSignalError):
        measure_frequency(tr, 0)


def test_frequency_needs_five_crossings():
    times = np.linspace(0, 1.5, 200)
    tr = synthetic(lambda t, x: 1.0 + 0.1 * math.sin(2 * math.pi * t) * np.sin(x), times)
    with pytest.raises(InsufficientSignalError, match="zero crossings"):
        measure_frequency(tr, 16)


def test_fit_damped_oscillation_recovers_parameters():
    t = np.linspace(0, 40, 4001)
    a = np.exp(-0.03 * t) * (0.4 * np.cos(1.7 * t) - 0.2 * np.sin(1.7 * t))
    g, w = fit_damped_oscillation(t, a, 1.6, 0.0)
    assert (g, w) == (pytest.approx(-0.03, abs=1e-10), pytest.approx(1.7, abs=1e-10))


def test_type2_frequency_from_solver():
    sc = sine_scenario("TypeII_Alpha", n=128, t_end=20.0, stride=4, kappa_star=4.0)
    tr = solve(sc)
    assert measure_frequency(tr, 32) == pytest.approx(2.0, rel=5e-3)
    assert measure_decay_rate(tr, 1.0) == pytest.approx(0.0, abs=1e-3)


def test_type3_kappa_zero_matches_type2_frequency():
    a = solve(sine_scenario("TypeII_Alpha", n=128, t_end=20.0, stride=4, kappa_star=4.0))
    b = solve(sine_scenario("TypeIII_Linearized", n=128, t_end=20.0, stride=4, kappa_star=4.0))
    assert measure_frequency(b, 32) == pytest.approx(measure_frequency(a, 32), rel=5e-3)


def test_oracle_and_convergence_zero_perturbation():
    sc = sine_scenario("Classical", n=32, t_end=0.1, amplitude=0.0, kappa=1.0)
    table = convergence_study(sc, levels=2)
    assert table.error == (0.0, 0.0)
    assert math.isnan(table.order)


def test_oracle_requires_supported_setup():
    with pytest.raises(ConfigurationError):
        oracle(sine_scenario("TypeIII_Linearized", n=32, kappa_star=1.0), 1.0)
    sc = sine_scenario("Classical", n=32, kappa=1.0).with_changes(theta_init=Profile("gaussian", offset=1.0))
    with pytest.raises(ConfigurationError):
        convergence_study(sc, 2)


def test_fitted_order():
    dx = np.array([0.1, 0.05, 0.025])
    assert fitted_order(dx, 3 * dx**2) == pytest.approx(2.0)
