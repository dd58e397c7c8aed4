import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcswork import evolve, oracles, stats
from fcswork.errors import NumericalError, PreconditionError
from fcswork.model import build_driven_qubit, build_pulsed_qubit, build_undriven_qubit


def test_u_grid():
    u = stats.u_grid(8, 0.5)
    assert u[0] == -2 * math.pi and math.isclose(u[1] - u[0], math.pi / 2)
    with pytest.raises(ValueError):
        stats.u_grid(6, 1.0)


@pytest.mark.parametrize("mean", [0.3, 2.0, 6.5])
def test_inverts_poisson_generating_function(mean):
    u = stats.u_grid(64, 1.0)
    dist = stats.invert_distribution(np.exp(mean * (np.exp(1j * u) - 1)), 1.0)
    for n in range(10):
        assert abs(dist.prob(n) - oracles.poisson_pmf(n, mean)) < 1e-12
    assert math.isclose(dist.mean, mean, rel_tol=1e-10)
    assert math.isclose(dist.variance, mean, rel_tol=1e-10)


def test_inversion_rejects_wrong_grid():
    with pytest.raises(ValueError):
        stats.invert_distribution(np.ones(8), 1.0, u=np.linspace(0, 1, 8))


def test_inversion_rejects_non_distribution():
    u = stats.u_grid(16, 1.0)
    with pytest.raises(NumericalError):
        stats.invert_distribution(2 * np.exp(1j * u), 1.0)  # sums to 2
    with pytest.raises(NumericalError):
        stats.invert_distribution(np.cos(u) - 0.5, 1.0)  # negative weight at 0


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 2.0))
def test_cumulants_of_gaussian(mu, sigma2):
    k1, k2 = stats.cumulants_from_gf(lambda u: np.exp(1j * u * mu - sigma2 * u**2 / 2))
    assert abs(k1 - mu) < 1e-9 and abs(k2 - sigma2) < 1e-9


def test_cumulants_flag_unstable_differences():
    with pytest.raises(NumericalError):
        stats.cumulants_from_gf(lambda u: np.exp(1j * 300 * np.sin(40 * u)))


def test_moment_ratio():
    assert math.isclose(stats.moment_ratio(2.0, 4.0, math.inf, 1.0), 2.0)
    assert math.isclose(stats.moment_ratio(2.0, 4.0, 1.0, 2.0), math.tanh(1.0))


def test_zero_drive_work_is_a_delta():
    m = build_driven_qubit(1.0, 0.0, 1.0, 0.05, 2.0)
    dist = stats.work_distribution(m, 10.0, n=16)
    assert abs(dist.prob(0.0) - 1) < 1e-10


def test_heat_moments_agree_with_distribution():
    m = build_driven_qubit(1.0, 0.2, 1.0, 0.05, 1.0)
    t = 3 * 2 * math.pi
    dist = stats.heat_distribution(m, t)
    mom = stats.heat_moments(m, [t])[0]
    assert abs(dist.mean - mom.mean) < 1e-7
    assert abs(dist.variance - mom.variance) < 1e-7


def test_work_distribution_mean_within_binning_error():
    m = build_driven_qubit(1.0, 0.2, 1.0, 0.05, 1.0)
    t = 3 * 2 * math.pi
    mom = stats.work_moments(m, [t])[0]
    dist = stats.work_distribution(m, t)
    # level shifts e_a(t) - e_b(0) are moved to the nearest lattice point
    e0, et = np.linalg.eigvalsh(m.hamiltonian_at(0.0)), np.linalg.eigvalsh(m.hamiltonian_at(t))
    shifts = np.subtract.outer(et, e0)
    assert abs(dist.mean - mom.mean) <= np.abs(shifts - np.rint(shifts)).max()


def test_work_distribution_mean_exact_on_lattice():
    # without a drive at t=0 or t the levels sit on the lattice
    t = 2.5 * 2 * math.pi
    m = build_pulsed_qubit(1.0, 0.2, 1.0, 0.05, 1.0, t_stop=2 * 2 * math.pi)
    mom = stats.work_moments(m, [t])[0]
    dist = stats.work_distribution(m, t)
    assert abs(dist.mean - mom.mean) < 1e-7
    assert abs(dist.variance - mom.variance) < 1e-7


def test_undriven_heat_variance_matches_closed_form():
    m = build_undriven_qubit(1.0, 1.0, 1.5)
    for t in (0.5, 3.0):
        mom = stats.heat_moments(m, [t])[0]
        assert abs(mom.mean) < 1e-9
        assert abs(mom.variance - oracles.undriven_qubit_heat_variance(t, 1.0, 1.0, 1.5)) < 1e-8


def test_crooks_on_exact_pair():
    beta = 0.8
    w = np.arange(-4, 5)
    p = np.exp(-((w - 1.0) ** 2) / 4 + beta * w / 2)
    p /= p.sum()
    fwd = stats.EnergyDistribution(1.0, -4, p)
    rev = stats.EnergyDistribution(1.0, -4, (p * np.exp(-beta * w))[::-1] / np.sum(p * np.exp(-beta * w)))
    # Jarzynski holds for this p by construction only up to normalization
    norm = stats.jarzynski_sum(w, p, beta)
    assert stats.check_crooks(fwd, rev, beta) == pytest.approx(abs(math.log(norm)), abs=1e-12)


def test_crooks_deviation_map():
    p = stats.EnergyDistribution(1.0, -1, np.array([0.25, 0.5, 0.25]))
    devs = stats.crooks_deviations(p, p, 0.0)
    assert set(devs) == {-1.0, 0.0, 1.0} and all(abs(v) < 1e-15 for v in devs.values())


def test_jarzynski_preconditions():
    with pytest.raises(PreconditionError):
        stats.check_jarzynski(build_driven_qubit(1.0, 0.1, 1.0, 0.1, math.inf), 1.0)


def test_symmetry_preconditions():
    m = build_driven_qubit(1.0, 0.1, 1.0, 0.1, 1.0)
    with pytest.raises(PreconditionError):
        stats.check_symmetry(m, 1.0, [0.1])


def test_symmetry_over_full_period():
    m = build_driven_qubit(1.0, 0.3, 1.0, 0.05, 1.0)
    us = np.linspace(-math.pi, math.pi, 6)
    assert stats.check_symmetry(m, 2 * math.pi, us) < 1e-8


def test_jarzynski_holds_for_work_not_heat():
    m = build_driven_qubit(1.0, 0.3, 1.0, 0.05, 1.0)
    assert stats.check_jarzynski(m, 2 * math.pi) < 1e-8
    assert stats.check_jarzynski(m, 2 * math.pi, kind="heat") > 1e-3


def test_heat_gf_at_zero_time_is_one():
    m = build_driven_qubit(1.0, 0.3, 1.0, 0.05, 1.0)
    assert np.allclose(evolve.generating_function_heat(m, [0.5, 1j], 0.0).value, 1)
