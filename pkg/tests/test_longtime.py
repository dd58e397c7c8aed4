import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcswork import longtime, oracles
from fcswork.errors import NumericalError
from fcswork.model import (
    build_coupled_qubits,
    build_harmonic_oscillator,
    build_rwa_qubit,
    build_three_level,
    build_undriven_qubit,
)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-3.0, 3.0), st.floats(0.2, 3.0))
def test_rwa_fano_matches_closed_form(omega, delta, gamma):
    cs = longtime.cumulant_expansion(build_rwa_qubit(omega * gamma, delta * gamma, gamma))
    assert math.isclose(cs.fano, oracles.qubit_fano(omega * gamma, delta * gamma, gamma), rel_tol=1e-8)


@pytest.mark.parametrize("builder", [
    lambda: build_rwa_qubit(0.7, 0.4, 1.0, nu=2.0),
    lambda: build_coupled_qubits(3.0, 12.0, 1.0),
    lambda: build_three_level(0.6, 1.0),
])
def test_perturbation_theory_matches_eigenvalue_differences(builder):
    m = builder()
    cs = longtime.cumulant_expansion(m)
    mean, var = longtime.eigenvalue_cumulants(m)
    assert math.isclose(cs.total_mean, mean, rel_tol=1e-7)
    assert math.isclose(cs.total_variance, var, rel_tol=1e-7)


def test_single_tag_cumulants_from_eigenvalue():
    m = build_coupled_qubits(3.0, 12.0, 1.0)
    cs = longtime.cumulant_expansion(m)
    mean, var = longtime.eigenvalue_cumulants(m, fields=lambda x: [x, 0.0])
    assert math.isclose(cs.lambda1, mean, rel_tol=1e-7)
    assert math.isclose(cs.lambda2, var, rel_tol=1e-7)


def test_coupled_qubit_regression_values():
    cs = longtime.cumulant_expansion(build_coupled_qubits(5.0, 40.0, 1.0))
    assert cs.fano == pytest.approx(0.930174314, rel=1e-8)
    assert cs.fano_single == pytest.approx(0.965163078, rel=1e-8)
    assert cs.lambda12 < 0
    assert cs.c12(2.0) == pytest.approx(2 * cs.lambda12)


def test_symmetric_pair_has_equal_currents():
    cs = longtime.cumulant_expansion(build_coupled_qubits(2.0, 3.0, 1.0))
    assert np.isclose(cs.mean_rates[0], cs.mean_rates[1])
    assert np.allclose(cs.cov_rates, cs.cov_rates.T)


def test_oscillator_is_poissonian():
    m = build_harmonic_oscillator(1.0, 0.1, 1.0, 1.0, rotating_frame=True)
    cs = longtime.cumulant_expansion(m)
    assert cs.fano == pytest.approx(1.0, abs=1e-9)
    alpha2 = abs(oracles.ho_alpha(1.0, 0.1, 1.0, 1.0)) ** 2
    assert cs.lambda1 == pytest.approx(alpha2, rel=1e-9)


def test_equilibrium_heat_stays_bounded():
    # undriven: net heat is bounded by the level spacing, so both rates vanish
    cs = longtime.cumulant_expansion(build_undriven_qubit(1.0, 1.0, 1.0))
    assert abs(cs.lambda1) < 1e-12 and abs(cs.lambda2) < 1e-12


def test_three_level_g2_matches_closed_form():
    m = build_three_level(0.625, 1.0)
    ts = np.linspace(0, 10, 41)
    g2 = longtime.g2_correlator(m, ts)
    assert np.allclose(g2, [oracles.avg_g2(t, 1.0, 0.625) for t in ts], atol=1e-8)


def test_g2_decays_to_one():
    g2 = longtime.g2_correlator(build_rwa_qubit(1.0, 0.2, 1.0), [0.0, 60.0])
    assert g2[0] == pytest.approx(0.0, abs=1e-10)  # single emitter antibunching
    assert g2[1] == pytest.approx(1.0, abs=1e-8)


def test_g2_needs_emission():
    with pytest.raises(NumericalError):
        longtime.g2_correlator(build_rwa_qubit(0.0, 0.0, 1.0), [0.0])


def test_window_average():
    ts = np.linspace(0, 5, 501)
    assert np.allclose(longtime.window_average(ts, np.full_like(ts, 3.0), 0.5), 3.0)
    smoothed = longtime.window_average(ts, np.cos(2 * np.pi * ts / 0.5), 0.5)
    assert np.abs(smoothed[:-30]).max() < 1e-2
    with pytest.raises(ValueError):
        longtime.window_average(ts**2, ts, 0.5)


def test_sweep_is_thread_independent():
    a = longtime.sweep_fano([2.0, 5.0], [3.0, 40.0], 1.0, threads=1)
    b = longtime.sweep_fano([2.0, 5.0], [3.0, 40.0], 1.0, threads=4)
    assert a == b
    assert [r.entangled_flag for r in a] == [True, True, False, True]


def test_sweep_records_failures(monkeypatch):
    def boom(model):
        raise NumericalError("boom")
    monkeypatch.setattr(longtime, "cumulant_expansion", boom)
    rows = longtime.sweep_fano([1.0], [1.0, 2.0], 1.0, threads=2)
    assert all(math.isnan(r.fano_double) and r.error == "boom" for r in rows)
