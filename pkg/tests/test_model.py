import math

import numpy as np
import pytest

from fcswork import linop, model, oracles
from fcswork.model import (
    DriveTerm,
    JumpChannel,
    build_coupled_qubits,
    build_driven_qubit,
    build_harmonic_oscillator,
    build_pulsed_qubit,
    build_rwa_qubit,
    build_three_level,
    build_undriven_qubit,
    thermal_state,
)


def test_detailed_balance_rates():
    ch = JumpChannel(linop.SIGMA_LOWER, 2.0, 0.5)
    assert ch.up_rate(math.inf) == 0.0
    assert math.isclose(ch.up_rate(0.7), 0.5 * math.exp(-1.4))


def test_cos_drive_coefficients():
    d = DriveTerm(linop.SIGMA_X, 0.3, 2.0, phase=0.1)
    assert math.isclose(d.coefficients(0.5)[0], 0.3 * math.cos(1.1))


def test_rotating_drive_is_hermitian():
    a, _ = model.ladder_operators(4)
    d = DriveTerm(a, 0.2, 1.0, kind="rotating")
    h = sum(c * op for c, op in zip(d.coefficients(0.37), d.operators()))
    assert linop.is_hermitian(h)


def test_drive_switches_off():
    m = build_pulsed_qubit(1.0, 0.2, 1.0, 0.01, 2.0, t_stop=10.0)
    assert m.drive_end == 10.0
    assert np.allclose(m.hamiltonian_at(0.0), m.hamiltonian_at(25.0))
    assert not np.allclose(m.hamiltonian_at(1.0), m.hamiltonian_at(0.0))
    assert build_driven_qubit(1.0, 0.2, 1.0, 0.01, 2.0).drive_end is None


def test_driven_qubit_hamiltonian():
    m = build_driven_qubit(1.5, 0.2, 1.0, 0.01, 2.0)
    expected = 0.75 * linop.SIGMA_Z + 0.2 * math.cos(0.3) * linop.SIGMA_X
    assert np.allclose(m.hamiltonian_at(0.3), expected)
    assert math.isclose(m.drive_period, 2 * math.pi)
    assert not m.is_static


def test_zero_amplitude_is_static():
    assert build_driven_qubit(1.0, 0.0, 1.0, 0.01, 2.0).is_static


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
def test_thermal_state(beta):
    h = linop.SIGMA_Z / 2
    rho = thermal_state(h, beta)
    assert math.isclose(np.trace(rho).real, 1.0)
    assert math.isclose(rho[0, 0].real / rho[1, 1].real, math.exp(-beta))


def test_thermal_state_zero_temperature_is_ground():
    rho = thermal_state(linop.SIGMA_Z / 2, math.inf)
    assert np.allclose(rho, np.diag([0, 1]))


def test_invalid_parameters():
    with pytest.raises(ValueError):
        build_driven_qubit(1.0, 0.1, 1.0, -0.1, 1.0)
    with pytest.raises(ValueError):
        build_undriven_qubit(1.0, 1.0, math.inf)
    with pytest.raises(ValueError):
        build_rwa_qubit(1.0, 0.0, 0.0)


def test_three_level_jump_structure():
    s = model.three_level_jump(0.7)
    assert np.allclose(linop.dag(s) @ s, [[0.7, -0.7, 0], [-0.7, 0.7, 0], [0, 0, 0.7]])


def test_coupled_qubit_spectrum_matches_closed_form():
    m = build_coupled_qubits(3.0, 11.0, 1.0)
    numeric = np.sort(np.linalg.eigvalsh(m.static_hamiltonian))
    assert np.allclose(numeric, np.sort(oracles.coupled_qubit_levels(3.0, 11.0)))
    assert m.n_tags == 2


def test_fock_cutoff_grows_with_amplitude():
    assert model.coherent_fock_cutoff(0.01) >= 8
    assert model.coherent_fock_cutoff(20.0) > model.coherent_fock_cutoff(2.0)


def test_oscillator_truncation_warning():
    with pytest.warns(RuntimeWarning):
        build_harmonic_oscillator(1.0, 1.0, 1.0, 0.2, n_fock=3, rotating_frame=True)


def test_oscillator_rotating_frame_is_static():
    m = build_harmonic_oscillator(1.0, 0.1, 1.0, 1.0, rotating_frame=True)
    assert m.is_static and m.dim >= 8


def test_three_level_builder():
    m = build_three_level(0.6, 1.0)
    assert m.dim == 3 and m.is_static


def test_three_level_double_jump_is_possible():
    rho11, rho12, rho33 = oracles.three_level_steady_state(1.0, 0.625)
    rho = np.array([[rho11, rho12, 0], [np.conj(rho12), rho11, 0], [0, 0, rho33]])
    s = model.three_level_jump(1.0)
    assert np.abs(s @ s @ rho).max() > 0.1
