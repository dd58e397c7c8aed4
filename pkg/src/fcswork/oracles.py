"""Closed-form reference results, written with scalar math only.

Nothing here touches the superoperator engine, so a disagreement between an
oracle and a numerical route points at the engine.
"""

import cmath
import math


def ho_alpha(nu, omega, omega_d, gamma, t=0.0):
    """Coherent amplitude of the driven damped oscillator."""
    return 2j * omega * cmath.exp(-1j * omega_d * t) / (gamma + 2j * (nu - omega_d))


def ho_lambda(u, nu, omega, omega_d, gamma):
    """Dominant eigenvalue Gamma |alpha|^2 (e^{iu nu} - 1) of the oscillator."""
    alpha2 = abs(ho_alpha(nu, omega, omega_d, gamma)) ** 2
    return gamma * alpha2 * (cmath.exp(1j * u * nu) - 1)


def poisson_pmf(n, x):
    return math.exp(-x) * x**n / math.factorial(n)


def qubit_fano(omega, delta, gamma):
    """Long-time Fano factor of a resonantly driven qubit in the rotating frame."""
    denom = gamma**2 + 2 * omega**2 + 4 * delta**2
    return 1 - 2 * omega**2 * (3 * gamma**2 - 4 * delta**2) / denom**2


def avg_g2(t, gamma, omega_r):
    """Intensity correlation of the three-level model, averaged over fast oscillations."""
    x = gamma / omega_r
    return 1 + math.exp(-gamma * t) * ((x * x - 1) / 2 * math.cos(omega_r * t) - x * math.sin(omega_r * t))


def undriven_qubit_heat_gf(u, t, nu, gamma, beta):
    """Heat generating function of an undriven qubit started in equilibrium."""
    bn = beta * nu
    stationary = (cmath.cos(u * nu) + math.cosh(bn)) / (1 + math.cosh(bn))
    decay = math.exp(-(math.exp(-bn) + 1) * gamma * t)
    # e^{(beta - iu) nu} / (e^{beta nu} + 1)^2, rearranged to avoid overflow at large beta
    prefactor = cmath.exp(-1j * u * nu - bn) / (1 + math.exp(-bn)) ** 2
    return stationary - decay * prefactor * (cmath.exp(1j * u * nu) - 1) ** 2


def undriven_qubit_heat_variance(t, nu, gamma, beta):
    """Var Q(t) for the undriven qubit: nu^2 (1 - e^{-(1+e^{-beta nu}) Gamma t}) / (1 + cosh beta nu)."""
    return nu**2 * (1 - math.exp(-(1 + math.exp(-beta * nu)) * gamma * t)) / (1 + math.cosh(beta * nu))


def coupled_qubit_levels(omega, omega_xx):
    """Exact RWA spectrum of the coupled pair (0, two hybridized levels, -omega_xx)."""
    root = math.sqrt(4 * omega**2 + omega_xx**2)
    return [0.0, (omega_xx - root) / 2, (omega_xx + root) / 2, -omega_xx]


def three_level_steady_state(gamma, omega_r):
    """Non-zero elements (rho11 = rho22, rho12, rho33) of the effective three-level steady state."""
    x = omega_r**2 + gamma**2
    rho11 = 0.5 - omega_r**2 / (4 * x)
    rho12 = (gamma**2 - 1j * gamma * omega_r) / (2 * x)
    return rho11, rho12, 1 - 2 * rho11
