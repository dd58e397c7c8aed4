"""System models: a Hamiltonian protocol, jump channels and a bath temperature.

Energies are in units with hbar = 1.  ``beta = math.inf`` is the
zero-temperature flag: every up-rate vanishes identically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _scistats

from fcswork import linop
from fcswork.linop import IDENTITY2, SIGMA_LOWER, SIGMA_X, SIGMA_Y, SIGMA_Z

__all__ = [
    "DriveTerm",
    "JumpChannel",
    "SystemModel",
    "thermal_state",
    "build_driven_qubit",
    "build_pulsed_qubit",
    "build_rwa_qubit",
    "build_harmonic_oscillator",
    "build_coupled_qubits",
    "build_three_level",
    "build_undriven_qubit",
    "ladder_operators",
]


def _positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class JumpChannel:
    """One dissipative channel.

    ``down_rate`` is the emission rate; the absorption rate is always derived
    from detailed balance, ``exp(-beta * transition_energy) * down_rate``.
    """

    lowering_op: np.ndarray
    transition_energy: float
    down_rate: float
    counting_tag: int = 0

    def __post_init__(self):
        op = np.array(self.lowering_op, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError("lowering_op must be square")
        op.setflags(write=False)
        object.__setattr__(self, "lowering_op", op)
        _positive("transition_energy", self.transition_energy)
        if self.down_rate < 0:
            raise ValueError("down_rate must be non-negative")
        if self.counting_tag < 0:
            raise ValueError("counting_tag must be non-negative")

    def up_rate(self, beta):
        if math.isinf(beta):
            return 0.0
        return math.exp(-beta * self.transition_energy) * self.down_rate


@dataclass(frozen=True)
class DriveTerm:
    """Classical drive ``amplitude * f(t)`` acting through ``operator``.

    kind="cos":       amplitude * cos(frequency*t + phase) * operator   (operator Hermitian)
    kind="rotating":  amplitude * (operator e^{-i(frequency*t + phase)} + h.c.)

    The drive is active for ``t < t_stop`` only (``t_stop=None`` means always).
    """

    operator: np.ndarray
    amplitude: float
    frequency: float
    phase: float = 0.0
    kind: str = "cos"
    t_stop: float | None = None

    def __post_init__(self):
        op = np.array(self.operator, dtype=complex)
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)
        if self.kind not in ("cos", "rotating"):
            raise ValueError(f"unknown drive kind {self.kind!r}")
        if self.kind == "cos" and not linop.is_hermitian(op):
            raise ValueError("cosine drives need a Hermitian operator")

    def operators(self):
        if self.kind == "cos":
            return [self.operator]
        return [self.operator, linop.dag(self.operator)]

    def coefficients(self, t):
        if self.t_stop is not None and t >= self.t_stop:
            return [0.0] * len(self.operators())
        theta = self.frequency * t + self.phase
        if self.kind == "cos":
            return [self.amplitude * math.cos(theta)]
        phasor = complex(math.cos(theta), -math.sin(theta))
        return [self.amplitude * phasor, self.amplitude * phasor.conjugate()]


@dataclass(frozen=True)
class SystemModel:
    static_hamiltonian: np.ndarray
    channels: tuple[JumpChannel, ...]
    beta: float
    drive_terms: tuple[DriveTerm, ...] = ()
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        h = np.array(self.static_hamiltonian, dtype=complex)
        if not linop.is_hermitian(h):
            raise ValueError("static Hamiltonian must be Hermitian")
        h.setflags(write=False)
        object.__setattr__(self, "static_hamiltonian", h)
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "drive_terms", tuple(self.drive_terms))
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        for ch in self.channels:
            if ch.lowering_op.shape != h.shape:
                raise ValueError("jump operator dimension does not match the Hamiltonian")
        for d in self.drive_terms:
            if d.operator.shape != h.shape:
                raise ValueError("drive operator dimension does not match the Hamiltonian")

    @property
    def dim(self):
        return self.static_hamiltonian.shape[0]

    @property
    def zero_temperature(self):
        return math.isinf(self.beta)

    @property
    def is_static(self):
        return all(d.amplitude == 0 for d in self.drive_terms)

    @property
    def n_tags(self):
        return 1 + max((ch.counting_tag for ch in self.channels), default=0)

    @property
    def drive_period(self):
        freqs = [abs(d.frequency) for d in self.drive_terms if d.amplitude != 0 and d.frequency != 0]
        return 2 * math.pi / max(freqs) if freqs else None

    @property
    def drive_end(self):
        """Time after which every drive is off, or None if some drive never stops."""
        active = [d for d in self.drive_terms if d.amplitude != 0]
        if not active or any(d.t_stop is None for d in active):
            return None
        return max(d.t_stop for d in active)

    def drive_operators(self):
        return [op for d in self.drive_terms for op in d.operators()]

    def drive_coefficients(self, t):
        return np.array([c for d in self.drive_terms for c in d.coefficients(t)], dtype=complex)

    def hamiltonian_at(self, t):
        h = self.static_hamiltonian.copy()
        for c, op in zip(self.drive_coefficients(t), self.drive_operators()):
            h += c * op
        return h

    def max_rate(self):
        return max((max(ch.down_rate, ch.up_rate(self.beta)) for ch in self.channels), default=0.0)

    def hamiltonian_scale(self):
        """Spectral-norm bound on H(t) over the protocol."""
        scale = np.linalg.norm(self.static_hamiltonian, 2)
        for d in self.drive_terms:
            weight = 1 if d.kind == "cos" else 2
            scale += weight * abs(d.amplitude) * np.linalg.norm(d.operator, 2)
        return scale


def thermal_state(h, beta):
    """Gibbs state of ``h``; at ``beta = inf`` the (uniformly mixed) ground space."""
    h = np.asarray(h, dtype=complex)
    evals, evecs = np.linalg.eigh(h)
    if math.isinf(beta):
        weights = (evals - evals[0] < 1e-9).astype(float)
    else:
        weights = np.exp(-beta * (evals - evals[0]))
    weights /= weights.sum()
    return (evecs * weights) @ evecs.conj().T


def ladder_operators(n_fock):
    """Truncated annihilation and creation operators on ``n_fock`` levels."""
    a = np.diag(np.sqrt(np.arange(1, n_fock)), k=1).astype(complex)
    return a, a.conj().T


def build_driven_qubit(nu, omega, omega_d, gamma, beta):
    """Lab-frame qubit ``nu/2 sz + omega cos(omega_d t) sx`` with one emission channel."""
    nu = _positive("nu", nu)
    gamma = _positive("gamma", gamma)
    return SystemModel(
        static_hamiltonian=nu * SIGMA_Z / 2,
        drive_terms=(DriveTerm(SIGMA_X, float(omega), float(omega_d)),),
        channels=(JumpChannel(SIGMA_LOWER, nu, gamma),),
        beta=beta,
        name="driven_qubit",
        params=dict(nu=nu, omega=omega, omega_d=omega_d, gamma=gamma, beta=beta),
    )


def build_pulsed_qubit(nu, omega, omega_d, gamma, beta, t_stop):
    """Qubit driven by ``omega sin(omega_d t) sx`` for ``t < t_stop`` only.

    The sine phase makes H(0) equal the undriven Hamiltonian, so the
    Hamiltonian after the pulse coincides with the initial one.
    """
    nu = _positive("nu", nu)
    gamma = _positive("gamma", gamma)
    t_stop = _positive("t_stop", t_stop)
    drive = DriveTerm(SIGMA_X, float(omega), float(omega_d), phase=-math.pi / 2, t_stop=t_stop)
    return SystemModel(
        static_hamiltonian=nu * SIGMA_Z / 2,
        drive_terms=(drive,),
        channels=(JumpChannel(SIGMA_LOWER, nu, gamma),),
        beta=beta,
        name="pulsed_qubit",
        params=dict(nu=nu, omega=omega, omega_d=omega_d, gamma=gamma, beta=beta, t_stop=t_stop),
    )


def build_rwa_qubit(omega, delta, gamma, nu=1.0):
    """Rotating-frame qubit ``(omega sx + delta sz)/2`` at zero temperature.

    ``nu`` never enters H; it only sets the size of one emitted heat quantum.
    """
    gamma = _positive("gamma", gamma)
    h = (omega * SIGMA_X + delta * SIGMA_Z) / 2
    return SystemModel(
        static_hamiltonian=h,
        channels=(JumpChannel(SIGMA_LOWER, _positive("nu", nu), gamma),),
        beta=math.inf,
        name="rwa_qubit",
        params=dict(omega=omega, delta=delta, gamma=gamma, nu=nu),
    )


def coherent_fock_cutoff(mean_photons, tail=1e-13, minimum=8):
    """Smallest truncation whose Poisson tail beyond the cutoff is below ``tail``."""
    n = int(_scistats.poisson.isf(tail, max(mean_photons, 1e-12))) + 4
    return max(n, minimum)


def build_harmonic_oscillator(nu, omega, omega_d, gamma, n_fock=None, beta=math.inf, rotating_frame=False):
    """Driven damped oscillator with jump operator ``a``.

    Lab frame: ``nu a^dag a + omega (a^dag e^{-i omega_d t} + a e^{i omega_d t})``.
    With ``rotating_frame=True`` the static frame-transformed Hamiltonian
    ``(nu - omega_d) a^dag a + omega (a^dag + a)`` is used instead; the
    dissipator is invariant under that transformation.
    """
    nu = _positive("nu", nu)
    gamma = _positive("gamma", gamma)
    detuning = nu - omega_d
    alpha2 = 4 * omega**2 / (gamma**2 + 4 * detuning**2)
    if n_fock is None:
        n_fock = coherent_fock_cutoff(alpha2)
    if n_fock < 2:
        raise ValueError("n_fock must be at least 2")
    if n_fock < coherent_fock_cutoff(alpha2, tail=1e-8, minimum=2):
        warnings.warn(
            f"n_fock={n_fock} truncates a coherent state with |alpha|^2={alpha2:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    a, ad = ladder_operators(n_fock)
    number = ad @ a
    if rotating_frame:
        h0 = detuning * number + omega * (ad + a)
        drives = ()
    else:
        h0 = nu * number
        drives = (DriveTerm(ad, float(omega), float(omega_d), kind="rotating"),)
    return SystemModel(
        static_hamiltonian=h0,
        drive_terms=drives,
        channels=(JumpChannel(a, nu, gamma),),
        beta=beta,
        name="harmonic_oscillator",
        params=dict(nu=nu, omega=omega, omega_d=omega_d, gamma=gamma, n_fock=n_fock,
                    rotating_frame=rotating_frame),
    )


def build_coupled_qubits(omega, omega_xx, gamma, nu=1.0):
    """Two identical resonantly driven qubits with flip-flop coupling, separate baths.

    H = omega/2 (sx1 + sx2) + omega_xx/2 (sx1 sx2 + sy1 sy2)
      = omega/2 (sx1 + sx2) + omega_xx (s+1 s-2 + s-1 s+2).

    With this normalisation the spectrum is exactly 0, [w -+ sqrt(w^2 + 4 omega^2)]/2
    and -w (w = omega_xx), which puts the level crossing at omega_xx = omega/sqrt(2)
    and the slow Rabi splitting at omega^2/omega_xx.
    """
    gamma = _positive("gamma", gamma)
    sx1, sx2 = linop.kron(SIGMA_X, IDENTITY2), linop.kron(IDENTITY2, SIGMA_X)
    sy1, sy2 = linop.kron(SIGMA_Y, IDENTITY2), linop.kron(IDENTITY2, SIGMA_Y)
    h = omega * (sx1 + sx2) / 2 + omega_xx / 2 * (sx1 @ sx2 + sy1 @ sy2)
    nu = _positive("nu", nu)
    channels = (
        JumpChannel(linop.kron(SIGMA_LOWER, IDENTITY2), nu, gamma, counting_tag=0),
        JumpChannel(linop.kron(IDENTITY2, SIGMA_LOWER), nu, gamma, counting_tag=1),
    )
    return SystemModel(
        static_hamiltonian=h,
        channels=channels,
        beta=math.inf,
        name="coupled_qubits",
        params=dict(omega=omega, omega_xx=omega_xx, gamma=gamma, nu=nu),
    )


def three_level_jump(gamma):
    s = np.zeros((3, 3), dtype=complex)
    s[0, 2] = s[1, 2] = 1j * math.sqrt(gamma / 2)
    s[2, 0] = 1j * math.sqrt(gamma)
    s[2, 1] = -1j * math.sqrt(gamma)
    return s


def build_three_level(omega_r, gamma, nu=1.0):
    """Effective three-level model of the strongly coupled qubit pair.

    The rate sits inside the jump operator (entries ~ sqrt(gamma)), so the
    channel rate is 1.
    """
    omega_r = _positive("omega_r", omega_r)
    gamma = _positive("gamma", gamma)
    h = np.diag([-omega_r / 2, omega_r / 2, 0.0]).astype(complex)
    return SystemModel(
        static_hamiltonian=h,
        channels=(JumpChannel(three_level_jump(gamma), _positive("nu", nu), 1.0),),
        beta=math.inf,
        name="three_level",
        params=dict(omega_r=omega_r, gamma=gamma, nu=nu),
    )


def build_undriven_qubit(nu, gamma, beta):
    nu = _positive("nu", nu)
    gamma = _positive("gamma", gamma)
    if math.isinf(beta):
        raise ValueError("the undriven qubit model needs a finite beta")
    return SystemModel(
        static_hamiltonian=nu * SIGMA_Z / 2,
        channels=(JumpChannel(SIGMA_LOWER, nu, gamma),),
        beta=float(beta),
        name="undriven_qubit",
        params=dict(nu=nu, gamma=gamma, beta=beta),
    )
