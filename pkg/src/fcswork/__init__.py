"""Full counting statistics of work and heat in weakly damped driven quantum systems."""

from fcswork.errors import (
    ConfigError,
    DegenerateKernelError,
    NumericalError,
    PreconditionError,
)
from fcswork.model import (
    DriveTerm,
    JumpChannel,
    SystemModel,
    build_coupled_qubits,
    build_driven_qubit,
    build_harmonic_oscillator,
    build_pulsed_qubit,
    build_rwa_qubit,
    build_three_level,
    build_undriven_qubit,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateKernelError",
    "DriveTerm",
    "JumpChannel",
    "NumericalError",
    "PreconditionError",
    "SystemModel",
    "build_coupled_qubits",
    "build_driven_qubit",
    "build_harmonic_oscillator",
    "build_pulsed_qubit",
    "build_rwa_qubit",
    "build_three_level",
    "build_undriven_qubit",
]
