"""Counting-field-dressed Lindblad generators.

For channel j with counting field u = u[tag_j]::

    L_u[rho] = G-  e^{+i u nu} S rho S^dag + G+ e^{-i u nu} S^dag rho S
             - G-/2 {S^dag S, rho} - G+/2 {S S^dag, rho}

and the forward generator is ``-i[H(t), rho] + L_u[rho]``; the time-reversed
one flips the sign of the commutator only.
"""

from __future__ import annotations

import numpy as np

from fcswork import linop
from fcswork.errors import DegenerateKernelError, NumericalError

KERNEL_RTOL = 1e-10


def counting_field(u, model):
    """Normalize ``u`` to one complex value per counting tag.

    A scalar applies the same field to every tag (the "double channel" when
    two tags exist).
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim == 0:
        return np.full(model.n_tags, u)
    if u.ndim != 1:
        raise ValueError("counting field must be a scalar or a 1-d sequence")
    if len(u) < model.n_tags:
        raise ValueError(f"counting field has {len(u)} entries but the model uses {model.n_tags} tags")
    return u


def counting_fields(us, model):
    """Batch version: returns an array of shape (n_u, n_tags)."""
    us = np.asarray(us, dtype=complex)
    if us.ndim <= 1:
        return us.reshape(-1)[:, None] * np.ones(model.n_tags)
    if us.shape[1] < model.n_tags:
        raise ValueError(f"counting field has {us.shape[1]} entries but the model uses {model.n_tags} tags")
    return us


def _channel_parts(model):
    """Per channel: (emission sandwich, absorption sandwich, anticommutator part, tag, nu)."""
    parts = []
    for ch in model.channels:
        s = ch.lowering_op
        sd = linop.dag(s)
        g_down, g_up = ch.down_rate, ch.up_rate(model.beta)
        emit = g_down * linop.sandwich_superop(s, sd)
        absorb = g_up * linop.sandwich_superop(sd, s)
        damp = -0.5 * g_down * linop.anticommutator_superop(sd @ s)
        if g_up:
            damp = damp - 0.5 * g_up * linop.anticommutator_superop(s @ sd)
        parts.append((emit, absorb, damp, ch.counting_tag, ch.transition_energy))
    return parts


def dissipator(model, u=0.0):
    """Dressed dissipator ``L_u`` as a D^2 x D^2 matrix."""
    return dissipators(model, [counting_field(u, model)])[0]


def dissipators(model, us):
    """Dressed dissipators for a batch of counting fields, shape (n_u, D^2, D^2)."""
    us = counting_fields(us, model)
    d2 = model.dim**2
    out = np.zeros((len(us), d2, d2), dtype=complex)
    for emit, absorb, damp, tag, nu in _channel_parts(model):
        phase = np.exp(1j * us[:, tag] * nu)
        out += damp
        out += phase[:, None, None] * emit
        if absorb.any():
            out += (1 / phase)[:, None, None] * absorb
    return out


def assemble(model, u, t):
    """Forward generator ``A_u(t)``."""
    return -1j * linop.commutator_superop(model.hamiltonian_at(t)) + dissipator(model, u)


def assemble_time_reversed(model, u, t):
    """Time-reversed generator ``A^tr_u(t)``: commutator enters with +i."""
    return 1j * linop.commutator_superop(model.hamiltonian_at(t)) + dissipator(model, u)


def dressing_derivatives(model):
    """Taylor coefficients of the dressed dissipator in u, per counting tag.

    Returns (first, second) with ``first[k]`` the coefficient of ``u_k`` and
    ``second[k]`` the coefficient of ``u_k**2``.  Channels only depend on their
    own tag, so there are no mixed second-order terms.
    """
    d2 = model.dim**2
    first = np.zeros((model.n_tags, d2, d2), dtype=complex)
    second = np.zeros((model.n_tags, d2, d2), dtype=complex)
    for emit, absorb, _, tag, nu in _channel_parts(model):
        # e^{+-i u nu} = 1 +- i u nu - (u nu)^2 / 2 + ...
        first[tag] += 1j * nu * (emit - absorb)
        second[tag] += -0.5 * nu**2 * (emit + absorb)
    return first, second


class BatchedGenerator:
    """``A_u(t)`` for many counting fields at once, split as static + drive parts.

    ``apply(t, v)`` evaluates the generator on a stack of vectorized states
    ``v`` of shape (n_u, D^2).
    """

    def __init__(self, model, us, reversed=False):
        self.model = model
        sign = 1j if reversed else -1j
        self.static = dissipators(model, us) + sign * linop.commutator_superop(model.static_hamiltonian)
        ops = model.drive_operators()
        self.drive = np.array([sign * linop.commutator_superop(op) for op in ops]) if ops else None

    def __len__(self):
        return self.static.shape[0]

    def apply(self, t, v):
        out = np.einsum("kij,kj->ki", self.static, v)
        if self.drive is not None:
            coeffs = self.model.drive_coefficients(t)
            for c, sup in zip(coeffs, self.drive):
                if c != 0:
                    out += c * (v @ sup.T)
        return out


def _null_space(a, rtol=KERNEL_RTOL):
    _, s, vh = np.linalg.svd(a)
    scale = max(s[0], 1.0)
    mask = s <= rtol * scale
    return vh[mask].conj().T


def stationary_state(model, positivity_tol=1e-9):
    """Unique unit-trace stationary state of the zero-field generator.

    Only meaningful for static models (the drive part is evaluated at t=0).
    """
    if not model.is_static:
        raise ValueError("stationary_state needs a static model")
    a0 = assemble(model, 0.0, 0.0)
    kernel = _null_space(a0)
    if kernel.shape[1] != 1:
        raise DegenerateKernelError(kernel.shape[1])
    rho = linop.devectorize(kernel[:, 0], model.dim)
    rho = rho / np.trace(rho)
    rho = (rho + linop.dag(rho)) / 2
    if np.linalg.eigvalsh(rho).min() < -positivity_tol:
        raise NumericalError("stationary state is not positive semidefinite")
    return rho
