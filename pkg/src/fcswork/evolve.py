"""Time-ordered propagation of counting states and the work/heat generating functions.

Propagation is classical fourth-order Runge-Kutta on a fixed grid.  Every
propagation is repeated with half the step; the result is accepted once the
two agree to ``tol`` (relative to the state magnitude), otherwise the step
keeps halving.  Once every drive of a pulsed model has switched off, the
generator is constant and the remaining interval is done with one matrix
exponential instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from fcswork import linop
from fcswork.errors import NumericalError
from fcswork.liouville import BatchedGenerator, counting_field, counting_fields
from fcswork.model import thermal_state

STEP_TOL = 1e-8
MAX_HALVINGS = 8


@dataclass(frozen=True)
class CountingState:
    matrix: np.ndarray
    u: np.ndarray
    t: float


@dataclass(frozen=True)
class GFSample:
    u: np.ndarray
    t: float
    value: np.ndarray


def default_step(model):
    """min(T_drive/200, 0.01/Gamma_max, 0.02/||H||), ignoring absent scales."""
    candidates = []
    if model.drive_period is not None:
        candidates.append(model.drive_period / 200)
    rate = model.max_rate()
    if rate > 0:
        candidates.append(0.01 / rate)
    scale = model.hamiltonian_scale()
    if scale > 0:
        candidates.append(0.02 / scale)
    return min(candidates) if candidates else 0.1


def _rk4(gen, v, t_start, span, n_steps, clock):
    h = span / n_steps
    for i in range(n_steps):
        s = t_start + i * h
        k1 = gen.apply(clock(s), v)
        k2 = gen.apply(clock(s + h / 2), v + (h / 2) * k1)
        k3 = gen.apply(clock(s + h / 2), v + (h / 2) * k2)
        k4 = gen.apply(clock(s + h), v + h * k3)
        v = v + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def _gated_segment(gen, v, t_start, span, dt, clock, tol):
    if span <= 0:
        return v
    n = max(1, math.ceil(span / dt - 1e-9))
    coarse = _rk4(gen, v, t_start, span, n, clock)
    for _ in range(MAX_HALVINGS):
        n *= 2
        fine = _rk4(gen, v, t_start, span, n, clock)
        scale = max(1.0, float(np.abs(fine).max()))
        if np.abs(fine - coarse).max() <= tol * scale:
            return fine
        coarse = fine
    raise NumericalError(
        f"step doubling did not converge to {tol:g} after {MAX_HALVINGS} halvings (dt={span / n:.3g})"
    )


def propagate_batch(model, us, times, initial, reversed=False, dt=None, tol=STEP_TOL):
    """Propagate a stack of vectorized states, one per counting field.

    us: (n_u,) scalars or (n_u, n_tags) fields.  initial: (n_u, D^2).
    times: increasing non-negative output times.  Returns (n_times, n_u, D^2).

    With ``reversed=True`` only a single final time is allowed; the generator
    ``A^tr(t_final - s)`` is integrated for s from 0 to t_final.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and increasing")
    if reversed and len(times) != 1:
        raise ValueError("time-reversed propagation takes a single final time")
    us = counting_fields(us, model)
    v = np.array(initial, dtype=complex)
    if v.shape != (len(us), model.dim**2):
        raise ValueError(f"initial states have shape {v.shape}, expected {(len(us), model.dim**2)}")
    gen = BatchedGenerator(model, us, reversed=reversed)
    dt = default_step(model) if dt is None else float(dt)
    if reversed:
        t_final = times[0]
        clock = lambda s: t_final - s  # noqa: E731
    else:
        clock = lambda s: s  # noqa: E731
    # s-interval on which the drive is off (None: never)
    quiet = None
    if model.drive_end is not None:
        if reversed:
            quiet = (0.0, max(0.0, times[0] - model.drive_end))
        else:
            quiet = (model.drive_end, math.inf)
    out = np.empty((len(times),) + v.shape, dtype=complex)
    t_prev = 0.0
    for i, t in enumerate(times):
        if quiet is None:
            v = _gated_segment(gen, v, t_prev, t - t_prev, dt, clock, tol)
        else:
            v = _piecewise_segment(gen, v, t_prev, t, dt, clock, tol, quiet)
        out[i] = v
        t_prev = t
    return out


def _piecewise_segment(gen, v, s0, s1, dt, clock, tol, quiet):
    """Integrate [s0, s1], using the exact exponential inside the quiet window."""
    q0, q1 = max(s0, quiet[0]), min(s1, quiet[1])
    if q1 <= q0:
        return _gated_segment(gen, v, s0, s1 - s0, dt, clock, tol)
    v = _gated_segment(gen, v, s0, q0 - s0, dt, clock, tol)
    v = np.einsum("kij,kj->ki", expm(gen.static * (q1 - q0)), v)
    return _gated_segment(gen, v, q1, s1 - q1, dt, clock, tol)


def propagate(model, u, t_final, initial, reversed=False, dt=None, tol=STEP_TOL):
    """rho(t_final, u) from ``initial`` under the forward or time-reversed generator."""
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    field = counting_field(u, model)
    v0 = linop.vectorize(initial)[None, :]
    v = propagate_batch(model, field[None, :], [t_final], v0, reversed=reversed, dt=dt, tol=tol)[0, 0]
    return CountingState(linop.devectorize(v, model.dim), field, float(t_final))


def _scalar_fields(u):
    u = np.asarray(u, dtype=complex)
    return u, u.reshape(-1)


def _trace(vs, dim):
    return np.einsum("...ii->...", linop.devectorize(vs, dim))


def generating_function_heat(model, u, t, rho0=None, dt=None, tol=STEP_TOL):
    """G_Q(u, t) = Tr rho(t, u) starting from the undressed ``rho0``.

    ``u`` is an array of scalar fields, each applied to every counting tag;
    use :func:`heat_gf_fields` for per-tag fields.  ``t`` may also be an
    increasing array, in which case ``value`` has shape (len(t),) + u.shape.
    """
    u, flat = _scalar_fields(u)
    return heat_gf_fields(model, flat, t, rho0=rho0, dt=dt, tol=tol, _shape=u.shape)


def heat_gf_fields(model, fields, t, rho0=None, dt=None, tol=STEP_TOL, _shape=None):
    """G_Q for explicit per-tag fields, ``fields`` of shape (n, n_tags) or (n,)."""
    fields = counting_fields(fields, model)
    if rho0 is None:
        rho0 = thermal_state(model.hamiltonian_at(0.0), model.beta)
    v0 = np.tile(linop.vectorize(rho0), (len(fields), 1))
    times = np.atleast_1d(t)
    vs = propagate_batch(model, fields, times, v0, dt=dt, tol=tol)
    values = _trace(vs, model.dim)
    shape = (len(fields),) if _shape is None else _shape
    values = values.reshape((len(times),) + shape)
    if np.ndim(t) == 0:
        values = values[0]
    return GFSample(fields, t, values)


def generating_function_work(model, u, t, rho0=None, dt=None, tol=STEP_TOL):
    """G_w(u, t) = Tr[e^{iuH(t)} rho(t,u)] with rho(0,u) = e^{-iuH(0)} rho0.

    ``rho0`` defaults to the Gibbs state of the full H(0), drive included.
    Array ``t`` is supported as for :func:`generating_function_heat`.
    """
    u, flat = _scalar_fields(u)
    h0 = model.hamiltonian_at(0.0)
    if rho0 is None:
        rho0 = thermal_state(h0, model.beta)
    v0 = np.array([linop.vectorize(linop.hermitian_exponential_factor(h0, -1j * x) @ rho0) for x in flat])
    times = np.atleast_1d(np.asarray(t, dtype=float))
    vs = propagate_batch(model, flat, times, v0, dt=dt, tol=tol)
    values = np.empty((len(times), len(flat)), dtype=complex)
    for i, ti in enumerate(times):
        ht = model.hamiltonian_at(ti)
        rhos = linop.devectorize(vs[i], model.dim)
        for k, x in enumerate(flat):
            values[i, k] = np.trace(linop.hermitian_exponential_factor(ht, 1j * x) @ rhos[k])
    values = values.reshape((len(times),) + u.shape)
    if np.ndim(t) == 0:
        values = values[0]
    return GFSample(flat, t, values)


def generating_function_work_reversed(model, u, t, dt=None, tol=STEP_TOL):
    """G^tr_w(u, t) for the time-reversed protocol started in equilibrium at H(t)."""
    u, flat = _scalar_fields(u)
    h0 = model.hamiltonian_at(0.0)
    ht = model.hamiltonian_at(t)
    rho_t = thermal_state(ht, model.beta)
    v0 = np.array([linop.vectorize(linop.hermitian_exponential_factor(ht, -1j * x) @ rho_t) for x in flat])
    vs = propagate_batch(model, flat, [t], v0, reversed=True, dt=dt, tol=tol)[0]
    rhos = linop.devectorize(vs, model.dim)
    values = np.array(
        [np.trace(linop.hermitian_exponential_factor(h0, 1j * x) @ r) for x, r in zip(flat, rhos)]
    )
    return GFSample(flat, t, values.reshape(u.shape))


@dataclass(frozen=True)
class TwoPointKernel:
    """Energy-resolved pieces of the work generating function.

    ``kernel[a, b, k] = Tr[P_a(t) U_{u_k}[P_b(0)]]`` where P are eigenprojectors
    of H(t) and H(0), so ``G_w(u_k) = sum_ab e^{iu_k(e_t[a]-e_0[b])} p[b] kernel[a,b,k]``.
    Each ``kernel[a, b]`` only carries the transferred-heat phases, so it is
    periodic in u when all transition energies share a lattice.
    """

    u: np.ndarray
    energies_initial: np.ndarray
    energies_final: np.ndarray
    weights: np.ndarray
    kernel: np.ndarray

    def generating_function(self):
        phase = np.exp(1j * np.multiply.outer(self.energies_final[:, None] - self.energies_initial[None, :], self.u))
        return np.einsum("abk,b,abk->k", phase, self.weights, self.kernel)


def two_point_kernel(model, u, t, reversed=False, dt=None, tol=STEP_TOL):
    """Projector-resolved work kernel on the scalar fields ``u`` (forward or reversed)."""
    u = np.asarray(u, dtype=complex).reshape(-1)
    h_start = model.hamiltonian_at(t if reversed else 0.0)
    h_end = model.hamiltonian_at(0.0 if reversed else t)
    e_start, w_start = np.linalg.eigh(h_start)
    e_end, w_end = np.linalg.eigh(h_end)
    rho_start = thermal_state(h_start, model.beta)
    weights = np.real(np.einsum("ib,ij,jb->b", w_start.conj(), rho_start, w_start))
    d = model.dim
    projectors = [np.outer(w_start[:, b], w_start[:, b].conj()) for b in range(d)]
    v0 = np.concatenate([np.tile(linop.vectorize(p), (len(u), 1)) for p in projectors])
    fields = np.tile(u, d)
    vs = propagate_batch(model, fields, [t], v0, reversed=reversed, dt=dt, tol=tol)[0]
    rhos = linop.devectorize(vs, d).reshape(d, len(u), d, d)
    kernel = np.einsum("ia,bkij,ja->abk", w_end.conj(), rhos, w_end)
    return TwoPointKernel(u, e_start, e_end, weights, kernel)
