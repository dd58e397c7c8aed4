"""Long-time heat statistics from the dominant eigenvalue of the dressed generator.

For a static model, ``G_Q(u, t) ~ exp(t lambda(u))`` at long times, where
lambda(u) is the eigenvalue of ``A_u`` with the largest real part.  Its Taylor
coefficients are obtained by perturbation theory around the stationary state:

    lambda(u) = i sum_k J_k u_k - 1/2 sum_kl C_kl u_k u_l + O(u^3)

with J the mean heat currents per counting tag and C the covariance rates.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from fcswork import linop, liouville, stats
from fcswork.errors import NumericalError
from fcswork.model import build_coupled_qubits


@dataclass(frozen=True)
class CumulantSet:
    """Cumulant rates of the transferred heat.

    mean_rates[k] = <Q_k>/t and cov_rates[k, l] = Cov(Q_k, Q_l)/t in the long-time limit.
    """

    nu: float
    mean_rates: np.ndarray
    cov_rates: np.ndarray

    @property
    def lambda1(self):
        return float(self.mean_rates[0])

    @property
    def lambda2(self):
        return float(self.cov_rates[0, 0])

    @property
    def lambda12(self):
        return float(self.cov_rates[0, 1]) if len(self.mean_rates) > 1 else 0.0

    @property
    def total_mean(self):
        return float(self.mean_rates.sum())

    @property
    def total_variance(self):
        return float(self.cov_rates.sum())

    @property
    def fano(self):
        """Fano factor of all emitted quanta (all tags counted together)."""
        return self.total_variance / (self.nu * self.total_mean)

    @property
    def fano_single(self):
        """Fano factor of the quanta counted by tag 0 alone."""
        return self.lambda2 / (self.nu * self.lambda1)

    def c12(self, t):
        return self.lambda12 * t

    def as_dict(self):
        return {
            "nu": self.nu,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "lambda12": self.lambda12,
            "mean_rates": self.mean_rates.tolist(),
            "cov_rates": self.cov_rates.tolist(),
            "fano": self.fano,
            "fano_single": self.fano_single,
        }


def _projected_solve(a0, rhs, identity):
    """Solve a0 x = rhs with Tr x = 0 (rhs must be trace-free)."""
    system = np.vstack([a0, identity[None, :]])
    target = np.concatenate([rhs, [0.0]])
    x, _, rank, _ = np.linalg.lstsq(system, target, rcond=None)
    if rank < a0.shape[1]:
        raise NumericalError("projected solve is singular")
    resid = np.abs(system @ x - target).max()
    if resid > 1e-8 * max(1.0, np.abs(rhs).max()):
        raise NumericalError(f"projected solve residual {resid:.2e}")
    return x


def cumulant_expansion(model):
    """First and second u-derivatives of the dominant eigenvalue by perturbation theory.

    Order u:   lambda'_k  = <1| A1_k |rho_st>,  A0 rho1_k = lambda'_k rho_st - A1_k rho_st
    Order u^2: lambda''_kl = <1|A1_k|rho1_l> + <1|A1_l|rho1_k> + 2 delta_kl <1|A2_k|rho_st>
    where <1| = vec(I)^T is the left null vector of A0 and Tr rho1 = 0.
    """
    rho_st = liouville.stationary_state(model)
    a0 = liouville.assemble(model, 0.0, 0.0)
    first, second = liouville.dressing_derivatives(model)
    identity = linop.identity_covector(model.dim)
    v0 = linop.vectorize(rho_st)
    n = model.n_tags

    grad = np.array([identity @ (first[k] @ v0) for k in range(n)])
    rho1 = [_projected_solve(a0, grad[k] * v0 - first[k] @ v0, identity) for k in range(n)]
    hess = np.empty((n, n), dtype=complex)
    for k in range(n):
        for m in range(n):
            hess[k, m] = identity @ (first[k] @ rho1[m]) + identity @ (first[m] @ rho1[k])
        hess[k, k] += 2 * identity @ (second[k] @ v0)

    mean = np.real(-1j * grad)
    cov = np.real(-hess)
    nu = model.channels[0].transition_energy
    return CumulantSet(nu, mean, (cov + cov.T) / 2)


def dominant_eigenvalue_numeric(model, u):
    """Eigenvalue of ``A_u`` with the largest real part (dense eigensolve)."""
    if not model.is_static:
        raise ValueError("dominant eigenvalue needs a static model")
    try:
        evals = np.linalg.eigvals(liouville.assemble(model, u, 0.0))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    return complex(evals[np.argmax(evals.real)])


def eigenvalue_cumulants(model, h=0.02, fields=None):
    """Mean and variance rates from finite differences of the dominant eigenvalue.

    ``fields`` maps a scalar u to the counting field (default: same u on every
    tag).  Independent of :func:`cumulant_expansion`.
    """
    nu = model.channels[0].transition_energy
    make = fields or (lambda x: x)

    def sampler(us):
        return np.exp([dominant_eigenvalue_numeric(model, make(x)) for x in us])

    k1, k2 = stats.cumulants_from_gf(sampler, h=h / nu)
    return float(k1), float(k2)


def g2_correlator(model, times, channels=None):
    """Normalized intensity correlation by quantum regression.

    The stationary state is collapsed with the selected channels, evolved with
    the zero-field generator, and detected with the same channels.
    """
    channels = range(len(model.channels)) if channels is None else channels
    chans = [model.channels[j] for j in channels]
    rho = liouville.stationary_state(model)
    a0 = liouville.assemble(model, 0.0, 0.0)
    detector = sum(ch.down_rate * linop.dag(ch.lowering_op) @ ch.lowering_op for ch in chans)
    intensity = np.real(np.trace(detector @ rho))
    if intensity <= 1e-14:
        raise NumericalError("stationary emission intensity vanishes")
    jumped = sum(ch.down_rate * ch.lowering_op @ rho @ linop.dag(ch.lowering_op) for ch in chans)
    v = linop.vectorize(jumped)
    readout = linop.vectorize(detector.T)  # Tr(D X) = vec(D^T) . vec(X)
    times = np.asarray(times, dtype=float)
    out = np.empty(times.shape)
    for i, t in enumerate(times.flat):
        out.flat[i] = np.real(readout @ (expm(a0 * t) @ v)) / intensity**2
    return out


def window_average(times, values, window):
    """Centered moving average over ``window`` on a uniform grid.

    The correlator is even in time, so the grid is mirrored about t=0 before
    averaging; within half a window of the grid end the window is truncated.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt):
        raise ValueError("window_average needs a uniform grid")
    half = max(1, int(round(window / (2 * dt))))
    mirrored = np.concatenate([values[1:half + 1][::-1], values])
    out = np.empty_like(values)
    for i in range(len(values)):
        lo = i
        hi = min(i + 2 * half + 1, len(mirrored))
        seg = mirrored[lo:hi]
        # trapezoid over the window, end points half-weighted
        out[i] = (seg.sum() - 0.5 * (seg[0] + seg[-1])) / (len(seg) - 1)
    return out


@dataclass(frozen=True)
class SweepRow:
    omega: float
    omega_xx: float
    fano_double: float
    fano_single: float
    c12_rate: float
    entangled_flag: bool
    error: str = ""


SWEEP_COLUMNS = ("omega", "omega_xx", "fano_double", "fano_single", "c12_rate", "entangled_flag")


def _sweep_point(omega, omega_xx, gamma, nu):
    entangled = omega_xx > omega**2 / (2 * gamma)
    try:
        cs = cumulant_expansion(build_coupled_qubits(omega, omega_xx, gamma, nu=nu))
    except (NumericalError, ValueError) as exc:
        nan = math.nan
        return SweepRow(omega, omega_xx, nan, nan, nan, entangled, str(exc))
    return SweepRow(omega, omega_xx, cs.fano, cs.fano_single, cs.lambda12 / (nu**2 * gamma), entangled)


def sweep_fano(omegas, omega_xxs, gamma, nu=1.0, threads=None):
    """Fano factors and heat cross-correlation over an (omega, omega_xx) grid.

    Failed points carry NaNs and an error message; the sweep continues.
    """
    points = [(float(o), float(w)) for o in omegas for w in omega_xxs]
    threads = threads or os.cpu_count() or 1
    if threads == 1:
        return [_sweep_point(o, w, gamma, nu) for o, w in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda p: _sweep_point(p[0], p[1], gamma, nu), points))
