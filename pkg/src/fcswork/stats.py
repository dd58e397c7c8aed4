"""Distributions, moments and fluctuation-relation checks from generating functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fcswork import evolve
from fcswork.errors import NumericalError, PreconditionError

IMAG_TOL = 1e-6
NORM_TOL = 1e-6
NEGATIVE_TOL = 1e-6
BOUNDARY_MASS = 1e-8
CROOKS_FLOOR = 1e-6
MAX_GRID = 4096


@dataclass(frozen=True)
class EnergyDistribution:
    """Probabilities P(m * spacing) for m = offset, offset+1, ..."""

    spacing: float
    offset: int
    probabilities: np.ndarray

    @property
    def energies(self):
        return (self.offset + np.arange(len(self.probabilities))) * self.spacing

    def prob(self, energy):
        m = int(round(energy / self.spacing)) - self.offset
        if 0 <= m < len(self.probabilities):
            return float(self.probabilities[m])
        return 0.0

    def probs(self, m_lo, m_hi):
        """P at lattice indices m_lo..m_hi inclusive."""
        return np.array([self.prob(m * self.spacing) for m in range(m_lo, m_hi + 1)])

    def moment(self, k):
        return float(np.sum(self.probabilities * self.energies**k))

    @property
    def mean(self):
        return self.moment(1)

    @property
    def variance(self):
        return self.moment(2) - self.mean**2


@dataclass(frozen=True)
class MomentSet:
    mean: float
    variance: float
    ratio: float | None = None


def u_grid(n, spacing):
    """u_k = -pi/spacing + 2 pi k / (n spacing), k = 0..n-1."""
    if n < 2 or n & (n - 1):
        raise ValueError(f"grid size must be a power of two, got {n}")
    return -math.pi / spacing + 2 * math.pi * np.arange(n) / (n * spacing)


def _dft(samples, spacing):
    samples = np.asarray(samples, dtype=complex)
    n = len(samples)
    u = u_grid(n, spacing)
    m = np.arange(-n // 2, n // 2)
    return (np.exp(-1j * np.outer(m * spacing, u)) @ samples) / n


def _clean(p, label):
    if np.abs(p.imag).max() > IMAG_TOL:
        raise NumericalError(f"{label}: imaginary inversion residue {np.abs(p.imag).max():.2e}")
    p = p.real
    if p.min() < -NEGATIVE_TOL:
        raise NumericalError(f"{label}: negative probability {p.min():.2e}")
    return np.clip(p, 0.0, None)


def invert_distribution(samples, spacing, u=None):
    """Fourier-invert G sampled on the standard grid into an EnergyDistribution.

    If ``u`` is given it must equal :func:`u_grid` for ``len(samples)``.
    """
    n = len(samples)
    if u is not None and not np.allclose(np.asarray(u, dtype=complex), u_grid(n, spacing), atol=1e-12):
        raise ValueError("samples are not on the uniform counting-field grid")
    p = _clean(_dft(samples, spacing), "invert_distribution")
    total = p.sum()
    if abs(total - 1) > NORM_TOL:
        raise NumericalError(f"inverted distribution sums to {total:.8f}")
    return EnergyDistribution(float(spacing), -n // 2, p / total)


def _boundary_mass(p, width=2):
    return p[:width].sum() + p[-width:].sum()


def _lattice_spacing(model, spacing):
    energies = [ch.transition_energy for ch in model.channels]
    if spacing is None:
        spacing = energies[0]
    for nu in energies:
        ratio = nu / spacing
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"transition energy {nu} is not on the lattice of spacing {spacing}")
    return float(spacing)


def heat_distribution(model, t, spacing=None, n=64, dt=None):
    """P(Q) at time t; the grid doubles until the edge bins hold < 1e-8."""
    spacing = _lattice_spacing(model, spacing)
    while True:
        g = evolve.generating_function_heat(model, u_grid(n, spacing), t, dt=dt).value
        dist = invert_distribution(g, spacing)
        if _boundary_mass(dist.probabilities) < BOUNDARY_MASS or n >= MAX_GRID:
            return dist
        n *= 2


def work_distribution(model, t, spacing=None, n=64, reversed=False, dt=None):
    """P(w) at time t from the projector-resolved two-point kernel.

    Each (final level a, initial level b) block is inverted on the heat
    lattice and shifted by e_a - e_b rounded to the nearest lattice point, so
    off-lattice level shifts from the drive land in the nearest bin.
    """
    spacing = _lattice_spacing(model, spacing)
    while True:
        ker = evolve.two_point_kernel(model, u_grid(n, spacing), t, reversed=reversed, dt=dt)
        d = model.dim
        shifts = np.rint(np.subtract.outer(ker.energies_final, ker.energies_initial) / spacing).astype(int)
        pad = int(np.abs(shifts).max())
        acc = np.zeros(n + 2 * pad)
        edge = 0.0
        for a in range(d):
            for b in range(d):
                if ker.weights[b] == 0:
                    continue
                block = _clean(_dft(ker.kernel[a, b], spacing), "work_distribution") * ker.weights[b]
                edge += _boundary_mass(block)
                start = pad + shifts[a, b]
                acc[start:start + n] += block
        total = acc.sum()
        if abs(total - 1) > NORM_TOL:
            raise NumericalError(f"work distribution sums to {total:.8f}")
        if edge < BOUNDARY_MASS or n >= MAX_GRID:
            return EnergyDistribution(spacing, -n // 2 - pad, acc / total)
        n *= 2


def _stencil(h):
    return np.array([-2 * h, -h, -h / 2, 0.0, h / 2, h, 2 * h])


def cumulants_from_gf(sampler, h=0.02, rtol=1e-4):
    """First two cumulants from ``ln G`` by five-point differences plus Richardson.

    ``sampler`` maps an array of real u to complex G values (it may return a
    leading time axis: shape (..., 7)).  Returns (kappa1, kappa2) arrays.
    """
    u = _stencil(h)
    g = np.asarray(sampler(u))
    lg = np.log(g)
    m2h, mh, mh2, z, ph2, ph, p2h = (lg[..., i] for i in range(7))

    def d1(fm2, fm1, fp1, fp2, step):
        return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * step)

    def d2(fm2, fm1, f0, fp1, fp2, step):
        return (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * step**2)

    first_h, first_h2 = d1(m2h, mh, ph, p2h, h), d1(mh, mh2, ph2, ph, h / 2)
    second_h, second_h2 = d2(m2h, mh, z, ph, p2h, h), d2(mh, mh2, z, ph2, ph, h / 2)
    first = first_h2 + (first_h2 - first_h) / 15
    second = second_h2 + (second_h2 - second_h) / 15
    for coarse, fine in ((first_h, first_h2), (second_h, second_h2)):
        scale = np.maximum(np.abs(fine), 1e-12)
        if np.any(np.abs(coarse - fine) > rtol * scale + 1e-10):
            raise NumericalError("finite-difference cumulants unstable between step sizes")
    kappa1 = np.real(-1j * first)
    kappa2 = np.real(-second)
    return kappa1, kappa2


def moment_ratio(mean, variance, beta, nu):
    """tanh(beta nu / 2) <dx^2> / (nu <x>)."""
    factor = 1.0 if math.isinf(beta) else math.tanh(beta * nu / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return factor * np.asarray(variance) / (nu * np.asarray(mean))


def _moments(model, times, kind, h, dt, tol):
    nu = model.channels[0].transition_energy
    gf = evolve.generating_function_work if kind == "work" else evolve.generating_function_heat
    times = np.atleast_1d(np.asarray(times, dtype=float))

    def sampler(u):
        return gf(model, u, times, dt=dt, tol=tol).value

    k1, k2 = cumulants_from_gf(sampler, h=h / nu)
    ratio = moment_ratio(k1, k2, model.beta, nu)
    return [MomentSet(float(a), float(b), float(r)) for a, b, r in zip(k1, k2, ratio)]


def work_moments(model, times, h=0.02, dt=None, tol=1e-10):
    return _moments(model, times, "work", h, dt, tol)


def heat_moments(model, times, h=0.02, dt=None, tol=1e-10):
    return _moments(model, times, "heat", h, dt, tol)


def check_jarzynski(model, t, kind="work", dt=None):
    """|G(i beta, t) - 1| for the work (or, for contrast, the heat) generating function."""
    if math.isinf(model.beta):
        raise PreconditionError("Jarzynski check needs a finite temperature")
    gf = evolve.generating_function_work if kind == "work" else evolve.generating_function_heat
    return float(abs(gf(model, 1j * model.beta, t, dt=dt).value - 1))


def check_crooks(p_fwd, p_rev, beta, p_floor=CROOKS_FLOOR):
    """max |ln[P(w)/P_rev(-w)] - beta w| over lattice points above ``p_floor``."""
    if not math.isclose(p_fwd.spacing, p_rev.spacing):
        raise ValueError("distributions live on different lattices")
    worst = 0.0
    for w, p in zip(p_fwd.energies, p_fwd.probabilities):
        q = p_rev.prob(-w)
        if p > p_floor and q > p_floor:
            worst = max(worst, abs(math.log(p / q) - beta * w))
    return worst


def crooks_deviations(p_fwd, p_rev, beta, p_floor=CROOKS_FLOOR):
    """Per-point deviations {w: ln[P(w)/P_rev(-w)] - beta w}."""
    out = {}
    for w, p in zip(p_fwd.energies, p_fwd.probabilities):
        q = p_rev.prob(-w)
        if p > p_floor and q > p_floor:
            out[float(w)] = math.log(p / q) - beta * w
    return out


def check_symmetry(model, t, us, dt=None):
    """max |G_w(u, t) - G^tr_w(i beta - u, t)| over ``us``."""
    if math.isinf(model.beta):
        raise PreconditionError("symmetry relation needs a finite temperature")
    if not np.allclose(model.hamiltonian_at(0.0), model.hamiltonian_at(t), rtol=0, atol=1e-12):
        raise PreconditionError("symmetry relation requires H_S(0) == H_S(t)")
    us = np.asarray(us, dtype=complex)
    fwd = evolve.generating_function_work(model, us, t, dt=dt).value
    rev = evolve.generating_function_work_reversed(model, 1j * model.beta - us, t, dt=dt).value
    return float(np.abs(fwd - rev).max())


def jarzynski_sum(energies, probabilities, beta):
    """sum_w P(w) e^{-beta w}."""
    return float(np.sum(np.asarray(probabilities) * np.exp(-beta * np.asarray(energies))))
