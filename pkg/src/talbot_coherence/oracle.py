"""Brute-force reference paths that share no code with the closed forms.

``overlap_by_quadrature`` builds the lattice state on a position grid, moves
to momentum space with an FFT, applies the free-particle phase, transforms
back and integrates against the central orbital with the trapezoidal rule.
``monte_carlo_average`` samples phase configurations and averages the
per-realization overlap.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft

from ._validation import DomainError, check_positive
from .analytic import OverlapValue, PhaseConfiguration
from .disorder import DisorderModel, block_rng, iter_blocks, _sample_block
from .lattice import HBAR, LatticeParams, talbot_time

DEFAULT_STEP = 1.0 / 32  # in units of sigma
DEFAULT_PADDING = 12.0  # in units of sigma
MAX_STEP = 1.0 / 16
MIN_PADDING = 8.0


@dataclass(frozen=True)
class ComplexGrid:
    """Complex samples on a uniform axis (position or wavenumber)."""

    axis: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if axis.ndim != 1 or axis.size < 2:
            raise DomainError("grid axis needs at least two samples")
        if amplitudes.shape != axis.shape:
            raise DomainError(f"amplitudes {amplitudes.shape} do not match axis {axis.shape}")
        steps = np.diff(axis)
        if steps[0] <= 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise DomainError("grid axis must be uniformly increasing")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def spacing(self) -> float:
        return float(self.axis[1] - self.axis[0])

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.spacing)


def to_momentum(grid: ComplexGrid) -> ComplexGrid:
    """Phi(k) = int psi(x) exp(-ikx) dx sampled on the FFT wavenumbers (sorted)."""
    n, dx, x0 = grid.axis.size, grid.spacing, grid.axis[0]
    k = fft.fftshift(fft.fftfreq(n, dx)) * 2.0 * math.pi
    phi = fft.fftshift(fft.fft(grid.amplitudes)) * dx * np.exp(-1j * k * x0)
    return ComplexGrid(k, phi)


def to_position(grid: ComplexGrid, x0: float) -> ComplexGrid:
    """Inverse of ``to_momentum`` for a position axis starting at ``x0``."""
    n, dk = grid.axis.size, grid.spacing
    dx = 2.0 * math.pi / (n * dk)
    spectrum = fft.ifftshift(grid.amplitudes * np.exp(1j * grid.axis * x0))
    psi = fft.ifft(spectrum) / dx
    return ComplexGrid(x0 + dx * np.arange(n), psi)


def propagate_free(grid: ComplexGrid, t: float, M: float) -> ComplexGrid:
    """Free evolution of a momentum-space grid: multiply by exp(-i hbar k^2 t / 2M)."""
    M = check_positive(M, "M")
    return ComplexGrid(grid.axis, grid.amplitudes * np.exp(-1j * HBAR * grid.axis**2 * t / (2.0 * M)))


def _trapezoid(values: np.ndarray, dx: float) -> complex:
    return complex(np.trapezoid(values, dx=dx))


def overlap_by_quadrature(
    tau: float,
    params: LatticeParams,
    phases: PhaseConfiguration,
    step: Optional[float] = None,
    padding: Optional[float] = None,
    check_resolution: bool = True,
) -> OverlapValue:
    """Central-site overlap after ``tau`` Talbot times by grid propagation.

    ``step`` and ``padding`` are in units of sigma.  The box is widened by
    eight expanded-packet widths on each side so that FFT wrap-around stays
    negligible.  ``error_bound`` is the Richardson estimate from the same
    samples at twice the step.
    """
    sigma, d = float(params.sigma), float(params.d)
    step = DEFAULT_STEP if step is None else float(step)
    padding = DEFAULT_PADDING if padding is None else float(padding)
    if check_resolution and step > MAX_STEP:
        raise DomainError(f"grid step {step} sigma is coarser than sigma/16")
    if check_resolution and padding < MIN_PADDING:
        raise DomainError(f"padding {padding} sigma is below the 8 sigma minimum")

    dx = step * sigma
    spread = d**2 * abs(tau) / (math.pi * sigma)
    margin = padding * sigma + 8.0 * spread
    lo = phases.n_min * d - margin
    hi = phases.n_max * d + margin
    n = fft.next_fast_len(int(math.ceil((hi - lo) / dx)) + 1)
    # start on an even multiple of dx so both quadrature levels contain x = 0
    x = -2.0 * dx * math.ceil(-lo / (2.0 * dx)) + dx * np.arange(n)

    def orbital(u):
        return np.exp(-(u**2) / (2.0 * sigma**2)) / (math.pi**0.25 * math.sqrt(sigma))

    psi0 = orbital(x[:, None] - phases.sites * d) @ np.exp(1j * phases.phases)

    t = tau * talbot_time(params.M, d)
    evolved = to_position(propagate_free(to_momentum(ComplexGrid(x, psi0)), t, params.M), x[0])
    integrand = orbital(x) * evolved.amplitudes

    fine = _trapezoid(integrand, dx)
    coarse = _trapezoid(integrand[::2], 2.0 * dx)
    amp_error = abs(fine - coarse) / 3.0
    return OverlapValue(float(tau), abs(fine) ** 2, 2.0 * abs(fine) * amp_error + amp_error**2)


@dataclass(frozen=True)
class MonteCarloOverlap:
    tau: float
    value: float
    standard_error: float
    n_samples: int

    def __float__(self) -> float:
        return self.value


def _overlap_amplitudes(tau: float, sigma: float, d: float, n: np.ndarray) -> np.ndarray:
    # single-site projections of the expanded orbitals; kept local so the sampler
    # does not depend on analytic.py
    width = 2.0 * sigma**2 + 1j * d**2 * tau / math.pi
    return np.sqrt(2.0 * sigma**2 / width) * np.exp(-(d**2) * n**2 / (2.0 * width))


def default_window(tau: float, params: LatticeParams, minimum: int = 75) -> tuple[int, int]:
    sigma, d = float(params.sigma), float(params.d)
    rate = sigma**2 * d**2 / (4.0 * sigma**4 + tau**2 * d**4 / math.pi**2)
    half = max(minimum, math.ceil(math.sqrt(-math.log(1e-14) / rate)))
    return -half, half


def monte_carlo_average(
    tau: float,
    params: LatticeParams,
    model: DisorderModel,
    n_samples: int,
    seed: int = 0,
    window: Optional[tuple[int, int]] = None,
    workers: Optional[int] = None,
) -> MonteCarloOverlap:
    """Sample mean of the central-site overlap over phase realizations.

    Deterministic in ``(seed, n_samples)`` for any ``workers``.
    """
    if n_samples < 2:
        raise DomainError("monte_carlo_average needs n_samples >= 2")
    n_min, n_max = window or default_window(tau, params)
    sites = np.arange(n_min, n_max + 1)
    amps = _overlap_amplitudes(tau, float(params.sigma), float(params.d), sites)
    values = np.empty(n_samples)

    def run(block_range):
        block, start, stop = block_range
        phases = _sample_block(model, sites.size, stop - start, block_rng(seed, block))
        values[start:stop] = np.abs(np.exp(1j * phases) @ amps) ** 2

    blocks = list(iter_blocks(n_samples))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, blocks))
    else:
        for b in blocks:
            run(b)
    return MonteCarloOverlap(
        float(tau), float(values.mean()), float(values.std(ddof=1) / math.sqrt(n_samples)), n_samples
    )
