"""Closed-form wavefunctions, density overlaps and phase-averaged revival signals.

Times ``tau`` are in units of the Talbot time.  Lengths enter only through
``params.d`` and ``params.sigma``, so any consistent unit works; the
``LatticeParams.dimensionless`` constructor (``sigma = 1``) is convenient.

Infinite lattice sums are truncated where the Gaussian factor of the last
kept term drops below ``SERIES_RTOL`` (the ``n = 0`` term is 1, so this is
also relative to the running sum), with at most ``SERIES_CAP`` terms on each
side.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._validation import DomainError, check_positive
from .lattice import HBAR, LatticeParams

SERIES_RTOL = 1e-14
SERIES_CAP = 512


class TruncationWarning(RuntimeWarning):
    """A lattice sum hit ``SERIES_CAP`` before reaching ``SERIES_RTOL``."""


def gaussian_cutoff(rate: float, rtol: float = SERIES_RTOL, cap: int = SERIES_CAP) -> int:
    """Smallest K with exp(-rate K^2) < rtol, capped at ``cap``."""
    if rate <= 0:
        raise DomainError(f"series decay rate must be > 0, got {rate}")
    k = math.ceil(math.sqrt(-math.log(rtol) / rate))
    if k > cap:
        warnings.warn(
            f"lattice sum truncated at |n| <= {cap} (needed {k})", TruncationWarning, stacklevel=3
        )
        return cap
    return k


def gaussian_tail(rate: float, k: int) -> float:
    """Upper bound on sum_{|n| > k} exp(-rate n^2)."""
    first = math.exp(-rate * (k + 1) ** 2)
    ratio = math.exp(-rate * (2 * k + 3))
    return 2.0 * first / (1.0 - ratio)


@dataclass(frozen=True)
class PhaseConfiguration:
    """Site phases ``phases[i]`` for sites ``n_min + i``, ``n_min <= 0 <= n_max``."""

    n_min: int
    n_max: int
    phases: np.ndarray = field(repr=False)

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float).reshape(-1)
        if not (self.n_min <= 0 <= self.n_max):
            raise DomainError(f"window [{self.n_min}, {self.n_max}] must contain site 0")
        if phases.size != self.n_max - self.n_min + 1:
            raise DomainError(
                f"expected {self.n_max - self.n_min + 1} phases for window "
                f"[{self.n_min}, {self.n_max}], got {phases.size}"
            )
        if not np.all(np.isfinite(phases)):
            raise DomainError("phases must be finite")
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def uniform(cls, half_width: int, phase: float = 0.0) -> "PhaseConfiguration":
        return cls(-half_width, half_width, np.full(2 * half_width + 1, float(phase)))

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], half_width: int) -> "PhaseConfiguration":
        n = np.arange(-half_width, half_width + 1)
        return cls(-half_width, half_width, np.broadcast_to(func(n), n.shape))

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def __len__(self) -> int:
        return self.phases.size


@dataclass(frozen=True)
class CorrelatorProfile:
    """Real phase correlators C_N for N = 0 .. n_max, with C_{-N} = C_N."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if np.iscomplexobj(values):
            if np.any(values.imag != 0):
                raise DomainError("complex phase correlators are not supported")
            values = values.real
        values = np.array(values, dtype=float).reshape(-1)
        if values.size == 0:
            raise DomainError("correlator profile is empty")
        if not np.all(np.isfinite(values)):
            raise DomainError("correlators must be finite")
        if abs(values[0] - 1.0) > 1e-12:
            raise DomainError(f"C_0 must be 1, got {values[0]!r}")
        if np.any(np.abs(values) > 1.0 + 1e-12):
            raise DomainError("correlators must satisfy |C_N| <= 1")
        values[0] = 1.0
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], n_max: int) -> "CorrelatorProfile":
        n = np.arange(n_max + 1)
        return cls(np.broadcast_to(np.asarray(func(n), dtype=float), n.shape))

    @classmethod
    def constant(cls, c: float, n_max: int = 1024) -> "CorrelatorProfile":
        values = np.full(n_max + 1, float(c))
        values[0] = 1.0
        return cls(values)

    @classmethod
    def delta(cls, n_max: int = 1024) -> "CorrelatorProfile":
        return cls.constant(0.0, n_max)

    @property
    def n_max(self) -> int:
        return self.values.size - 1

    def require(self, n: int) -> None:
        if n > self.n_max:
            raise DomainError(
                f"correlator profile stops at N = {self.n_max}, but N = {n} is needed"
            )

    def __getitem__(self, separation):
        return self.values[np.abs(separation)]

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class OverlapValue:
    """Density overlap with the central site at time ``tau``.

    ``error_bound`` bounds the truncation (or quadrature) error where one is known.
    """

    tau: float
    value: float
    error_bound: float = 0.0

    def __float__(self) -> float:
        return self.value


def _sigma_d(params: LatticeParams) -> tuple[float, float]:
    return float(params.sigma), float(params.d)


def _denominator(tau: float, sigma: float, d: float) -> float:
    # 4 sigma^4 + tau^2 d^4 / pi^2 = |2 sigma^2 + i d^2 tau / pi|^2
    return 4.0 * sigma**4 + tau**2 * d**4 / math.pi**2


def site_wavefunction(x, sigma: float):
    """Normalized Gaussian on-site orbital centred at x = 0."""
    sigma = check_positive(sigma, "sigma")
    x = np.asarray(x, dtype=float)
    return np.exp(-(x**2) / (2.0 * sigma**2)) / (math.pi**0.25 * math.sqrt(sigma))


def lattice_wavefunction(x, params: LatticeParams, phases: PhaseConfiguration):
    """Initial state: superposition of phased site orbitals."""
    x = np.asarray(x, dtype=float)
    n = phases.sites
    orbitals = site_wavefunction(x[..., None] - n * params.d, params.sigma)
    return orbitals @ np.exp(1j * phases.phases)


def momentum_wavefunction(k, t: float, params: LatticeParams, phases: PhaseConfiguration):
    """Momentum amplitude after free evolution for a physical time ``t`` (s).

    Uses the transform convention Phi(k) = int psi(x) exp(ikx) dx.
    """
    sigma, d = _sigma_d(params)
    k = np.asarray(k, dtype=float)
    envelope = math.pi**0.25 * math.sqrt(2.0 * sigma) * np.exp(
        -(k**2) * sigma**2 / 2.0 - 1j * HBAR * k**2 * t / (2.0 * params.M)
    )
    comb = np.exp(1j * (np.multiply.outer(k, phases.sites * d) + phases.phases)).sum(axis=-1)
    return envelope * comb


def position_wavefunction(x, tau: float, params: LatticeParams, phases: PhaseConfiguration):
    """Phased lattice state after free expansion for ``tau`` Talbot times.

    Each site becomes a Gaussian of complex width sigma^2 + i d^2 tau / pi.
    """
    sigma, d = _sigma_d(params)
    x = np.asarray(x, dtype=float)
    width = sigma**2 + 1j * d**2 * tau / math.pi
    prefactor = math.sqrt(sigma) / (math.pi**0.25 * np.sqrt(width))
    offsets = x[..., None] - phases.sites * d
    terms = np.exp(-(offsets**2) / (2.0 * width) + 1j * phases.phases)
    return prefactor * terms.sum(axis=-1)


def _overlap_amplitudes(tau: float, sigma: float, d: float, n: np.ndarray):
    width = 2.0 * sigma**2 + 1j * d**2 * tau / math.pi
    # principal branch: Re(width) > 0 keeps the prefactor continuous in tau, equal to 1 at tau = 0
    prefactor = np.sqrt(2.0 * sigma**2 / width)
    return prefactor * np.exp(-(d**2) * n**2 / (2.0 * width))


def density_overlap(tau: float, params: LatticeParams, phases: PhaseConfiguration) -> OverlapValue:
    """Overlap |<psi|Psi(tau)>|^2 of the expanded lattice state with the central site."""
    sigma, d = _sigma_d(params)
    amplitude = np.sum(_overlap_amplitudes(tau, sigma, d, phases.sites) * np.exp(1j * phases.phases))
    return OverlapValue(float(tau), float(abs(amplitude) ** 2))


def density_overlap_curve(taus, params: LatticeParams, phases: PhaseConfiguration) -> np.ndarray:
    """Vectorized ``density_overlap`` over an array of times."""
    sigma, d = _sigma_d(params)
    taus = np.asarray(taus, dtype=float)
    amps = _overlap_amplitudes(taus[..., None], sigma, d, phases.sites)
    return np.abs(amps @ np.exp(1j * phases.phases)) ** 2


def averaged_overlap_exact(tau: float, params: LatticeParams, correlators: CorrelatorProfile) -> OverlapValue:
    """Phase-averaged overlap from the full double lattice sum.

    Sum over n, n' of C_{n-n'} g_n conj(g_n'), with g_n the single-site overlap
    amplitudes.  The window |n| <= K is symmetric; the profile must reach 2K.
    """
    sigma, d = _sigma_d(params)
    denom = _denominator(tau, sigma, d)
    rate = sigma**2 * d**2 / denom
    k = gaussian_cutoff(rate)
    correlators.require(2 * k)
    n = np.arange(-k, k + 1)
    g = _overlap_amplitudes(tau, sigma, d, n)
    toeplitz = correlators[n[:, None] - n[None, :]]
    value = float(np.real(g @ toeplitz @ g.conj()))

    weight = 2.0 * sigma**2 / math.sqrt(denom)
    kept = float(np.sum(np.abs(g))) / math.sqrt(weight)
    tail = gaussian_tail(rate, k)
    return OverlapValue(float(tau), value, weight * (2.0 * kept * tail + tail**2))


def overlap_upper_bound(params: LatticeParams) -> float:
    """Ceiling 1 + eps on any phase-averaged overlap with a positive-definite correlator.

    The lattice orbitals are not orthogonal, so the overlap can exceed 1.  For
    C_N that is the Fourier series of a probability measure (any physical phase
    ensemble) the overlap never exceeds theta**2 at any tau, where
    theta = sum_n exp(-d^2 n^2 / 4 sigma^2) is the lattice sum of orbital
    overlaps.  At d = 5 sigma, eps = theta**2 - 1 is about 7.7e-3.
    """
    sigma, d = _sigma_d(params)
    rate = d**2 / (4.0 * sigma**2)
    k = gaussian_cutoff(rate)
    n = np.arange(1, k + 1)
    theta = 1.0 + 2.0 * float(np.exp(-rate * n**2).sum())
    return theta**2


def _weight_coefficients(tau: float, sigma: float, d: float) -> tuple[float, float, float]:
    """(|A|^2, b, c): prefactor, Gaussian rate and phase rate of the weight series."""
    denom = _denominator(tau, sigma, d)
    prefactor = 2.0 * sigma**2 / math.sqrt(denom)
    b = 2.0 * sigma**2 * d**2 / denom
    c = 2.0 * tau * d**4 / (math.pi * denom)
    return prefactor, b, c


def _direct_weight(shift: float, L: int, tau: float, params: LatticeParams, k_max):
    sigma, d = _sigma_d(params)
    prefactor, b, c = _weight_coefficients(tau, sigma, d)
    k = gaussian_cutoff(b) if k_max is None else int(k_max)
    big_k = np.arange(-k - 1, k + 1) + shift if shift else np.arange(-k, k + 1)
    ell = L + shift
    series = np.sum(np.exp(-b * big_k**2 + 1j * c * ell * big_k))
    outer = prefactor * math.exp(-b * ell**2)
    return outer * series, outer * gaussian_tail(b, k)


def weight_even(L: int, tau: float, params: LatticeParams, k_max=None, with_tail: bool = False):
    """Weight F_{2L}(tau) of the even-separation correlator C_{2L}.

    With ``with_tail=True`` returns ``(value, tail_bound)``.
    """
    value, tail = _direct_weight(0.0, int(L), tau, params, k_max)
    return (value, tail) if with_tail else value


def weight_odd(L: int, tau: float, params: LatticeParams, k_max=None, with_tail: bool = False):
    """Weight F_{2L+1}(tau) of the odd-separation correlator C_{2L+1}."""
    value, tail = _direct_weight(0.5, int(L), tau, params, k_max)
    return (value, tail) if with_tail else value


def _dual_weight(shift: float, L: int, tau: float, params: LatticeParams, n_max, alternating: bool):
    # Poisson-resummed form.  Written with b and c rather than with
    # 1 + 4 pi^2 sigma^4 / (tau^2 d^4) so that tau = 0 stays regular; the two
    # groupings are algebraically identical for tau != 0.
    sigma, d = _sigma_d(params)
    _, b, c = _weight_coefficients(tau, sigma, d)
    ell = L + shift
    rate = math.pi**2 / b
    half = gaussian_cutoff(rate) if n_max is None else int(n_max)
    centre = round(c * ell / (2.0 * math.pi))
    n = np.arange(centre - half, centre + half + 1)
    terms = np.exp(-((c * ell - 2.0 * math.pi * n) ** 2) / (4.0 * b))
    if alternating:
        terms = terms * np.where(n % 2 == 0, 1.0, -1.0)
    outer = math.sqrt(2.0 * math.pi) * sigma / d * math.exp(-b * ell**2)
    return complex(outer * terms.sum()), outer * gaussian_tail(rate, half)


def weight_even_dual(L: int, tau: float, params: LatticeParams, n_max=None, with_tail: bool = False):
    """F_{2L}(tau) evaluated through the dual (Poisson-transformed) series."""
    value, tail = _dual_weight(0.0, int(L), tau, params, n_max, alternating=False)
    return (value, tail) if with_tail else value


def weight_odd_dual(L: int, tau: float, params: LatticeParams, n_max=None, with_tail: bool = False):
    """F_{2L+1}(tau) through the dual series; carries the (-1)^n alternation."""
    value, tail = _dual_weight(0.5, int(L), tau, params, n_max, alternating=True)
    return (value, tail) if with_tail else value


def averaged_overlap_from_weights(
    tau: float, params: LatticeParams, correlators: CorrelatorProfile, dual: bool = False
) -> OverlapValue:
    """Averaged overlap as sum_L [C_{2L} F_{2L} + C_{2L+1} F_{2L+1}]."""
    sigma, d = _sigma_d(params)
    _, b, _ = _weight_coefficients(tau, sigma, d)
    half = gaussian_cutoff(b)
    correlators.require(2 * half + 2)
    even = weight_even_dual if dual else weight_even
    odd = weight_odd_dual if dual else weight_odd
    total = 0.0
    bound = 0.0
    for L in range(-half - 1, half + 1):
        fe, te = even(L, tau, params, with_tail=True)
        fo, to = odd(L, tau, params, with_tail=True)
        total += correlators[2 * L] * fe.real + correlators[2 * L + 1] * fo.real
        bound += te + to
    return OverlapValue(float(tau), float(total), bound)


def _revival_sum(K: int, alternating: bool, params: LatticeParams, correlators: CorrelatorProfile) -> OverlapValue:
    a = params.exponent_factor
    half = gaussian_cutoff(a)
    correlators.require(K * half)
    n = np.arange(-half, half + 1)
    terms = correlators[K * n] * np.exp(-a * n**2)
    if alternating:
        terms = terms * np.where(n % 2 == 0, 1.0, -1.0)
    value = params.plateau * float(terms.sum())
    return value, params.plateau * gaussian_tail(a, half)


def averaged_overlap_revival(N: int, params: LatticeParams, correlators: CorrelatorProfile) -> OverlapValue:
    """Averaged overlap at tau = N in the well-separated-site limit.

    plateau * sum_n C_{2Nn} exp(-2 pi^2 sigma^2 n^2 / d^2)
    """
    N = _check_order(N)
    value, tail = _revival_sum(2 * N, False, params, correlators)
    return OverlapValue(float(N), value, tail)


def averaged_overlap_antirevival(N: int, params: LatticeParams, correlators: CorrelatorProfile) -> OverlapValue:
    """Averaged overlap at tau = N + 1/2: alternating sum over C_{(2N+1)n}.

    Only the leading order in exp(-d^2 / 8 sigma^2) is kept, so for
    ``d ~ 5 sigma`` and strongly coherent samples it can differ from the
    exact double sum by a sizeable fraction of the plateau.
    """
    N = _check_order(N)
    value, tail = _revival_sum(2 * N + 1, True, params, correlators)
    return OverlapValue(N + 0.5, value, tail)


def leading_order_overlap(tau: float, params: LatticeParams, correlators: CorrelatorProfile) -> OverlapValue:
    """Two-term truncation plateau * [1 +/- 2 C_K exp(-2 pi^2 sigma^2 / d^2)].

    ``tau`` must be an integer N (K = 2N, plus sign) or N + 1/2 (K = 2N + 1, minus sign).
    """
    K = round(2.0 * tau)
    if K < 0 or abs(2.0 * tau - K) > 1e-12:
        raise DomainError(f"tau must be a non-negative integer or half-integer, got {tau}")
    correlators.require(K)
    a = params.exponent_factor
    sign = 1.0 if K % 2 == 0 else -1.0
    value = params.plateau * (1.0 + sign * 2.0 * correlators[K] * math.exp(-a))
    # neglected terms |n| >= 2, each with |C| <= 1
    return OverlapValue(K / 2.0, value, params.plateau * gaussian_tail(a, 1))


def _check_order(N) -> int:
    if int(N) != N or N < 0:
        raise DomainError(f"revival order must be a non-negative integer, got {N}")
    return int(N)
