"""Physical constants and the derived scales of a 1D optical lattice.

Everything is SI internally.  The CLI layer converts from µs/nm/kHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ._validation import DomainError, check_positive

# CODATA 2018 (h exact by SI definition).
PLANCK_H = 6.62607015e-34  # J s
HBAR = PLANCK_H / (2.0 * math.pi)  # 1.05457e-34 J s
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
RB87_MASS = 86.909180527 * ATOMIC_MASS_UNIT  # 1.44316e-25 kg

# Nominal experiment: lattice from 774 nm beams crossing at 90 degrees.
DEFAULT_SPACING = 547e-9
DEFAULT_DEPTH = 5.0

# Above this sigma/d the on-site Gaussians overlap too much to treat sites as orthogonal.
TIGHT_BINDING_LIMIT = 0.25


def talbot_time(M: float, d: float) -> float:
    """Revival period 2 M d^2 / h of a matter wave released from the lattice."""
    M = check_positive(M, "M")
    d = check_positive(d, "d")
    return 2.0 * M * d**2 / PLANCK_H


def recoil_energy(M: float, d: float) -> float:
    """Lattice recoil energy pi^2 hbar^2 / (2 M d^2)."""
    M = check_positive(M, "M")
    d = check_positive(d, "d")
    return math.pi**2 * HBAR**2 / (2.0 * M * d**2)


def gaussian_width_from_depth(s: float, d: float) -> float:
    """On-site Gaussian width in the harmonic approximation of one well.

    Expanding ``s E_r sin^2(pi x / d)`` around a minimum gives an oscillator
    whose ground state has width ``d / (pi s**0.25)``.  At ``s = 5`` this gives
    ``2 pi^2 sigma^2 / d^2 = 2 / sqrt(5) = 0.894``.
    """
    s = check_positive(s, "s")
    d = check_positive(d, "d")
    return d / (math.pi * s**0.25)


def talbot_length(wavelength: float, d: float) -> float:
    """Spatial Talbot distance 2 d^2 / lambda."""
    wavelength = check_positive(wavelength, "wavelength")
    d = check_positive(d, "d")
    return 2.0 * d**2 / wavelength


@dataclass(frozen=True)
class DerivedScales:
    talbot_time: float
    recoil_energy: float
    exponent_factor: float
    talbot_length: Optional[float] = None


@dataclass(frozen=True)
class LatticeParams:
    """Lattice spacing, particle mass, depth and on-site width.

    ``sigma`` defaults to the harmonic-well estimate from ``s``.  Passing it
    explicitly overrides that estimate (e.g. ``sigma=d/5``).
    """

    d: float = DEFAULT_SPACING
    M: float = RB87_MASS
    s: float = DEFAULT_DEPTH
    sigma: Optional[float] = None
    lambda_opt: Optional[float] = None

    def __post_init__(self):
        check_positive(self.d, "d")
        check_positive(self.M, "M")
        check_positive(self.s, "s")
        if self.sigma is None:
            object.__setattr__(self, "sigma", gaussian_width_from_depth(self.s, self.d))
        check_positive(self.sigma, "sigma")
        if self.lambda_opt is not None:
            check_positive(self.lambda_opt, "lambda_opt")
        if not math.isfinite(self.sigma) or not math.isfinite(self.d):
            raise DomainError("d and sigma must be finite")

    @classmethod
    def dimensionless(cls, d_over_sigma: float, **kwargs) -> "LatticeParams":
        """Lattice with ``sigma = 1`` and ``d = d_over_sigma``; handy for the overlap formulas."""
        return cls(d=float(d_over_sigma), sigma=1.0, **kwargs)

    @property
    def tight_binding(self) -> bool:
        return self.sigma / self.d < TIGHT_BINDING_LIMIT

    @property
    def exponent_factor(self) -> float:
        """2 pi^2 sigma^2 / d^2, the Gaussian damping per revival order."""
        return 2.0 * math.pi**2 * self.sigma**2 / self.d**2

    @property
    def plateau(self) -> float:
        """sqrt(2 pi) sigma / d: the averaged overlap of a fully incoherent sample."""
        return math.sqrt(2.0 * math.pi) * self.sigma / self.d

    def scales(self) -> DerivedScales:
        return DerivedScales(
            talbot_time=talbot_time(self.M, self.d),
            recoil_energy=recoil_energy(self.M, self.d),
            exponent_factor=self.exponent_factor,
            talbot_length=None if self.lambda_opt is None else talbot_length(self.lambda_opt, self.d),
        )
