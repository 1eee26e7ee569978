"""From Talbot traces to coherence lengths and their growth after a quench.

The estimators follow the scikit-learn conventions: hyperparameters in
``__init__``, learned attributes with a trailing underscore after ``fit``,
``X`` holding times (or equilibration times) as a single column.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from scipy import optimize, signal as sps, stats
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import DomainError, check_1d, check_nonnegative, check_positive, check_strictly_increasing
from .analytic import CorrelatorProfile
from .disorder import block_rng, exponential_coherence_length
from .lattice import HBAR, LatticeParams, talbot_time

log = logging.getLogger(__name__)

INFINITE_COHERENCE = math.inf
"""Sentinel for long-range order (the reference condensate).  Never a large finite float."""

MIN_POINTS = 12
MIN_PERIODS = 1.5
PARAM_NAMES = ("amplitude", "talbot_time_fit", "decay_time", "phase_offset", "baseline")


class FitError(RuntimeError):
    """The damped-sine fit did not converge.  ``best_residual`` is the best norm reached."""

    def __init__(self, message: str, best_residual: float = math.inf):
        super().__init__(message)
        self.best_residual = best_residual


class NoOscillationError(FitError):
    pass


@dataclass(frozen=True)
class TalbotSignal:
    """Interferometer trace: blanking times (s), observable, optional 1-sigma errors."""

    times: np.ndarray
    values: np.ndarray
    sigmas: Optional[np.ndarray] = None

    def __post_init__(self):
        times = check_1d(self.times, "times")
        values = check_1d(self.values, "values")
        if times.shape != values.shape:
            raise DomainError("times and values must have the same length")
        if times[0] < 0:
            raise DomainError("times must be >= 0")
        check_strictly_increasing(times, "times")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.sigmas is not None:
            sigmas = check_1d(self.sigmas, "sigmas")
            if sigmas.shape != times.shape or np.any(sigmas <= 0):
                raise DomainError("sigmas must match times and be > 0")
            object.__setattr__(self, "sigmas", sigmas)


@dataclass(frozen=True)
class FitResult:
    """Damped sine ``baseline + amplitude exp(-t/decay_time) sin(2 pi t/talbot_time_fit + phase_offset)``.

    ``covariance`` follows the order of ``PARAM_NAMES``.
    """

    amplitude: float
    talbot_time_fit: float
    decay_time: float
    phase_offset: float
    baseline: float
    covariance: np.ndarray = field(repr=False)
    residual_norm: float = 0.0
    n_points: int = 0

    @property
    def stderr(self) -> dict:
        return dict(zip(PARAM_NAMES, np.sqrt(np.clip(np.diag(self.covariance), 0, None))))

    def predict(self, t):
        return damped_sine(
            np.asarray(t, dtype=float),
            self.amplitude, self.talbot_time_fit, self.decay_time, self.phase_offset, self.baseline,
        )


def damped_sine(t, amplitude, period, decay_time, phase, baseline):
    envelope = np.exp(-t / decay_time) if math.isfinite(decay_time) else 1.0
    return baseline + amplitude * envelope * np.sin(2.0 * math.pi * t / period + phase)


def _as_times(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise DomainError(f"expected a single column of times, got shape {X.shape}")
        X = X[:, 0]
    return check_1d(X, "X")


def _wrap_phase(phi: float) -> float:
    return float((phi + math.pi) % (2.0 * math.pi) - math.pi)


class DampedSineRegressor(RegressorMixin, BaseEstimator):
    """Weighted least-squares fit of an exponentially damped sine.

    Parameters
    ----------
    talbot_time_guess : float, optional
        Expected period (s).  Centre of the multistart frequency grid; if
        omitted, the Lomb-Scargle peak of the data is used.
    n_phase_starts, n_freq_starts : int
        Multistart grid size (phases over one cycle, frequencies within
        ``freq_spread`` of the centre).
    initial_guess : dict, optional
        Keys from ``PARAM_NAMES``.  A complete guess replaces the multistart.
    gtol : float
        Scaled gradient tolerance of the Levenberg-Marquardt solver.
    """

    def __init__(
        self,
        talbot_time_guess: Optional[float] = None,
        n_phase_starts: int = 8,
        n_freq_starts: int = 5,
        freq_spread: float = 0.1,
        initial_guess: Optional[dict] = None,
        gtol: float = 1e-10,
        max_nfev: int = 4000,
    ):
        self.talbot_time_guess = talbot_time_guess
        self.n_phase_starts = n_phase_starts
        self.n_freq_starts = n_freq_starts
        self.freq_spread = freq_spread
        self.initial_guess = initial_guess
        self.gtol = gtol
        self.max_nfev = max_nfev

    def fit(self, X, y, sample_weight=None):
        t = _as_times(X)
        y = check_1d(y, "y")
        if t.shape != y.shape:
            raise DomainError("X and y have different lengths")
        if t.size < MIN_POINTS:
            raise DomainError(f"need at least {MIN_POINTS} points, got {t.size}")
        spread = np.ptp(y)
        if spread <= 1e-12 * max(1.0, float(np.max(np.abs(y)))):
            raise NoOscillationError("no oscillation detected: signal is constant")
        if sample_weight is None:
            weights = np.ones_like(y)
            absolute = False
        else:
            weights = check_1d(sample_weight, "sample_weight")
            if weights.shape != y.shape or np.any(weights <= 0):
                raise DomainError("sample_weight must be positive and match y")
            absolute = True
        if self.talbot_time_guess is not None:
            self._check_span(t, check_positive(self.talbot_time_guess, "talbot_time_guess"))

        # fit in units of the span and of the data spread for conditioning
        t0, span = float(t[0]), float(t[-1] - t[0])
        u = (t - t0) / span
        y_mid = float(np.mean(y))
        v = (y - y_mid) / spread
        sqrt_w = np.sqrt(weights / np.mean(weights)) if not absolute else np.sqrt(weights) * spread

        def residuals(p):
            b, a, g, f, phi = p
            with np.errstate(over="ignore"):
                return sqrt_w * (b + a * np.exp(-g * u) * np.sin(2.0 * math.pi * f * u + phi) - v)

        # frequencies (cycles per span) above Nyquist alias onto lower ones
        nyquist = 0.5 / float(np.median(np.diff(u)))
        best = None
        best_residual = math.inf
        for start in self._starts(u, v, t0, span, y_mid, spread):
            try:
                res = optimize.least_squares(
                    residuals, start, method="lm", x_scale="jac",
                    gtol=self.gtol, ftol=1e-15, xtol=1e-15, max_nfev=self.max_nfev,
                )
            except (ValueError, np.linalg.LinAlgError):
                continue
            if np.isfinite(res.cost):
                best_residual = min(best_residual, math.sqrt(2.0 * res.cost))
            if not np.all(np.isfinite(res.x)) or res.status <= 0 or not 0 < res.x[3] < nyquist:
                continue
            if best is None or res.cost < best.cost:
                best = res
        if best is None:
            raise FitError("damped-sine fit did not converge from any start", best_residual)

        self.result_ = self._to_result(best, t.size, t0, span, y_mid, spread, absolute)
        self._check_span(t, self.result_.talbot_time_fit)
        for name in PARAM_NAMES:
            setattr(self, name + "_", getattr(self.result_, name))
        self.covariance_ = self.result_.covariance
        self.residual_norm_ = self.result_.residual_norm
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        return self.result_.predict(_as_times(X))

    @staticmethod
    def _check_span(t, period):
        if (t[-1] - t[0]) < MIN_PERIODS * period:
            raise DomainError(
                f"data span {t[-1] - t[0]:.3g} s covers fewer than {MIN_PERIODS} periods of {period:.3g} s"
            )

    def _starts(self, u, v, t0, span, y_mid, spread):
        guess = self.initial_guess or {}
        if all(k in guess for k in PARAM_NAMES):
            decay = guess["decay_time"]
            yield np.array([
                (guess["baseline"] - y_mid) / spread,
                guess["amplitude"] * math.exp(-t0 / decay if math.isfinite(decay) else 0.0) / spread,
                span / decay if math.isfinite(decay) else 0.0,
                span / guess["talbot_time_fit"],
                guess["phase_offset"] + 2.0 * math.pi * t0 / guess["talbot_time_fit"],
            ])
            return
        period = guess.get("talbot_time_fit", self.talbot_time_guess)
        if period is None:
            period = _periodogram_period(u * span, v)
        f0 = span / period
        freqs = f0 * (1.0 + self.freq_spread * np.linspace(-1.0, 1.0, self.n_freq_starts))
        phases = np.linspace(0.0, 2.0 * math.pi, self.n_phase_starts, endpoint=False)
        g0 = 1.0
        for f in freqs:
            for phi in phases:
                basis = np.column_stack([np.ones_like(u), np.exp(-g0 * u) * np.sin(2.0 * math.pi * f * u + phi)])
                (b, a), *_ = np.linalg.lstsq(basis, v, rcond=None)
                yield np.array([b, a, g0, f, phi])

    def _to_result(self, res, n, t0, span, y_mid, spread, absolute) -> FitResult:
        b, a, g, f, phi = res.x
        sign = 1.0
        if a < 0:
            sign, a, phi = -1.0, -a, phi + math.pi
        jac = res.jac
        dof = max(n - 5, 1)
        cov = np.linalg.pinv(jac.T @ jac)
        if not absolute:
            cov = cov * (2.0 * res.cost / dof)
        # shift the time origin back from t0 to 0
        period = span / f
        decay = span / g if g > 0 else math.inf
        amplitude = spread * a * (math.exp(g * t0 / span) if g > 0 else 1.0)
        phase = _wrap_phase(phi - 2.0 * math.pi * f * t0 / span)
        # Jacobian of (A, T, t_T, phi, baseline) with respect to (b, a, g, f, phi)
        D = np.zeros((5, 5))
        D[0, 1] = sign * spread * (math.exp(g * t0 / span) if g > 0 else 1.0)
        D[0, 2] = amplitude * t0 / span if g > 0 else 0.0
        D[1, 3] = -span / f**2
        D[2, 2] = -span / g**2 if g > 0 else 0.0
        D[3, 4] = 1.0
        D[3, 3] = -2.0 * math.pi * t0 / span
        D[4, 0] = spread
        covariance = D @ cov @ D.T
        covariance = 0.5 * (covariance + covariance.T)
        if decay == math.inf:
            covariance[2, :] = covariance[:, 2] = 0.0
            covariance[2, 2] = math.inf
        residual_norm = math.sqrt(2.0 * res.cost) * (1.0 if absolute else spread)
        return FitResult(
            amplitude=float(amplitude),
            talbot_time_fit=float(period),
            decay_time=float(decay),
            phase_offset=phase,
            baseline=float(y_mid + spread * b),
            covariance=covariance,
            residual_norm=float(residual_norm),
            n_points=n,
        )


def _periodogram_period(t: np.ndarray, v: np.ndarray) -> float:
    span = t[-1] - t[0]
    min_period = 2.0 * span / (t.size - 1)
    freqs = np.linspace(1.0 / span, 1.0 / min_period, 4096)
    power = sps.lombscargle(t, v - v.mean(), 2.0 * math.pi * freqs)
    return float(1.0 / freqs[np.argmax(power)])


def fit_damped_sine(
    signal: TalbotSignal,
    initial_guess: Optional[dict] = None,
    talbot_time_guess: Optional[float] = None,
) -> FitResult:
    """Fit a damped sine to a Talbot trace; inverse-variance weights when ``sigmas`` are present."""
    weights = None if signal.sigmas is None else 1.0 / signal.sigmas**2
    model = DampedSineRegressor(talbot_time_guess=talbot_time_guess, initial_guess=initial_guess)
    return model.fit(signal.times, signal.values, sample_weight=weights).result_


def xi_from_decay(decay_time: float, talbot_time: float) -> float:
    """Decay length in sites, 2 t_T / T_T: one Talbot time probes two lattice sites."""
    decay_time = check_positive(decay_time, "decay_time")
    talbot_time = check_positive(talbot_time, "talbot_time")
    return 2.0 * decay_time / talbot_time


def decay_from_xi(xi: float, talbot_time: float) -> float:
    """Inverse of ``xi_from_decay``."""
    xi = check_positive(xi, "xi")
    talbot_time = check_positive(talbot_time, "talbot_time")
    return xi * talbot_time / 2.0


def combine_decay_lengths(xi_coh: float, xi_ref: float) -> float:
    """Observed length xi0 with 1/xi0 = 1/xi_coh + 1/xi_ref; either may be infinite, xi_coh may be 0."""
    xi_coh = check_nonnegative(xi_coh, "xi_coh")
    xi_ref = check_positive(xi_ref, "xi_ref")
    if xi_coh == 0:
        return 0.0
    if math.isinf(xi_coh) and math.isinf(xi_ref):
        return INFINITE_COHERENCE
    return 1.0 / (1.0 / xi_coh + 1.0 / xi_ref)


def coherence_correction(xi0: float, xi_ref: float, tolerance: float = 0.0) -> float:
    """Remove the reference decay: xi_coh = 1 / (1/xi0 - 1/xi_ref).

    Returns ``INFINITE_COHERENCE`` when ``xi0`` equals ``xi_ref`` within
    ``tolerance``.  ``xi0`` beyond that is unphysical and raises DomainError.
    """
    xi0 = check_positive(xi0, "xi0")
    xi_ref = check_positive(xi_ref, "xi_ref")
    if math.isinf(xi_ref):
        return xi0
    if abs(xi0 - xi_ref) <= tolerance or xi0 == xi_ref:
        return INFINITE_COHERENCE
    if xi0 > xi_ref:
        raise DomainError(f"xi0 = {xi0:.6g} exceeds the reference length {xi_ref:.6g}")
    return 1.0 / (1.0 / xi0 - 1.0 / xi_ref)


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    exponent_stderr: float
    prefactor: float
    n_used: int
    excluded: tuple = ()

    def curve(self, t, anchor: Optional[tuple[float, float]] = None):
        """prefactor * t**exponent, optionally rescaled to pass through ``anchor = (t0, xi0)``."""
        t = np.asarray(t, dtype=float)
        prefactor = self.prefactor if anchor is None else anchor[1] / anchor[0] ** self.exponent
        return prefactor * t**self.exponent


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Straight-line fit of log(y) against log(x); the slope is the exponent.

    Points with infinite ``y`` (long-range order) are dropped and recorded in
    ``excluded_``.  The slope error comes from the residual variance.
    """

    def __init__(self, min_points: int = 3):
        self.min_points = min_points

    def fit(self, X, y):
        x = np.asarray(_as_times(X) if np.ndim(X) == 2 else X, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        if x.shape != y.shape:
            raise DomainError("X and y have different lengths")
        usable = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
        if np.any((x <= 0) | (y <= 0)):
            raise DomainError("power-law fit needs positive values")
        if usable.sum() < self.min_points:
            raise DomainError(f"need at least {self.min_points} finite points, got {int(usable.sum())}")
        lr = stats.linregress(np.log(x[usable]), np.log(y[usable]))
        stderr = float(lr.stderr) if usable.sum() > 2 else math.nan
        self.exponent_ = float(lr.slope)
        self.exponent_stderr_ = stderr
        self.prefactor_ = float(math.exp(lr.intercept))
        self.excluded_ = tuple(int(i) for i in np.flatnonzero(~usable))
        self.result_ = PowerLawFit(self.exponent_, stderr, self.prefactor_, int(usable.sum()), self.excluded_)
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        return self.result_.curve(np.asarray(X, dtype=float).reshape(-1))


def fit_power_law(t_Q, xi_coh) -> PowerLawFit:
    """Exponent alpha of xi_coh ~ t_Q**alpha by log-log least squares."""
    return PowerLawRegressor().fit(np.asarray(t_Q, dtype=float), xi_coh).result_


def transport_bounds(J_over_hbar: float, t_Q):
    """Fastest (ballistic, 2 J t / hbar) and random-walk (sqrt(J t / hbar)) spread, in sites."""
    rate = check_positive(J_over_hbar, "J_over_hbar")
    t = np.asarray(t_Q, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("t_Q must be > 0")
    ballistic = 2.0 * rate * t
    diffusive = np.sqrt(rate * t)
    if ballistic.ndim == 0:
        return float(ballistic), float(diffusive)
    return ballistic, diffusive


def bound_curves(J_over_hbar: float, t_Q, anchor: Optional[tuple[float, float]] = None):
    """Transport bounds on a grid, optionally offset to pass through ``anchor = (t0, xi0)``."""
    ballistic, diffusive = transport_bounds(J_over_hbar, np.atleast_1d(t_Q))
    if anchor is not None:
        b0, d0 = transport_bounds(J_over_hbar, anchor[0])
        ballistic = ballistic - b0 + anchor[1]
        diffusive = diffusive - d0 + anchor[1]
    return ballistic, diffusive


def interaction_decay_estimate(mu: float, sigma: float, d: float) -> float:
    """Time for the mean-field force mu/(pi sigma) to smear a momentum peak over one Brillouin zone."""
    mu = check_positive(mu, "mu")
    sigma = check_positive(sigma, "sigma")
    d = check_positive(d, "d")
    brillouin = 2.0 * math.pi * HBAR / d
    force = mu / (math.pi * sigma)
    return brillouin / force


def synthesize_signal(
    params: LatticeParams,
    profile: CorrelatorProfile,
    xi_ref: float,
    times,
    noise_sigma: float = 0.0,
    seed: int = 0,
    amplitude: Optional[float] = None,
    baseline: Optional[float] = None,
    phase_offset: float = -math.pi / 2,
    period: Optional[float] = None,
) -> TalbotSignal:
    """Experiment-like Talbot trace for an exponential correlator profile.

    The observable is the excitation 1 - overlap.  By default its swing is the
    two-term revival contrast 2 * plateau * exp(-2 pi^2 sigma^2/d^2) and its
    mean is 1 - plateau; the phase -pi/2 puts minima at the revivals.  The
    envelope decays with xi0 from 1/xi0 = 1/xi_coh + 1/xi_ref.
    """
    times = check_1d(times, "times")
    noise_sigma = check_nonnegative(noise_sigma, "noise_sigma")
    xi_ref = check_positive(xi_ref, "xi_ref")
    xi_coh = exponential_coherence_length(profile)
    period = talbot_time(params.M, params.d) if period is None else check_positive(period, "period")
    if amplitude is None:
        amplitude = 2.0 * params.plateau * math.exp(-params.exponent_factor)
    if baseline is None:
        baseline = 1.0 - params.plateau

    xi0 = combine_decay_lengths(xi_coh, xi_ref)
    if xi0 == 0:
        clean = np.full_like(times, baseline)
    else:
        decay = math.inf if math.isinf(xi0) else decay_from_xi(xi0, period)
        clean = damped_sine(times, amplitude, period, decay, phase_offset, baseline)
    if noise_sigma > 0:
        noise = block_rng(seed, 0).normal(0.0, noise_sigma, size=times.shape)
        return TalbotSignal(times, clean + noise, np.full_like(times, noise_sigma))
    return TalbotSignal(times, clean)


def synthesize_series(
    params: LatticeParams,
    schedule: Mapping[float, CorrelatorProfile],
    xi_ref: float,
    times,
    noise_sigma: float = 0.0,
    seed: int = 0,
    **kwargs,
) -> dict:
    """One trace per equilibration time; trace ``i`` uses noise stream ``seed + i``."""
    return {
        t_q: synthesize_signal(params, prof, xi_ref, times, noise_sigma, seed + i, **kwargs)
        for i, (t_q, prof) in enumerate(sorted(schedule.items()))
    }


def count_resolvable_revivals(fit: FitResult, t_max: float, noise_sigma: float = 0.0) -> int:
    """Revivals N >= 1 inside the sweep whose envelope exceeds 3 noise sigma (1% of the amplitude if noiseless)."""
    threshold = 3.0 * noise_sigma if noise_sigma > 0 else 0.01 * abs(fit.amplitude)
    count = 0
    n = 1
    while n * fit.talbot_time_fit <= t_max:
        t = n * fit.talbot_time_fit
        envelope = abs(fit.amplitude) * (math.exp(-t / fit.decay_time) if math.isfinite(fit.decay_time) else 1.0)
        if envelope > threshold:
            count += 1
        n += 1
    return count


@dataclass
class QuenchSeries:
    """Per-t_Q coherence lengths and the spreading exponent.

    Arrays are aligned with ``t_Q``; failed fits carry NaN and appear in ``failures``.
    """

    t_Q: np.ndarray
    xi0: np.ndarray
    xi0_err: np.ndarray
    xi_ref: float
    xi_ref_err: float
    xi_coh: np.ndarray
    xi_coh_err: np.ndarray
    talbot_times: np.ndarray
    power_law: Optional[PowerLawFit] = None
    failures: dict = field(default_factory=dict)

    @property
    def alpha(self) -> float:
        return math.nan if self.power_law is None else self.power_law.exponent

    @property
    def alpha_err(self) -> float:
        return math.nan if self.power_law is None else self.power_law.exponent_stderr

    @property
    def long_range(self) -> np.ndarray:
        return np.isinf(self.xi_coh)


def _xi_with_error(fit: FitResult) -> tuple[float, float]:
    xi = xi_from_decay(fit.decay_time, fit.talbot_time_fit)
    cov = fit.covariance
    var_t, var_T, cov_tT = cov[2, 2], cov[1, 1], cov[1, 2]
    grad = np.array([2.0 / fit.talbot_time_fit, -xi / fit.talbot_time_fit])
    var = grad @ np.array([[var_t, cov_tT], [cov_tT, var_T]]) @ grad
    return xi, float(math.sqrt(max(var, 0.0)))


def reference_length(reference: TalbotSignal, talbot_time_guess: Optional[float] = None) -> tuple[float, float, FitResult]:
    """Decay length (sites) of the reference trace with its standard error."""
    fit = fit_damped_sine(reference, talbot_time_guess=talbot_time_guess)
    if not math.isfinite(fit.decay_time):
        return INFINITE_COHERENCE, 0.0, fit
    xi, err = _xi_with_error(fit)
    return xi, err, fit


def analyze_quench(
    signals: Mapping[float, TalbotSignal],
    xi_ref: float,
    xi_ref_err: float = 0.0,
    talbot_time_guess: Optional[float] = None,
) -> QuenchSeries:
    """Fit every trace, correct for the reference decay and fit the power law.

    A point whose xi0 agrees with xi_ref within the combined standard error
    (or 1e-6 relative) is long-range ordered and left out of the exponent
    fit.  Fit failures are logged, recorded and skipped.
    """
    t_q = np.array(sorted(signals), dtype=float)
    n = t_q.size
    xi0 = np.full(n, math.nan)
    xi0_err = np.full(n, math.nan)
    xi_coh = np.full(n, math.nan)
    xi_coh_err = np.full(n, math.nan)
    periods = np.full(n, math.nan)
    failures = {}
    for i, tq in enumerate(t_q):
        try:
            fit = fit_damped_sine(signals[tq], talbot_time_guess=talbot_time_guess)
            if not math.isfinite(fit.decay_time):
                raise FitError("no measurable decay")
            x, e = _xi_with_error(fit)
            tol = max(math.hypot(e, xi_ref_err), 1e-6 * (x if math.isinf(xi_ref) else xi_ref))
            coh = coherence_correction(x, xi_ref, tolerance=tol)
        except (FitError, DomainError) as exc:
            log.warning("t_Q = %g s: %s", tq, exc)
            failures[float(tq)] = str(exc)
            continue
        xi0[i], xi0_err[i], periods[i] = x, e, fit.talbot_time_fit
        xi_coh[i] = coh
        if math.isfinite(coh):
            # d xi_coh / d xi0 = (xi_coh / xi0)^2
            xi_coh_err[i] = (coh / x) ** 2 * e
        else:
            xi_coh_err[i] = math.inf

    ok = np.isfinite(xi_coh)
    power_law = None
    if ok.sum() >= 3:
        power_law = fit_power_law(t_q[ok], xi_coh[ok])
        power_law = PowerLawFit(
            power_law.exponent, power_law.exponent_stderr, power_law.prefactor, power_law.n_used,
            tuple(int(i) for i in np.flatnonzero(~ok)),
        )
    else:
        failures["power_law"] = f"only {int(ok.sum())} usable points"
    return QuenchSeries(t_q, xi0, xi0_err, float(xi_ref), float(xi_ref_err), xi_coh, xi_coh_err, periods, power_law, failures)
