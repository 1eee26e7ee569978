import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from sklearn.base import clone

from talbot_coherence import DomainError
from talbot_coherence.analytic import CorrelatorProfile
from talbot_coherence.disorder import correlator_profile_for_quench
from talbot_coherence.lattice import HBAR, PLANCK_H, LatticeParams, talbot_time
from talbot_coherence.quench import (
    INFINITE_COHERENCE,
    DampedSineRegressor,
    FitError,
    NoOscillationError,
    PowerLawRegressor,
    TalbotSignal,
    analyze_quench,
    bound_curves,
    coherence_correction,
    combine_decay_lengths,
    count_resolvable_revivals,
    damped_sine,
    decay_from_xi,
    fit_damped_sine,
    fit_power_law,
    interaction_decay_estimate,
    synthesize_series,
    synthesize_signal,
    transport_bounds,
    xi_from_decay,
)

T_MEASURED = 123e-6
DECAY_MEASURED = 525e-6
SWEEP_28 = np.linspace(0.0, 1e-3, 28)


@pytest.fixture
def lattice():
    return LatticeParams()


def amplitude_of(params):
    return 2 * params.plateau * math.exp(-params.exponent_factor)


# --- forward model ----------------------------------------------------------------


def test_undamped_without_decay_channels(lattice):
    t = np.linspace(0, 1e-3, 200)
    sig = synthesize_signal(lattice, CorrelatorProfile.constant(1.0, 16), math.inf, t)
    T = talbot_time(lattice.M, lattice.d)
    expected = 1 - lattice.plateau + amplitude_of(lattice) * np.sin(2 * np.pi * t / T - np.pi / 2)
    np.testing.assert_allclose(sig.values, expected, atol=1e-15)
    assert sig.sigmas is None


def test_equal_lengths_halve_the_decay_length(lattice):
    t = np.linspace(0, 1e-3, 100)
    T = talbot_time(lattice.M, lattice.d)
    sig = synthesize_signal(lattice, correlator_profile_for_quench(8.0), 8.0, t)
    # xi0 = 4 sites -> t_T = 2 T_T
    expected = damped_sine(t, amplitude_of(lattice), T, 2 * T, -np.pi / 2, 1 - lattice.plateau)
    np.testing.assert_allclose(sig.values, expected, atol=1e-15)
    assert combine_decay_lengths(8.0, 8.0) == 4.0


def test_experiment_like_trace_shows_seven_revivals(lattice):
    sig = synthesize_signal(lattice, CorrelatorProfile.constant(1.0, 8), xi_from_decay(DECAY_MEASURED, T_MEASURED),
                            np.linspace(0, 1e-3, 400), period=T_MEASURED)
    fit = fit_damped_sine(sig, talbot_time_guess=T_MEASURED)
    assert count_resolvable_revivals(fit, 1e-3) >= 7
    # revivals are the signal minima
    minima = [sig.values[np.argmin(np.abs(sig.times - n * T_MEASURED))] for n in range(1, 8)]
    assert np.all(np.diff(minima) > 0)


def test_non_exponential_profile_rejected(lattice):
    with pytest.raises(DomainError):
        synthesize_signal(lattice, CorrelatorProfile([1.0, 0.5, 0.5]), 8.0, SWEEP_28)


def test_noise_is_seeded(lattice):
    prof = correlator_profile_for_quench(4.0)
    a = synthesize_signal(lattice, prof, 8.0, SWEEP_28, noise_sigma=0.01, seed=3)
    b = synthesize_signal(lattice, prof, 8.0, SWEEP_28, noise_sigma=0.01, seed=3)
    c = synthesize_signal(lattice, prof, 8.0, SWEEP_28, noise_sigma=0.01, seed=4)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    np.testing.assert_array_equal(a.sigmas, np.full(28, 0.01))


def test_series_uses_one_stream_per_trace(lattice):
    schedule = {1e-3: correlator_profile_for_quench(2.0), 1e-2: correlator_profile_for_quench(5.0)}
    series = synthesize_series(lattice, schedule, 8.0, SWEEP_28, noise_sigma=0.01, seed=10)
    direct = synthesize_signal(lattice, schedule[1e-2], 8.0, SWEEP_28, noise_sigma=0.01, seed=11)
    np.testing.assert_array_equal(series[1e-2].values, direct.values)


def test_signal_validation():
    with pytest.raises(DomainError):
        TalbotSignal([0.0, 2.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        TalbotSignal([-1.0, 0.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        TalbotSignal([0.0, 1.0], [1.0, 2.0], [0.1, 0.0])
    with pytest.raises(DomainError):
        TalbotSignal([0.0, 1.0], [1.0, np.inf])


# --- damped-sine fit --------------------------------------------------------------


def test_noiseless_fit_recovers_parameters():
    t = np.linspace(0, 1e-3, 60)
    true = dict(amplitude=0.4, talbot_time_fit=130e-6, decay_time=525e-6, phase_offset=-np.pi / 2, baseline=0.47)
    y = damped_sine(t, true["amplitude"], true["talbot_time_fit"], true["decay_time"], true["phase_offset"], true["baseline"])
    fit = fit_damped_sine(TalbotSignal(t, y), talbot_time_guess=130.3e-6)
    for name, value in true.items():
        assert getattr(fit, name) == pytest.approx(value, rel=1e-6)
    assert fit.residual_norm < 1e-10


def test_fit_without_period_guess_uses_periodogram():
    t = np.linspace(0, 1e-3, 80)
    y = damped_sine(t, 0.3, 110e-6, 800e-6, 0.4, 0.5)
    fit = fit_damped_sine(TalbotSignal(t, y))
    assert fit.talbot_time_fit == pytest.approx(110e-6, rel=1e-6)


def test_fit_covariance_is_symmetric_psd(lattice):
    sig = synthesize_signal(lattice, correlator_profile_for_quench(5.0), 8.5, SWEEP_28, noise_sigma=0.02, seed=1)
    fit = fit_damped_sine(sig, talbot_time_guess=talbot_time(lattice.M, lattice.d))
    cov = fit.covariance
    assert cov.shape == (5, 5)
    np.testing.assert_allclose(cov, cov.T, rtol=0, atol=0)
    assert np.min(np.linalg.eigvalsh(cov)) > -1e-12 * np.max(np.abs(cov))
    assert fit.talbot_time_fit > 0 and fit.decay_time > 0


def test_noisy_fit_study(lattice):
    # 5% noise (relative to the revival amplitude), experimental sampling of 28 points over 1 ms
    T = talbot_time(lattice.M, lattice.d)
    xi_ref = xi_from_decay(DECAY_MEASURED, T)
    noise = 0.05 * amplitude_of(lattice)
    periods, decays = [], []
    for seed in range(100):
        sig = synthesize_signal(lattice, CorrelatorProfile.constant(1.0, 8), xi_ref, SWEEP_28, noise, seed)
        fit = fit_damped_sine(sig, talbot_time_guess=T)
        periods.append(fit.talbot_time_fit)
        decays.append(fit.decay_time)
    assert np.median(periods) == pytest.approx(T, rel=0.02)
    assert np.median(decays) == pytest.approx(DECAY_MEASURED, rel=0.15)


def test_constant_input_has_no_oscillation():
    with pytest.raises(NoOscillationError, match="no oscillation"):
        fit_damped_sine(TalbotSignal(SWEEP_28, np.full(28, 0.5)))


def test_too_short_sweep_rejected():
    t = np.linspace(0, 100e-6, 30)
    with pytest.raises(DomainError):
        fit_damped_sine(TalbotSignal(t, np.sin(2 * np.pi * t / 130e-6)), talbot_time_guess=130e-6)


def test_fit_error_carries_best_residual():
    err = FitError("nope", best_residual=0.25)
    assert err.best_residual == 0.25
    assert issubclass(NoOscillationError, FitError)


def test_regressor_follows_estimator_conventions():
    t = np.linspace(0, 1e-3, 50)
    y = damped_sine(t, 0.3, 125e-6, 400e-6, -1.0, 0.5)
    est = DampedSineRegressor(talbot_time_guess=125e-6, n_phase_starts=4)
    assert clone(est).get_params()["n_phase_starts"] == 4
    est.fit(t.reshape(-1, 1), y)
    assert est.talbot_time_fit_ == pytest.approx(125e-6, rel=1e-6)
    np.testing.assert_allclose(est.predict(t[:, None]), y, atol=1e-9)
    assert est.score(t[:, None], y) == pytest.approx(1.0)


def test_complete_initial_guess_skips_multistart():
    t = np.linspace(0, 1e-3, 50)
    y = damped_sine(t, 0.3, 125e-6, 400e-6, -1.0, 0.5)
    guess = dict(amplitude=0.28, talbot_time_fit=124e-6, decay_time=420e-6, phase_offset=-0.9, baseline=0.49)
    fit = fit_damped_sine(TalbotSignal(t, y), initial_guess=guess)
    assert fit.decay_time == pytest.approx(400e-6, rel=1e-6)


# --- lengths ----------------------------------------------------------------------


def test_xi_from_decay_examples():
    assert xi_from_decay(DECAY_MEASURED, T_MEASURED) == pytest.approx(8.5, abs=0.05)
    assert xi_from_decay(T_MEASURED / 2, T_MEASURED) == 1.0
    assert xi_from_decay(300e-6, 120e-6) == xi_from_decay(600e-6, 240e-6)
    assert decay_from_xi(xi_from_decay(300e-6, 120e-6), 120e-6) == pytest.approx(300e-6)
    with pytest.raises(DomainError):
        xi_from_decay(0.0, T_MEASURED)
    with pytest.raises(DomainError):
        xi_from_decay(DECAY_MEASURED, -1.0)


def test_coherence_correction_examples():
    assert coherence_correction(3.0, INFINITE_COHERENCE) == 3.0
    assert coherence_correction(4.0, 8.0) == 8.0
    assert coherence_correction(8.0, 8.0) is INFINITE_COHERENCE
    assert math.isinf(coherence_correction(7.9, 8.0, tolerance=0.2))
    with pytest.raises(DomainError):
        coherence_correction(9.0, 8.0)


@given(st.floats(0.1, 1e4), st.floats(0.1, 1e4))
def test_correction_inverts_combination(xi_coh, xi_ref):
    xi0 = combine_decay_lengths(xi_coh, xi_ref)
    assert 1 / xi0 == pytest.approx(1 / xi_coh + 1 / xi_ref, rel=1e-14)
    assert xi0 < xi_ref
    back = coherence_correction(xi0, xi_ref)
    assert back >= xi0
    assert 1 / back == pytest.approx(1 / xi0 - 1 / xi_ref, rel=1e-12, abs=1e-15)
    assert back == pytest.approx(xi_coh, rel=1e-9 * (1 + xi_coh / xi_ref))


@pytest.mark.parametrize("xi_coh", [2.0, 4.0, 8.0, 16.0])
def test_round_trip_through_fit(lattice, xi_coh):
    T = talbot_time(lattice.M, lattice.d)
    sig = synthesize_signal(lattice, correlator_profile_for_quench(xi_coh), 8.5, SWEEP_28)
    fit = fit_damped_sine(sig, talbot_time_guess=T)
    recovered = coherence_correction(xi_from_decay(fit.decay_time, fit.talbot_time_fit), 8.5)
    assert recovered == pytest.approx(xi_coh, rel=0.10)


# --- power law and bounds ---------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.5, 1.0, 0.37])
def test_power_law_exact(alpha):
    t = np.array([1e-3, 2e-3, 5e-3, 1e-2, 5e-2])
    fit = fit_power_law(t, 3.0 * (t / 1e-3) ** alpha)
    assert fit.exponent == pytest.approx(alpha, abs=1e-10)
    assert fit.exponent_stderr < 1e-10


def test_power_law_excludes_long_range_points():
    t = np.array([1e-3, 2e-3, 4e-3, 8e-3])
    fit = fit_power_law(t, [1.0, 2.0, 4.0, math.inf])
    assert fit.exponent == pytest.approx(1.0)
    assert fit.excluded == (3,) and fit.n_used == 3


def test_power_law_needs_three_points():
    with pytest.raises(DomainError):
        fit_power_law([1.0, 2.0, 3.0], [1.0, 2.0, math.inf])


def test_power_law_regressor_api():
    t = np.array([1.0, 2.0, 4.0, 8.0])
    est = PowerLawRegressor().fit(t[:, None], 2 * t**0.5)
    np.testing.assert_allclose(est.predict(t), 2 * t**0.5, rtol=1e-12)
    assert clone(est).get_params() == {"min_points": 3}


def test_experiment_like_series_exponent_envelope(lattice):
    # xi_coh grows as t_Q^0.6 from about one site at 1 ms, traces with 2% noise
    T = talbot_time(lattice.M, lattice.d)
    t_q = np.array([1, 2, 5, 10, 20, 50, 100, 150]) * 1e-3
    xi_ref = xi_from_decay(DECAY_MEASURED, T)
    noise = 0.02 * amplitude_of(lattice)
    signals = {
        tq: synthesize_signal(lattice, correlator_profile_for_quench(1.2 * (tq / 1e-3) ** 0.6), xi_ref,
                              np.linspace(0, 1e-3, 51), noise, seed=i)
        for i, tq in enumerate(t_q)
    }
    series = analyze_quench(signals, xi_ref, talbot_time_guess=T)
    assert 0.4 <= series.alpha <= 0.8
    ok = np.isfinite(series.xi_coh)
    assert np.all(series.xi_coh[ok] >= series.xi0[ok])


def test_long_range_point_flagged_and_excluded(lattice):
    T = talbot_time(lattice.M, lattice.d)
    t = np.linspace(0, 1e-3, 51)
    xi_ref = 8.0
    schedule = [(1e-3, 1.0), (1e-2, 2.0), (3e-2, 3.0), (1e-1, 5.0), (1.5e-1, math.inf)]
    signals = {tq: synthesize_signal(lattice, correlator_profile_for_quench(xi), xi_ref, t) for tq, xi in schedule}
    series = analyze_quench(signals, xi_ref, talbot_time_guess=T)
    assert list(series.long_range) == [False, False, False, False, True]
    assert series.power_law.excluded == (4,)
    assert series.power_law.n_used == 4
    assert series.xi0[-1] == pytest.approx(xi_ref, rel=1e-6)


def test_fit_failures_are_recorded_and_skipped(lattice):
    t = np.linspace(0, 1e-3, 51)
    signals = {
        1e-3: synthesize_signal(lattice, correlator_profile_for_quench(1.0), 8.0, t),
        2e-3: TalbotSignal(t, np.full(t.size, 0.5)),
        5e-3: synthesize_signal(lattice, correlator_profile_for_quench(2.0), 8.0, t),
        1e-2: synthesize_signal(lattice, correlator_profile_for_quench(3.0), 8.0, t),
    }
    series = analyze_quench(signals, 8.0, talbot_time_guess=talbot_time(lattice.M, lattice.d))
    assert 2e-3 in series.failures
    assert math.isnan(series.xi0[1])
    assert series.power_law.n_used == 3


def test_transport_bound_examples():
    rate = 1 / 1.3e-3
    ballistic, diffusive = transport_bounds(rate, 0.1)
    assert ballistic == pytest.approx(154, abs=0.5)
    assert diffusive == pytest.approx(8.8, abs=0.05)
    assert transport_bounds(rate, 1.3e-3) == pytest.approx((2.0, 1.0))
    with pytest.raises(DomainError):
        transport_bounds(0.0, 0.1)
    with pytest.raises(DomainError):
        transport_bounds(rate, [0.1, 0.0])


@given(st.floats(1e-3, 1e4), st.floats(0.2501, 1e3))
def test_ballistic_exceeds_diffusive(rate, multiple):
    # t_Q = multiple * hbar / J with multiple > 1/4
    ballistic, diffusive = transport_bounds(rate, multiple / rate)
    assert ballistic > diffusive


def test_bound_curves_pass_through_anchor():
    rate = 1 / 1.3e-3
    t = np.array([1e-3, 1e-2, 1e-1])
    ballistic, diffusive = bound_curves(rate, t, anchor=(1e-3, 0.7))
    assert ballistic[0] == pytest.approx(0.7) and diffusive[0] == pytest.approx(0.7)
    assert np.all(np.diff(ballistic) > 0)


def test_interaction_decay_estimate():
    d = 547e-9
    value = interaction_decay_estimate(PLANCK_H * 1.4e3, d / 5, d)
    assert value == pytest.approx(450e-6, rel=0.05)
    # 2 pi^2 hbar sigma / (d mu)
    assert value == pytest.approx(2 * math.pi**2 * HBAR * (d / 5) / (d * PLANCK_H * 1.4e3), rel=1e-14)
    with pytest.raises(DomainError):
        interaction_decay_estimate(0.0, d / 5, d)
