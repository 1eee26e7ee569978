import math

import pytest
from hypothesis import given, strategies as st

from talbot_coherence import DomainError
from talbot_coherence.lattice import (
    HBAR,
    PLANCK_H,
    RB87_MASS,
    LatticeParams,
    gaussian_width_from_depth,
    recoil_energy,
    talbot_length,
    talbot_time,
)

D = 547e-9


def test_talbot_time_rubidium():
    assert talbot_time(RB87_MASS, D) == pytest.approx(130.3e-6, rel=1e-3)


def test_talbot_time_scaling():
    T = talbot_time(RB87_MASS, D)
    assert talbot_time(2 * RB87_MASS, D) == pytest.approx(2 * T, rel=1e-15)
    assert talbot_time(RB87_MASS, 2 * D) == pytest.approx(4 * T, rel=1e-15)


def test_recoil_energy_scaling():
    E = recoil_energy(RB87_MASS, D)
    assert E / recoil_energy(RB87_MASS, 2 * D) == pytest.approx(4.0, rel=1e-15)
    assert recoil_energy(2 * RB87_MASS, D) == pytest.approx(E / 2, rel=1e-15)


def test_recoil_times_talbot_time_is_quarter_planck():
    # E_r T_T = (pi^2 hbar^2 / 2 M d^2)(2 M d^2 / h) = h / 4 = pi hbar / 2
    product = recoil_energy(RB87_MASS, D) * talbot_time(RB87_MASS, D)
    assert product == pytest.approx(PLANCK_H / 4, rel=1e-14)
    assert product == pytest.approx(math.pi * HBAR / 2, rel=1e-14)


def test_width_factor_at_s5():
    sigma = gaussian_width_from_depth(5.0, D)
    assert 2 * math.pi**2 * sigma**2 / D**2 == pytest.approx(0.89, abs=0.01)


@pytest.mark.parametrize("s, expected", [(1.0, 1 / math.pi), (16.0, 1 / (2 * math.pi))])
def test_width_special_depths(s, expected):
    assert gaussian_width_from_depth(s, D) == pytest.approx(expected * D, rel=1e-15)


def test_talbot_length():
    lam = 780e-9
    assert talbot_length(D, D) == pytest.approx(2 * D)
    assert talbot_length(lam, 2 * D) == pytest.approx(4 * talbot_length(lam, D))
    assert talbot_length(2 * lam, D) == pytest.approx(talbot_length(lam, D) / 2)


@pytest.mark.parametrize(
    "call",
    [
        lambda: talbot_time(0.0, D),
        lambda: talbot_time(RB87_MASS, -D),
        lambda: recoil_energy(RB87_MASS, 0.0),
        lambda: gaussian_width_from_depth(0.0, D),
        lambda: gaussian_width_from_depth(-1.0, D),
        lambda: talbot_length(0.0, D),
        lambda: talbot_time(float("nan"), D),
    ],
)
def test_nonpositive_inputs_rejected(call):
    with pytest.raises(DomainError):
        call()


@given(st.floats(0.1, 10.0))
def test_unit_rescaling(c):
    lam = 780e-9
    assert talbot_time(RB87_MASS, c * D) == pytest.approx(c**2 * talbot_time(RB87_MASS, D), rel=1e-12)
    assert talbot_length(lam, c * D) == pytest.approx(c**2 * talbot_length(lam, D), rel=1e-12)
    assert recoil_energy(RB87_MASS, c * D) == pytest.approx(recoil_energy(RB87_MASS, D) / c**2, rel=1e-12)


def test_params_defaults_and_scales():
    p = LatticeParams(lambda_opt=1064e-9)
    assert p.sigma == pytest.approx(D / (math.pi * 5**0.25))
    assert p.tight_binding
    sc = p.scales()
    assert sc.talbot_time == talbot_time(p.M, p.d)
    assert sc.exponent_factor == pytest.approx(2 / math.sqrt(5))
    assert sc.talbot_length == pytest.approx(2 * D**2 / 1064e-9)
    assert LatticeParams().scales().talbot_length is None


def test_sigma_override_and_tight_binding_flag():
    assert LatticeParams(sigma=D / 5).exponent_factor == pytest.approx(2 * math.pi**2 / 25)
    loose = LatticeParams(sigma=D / 3)
    assert not loose.tight_binding  # accepted, only flagged
    with pytest.raises(DomainError):
        LatticeParams(sigma=0.0)
