import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from extension_energy.bessel import (
    MAX_RECURRENCE_ORDER,
    airy_pair,
    average_abs,
    average_abs_many,
    average_step,
    bessel_series,
    bessel_third,
    bessel_vector,
    admissible_range,
    phase,
    turning_phi,
    uniform_envelope,
    uniform_leading_term,
)
from extension_energy.errors import DomainError, SizeError


def mp_series(k, r, dps=50):
    with mp.workdps(dps):
        x = mp.mpf(r) / 2
        total = mp.mpf(0)
        m = 0
        while True:
            term = (-1) ** m * x ** (k + 2 * m) / (mp.factorial(m) * mp.factorial(k + m))
            total += term
            if m > r and abs(term) < mp.mpf(10) ** (-dps + 5):
                return float(total)
            m += 1


def mp_besselj(k, r):
    with mp.workdps(30):
        return float(mp.besselj(k, r, maxprec=40000, maxterms=10**6))


def identity_residuals(bv):
    v = bv.values
    norm = abs(v[0] ** 2 + 2 * np.sum(v[1:] ** 2) - 1)
    k = np.arange(1, bv.K)
    rec = np.abs(v[k - 1] + v[k + 1] - (2 * k / bv.r) * v[k]) / np.maximum(1.0, np.abs(v[k]))
    return norm, float(rec.max())


# ------------------------------------------------------------- bessel_vector


def test_zero_argument():
    v = bessel_vector(0.0, 6).values
    np.testing.assert_array_equal(v, [1, 0, 0, 0, 0, 0, 0])


def test_small_argument_against_extended_series():
    bv = bessel_vector(2.0, 8)
    for k in range(9):
        assert abs(bv[k] - mp_series(k, 2.0)) <= 1e-12


def test_double_precision_series_agrees_for_small_r():
    bv = bessel_vector(3.5, 20)
    for k in range(21):
        assert abs(bv[k] - bessel_series(k, 3.5)) <= 1e-14


def test_large_argument_identities_and_spot_values():
    bv = bessel_vector(1e4, 12000)
    norm, rec = identity_residuals(bv)
    assert norm <= 1e-8
    assert rec <= 1e-8
    for k in (0, 5000, 9990):
        assert abs(bv[k] - mp_besselj(k, 1e4)) <= 1e-12


def test_negative_argument_rejected():
    with pytest.raises(DomainError):
        bessel_vector(-1.0, 3)


def test_start_order_cap():
    with pytest.raises(SizeError):
        bessel_vector(10.0, MAX_RECURRENCE_ORDER + 1)


def test_signed_orders():
    bv = bessel_vector(7.0, 5)
    np.testing.assert_array_equal(bv.signed([-3, -2, 3]), [-bv[3], bv[2], bv[3]])


@pytest.mark.parametrize("r", [10.0, 1e2, 1e3, 1e4, 1e5])
def test_identities_across_scales(r):
    bv = bessel_vector(r, math.ceil(1.3 * r) + 200)
    norm, rec = identity_residuals(bv)
    assert norm <= 1e-8
    assert rec <= 1e-8


@given(r=st.floats(0.1, 2e4))
def test_matches_scipy_reference(r):
    K = int(1.2 * r) + 60
    bv = bessel_vector(r, K)
    k = np.arange(0, K + 1, max(1, K // 50))
    np.testing.assert_allclose(bv.values[k], special.jv(k, r), atol=1e-11, rtol=0)


def test_random_orders_against_extended_series():
    rng = np.random.default_rng(1)
    for _ in range(40):
        k = int(rng.integers(0, 61))
        r = float(rng.uniform(0, 60))
        assert abs(bessel_vector(r, 60)[k] - mp_series(k, r, dps=60)) <= 1e-12


# ------------------------------------------------------------------------ Airy


def test_airy_at_origin():
    ai, bi = airy_pair(0.0)
    assert ai == pytest.approx(3 ** (-2 / 3) / math.gamma(2 / 3), abs=1e-15)
    with mp.workdps(30):
        assert abs(ai - float(mp.airyai(0))) <= 1e-15
        assert abs(bi - float(mp.airybi(0))) <= 1e-15


def test_airy_bounded_on_negative_axis():
    t = np.concatenate([np.linspace(0, 50, 5001), np.geomspace(50, 1e6, 2000)])
    ai, bi = airy_pair(t)
    assert np.max(np.abs(ai)) <= 1.0
    assert np.max(np.abs(bi)) <= 1.0


def test_airy_oscillatory_asymptotic_at_100():
    t = 100.0
    ai, _ = airy_pair(t)
    approx = math.pi**-0.5 * t**-0.25 * math.cos((2 / 3) * t**1.5 - math.pi / 4)
    assert abs(ai - approx) <= 1e-2 * abs(approx)


def test_airy_against_scipy_on_wide_range():
    t = np.concatenate([np.linspace(0, 30, 3001), np.geomspace(30, 1e6, 3000)])
    ai, bi = airy_pair(t)
    ref_ai, _, ref_bi, _ = special.airy(-t)
    assert np.max(np.abs(ai - ref_ai)) <= 1e-8
    assert np.max(np.abs(bi - ref_bi)) <= 1e-8


def test_airy_against_mpmath_at_both_sides_of_switch():
    for t in (5.0, 6.87, 6.9, 40.0, 1234.5):
        ai, bi = airy_pair(t)
        with mp.workdps(30):
            assert abs(ai - float(mp.airyai(-t))) <= 1e-9
            assert abs(bi - float(mp.airybi(-t))) <= 1e-9


def test_airy_rejects_positive_argument():
    with pytest.raises(DomainError):
        airy_pair(-1.0)


def test_one_third_order_asymptotic_with_measured_constant():
    r = np.geomspace(20, 2000, 200)
    lead = np.sqrt(2 / (np.pi * r)) * np.cos(r - np.pi / 6 - np.pi / 4)
    C = np.max(np.abs(bessel_third(1 / 3, r) - lead) * r**1.5)
    # next Hankel term: |4 nu^2 - 1| / 8 * sqrt(2 / pi) = 0.0554
    assert C <= 0.06
    np.testing.assert_allclose(bessel_third(1 / 3, r), special.jv(1 / 3, r), atol=1e-10)


# ----------------------------------------------------------------------- phase


def test_phase_vanishes_at_turning_point():
    assert phase(7.5, 7.5).f == 0.0


def test_phase_derivative_formula():
    assert phase(3, 5).f_prime == pytest.approx(0.8, abs=1e-15)


def test_phase_closed_form_against_extended_precision():
    with mp.workdps(40):
        oracle = float(mp.mpf(4) - 3 * mp.acos(mp.mpf(3) / 5))
    assert oracle == pytest.approx(1.2181143, abs=1e-7)
    assert phase(3, 5).f == pytest.approx(oracle, abs=1e-14)


def test_phase_rejects_r_below_k():
    with pytest.raises(DomainError):
        phase(5, 3)


@given(k=st.floats(1.0, 1e5), lam=st.floats(1.0001, 5.0))
def test_phase_derivative_matches_finite_difference(k, lam):
    r = k * lam
    h = 1e-6 * max(1.0, r) ** 0.5
    fd = (phase(k, r + h).f - phase(k, r - h).f) / (2 * h)
    assert abs(fd - phase(k, r).f_prime) <= 1e-6


def test_phi_ode_and_branch_continuity():
    for lam in (1.0005, 1.001, 1.01, 1.3):
        phi, dphi = turning_phi(lam)
        assert phi * dphi**2 == pytest.approx(1 - lam**-2, rel=1e-6)
    lo = turning_phi(1.0 + 0.999e-3)
    hi = turning_phi(1.0 + 1.001e-3)
    # the two points straddle the switch 2e-6 apart: compare after a first-order shift
    assert abs(hi[0] - lo[0] - 2e-6 * lo[1]) < 1e-10
    assert abs(hi[1] - lo[1]) < 1e-5


# ------------------------------------------------------------ uniform asymptotic


def test_uniform_term_error_order_at_k1000():
    k, r = 1000, 1100.0
    err = abs(uniform_leading_term(k, r) - bessel_vector(r, k)[k])
    assert err <= 10 * k ** (-4 / 3)


def test_uniform_term_at_turning_point_is_finite():
    k = 500
    v = uniform_leading_term(k, float(k))
    assert math.isfinite(v)
    assert abs(v - bessel_vector(k, k)[k]) <= 10 * k ** (-4 / 3)


def test_uniform_term_against_recurrence_at_k400():
    assert abs(uniform_leading_term(400, 480.0) - bessel_vector(480.0, 400)[400]) <= 1e-4


def test_uniform_term_domain():
    with pytest.raises(DomainError):
        uniform_leading_term(400, 700.0)
    with pytest.raises(DomainError):
        uniform_leading_term(400, 300.0)


# ------------------------------------------------------------- window averages


def test_window_average_lower_bound_at_4096():
    R, p = 4096.0, 2
    R3 = float(np.cbrt(R))
    k = int(R - 16 * R3)
    v = average_abs(k, R) * 2 ** (p / 2) * R3
    assert 0.05 <= v <= 5


def test_window_average_step_halving():
    R, k = 4096.0, 4096 - 256
    a = average_abs(k, R, step=0.1)
    b = average_abs(k, R, step=0.05)
    assert abs(a - b) <= 1e-3 * abs(b)


def test_window_average_against_fine_grid_oracle():
    R = 1e4
    R3 = float(np.cbrt(R))
    k = int(R - 64 * R3)
    r = np.arange(R - R3, R + R3 + 5e-4, 1e-3)
    y = np.abs(special.jv(k, r))
    oracle = np.trapezoid(y, r) / R3
    assert abs(average_abs(k, R) - oracle) <= 1e-4 * oracle


def test_window_average_many_matches_single():
    R = 5000.0
    step = average_step(R, 4700)
    many = average_abs_many(4700, 4710, R)
    for k in (4700, 4705, 4710):
        assert many[k - 4700] == pytest.approx(average_abs(k, R, step=step), rel=1e-14)


def test_admissible_range_bounds():
    assert admissible_range(2.0**12) == [2]
    assert admissible_range(2.0**16) == [2, 3]
    assert admissible_range(2.0**20) == [2, 3, 4]


# ------------------------------------------------------------------ envelope


def test_envelope_at_order_zero():
    assert uniform_envelope(0, 100.0) == pytest.approx(0.1, abs=1e-15)


def test_envelope_at_half_order():
    R = 1e4
    k = int(R / 2)
    env = uniform_envelope(k, R)
    assert env == pytest.approx(R**-0.5 * 3**0.25)
    assert abs(bessel_vector(R, k)[k]) <= 3 * env


def test_envelope_on_turning_point_uses_first_branch():
    assert uniform_envelope(64, 64.0) == pytest.approx(64**-0.5 * 64 ** (1 / 6))


def test_envelope_dominates_all_orders():
    R = 4096.0
    v = np.abs(bessel_vector(R, int(2 * R)).values[1:])
    env = np.array([uniform_envelope(k, R) for k in range(1, int(2 * R) + 1)])
    assert np.max(v / env) <= 3
