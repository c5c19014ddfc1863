import math
import warnings

import numpy as np
import pytest

from extension_energy import Coefficients
from extension_energy.bessel import bessel_vector
from extension_energy.bounds import m_r
from extension_energy.errors import SizeError, ValidationError
from extension_energy.extremizer import (
    DegenerateBandWarning,
    band_family,
    build_g,
    knapp_coefficients,
    knapp_g,
    plan_extremizer,
    rayleigh,
    select_radius,
)
from extension_energy.measure import fourier_table, lp_piece_coefficients, lp_support
from extension_energy.operator import energy, mu_integral_square
from extension_energy.sweep import table_for


@pytest.fixture(scope="module")
def quarter16(quarter):
    return table_for(quarter, 2.0**16)


# ------------------------------------------------------------------ band family


@pytest.mark.parametrize("R", [2.0**10, 2.0**14, 2.0**20, 3.0e5])
def test_band_count_matches_arithmetic_oracle(R):
    fam = band_family(R)
    R3 = float(np.cbrt(R))
    # every third p from 0 whose outer edge ceil(R^(1/3) 4^(p+2)) stays below R
    want = [p for p in range(0, 40, 3) if math.ceil(R3 * 4.0 ** (p + 2)) <= R]
    assert list(fam.members) == want


@pytest.mark.parametrize("R", [2.0**12, 2.0**18, 2.0**20])
def test_bands_are_nested_disjoint_and_inside_R(R):
    fam = band_family(R)
    assert fam.disjoint
    for i, (lo, hi) in enumerate(fam.bands):
        assert (lo, hi) == lp_support(fam.members[i], fam.K, R)
        assert hi <= R
    for (lo0, hi0), (lo1, hi1) in zip(fam.bands, fam.bands[1:]):
        assert hi0 < lo1
    ranges = [fam.shifted(i) for i in range(len(fam))]
    for (a0, b0), (a1, b1) in zip(ranges, ranges[1:]):
        assert b1 < a0


def test_overlapping_spacing_is_reported():
    fam = band_family(2.0**20, spacing=1)
    assert not fam.disjoint
    assert len(fam) > len(band_family(2.0**20))


def test_empty_family_raises():
    with pytest.raises(SizeError):
        band_family(2.0**10, p_min=6)
    with pytest.raises(ValidationError):
        band_family(2.0**10, p_min=-1)


# --------------------------------------------------------------------- build_g


def test_lebesgue_gives_zero_coefficients(leb):
    R = 2.0**12
    ex = build_g(table_for(leb, R), R, R, band_family(R))
    # the transform vanishes off 0 up to rounding in the cosine product
    assert np.max(np.abs(ex.coefficients.values), initial=0.0) <= 1e-14
    assert ex.norm_sq <= 1e-24


def test_support_is_the_shifted_left_bands(quarter16):
    R = 2.0**16
    fam = band_family(R)
    ex = build_g(quarter16, R, R, fam)
    allowed = np.concatenate([np.arange(a, b + 1) for a, b in (fam.shifted(i) for i in range(len(fam)))])
    assert np.all(np.isin(ex.coefficients.freqs, allowed))
    assert np.all(ex.coefficients.freqs < R)
    assert np.all(np.isfinite(ex.coefficients.values))


def test_coefficients_follow_the_construction(quarter16):
    R = 2.0**16
    r = R + 3.0
    fam = band_family(R)
    ex = build_g(quarter16, R, r, fam)
    from extension_energy.bessel import average_abs

    piece = lp_piece_coefficients(quarter16, fam.members[0], fam.K, R).to_dict()
    J = bessel_vector(r, int(R))
    rng = np.random.default_rng(5)
    d = ex.coefficients.to_dict()
    lo, hi = fam.shifted(0)
    for k in rng.integers(lo, hi + 1, size=6):
        if int(k) - int(R) not in piece:
            continue
        sgn = 1.0 if J[int(k)] >= 0 else -1.0
        want = piece[int(k) - int(R)] * sgn / (2.0 ** fam.members[0] * average_abs(int(k), R))
        assert d[int(k)] == pytest.approx(want, rel=1e-6)


def test_norm_bound_at_4096(quarter):
    R = 2.0**12
    _, ex = select_radius(table_for(quarter, R), R, band_family(R))
    assert ex.norm_sq <= 10 * R ** (5 / 6) * math.log(R)


def test_rayleigh_cross_check_through_mu_integral(quarter16):
    R = 2.0**16
    fam = band_family(R)
    ex = build_g(quarter16, R, R - 10.0, fam)
    c = ex.coefficients
    J = bessel_vector(R - 10.0, int(c.max_abs_freq)).signed(c.freqs)
    form = mu_integral_square(quarter16, Coefficients(c.freqs, c.values * J))
    assert ex.rayleigh == pytest.approx(R * form / ex.norm_sq, rel=1e-12)
    assert ex.form_value == pytest.approx(form, rel=1e-12)


def test_radius_outside_window(quarter16):
    R = 2.0**16
    with pytest.raises(ValidationError):
        build_g(quarter16, R, R + 50.0, band_family(R))


def test_degenerate_band_is_excluded_with_warning(quarter16, monkeypatch):
    import extension_energy.extremizer as ex_mod

    R = 2.0**16
    monkeypatch.setattr(ex_mod, "DEGENERATE_FLOOR", 1e6)
    with pytest.warns(DegenerateBandWarning):
        plan = plan_extremizer(quarter16, R, band_family(R))
    assert plan.excluded == band_family(R).members
    assert plan.bands == []


# --------------------------------------------------------------- select_radius


def test_single_point_grid_is_build_g_at_R(quarter16):
    R = 2.0**16
    fam = band_family(R)
    r, ex = select_radius(quarter16, R, fam, 1)
    assert r == R
    assert ex.rayleigh == build_g(quarter16, R, R, fam).rayleigh


def test_quarter_form_value_guard(quarter16):
    R = 2.0**16
    _, ex = select_radius(quarter16, R, band_family(R), 9)
    assert ex.form_value >= 1e-3 * R ** (1 / 3) * math.log(R) ** 2


def test_ninth_form_value_guard(ninth):
    R = 2.0**16
    _, ex = select_radius(table_for(ninth, R), R, band_family(R), 9)
    s = ninth.dimension
    assert ex.form_value >= 0.1 * R ** (4 / 3 - 2 * s)


def test_quarter_rayleigh_against_m_r_log_R(quarter):
    R = 2.0**14
    _, ex = select_radius(table_for(quarter, R), R, band_family(R), 9)
    c = ex.rayleigh / (m_r(quarter, R).value * math.log(R))
    assert c >= 1e-3


def test_extremizer_below_energy(quarter):
    R = 2.0**12
    table = table_for(quarter, R)
    _, ex = select_radius(table, R, band_family(R), 9)
    assert ex.rayleigh <= energy(table, R, 9).energy * (1 + 1e-6)


@pytest.mark.parametrize("name", ["quarter", "ninth", "thirds"])
def test_flipping_a_band_sign_does_not_help(name, request):
    R = 2.0**16
    mu = request.getfixturevalue(name)
    table = table_for(mu, R)
    fam = band_family(R)
    r, ex = select_radius(table, R, fam, 9)
    plan = plan_extremizer(table, R, fam)
    c = ex.coefficients
    for band in plan.bands:
        v = c.values.copy()
        v[np.isin(c.freqs, band.orders)] *= -1
        assert rayleigh(table, Coefficients(c.freqs, v), r, R) <= ex.rayleigh * (1 + 1e-6)


# --------------------------------------------------------------------- rayleigh


def test_rayleigh_of_e0_on_lebesgue(leb_table):
    r = 123.4
    got = rayleigh(leb_table, {0: 1.0}, r)
    assert got == pytest.approx(r * bessel_vector(r, 0)[0] ** 2, rel=1e-13)


def test_rayleigh_zero_vector(leb_table):
    with pytest.raises(ValidationError):
        rayleigh(leb_table, {3: 0.0}, 10.0)


# ------------------------------------------------------------------------ Knapp


def test_knapp_coefficients_closed_form():
    centre, length, k0 = 0.3, 1 / 16, 40
    orders = np.arange(-5, 90)
    c = knapp_coefficients(centre, length, k0, orders)
    t = np.linspace(centre - length / 2, centre + length / 2, 200001)
    for k in (0, 17, 40, 63):
        integrand = np.exp(2j * np.pi * (k0 - k) * t)
        want = np.trapezoid(integrand, t)
        assert abs(c.to_dict()[k] - want) <= 1e-9


def test_knapp_norm_is_arc_length(leb):
    R = 2.0**15
    kn = knapp_g(R, table_for(leb, R), leb)
    assert kn.norm_sq_exact == 1 / float(np.cbrt(R)) == 1 / 32
    assert kn.arc_length == pytest.approx(R ** (-1 / 3), rel=1e-15)
    # truncating to the Bessel-relevant orders keeps almost all of it
    assert 0.99 * R ** (-1 / 3) <= kn.coefficients.norm_sq <= R ** (-1 / 3)


def test_knapp_lebesgue_lower_bound(leb):
    R = 2.0**15
    kn = knapp_g(R, table_for(leb, R), leb)
    assert kn.rayleigh >= 1e-2 * R ** (1 / 3)
    coeffs, ray = kn
    assert ray == kn.rayleigh and coeffs is kn.coefficients


def test_knapp_attains_m_r_for_middle_thirds(thirds):
    R = 2.0**15
    kn = knapp_g(R, table_for(thirds, R), thirds)
    assert 1e-2 <= kn.rayleigh / m_r(thirds, R).value <= 1e2


def test_knapp_without_measure_uses_table(thirds):
    R = 2.0**12
    table = table_for(thirds, R)
    a = knapp_g(R, table, thirds, grid=3)
    b = knapp_g(R, table, None, grid=3)
    assert b.rayleigh >= 0.5 * a.rayleigh


def test_knapp_needs_R(leb):
    with pytest.raises(ValidationError):
        knapp_g(4.0, fourier_table(leb, 64))


def test_no_stray_warnings_on_standard_run(quarter16):
    R = 2.0**16
    with warnings.catch_warnings():
        warnings.simplefilter("error", DegenerateBandWarning)
        select_radius(quarter16, R, band_family(R), 3)
