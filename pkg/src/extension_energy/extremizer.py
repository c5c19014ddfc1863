"""Explicit test functions whose Rayleigh quotients bound the extension energy from below.

* :func:`band_family` / :func:`build_g` / :func:`select_radius`: coefficients
  built from Littlewood-Paley pieces of ``mu`` placed just left of ``R``, with
  the sign of ``J_k(r)`` and the window average ``A_k(R)`` folded in so every
  band adds coherently.
* :func:`knapp_g`: a modulated arc indicator whose extension concentrates on a
  thin rectangle tangent to the circle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bessel import average_abs_many, bessel_vector
from .bounds import densest_arc
from .coeffs import Coefficients
from .errors import SizeError, ValidationError
from .measure import DEFAULT_LP_K, FourierTable, SelfSimilarMeasure, lp_bracket, lp_support, mollifier_coefficients
from .operator import DEFAULT_RADIUS_GRID, radius_grid, rayleigh_quotient

DEGENERATE_FLOOR = 1e-3
DEFAULT_P_MIN = 0
KNAPP_OFFSETS = (-1.0, -0.5, 0.0, 0.5, 1.0)


class DegenerateBandWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BandFamily:
    """Littlewood-Paley indices ``p`` whose left bands ``R - [lo_p, hi_p]`` are used."""

    R: float
    members: tuple[int, ...]
    K: int
    bands: tuple[tuple[int, int], ...]
    spacing: int
    disjoint: bool

    def __len__(self) -> int:
        return len(self.members)

    def shifted(self, i: int) -> tuple[int, int]:
        """Integer order range ``[R - hi, R - lo]`` of member ``i``."""
        lo, hi = self.bands[i]
        Rn = int(round(self.R))
        return Rn - hi, Rn - max(lo, 1)


def band_family(R: float, p_min: int = DEFAULT_P_MIN, K: int = DEFAULT_LP_K, spacing: int | None = None) -> BandFamily:
    """Every ``spacing``-th ``p >= p_min`` with ``R^(1/3) 4^(p+K) <= R``.

    The piece ``Delta_p`` lives on ``R^(1/3) 4^p / 2 <= |n| <= R^(1/3) 4^(p+K)``,
    so consecutive members are disjoint once ``spacing >= K + 1`` (the default).
    Smaller spacings are accepted and reported as overlapping.
    """
    if p_min < 0:
        raise ValidationError("p_min must be >= 0")
    spacing = K + 1 if spacing is None else int(spacing)
    if spacing < 1:
        raise ValidationError("spacing must be >= 1")
    members, bands = [], []
    p = p_min
    while True:
        lo, hi = lp_support(p, K, R)
        if hi > R:
            break
        members.append(p)
        bands.append((lo, hi))
        p += spacing
    if not members:
        raise SizeError(f"no admissible band with p >= {p_min} at R={R:g}")
    disjoint = all(bands[i][1] < bands[i + 1][0] for i in range(len(bands) - 1))
    return BandFamily(float(R), tuple(members), K, tuple(bands), spacing, disjoint)


@dataclass(frozen=True)
class Extremizer:
    R: float
    r: float
    coefficients: Coefficients
    norm_sq: float
    rayleigh: float
    members: tuple[int, ...] = ()
    excluded: tuple[int, ...] = ()

    @property
    def form_value(self) -> float:
        """Unnormalized ``int |g_r dsigma(r.)|^2 dmu = rayleigh * norm_sq / R``."""
        return self.rayleigh * self.norm_sq / self.R


@dataclass
class _BandData:
    """Radius-independent part of one band: ``Delta_p^(k - R) / (2^p A_k(R))``."""

    p: int
    orders: np.ndarray
    base: np.ndarray


@dataclass
class ExtremizerPlan:
    """Everything in the construction that does not depend on the radius."""

    R: float
    family: BandFamily
    bands: list[_BandData] = field(default_factory=list)
    excluded: tuple[int, ...] = ()

    @property
    def orders(self) -> np.ndarray:
        if not self.bands:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([b.orders for b in self.bands])

    def coefficients(self, r: float) -> Coefficients:
        ks = self.orders
        if ks.size == 0:
            return Coefficients.empty()
        bv = bessel_vector(r, int(ks.max()))
        sgn = np.where(bv.values[ks] >= 0.0, 1.0, -1.0)  # sgn 0 := +1
        base = np.concatenate([b.base for b in self.bands])
        if self.family.disjoint:
            return Coefficients(ks, base * sgn)
        # overlapping bands: contributions to a shared order are summed
        uk, inv = np.unique(ks, return_inverse=True)
        vals = np.zeros(uk.size, dtype=complex)
        np.add.at(vals, inv, base * sgn)
        return Coefficients(uk, vals)


def plan_extremizer(table: FourierTable, R: float, family: BandFamily, grid_per_wavelength: int = 16) -> ExtremizerPlan:
    """Evaluate the Littlewood-Paley pieces and window averages once per ``R``."""
    Rn = int(round(R))
    bands, excluded = [], []
    for p, (lo, hi) in zip(family.members, family.bands):
        mags = np.arange(max(lo, 1), hi + 1)
        br = lp_bracket(mags, p, family.K, R)
        keep = br != 0.0
        mags, br = mags[keep], br[keep]
        if mags.size == 0:
            continue
        ks = Rn - mags[::-1]
        dhat = table[-mags[::-1]] * br[::-1]
        A = average_abs_many(int(ks[0]), int(ks[-1]), R, grid_per_wavelength)
        floor = DEGENERATE_FLOOR * 2.0 ** (-p / 2) * float(np.cbrt(R)) ** -1
        if np.any(A < floor):
            warnings.warn(
                f"band p={p}: window average {A.min():.3g} below floor {floor:.3g}; band excluded",
                DegenerateBandWarning,
                stacklevel=2,
            )
            excluded.append(p)
            continue
        bands.append(_BandData(p, ks.astype(np.int64), dhat / (2.0**p * A)))
    return ExtremizerPlan(float(R), family, bands, tuple(excluded))


def build_g(table: FourierTable, R: float, r: float, family: BandFamily, plan: ExtremizerPlan | None = None) -> Extremizer:
    """Coefficients ``a_k(r) = Delta_p^(k - R) sgn J_k(r) / (2^p A_k(R))`` on the shifted left bands."""
    R3 = float(np.cbrt(R))
    if not R - R3 <= r <= R + R3:
        raise ValidationError(f"radius {r} outside the window around R={R}")
    plan = plan_extremizer(table, R, family) if plan is None else plan
    c = plan.coefficients(r)
    nrm = c.norm_sq
    ray = rayleigh_quotient(table, c, r, R) if nrm > 0 else 0.0
    return Extremizer(float(R), float(r), c, nrm, ray, tuple(b.p for b in plan.bands), plan.excluded)


def select_radius(
    table: FourierTable, R: float, family: BandFamily, grid: int = DEFAULT_RADIUS_GRID
) -> tuple[float, Extremizer]:
    """Best ``g_r`` over the same radius grid the energy search uses."""
    plan = plan_extremizer(table, R, family)
    best = None
    for r in radius_grid(R, grid):
        ex = build_g(table, R, float(r), family, plan)
        if best is None or ex.rayleigh > best.rayleigh:
            best = ex
    return best.r, best


def rayleigh(table: FourierTable, g, r: float, R: float | None = None) -> float:
    """``R * mu_integral_square(k -> a_k J_k(r)) / sum |a_k|^2``; ``R`` defaults to ``r``."""
    return rayleigh_quotient(table, g, r, r if R is None else R)


# ---------------------------------------------------------------------- Knapp


@dataclass(frozen=True)
class KnappResult:
    coefficients: Coefficients
    rayleigh: float
    r_star: float
    centre: float
    modulation: int
    arc_length: float
    norm_sq_exact: float

    def __iter__(self):
        return iter((self.coefficients, self.rayleigh))


def knapp_coefficients(centre: float, length: float, modulation: int, orders: np.ndarray) -> Coefficients:
    """Fourier coefficients of ``exp(2 pi i k0 t) 1[|t - centre| <= length/2]``.

    ``a_k = length * exp(-2 pi i (k - k0) centre) * sinc((k - k0) length)``.
    """
    d = orders - modulation
    vals = length * np.sinc(d * length) * np.exp(-2j * np.pi * np.mod(d * centre, 1.0))
    return Coefficients(orders, vals)


def _densest_from_table(table: FourierTable, length: float) -> float:
    """Centre where ``mu`` smoothed at scale ``length`` peaks."""
    R = length**-3.0
    c = mollifier_coefficients(table, 0, R)
    size = 1 << max(10, int(math.ceil(math.log2(8.0 / length))))
    vals = np.real(np.fft.ifft(_scatter(c, size)) * size)
    return float(np.argmax(vals) / size)


def _scatter(c: Coefficients, size: int) -> np.ndarray:
    buf = np.zeros(size, dtype=complex)
    np.add.at(buf, np.mod(c.freqs, size), c.values)
    return buf


def knapp_g(
    R: float,
    table: FourierTable,
    mu: SelfSimilarMeasure | None = None,
    grid: int = DEFAULT_RADIUS_GRID,
    modulation_offsets: tuple[float, ...] = KNAPP_OFFSETS,
) -> KnappResult:
    """Modulated indicator of an arc of parameter length ``R^(-1/3)``.

    The arc sits on the heaviest ``R^(-1/3)``-arc of ``mu`` (from atoms when
    ``mu`` is given, else from the smoothed transform).  In the model series
    the kernel is ``exp(i r sin 2 pi (theta - t))``, stationary at
    ``theta = t`` exactly when the modulation equals ``r``; the modulation is
    therefore ``round(r) + offset * R^(1/3)`` for each offset tried.  The
    coefficient support is truncated to orders where ``J_k`` is not negligible,
    and the Rayleigh quotient uses the truncated norm.
    """
    if R < 8:
        raise ValidationError("knapp_g needs R >= 8")
    R3 = float(np.cbrt(R))
    length = 1.0 / R3
    centre = densest_arc(mu, length)[1] if mu is not None else _densest_from_table(table, length)
    best = None
    for r in radius_grid(R, grid):
        Kt = int(math.ceil(r + 12.0 * r ** (1.0 / 3.0))) + 20
        orders = np.arange(-Kt, Kt + 1)
        for off in modulation_offsets:
            k0 = int(round(r + off * R3))
            c = knapp_coefficients(centre, length, k0, orders)
            val = rayleigh_quotient(table, c, float(r), R)
            if best is None or val > best[1]:
                best = (c, val, float(r), k0)
    c, val, r_star, k0 = best
    return KnappResult(c, float(val), r_star, centre, k0, length, length)
