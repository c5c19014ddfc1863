"""Self-similar s-regular probability measures on the circle [0, 1).

A measure is generated by ``m`` similitudes ``x -> rho * x + b_d`` with equal
weights ``1/m``.  Everything downstream sees the measure only through its
Fourier coefficients ``mu_hat(n) = int exp(-2 pi i n t) dmu(t)``, cached in a
:class:`FourierTable`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .coeffs import Coefficients
from .errors import RangeError, SizeError, ValidationError

DEFAULT_EPS_TAIL = 1e-8
DEFAULT_LP_K = 2
MAX_ATOMS = 2**24
MAX_TABLE = 2**25
_ENDPOINT_SLACK = 1e-12


@dataclass(frozen=True)
class SelfSimilarMeasure:
    m: int
    rho: float
    digits: tuple[float, ...]
    label: str = ""

    @property
    def dimension(self) -> float:
        if self.m == 1:
            return 0.0
        return math.log(self.m) / math.log(1.0 / self.rho)

    s = dimension

    @property
    def hull(self) -> tuple[float, float]:
        """Convex hull of the support: the extreme fixed points of the maps."""
        return self.digits[0] / (1.0 - self.rho), self.digits[-1] / (1.0 - self.rho)

    @property
    def symmetry_center(self) -> float | None:
        """Centre ``c`` with ``mu`` invariant under ``t -> 2c - t``, if the digit set is symmetric."""
        b = np.asarray(self.digits)
        if np.allclose(b + b[::-1], b[0] + b[-1], rtol=0, atol=1e-14):
            c = float(b.mean()) / (1.0 - self.rho)
            snap = float(Fraction(c).limit_denominator(10**6))
            return snap if abs(snap - c) < 1e-13 else c
        return None

    @property
    def name(self) -> str:
        return self.label or f"m{self.m}_rho{self.rho:.6g}"

    def maps(self, x):
        """Images of ``x`` under every similitude, shape ``(m, *x.shape)``."""
        x = np.asarray(x, dtype=float)
        return np.asarray(self.digits).reshape((-1,) + (1,) * x.ndim) + self.rho * x


def build_self_similar(m: int, rho: float, digits: Sequence[float], label: str = "") -> SelfSimilarMeasure:
    """Validate similitude data and return the measure.

    Raises :class:`ValidationError` if ``m * rho > 1``, if a digit falls outside
    ``[0, 1 - rho]``, or if two branch intervals overlap (naming the pair).
    """
    m = int(m)
    rho = float(rho)
    if m < 1:
        raise ValidationError(f"branch count must be >= 1, got {m}")
    if not 0.0 < rho < 1.0:
        raise ValidationError(f"ratio must lie in (0, 1), got {rho}")
    if len(digits) != m:
        raise ValidationError(f"expected {m} digits, got {len(digits)}")
    if m * rho > 1.0 + _ENDPOINT_SLACK:
        raise ValidationError(f"m * rho = {m * rho:.6g} > 1: branches cannot be disjoint")
    b = sorted(float(d) for d in digits)
    for d in b:
        if d < -_ENDPOINT_SLACK or d > 1.0 - rho + _ENDPOINT_SLACK:
            raise ValidationError(f"digit {d} outside [0, 1 - rho] = [0, {1.0 - rho:.6g}]")
    for i in range(m - 1):
        if b[i] + rho > b[i + 1] + _ENDPOINT_SLACK:
            raise ValidationError(
                f"branch intervals [{b[i]:.6g}, {b[i] + rho:.6g}] and "
                f"[{b[i + 1]:.6g}, {b[i + 1] + rho:.6g}] overlap (digits {i} and {i + 1})"
            )
    b = [min(max(d, 0.0), 1.0 - rho) for d in b]
    return SelfSimilarMeasure(m, rho, tuple(b), label)


def quarter_cantor() -> SelfSimilarMeasure:
    return build_self_similar(2, 0.25, [0.0, 0.75], label="quarter_cantor")


def lebesgue() -> SelfSimilarMeasure:
    return build_self_similar(2, 0.5, [0.0, 0.5], label="lebesgue")


def middle_thirds_cantor() -> SelfSimilarMeasure:
    return build_self_similar(2, 1.0 / 3.0, [0.0, 2.0 / 3.0], label="middle_thirds")


def ninth_cantor() -> SelfSimilarMeasure:
    return build_self_similar(2, 1.0 / 9.0, [0.0, 8.0 / 9.0], label="ninth_cantor")


STANDARD_MEASURES = {
    "quarter_cantor": quarter_cantor,
    "lebesgue": lebesgue,
    "middle_thirds": middle_thirds_cantor,
    "ninth_cantor": ninth_cantor,
}


# --------------------------------------------------------------------------- atoms


@dataclass(frozen=True)
class AtomApproximation:
    """Generation-``g`` discretisation: one atom of mass ``m**-g`` per cylinder."""

    generation: int
    positions: np.ndarray
    masses: np.ndarray

    def __len__(self):
        return self.positions.size

    def as_list(self) -> list[tuple[float, float]]:
        return list(zip(self.positions.tolist(), self.masses.tolist()))

    def integrate(self, f) -> complex:
        return np.sum(self.masses * f(self.positions))


def _cylinder_origins(mu: SelfSimilarMeasure, g: int, start: float, max_atoms: int) -> np.ndarray:
    if mu.m**g > max_atoms:
        raise SizeError(f"{mu.m}**{g} atoms exceed the cap of {max_atoms}")
    pos = np.array([start])
    for _ in range(g):
        pos = mu.maps(pos).ravel()
    if mu.m > 1:
        # preorder of digit-major images is sorted except in degenerate touching cases
        pos = np.sort(pos)
    return pos


def atoms(mu: SelfSimilarMeasure, g: int, max_atoms: int = MAX_ATOMS) -> AtomApproximation:
    """Images of 0 under all length-``g`` compositions of the maps, sorted."""
    if g < 0:
        raise ValueError("generation must be non-negative")
    pos = _cylinder_origins(mu, g, 0.0, max_atoms)
    masses = np.full(pos.shape, float(mu.m) ** (-g))
    pos.setflags(write=False)
    masses.setflags(write=False)
    return AtomApproximation(g, pos, masses)


def support_points(mu: SelfSimilarMeasure, g: int, max_atoms: int = MAX_ATOMS) -> np.ndarray:
    """Generation-``g`` images of the left hull endpoint; all lie in spt mu."""
    return _cylinder_origins(mu, g, mu.hull[0], max_atoms)


# ---------------------------------------------------------------------- ball mass


def _interval_mass_bounds(mu: SelfSimilarMeasure, lo: float, hi: float, depth: int) -> tuple[float, float]:
    """Lower/upper bounds for ``mu([lo, hi])`` by descent through the cylinder tree."""
    h0, h1 = mu.hull
    b = np.asarray(mu.digits)
    inside = 0.0
    origins = np.array([0.0])
    length = 1.0
    mass = 1.0
    for level in range(depth + 1):
        left = origins + length * h0
        right = origins + length * h1
        full = (left >= lo) & (right <= hi)
        meets = (right >= lo) & (left <= hi)
        inside += mass * np.count_nonzero(full)
        undecided = origins[meets & ~full]
        if undecided.size == 0:
            return inside, inside
        if level == depth or length * mu.rho < 1e-17:
            return inside, inside + mass * undecided.size
        # children of the cylinder o + L*[hull] are o + L*b_d + L*rho*[hull]
        origins = (undecided[None, :] + length * b[:, None]).ravel()
        length *= mu.rho
        mass /= mu.m
    raise AssertionError("unreachable")


def ball_mass(mu: SelfSimilarMeasure, x: float, r: float, depth: int = 60) -> float:
    """Mass of the closed ball ``{t : d(t, x) <= r}`` in the wrap-around metric on [0, 1).

    Exact whenever the descent resolves every cylinder before ``depth``
    generations; otherwise the midpoint of the bracket is returned, which is
    within ``2 m**-depth`` of the true value.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    if r >= 0.5:
        return 1.0
    if mu.m == 1:
        p = mu.hull[0]
        d = abs(p - x) % 1.0
        return 1.0 if min(d, 1.0 - d) <= r else 0.0
    x = x % 1.0
    lo, hi = x - r, x + r
    pieces = [(max(lo, 0.0), min(hi, 1.0))]
    if lo < 0:
        pieces.append((1.0 + lo, 1.0))
    if hi > 1:
        pieces.append((0.0, hi - 1.0))
    low = high = 0.0
    for a, c in pieces:
        lb, ub = _interval_mass_bounds(mu, a, c, depth)
        low += lb
        high += ub
    # the pieces can only share the point 0 == 1, which carries no mass for m >= 2
    return 0.5 * (min(low, 1.0) + min(high, 1.0))


def regularity_constants(
    mu: SelfSimilarMeasure, sample_count: int, scales: Sequence[float], seed: int = 0
) -> tuple[float, float]:
    """Min and max of ``mu(B(x, r)) / r**s`` over sampled support points and listed radii."""
    scales = [float(r) for r in scales]
    if any(not 0 < r <= 0.5 for r in scales):
        raise ValueError("scales must lie in (0, 1/2]")
    g = 0
    while mu.m**g < sample_count and mu.m > 1:
        g += 1
    pts = support_points(mu, g)
    rng = np.random.default_rng(seed)
    if pts.size > sample_count:
        pts = np.sort(rng.choice(pts, size=sample_count, replace=False))
    s = mu.dimension
    ratios = [ball_mass(mu, x, r) / r**s for x in pts for r in scales]
    return float(min(ratios)), float(max(ratios))


# ------------------------------------------------------------- Fourier transform


def _centred_digits(mu: SelfSimilarMeasure) -> tuple[np.ndarray, float]:
    b = np.asarray(mu.digits, dtype=float)
    bbar = float(b.mean())
    return b - bbar, bbar


def _phase_centre(mu: SelfSimilarMeasure) -> float:
    """``bbar / (1 - rho)``, snapped to the exact symmetry centre when there is one."""
    c = mu.symmetry_center
    return c if c is not None else float(np.mean(mu.digits)) / (1.0 - mu.rho)


def _factor_count(mu: SelfSimilarMeasure, xi_max: float, eps_tail: float) -> int:
    """Number of product factors kept: stop after factor j once rho**j |xi| d < eps.

    ``d`` is the largest distance of a digit from the digit mean.
    """
    bc, _ = _centred_digits(mu)
    d = float(np.max(np.abs(bc)))
    if xi_max * d == 0.0:
        return 0
    j = 1
    while mu.rho**j * xi_max * d >= eps_tail:
        j += 1
    return j


def fourier_coefficient(mu: SelfSimilarMeasure, xi: float, eps_tail: float = DEFAULT_EPS_TAIL) -> complex:
    """Truncated infinite product for ``mu_hat(xi)``.

    Each factor is split as ``exp(-2 pi i xi rho^(j-1) bbar)`` times a mean-centred
    digit sum.  The pure phases multiply out exactly to ``exp(-2 pi i xi bbar/(1-rho))``,
    so only centred factors are truncated; those differ from 1 by at most
    ``(2 pi |xi| rho^(j-1) d)^2 / 2``, far below ``eps_tail`` past the cutoff.
    For a symmetric digit set the centred factors are real.
    """
    return complex(fourier_coefficients(mu, np.array([xi], dtype=float), eps_tail)[0])


def fourier_coefficients(mu: SelfSimilarMeasure, xi, eps_tail: float = DEFAULT_EPS_TAIL) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    out = np.ones(xi.shape, dtype=complex)
    if xi.size == 0:
        return out
    J = _factor_count(mu, float(np.max(np.abs(xi))), eps_tail)
    bc, bbar = _centred_digits(mu)
    for j in range(1, J + 1):
        scale = mu.rho ** (j - 1)
        factor = np.zeros(xi.shape, dtype=complex)
        for bd in bc:
            factor += np.exp(-2j * np.pi * np.mod(xi * (scale * bd), 1.0))
        out *= factor / mu.m
    return out * np.exp(-2j * np.pi * np.mod(xi * _phase_centre(mu), 1.0))


def _exp_phase_run(c: float, n_max: int) -> np.ndarray:
    """``exp(-2 pi i c n)`` for ``n = 0..n_max`` from two short exact-exp tables."""
    n = n_max + 1
    B = max(1, math.isqrt(n))
    Q = -(-n // B)
    lo = np.exp(-2j * np.pi * np.mod(c * np.arange(B), 1.0))
    hi = np.exp(-2j * np.pi * np.mod((c * B) * np.arange(Q), 1.0))
    return (hi[:, None] * lo[None, :]).ravel()[:n]


@dataclass(frozen=True)
class FourierTable:
    """Cached ``mu_hat(n)`` for ``|n| <= N``; ``values[n + N]`` holds ``mu_hat(n)``."""

    max_frequency: int
    values: np.ndarray
    eps_tail: float
    symmetry_center: float | None = None
    label: str = ""
    dimension: float = float("nan")
    centred: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def N(self) -> int:
        return self.max_frequency

    def __getitem__(self, n):
        n = np.asarray(n)
        if np.any(np.abs(n) > self.max_frequency):
            raise RangeError(f"frequency {int(np.max(np.abs(n)))} beyond table range {self.max_frequency}")
        out = self.values[n + self.max_frequency]
        return complex(out) if out.ndim == 0 else out

    def require(self, n_max: int):
        if n_max > self.max_frequency:
            raise RangeError(f"need |n| <= {n_max}, table covers only {self.max_frequency}")

    def slice(self, n_max: int) -> np.ndarray:
        """``mu_hat(n)`` for ``n = -n_max..n_max``."""
        self.require(n_max)
        N = self.max_frequency
        return self.values[N - n_max : N + n_max + 1]

    def real_symbol(self, n_max: int) -> np.ndarray | None:
        """``Re(exp(2 pi i n c) mu_hat(n))`` when the measure is symmetric about ``c``."""
        if self.symmetry_center is None:
            return None
        if self.centred is not None:
            self.require(n_max)
            N = self.max_frequency
            return self.centred[N - n_max : N + n_max + 1].copy()
        n = np.arange(-n_max, n_max + 1)
        rot = self.slice(n_max) * np.exp(2j * np.pi * np.mod(n * self.symmetry_center, 1.0))
        if np.max(np.abs(rot.imag)) > 1e-12:
            return None
        return rot.real.copy()

    def to_csv(self, dest=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re", "im"])
        N = self.max_frequency
        for n, v in zip(range(-N, N + 1), self.values):
            w.writerow([n, repr(float(v.real)), repr(float(v.imag))])
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str, eps_tail: float = DEFAULT_EPS_TAIL) -> "FourierTable":
        rows = list(csv.DictReader(io.StringIO(text)))
        ns = np.array([int(r["n"]) for r in rows])
        vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
        N = int(np.max(np.abs(ns)))
        full = np.zeros(2 * N + 1, dtype=complex)
        full[ns + N] = vals
        full.setflags(write=False)
        return cls(N, full, eps_tail)


def fourier_table(
    mu: SelfSimilarMeasure, N: int, eps_tail: float = DEFAULT_EPS_TAIL, max_entries: int = MAX_TABLE
) -> FourierTable:
    """Tabulate ``mu_hat`` on ``-N..N``; negative frequencies are exact conjugates."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    if 2 * N + 1 > max_entries:
        raise SizeError(f"table of {2 * N + 1} entries exceeds cap {max_entries}")
    half = np.ones(N + 1, dtype=complex)
    J = _factor_count(mu, float(N), eps_tail)
    bc, bbar = _centred_digits(mu)
    for j in range(1, J + 1):
        scale = mu.rho ** (j - 1)
        factor = np.zeros(N + 1, dtype=complex)
        for bd in bc:
            factor += _exp_phase_run(scale * bd, N) if bd != 0.0 else 1.0
        half *= factor / mu.m
    centred = None
    if mu.symmetry_center is not None:
        c = half.real.copy()
        c[0] = 1.0
        centred = np.concatenate([c[:0:-1], c])
        centred.setflags(write=False)
    if bbar != 0.0:
        half *= _exp_phase_run(_phase_centre(mu), N)
    half[0] = 1.0
    full = np.concatenate([np.conj(half[:0:-1]), half])
    full.setflags(write=False)
    return FourierTable(N, full, eps_tail, mu.symmetry_center, mu.name, mu.dimension, centred)


# ---------------------------------------------------- Littlewood-Paley pieces


def bump(xi, R: float) -> np.ndarray:
    """Smooth radial plateau: 1 on ``|xi| <= R**(1/3)/2``, 0 on ``|xi| >= R**(1/3)``."""
    u = np.abs(np.asarray(xi, dtype=float)) / float(np.cbrt(R))
    t = np.clip(2.0 * u - 1.0, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t < 1.0, np.exp(-1.0 / np.where(t < 1.0, 1.0 - t, 1.0)), 0.0)
        b = np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)
    return a / (a + b)


def lp_bracket(n, p: int, K: int, R: float) -> np.ndarray:
    """``phi(4**-(p+K) n) - phi(4**-p n)``: the multiplier defining the piece Delta_p."""
    n = np.asarray(n, dtype=float)
    return bump(n * 4.0 ** (-p - K), R) - bump(n * 4.0 ** (-p), R)


def lp_support(p: int, K: int, R: float) -> tuple[int, int]:
    """Integer ``|n|`` range outside which the bracket vanishes identically."""
    R3 = float(np.cbrt(R))
    return int(math.floor(0.5 * R3 * 4.0**p)), int(math.ceil(R3 * 4.0 ** (p + K)))


def lp_piece_coefficients(table: FourierTable, p: int, K: int = DEFAULT_LP_K, R: float = 1.0) -> Coefficients:
    """Fourier coefficients of ``Delta_p(mu) = mu * (eta_{4^-(p+K)} - eta_{4^-p})`` where nonzero."""
    if p < 0 or K < 1:
        raise ValueError("need p >= 0 and K >= 1")
    lo, hi = lp_support(p, K, R)
    if hi > table.max_frequency:
        raise RangeError(f"band up to |n| = {hi} exceeds table range {table.max_frequency}")
    mags = np.arange(max(lo, 1), hi + 1)
    br = lp_bracket(mags, p, K, R)
    keep = br != 0.0
    mags, br = mags[keep], br[keep]
    n = np.concatenate([-mags[::-1], mags])
    vals = table[n] * np.concatenate([br[::-1], br])
    return Coefficients(n, vals)


def mollifier_coefficients(table: FourierTable, p: int, R: float) -> Coefficients:
    """Fourier coefficients of ``mu * eta_{4^-p}``: ``mu_hat(n) phi(4**-p n)``."""
    hi = int(math.ceil(float(np.cbrt(R)) * 4.0**p))
    table.require(hi)
    n = np.arange(-hi, hi + 1)
    w = bump(n * 4.0 ** (-p), R)
    return Coefficients(n, table[n] * w)


def evaluate_series(c: Coefficients, t) -> np.ndarray:
    """``sum_n c_n exp(2 pi i n t)`` at arbitrary points, chunked direct summation."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t.shape, dtype=complex)
    step = max(1, 2**22 // max(1, len(c)))
    for i in range(0, t.size, step):
        ph = np.exp(2j * np.pi * np.mod(np.outer(t[i : i + step], c.freqs), 1.0))
        out[i : i + step] = ph @ c.values
    return out


def evaluate_on_grid(c: Coefficients, size: int) -> np.ndarray:
    """Same series on the grid ``t_j = j / size`` via one inverse FFT."""
    if size <= 2 * c.max_abs_freq:
        raise ValueError(f"grid of {size} points aliases frequencies up to {c.max_abs_freq}")
    buf = np.zeros(size, dtype=complex)
    np.add.at(buf, np.mod(c.freqs, size), c.values)
    return np.fft.ifft(buf) * size
