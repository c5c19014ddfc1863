"""Bessel functions J_k(r) of integer order, the Airy pair on the negative axis,
and the turning-point quantities used to build lower-bound test functions.

Production values come from a single Miller backward-recurrence pass that
returns every order ``0..K`` at once.  The uniform (Airy-type) asymptotics
are evaluated only for validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DomainError, SizeError

DEFAULT_ACCURACY = 1e-13
MAX_RECURRENCE_ORDER = 2**25
_RESCALE_AT = 1e250
_RESCALE_BY = 1e-250
_FLUSH_BELOW = 1e-290


@dataclass(frozen=True)
class BesselVector:
    """``values[k] = J_k(r)`` for ``k = 0..max_order``."""

    r: float
    max_order: int
    values: np.ndarray
    accuracy: float

    @property
    def K(self) -> int:
        return self.max_order

    def __getitem__(self, k):
        return self.values[k]

    def signed(self, k) -> np.ndarray:
        """``J_k(r)`` for possibly negative ``k``, using ``J_{-k} = (-1)^k J_k``."""
        k = np.asarray(k)
        a = np.abs(k)
        v = self.values[a]
        return np.where((k < 0) & (a % 2 == 1), -v, v)


@numba.njit(cache=True)
def _miller_pass(r, start, K):  # pragma: no cover - compiled
    out = np.zeros(K + 1)
    f_hi = 0.0
    f = 1e-30
    lin = 0.0  # J_0 + 2 sum J_{2k}
    sq = 0.0  # J_0^2 + 2 sum J_k^2
    top = K  # stored entries above `top` are flushed zeros
    k = start
    if k <= K:
        out[k] = f
    sq += 2.0 * f * f
    if k % 2 == 0:
        lin += 2.0 * f
    while k > 0:
        f_lo = (2.0 * k / r) * f - f_hi
        f_hi = f
        f = f_lo
        k -= 1
        if abs(f) > _RESCALE_AT:
            f *= _RESCALE_BY
            f_hi *= _RESCALE_BY
            lin *= _RESCALE_BY
            sq *= _RESCALE_BY * _RESCALE_BY
            hi = min(top, K)
            for j in range(k + 1, hi + 1):
                out[j] *= _RESCALE_BY
            while top > k and abs(out[top]) < _FLUSH_BELOW:
                out[top] = 0.0
                top -= 1
        if k <= K:
            out[k] = f
        w = 1.0 if k == 0 else 2.0
        sq += w * f * f
        if k % 2 == 0:
            lin += w * f
    return out, lin, sq


def _pad(r: float) -> int:
    return max(50, int(math.ceil(10.0 * r ** (1.0 / 3.0))))


def bessel_vector(r: float, K: int, accuracy: float = DEFAULT_ACCURACY) -> BesselVector:
    """All ``J_0(r) .. J_K(r)`` from one backward-recurrence pass.

    The recurrence starts ``pad`` orders above ``max(K, r)`` with trial values
    (0, tiny) and is normalised by ``J_0 + 2 sum J_{2k} = 1``.  The pad is
    doubled (at most three times) whenever the independent identity
    ``J_0^2 + 2 sum J_k^2 = 1`` is violated by more than ``accuracy``.
    """
    r = float(r)
    K = int(K)
    if r < 0 or not math.isfinite(r):
        raise DomainError(f"Bessel argument must be finite and >= 0, got {r}")
    if K < 0:
        raise ValueError("max order must be >= 0")
    if r == 0.0:
        vals = np.zeros(K + 1)
        vals[0] = 1.0
    else:
        pad = _pad(r)
        for _ in range(4):
            start = max(K, int(math.ceil(r))) + pad
            if start > MAX_RECURRENCE_ORDER:
                raise SizeError(f"recurrence start order {start} exceeds cap {MAX_RECURRENCE_ORDER}")
            raw, lin, sq = _miller_pass(r, start, K)
            resid = abs(sq / (lin * lin) - 1.0)
            if resid <= max(accuracy, 1e-14):
                break
            pad *= 2
        vals = raw / lin
    vals.setflags(write=False)
    return BesselVector(r, K, vals, accuracy)


def bessel_series(k: int, r: float) -> float:
    """Power series ``sum_m (-1)^m (r/2)^(k+2m) / (m! (k+m)!)`` in double precision.

    Accurate only while the terms do not cancel badly (roughly ``r <= 10``).
    """
    if r == 0.0:
        return 1.0 if k == 0 else 0.0
    h = 0.5 * r
    term = math.exp(k * math.log(h) - math.lgamma(k + 1))
    total = term
    m = 0
    while True:
        m += 1
        term *= -h * h / (m * (k + m))
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300) and m > h:
            return total


# ------------------------------------------------------------------------- Airy


def _third_order_series(nu: float, z: np.ndarray) -> np.ndarray:
    """``sum_m (-z^2/4)^m / (m! Gamma(m + nu + 1))``: J_nu(z) without the (z/2)^nu factor."""
    q = -0.25 * z * z
    term = np.full(z.shape, 1.0 / math.gamma(nu + 1.0))
    total = term.copy()
    for m in range(1, 200):
        term = term * q / (m * (m + nu))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _hankel(nu: float, z: np.ndarray) -> np.ndarray:
    """Large-argument expansion ``sqrt(2/(pi z)) (P cos chi - Q sin chi)``, summed to its smallest term."""
    mu4 = 4.0 * nu * nu
    P = np.ones(z.shape)
    Q = np.zeros(z.shape)
    a = np.ones(z.shape)
    active = np.ones(z.shape, dtype=bool)
    last = np.full(z.shape, np.inf)
    for k in range(1, 120):
        a = a * (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * z)
        mag = np.abs(a)
        active &= mag < last
        last = np.where(active, mag, last)
        contrib = np.where(active, a, 0.0)
        sign = -1.0 if (k // 2) % 2 == 1 else 1.0
        if k % 2 == 0:
            P += sign * contrib
        else:
            Q += sign * contrib
        if not np.any(active & (mag > 1e-17)):
            break
    chi = z - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * z)) * (P * np.cos(chi) - Q * np.sin(chi))


_SERIES_LIMIT = 12.0


def airy_pair(t):
    """``(Ai(-t), Bi(-t))`` for ``t >= 0`` through Bessel functions of order +-1/3.

    With ``z = (2/3) t**1.5``, ``Ai(-t) = (sqrt(t)/3)(J_{1/3}(z) + J_{-1/3}(z))`` and
    ``Bi(-t) = sqrt(t/3)(J_{-1/3}(z) - J_{1/3}(z))``.  Power series for ``z <= 12``
    (where the t-powers are folded in exactly, so t = 0 is regular), Hankel
    asymptotics beyond.
    """
    t_in = np.asarray(t, dtype=float)
    t = np.atleast_1d(t_in)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise DomainError("airy_pair needs finite t >= 0")
    z = (2.0 / 3.0) * t * np.sqrt(t)
    ai = np.empty(t.shape)
    bi = np.empty(t.shape)
    small = z <= _SERIES_LIMIT
    if np.any(small):
        zs, ts = z[small], t[small]
        c = 3.0 ** (1.0 / 3.0)
        # sqrt(t) (z/2)^(1/3) = t / 3^(1/3),  sqrt(t) (z/2)^(-1/3) = 3^(1/3)
        plus = (ts / c) * _third_order_series(1.0 / 3.0, zs)
        minus = c * _third_order_series(-1.0 / 3.0, zs)
        ai[small] = (plus + minus) / 3.0
        bi[small] = (minus - plus) / math.sqrt(3.0)
    big = ~small
    if np.any(big):
        zb, tb = z[big], t[big]
        jp = _hankel(1.0 / 3.0, zb)
        jm = _hankel(-1.0 / 3.0, zb)
        ai[big] = np.sqrt(tb) / 3.0 * (jp + jm)
        bi[big] = np.sqrt(tb / 3.0) * (jm - jp)
    if t_in.ndim == 0:
        return float(ai[0]), float(bi[0])
    return ai, bi


def bessel_third(nu: float, z):
    """``J_nu(z)`` for ``nu = +-1/3`` (low-order asymptotic checks)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty(z.shape)
    small = z <= _SERIES_LIMIT
    out[small] = (0.5 * z[small]) ** nu * _third_order_series(nu, z[small])
    out[~small] = _hankel(nu, z[~small])
    return out


# ----------------------------------------------------------- phase & asymptotics


@dataclass(frozen=True)
class PhaseData:
    k: float
    r: float
    f: float
    f_prime: float


def _x_minus_atan(x: float) -> float:
    if x < 1e-2:
        x2 = x * x
        total, term, j = 0.0, x, 1
        while True:
            term *= -x2
            add = term / (2 * j + 1)
            total -= add
            if abs(add) <= 1e-18 * abs(total):
                return total
            j += 1
    return x - math.atan(x)


def phase(k: float, r: float) -> PhaseData:
    """``f_k(r) = sqrt(r^2 - k^2) - k arccos(k/r)`` and ``f_k'(r) = sqrt(r^2 - k^2)/r``."""
    k, r = float(k), float(r)
    if not (r >= k > 0):
        raise DomainError(f"phase needs r >= k > 0, got k={k}, r={r}")
    w = math.sqrt((r - k) * (r + k))
    # f = k (x - atan x) with x = w / k, stable as r -> k
    f = k * _x_minus_atan(w / k)
    return PhaseData(k, r, f, w / r)


_TAYLOR_SWITCH = 1e-3
_CBRT2 = 2.0 ** (1.0 / 3.0)


def turning_phi(lam: float) -> tuple[float, float]:
    """``phi(lambda)`` and ``phi'(lambda)`` on ``lambda >= 1``.

    ``phi (phi')^2 = 1 - lambda^-2`` with ``(2/3) phi^(3/2) = sqrt(lambda^2 - 1) - arccos(1/lambda)``.
    Near the turning point a three-term expansion about 1 is used.
    """
    if lam < 1.0:
        raise DomainError("turning_phi implemented only for lambda >= 1")
    e = lam - 1.0
    if e < _TAYLOR_SWITCH:
        phi = _CBRT2 * e * (1.0 - 0.3 * e + (32.0 / 175.0) * e * e)
        dphi = _CBRT2 * (1.0 - 0.6 * e + (96.0 / 175.0) * e * e)
        return phi, dphi
    x = math.sqrt(lam * lam - 1.0)
    phi = (1.5 * _x_minus_atan(x)) ** (2.0 / 3.0)
    return phi, math.sqrt((1.0 - lam**-2) / phi)


def uniform_leading_term(k: int, r: float) -> float:
    """Leading Airy-type term ``(lambda/2 k^(2/3) phi')^(-1/2) Ai(-k^(2/3) phi)`` of ``J_k(k lambda)``."""
    k = float(k)
    lam = r / k
    if not 1.0 <= lam <= 1.5:
        raise DomainError(f"uniform asymptotics validated only for r/k in [1, 3/2], got {lam}")
    phi, dphi = turning_phi(lam)
    k23 = k ** (2.0 / 3.0)
    ai, _ = airy_pair(k23 * phi)
    return (0.5 * lam * k23 * dphi) ** -0.5 * ai


def uniform_envelope(k: float, R: float) -> float:
    """``R^(-1/2) min(max(k,1)^(1/6), ((R+k)/|R-k|)^(1/4))``; first branch when ``k == R``."""
    k, R = abs(float(k)), float(R)
    first = max(k, 1.0) ** (1.0 / 6.0)
    if k == R:
        return R**-0.5 * first
    return R**-0.5 * min(first, ((R + k) / abs(R - k)) ** 0.25)


# --------------------------------------------------------------- window averages


def _abs_linear_integral(a: np.ndarray, b: np.ndarray, h: float) -> np.ndarray:
    """Exact integral of ``|linear interpolant|`` over a cell; the kink at a sign change is resolved."""
    same = a * b >= 0
    s = np.abs(a) + np.abs(b)
    with np.errstate(invalid="ignore", divide="ignore"):
        cross = np.where(s > 0, (a * a + b * b) / s, 0.0)
    return 0.5 * h * np.where(same, s, cross)


def average_step(R: float, k_lo: int, grid_per_wavelength: int = 16) -> float:
    """Quadrature step for orders ``k >= k_lo`` on the window around ``R``.

    The local length scale ``1/f_k'(r)`` is smallest for the lowest order at
    the right end of the window; the step resolves it with
    ``max(16, grid_per_wavelength)`` points and never exceeds 1/4.
    """
    b = R + float(np.cbrt(R))
    k = min(float(k_lo), b)
    fp = math.sqrt((b - k) * (b + k)) / b
    if fp == 0.0:
        return 0.25
    return min(0.25, 1.0 / (fp * max(16, grid_per_wavelength)))


def window(R: float) -> tuple[float, float]:
    R3 = float(np.cbrt(R))
    return R - R3, R + R3


def _abs_pair_integral(a: np.ndarray, b: np.ndarray, c: np.ndarray, h: float) -> np.ndarray:
    """``int |J|`` over two cells: Simpson where the sign is constant, exact linear across a zero."""
    smooth = (a * b > 0) & (b * c > 0)
    simpson = (h / 3.0) * (np.abs(a) + 4.0 * np.abs(b) + np.abs(c))
    return np.where(smooth, simpson, _abs_linear_integral(a, b, h) + _abs_linear_integral(b, c, h))


def average_abs_many(k_lo: int, k_hi: int, R: float, grid_per_wavelength: int = 16, step: float | None = None) -> np.ndarray:
    """``A_k(R) = R^(-1/3) int_{R-R^(1/3)}^{R+R^(1/3)} |J_k(r)| dr`` for every ``k_lo <= k <= k_hi``.

    Composite rule on pairs of cells; pairs containing a sign change of
    ``J_k`` fall back to the exact integral of the piecewise-linear ``|J_k|``.
    """
    if R < 1:
        raise DomainError("average_abs needs R >= 1")
    a, b = window(R)
    h0 = step if step is not None else average_step(R, k_lo, grid_per_wavelength)
    n = 2 * int(math.ceil((b - a) / (2 * h0)))
    h = (b - a) / n
    acc = np.zeros(k_hi - k_lo + 1)
    prev = bessel_vector(a, k_hi).values[k_lo:]
    for i in range(2, n + 1, 2):
        mid = bessel_vector(a + (i - 1) * h, k_hi).values[k_lo:]
        cur = bessel_vector(a + i * h, k_hi).values[k_lo:]
        acc += _abs_pair_integral(prev, mid, cur, h)
        prev = cur
    return acc / float(np.cbrt(R))


def average_abs(k: int, R: float, grid_per_wavelength: int = 16, step: float | None = None) -> float:
    """Single-order version of :func:`average_abs_many`."""
    if k < 0:
        raise DomainError("order must be >= 0")
    return float(average_abs_many(k, k, R, grid_per_wavelength, step)[0])


def admissible_range(R: float, C0: float = 16.0) -> list[int]:
    """Integers ``p`` with ``C0 <= 4^p <= R^(2/3) / C0``."""
    out = []
    p = 0
    top = float(np.cbrt(R)) ** 2 / C0
    while 4.0**p <= top:
        if 4.0**p >= C0:
            out.append(p)
        p += 1
    return out
