"""The extension quadratic form ``G_jk = J_|j|(r) mu_hat(j-k) J_|k|(r)``, its top
eigenvalue, and the energy ``R * max_r lambda_max(G(r))`` over a radius window.

Orders are folded to ``|k|`` on the diagonal; the signs ``J_{-k} = (-1)^k J_k``
form a diagonal unitary that changes no eigenvalue and no Rayleigh quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.linalg import eigh

from .bessel import bessel_vector
from .coeffs import Coefficients
from .errors import AliasingError, RangeError, ValidationError
from .measure import FourierTable

LANCZOS_SEED = 0x5EED
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 400
DEFAULT_RADIUS_GRID = 9
DIAGONAL_THRESHOLD = 1e-14
TRIM_RELATIVE = 1e-17
BASIS_BYTES = 800 * 2**20
MAX_BASIS = 64


def default_band(r: float) -> int:
    return int(math.ceil(1.3 * r)) + 200


class _Toeplitz:
    """Matrix-free ``T x`` for ``T_jk = c(j - k)`` by circulant embedding.

    ``symbol`` holds ``c(n)`` for ``n = -(n-1)..(n-1)``.  A real even symbol uses
    real transforms throughout.
    """

    def __init__(self, symbol: np.ndarray, real: bool):
        size = (len(symbol) + 1) // 2
        self.n = size
        self.real = real
        self.L = sfft.next_fast_len(2 * size - 1, real=real)
        col = np.zeros(self.L, dtype=float if real else complex)
        col[:size] = symbol[size - 1 :]
        col[self.L - size + 1 :] = symbol[: size - 1]
        if real:
            self.spec = sfft.rfft(col).real  # DFT of a real even sequence is real
        else:
            self.spec = sfft.fft(col)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.real:
            return sfft.irfft(self.spec * sfft.rfft(x, self.L), self.L)[: self.n]
        return sfft.ifft(self.spec * sfft.fft(x, self.L))[: self.n]


@dataclass
class QuadraticForm:
    """``G = D T D`` on the band ``-K..K`` with ``D = diag(J_|k|(r))`` and ``T_jk = mu_hat(j-k)``."""

    r: float
    K: int
    diag: np.ndarray
    symbol: np.ndarray
    real_symbol: np.ndarray | None = None
    center: float | None = None
    phase_absorbed: bool = True
    _toeplitz: _Toeplitz | None = field(default=None, repr=False, compare=False)

    @property
    def size(self) -> int:
        return 2 * self.K + 1

    @property
    def band(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def entry(self, j: int, k: int) -> complex:
        return complex(self.diag[j + self.K] * self.symbol[j - k + 2 * self.K] * self.diag[k + self.K])

    def dense(self) -> np.ndarray:
        idx = np.arange(self.size)
        T = self.symbol[idx[:, None] - idx[None, :] + 2 * self.K]
        return self.diag[:, None] * T * self.diag[None, :]

    def toeplitz(self) -> _Toeplitz:
        if self._toeplitz is None:
            self._toeplitz = _Toeplitz(self.symbol, real=False)
        return self._toeplitz

    def trimmed_order(self) -> int:
        """Largest ``|k|`` whose diagonal entry is not negligible against the peak."""
        d = np.abs(self.diag[self.K :])
        big = np.nonzero(d >= TRIM_RELATIVE * d.max())[0]
        return int(big[-1]) if big.size else 0

    def off_diagonal_mass(self, K_eff: int | None = None) -> float:
        """``sum_{0 < |n| <= 2 K_eff} |mu_hat(n)|``: bounds ``||T - I||``."""
        K_eff = self.K if K_eff is None else K_eff
        mid = 2 * self.K
        s = np.abs(self.symbol[mid - 2 * K_eff : mid + 2 * K_eff + 1])
        return float(s.sum() - s[2 * K_eff])


def build_form(table: FourierTable, r: float, K: int | None = None) -> QuadraticForm:
    """Assemble the form at radius ``r`` on the band ``-K..K`` (default ``ceil(1.3 r) + 200``)."""
    r = float(r)
    K = default_band(r) if K is None else int(K)
    if r < 0 or K < 0:
        raise ValidationError("need r >= 0 and K >= 0")
    if 2 * K > table.max_frequency:
        raise RangeError(f"form needs mu_hat up to |n| = {2 * K}, table covers {table.max_frequency}")
    bv = bessel_vector(r, K)
    vals = bv.values
    diag = np.concatenate([vals[:0:-1], vals])
    symbol = table.slice(2 * K)
    rs = table.real_symbol(2 * K)
    return QuadraticForm(r, K, diag, symbol, rs, table.symmetry_center if rs is not None else None)


def apply_form(Q: QuadraticForm, x: np.ndarray) -> np.ndarray:
    """``y = D (T (D x))`` with the Toeplitz product by FFT in ``O(K log K)``."""
    x = np.asarray(x)
    if x.shape != (Q.size,):
        raise ValidationError(f"vector of length {x.shape} does not match band size {Q.size}")
    return Q.diag * Q.toeplitz()(Q.diag * x)


# ---------------------------------------------------------------- eigensolver


@dataclass
class LanczosResult:
    eigenvalue: float
    residual: float
    iterations: int
    converged: bool
    vector: np.ndarray | None = field(default=None, repr=False)

    def __iter__(self):
        return iter((self.eigenvalue, self.residual))


def _project(V: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Inner products ``<V_i, w>`` without conjugating the whole basis."""
    if np.iscomplexobj(V):
        return np.conj(V @ np.conj(w))
    return V @ w


def lanczos_top(
    matvec,
    n: int,
    dtype=float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = LANCZOS_SEED,
    max_basis: int | None = None,
    keep_vector: bool = False,
) -> LanczosResult:
    """Top eigenpair of a Hermitian operator by thick-restart Lanczos.

    Every new direction is orthogonalized against the whole basis (a second
    classical Gram-Schmidt pass runs when the first one cancels heavily), so the
    projected matrix is recorded in full rather than as a tridiagonal.  On
    restart the leading Ritz vectors are kept.  ``max_iter`` counts operator
    applications; the returned residual is the explicit ``||A v - theta v||``.
    """
    dtype = np.dtype(dtype)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    if dtype.kind == "c":
        v = v + 1j * rng.standard_normal(n)
    v = v.astype(dtype)
    v /= np.linalg.norm(v)
    if max_basis is None:
        max_basis = int(BASIS_BYTES // max(1, n * dtype.itemsize)) - 1
        max_basis = max(8, min(MAX_BASIS, max_basis))
    m = max(1, min(max_basis, n))
    V = np.empty((m + 1, n), dtype=dtype)
    H = np.zeros((m + 1, m + 1), dtype=dtype)
    V[0] = v
    j = 0
    used = 0
    beta = 0.0
    theta, y = 0.0, np.ones(1)
    while True:
        breakdown = False
        check = False
        while j < m and used < max_iter:
            w = matvec(V[j])
            used += 1
            wn = np.linalg.norm(w)
            h = _project(V[: j + 1], w)
            w = w - h @ V[: j + 1]
            if np.linalg.norm(w) < 0.7071 * wn:
                # cancellation: a second pass restores orthogonality
                h2 = _project(V[: j + 1], w)
                w -= h2 @ V[: j + 1]
                h += h2
            H[: j + 1, j] = h
            H[j, : j + 1] = h.conj()
            beta = float(np.linalg.norm(w))
            j += 1
            scale = max(abs(H[0, 0]), float(np.max(np.abs(h))), 1e-300)
            if beta <= 1e-14 * scale:
                breakdown = True
                break
            H[j, j - 1] = H[j - 1, j] = beta
            V[j] = w / beta
            vals, vecs = eigh(H[:j, :j], eigvals_only=False, subset_by_index=[j - 1, j - 1])
            if abs(beta * vecs[-1, 0]) <= tol * abs(vals[0]):
                check = True
                break
        thetas, Y = eigh(H[:j, :j])
        theta, y = float(thetas[-1]), Y[:, -1]
        if check or breakdown or used >= max_iter:
            u = y @ V[:j]
            u /= np.linalg.norm(u)
            res = float(np.linalg.norm(matvec(u) - theta * u))
            ok = res <= tol * abs(theta) or (breakdown and res <= 1e3 * tol * abs(theta))
            if ok or used >= max_iter or breakdown:
                return LanczosResult(theta, res, used, ok, u if keep_vector else None)
        keep = max(1, min(m // 2, j - 1))
        Yk = Y[:, -keep:]
        V[:keep] = Yk.T @ V[:j]
        V[keep] = V[j]
        H[:] = 0
        H[np.arange(keep), np.arange(keep)] = thetas[-keep:]
        j = keep


def lambda_max(
    Q: QuadraticForm,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = LANCZOS_SEED,
    keep_vector: bool = False,
) -> LanczosResult:
    """Largest eigenvalue of the form.

    Rows with negligible Bessel weight are dropped first.  When the measure is
    symmetric the phase rotation ``exp(2 pi i k c)`` turns the form real
    symmetric and the real Lanczos path is used.  A numerically diagonal form
    (all off-diagonal ``|mu_hat|`` below 1e-14) is read off directly, with the
    Weyl bound ``max d^2 * sum |mu_hat(n != 0)|`` reported as residual.
    """
    if tol <= 0:
        raise ValidationError("tol must be > 0")
    Ke = Q.trimmed_order()
    d = Q.diag[Q.K - Ke : Q.K + Ke + 1]
    mid = 2 * Q.K
    sym = Q.symbol[mid - 2 * Ke : mid + 2 * Ke + 1]
    off = np.abs(sym).copy()
    off[2 * Ke] = 0.0
    if off.max(initial=0.0) <= DIAGONAL_THRESHOLD:
        d2 = d * d * sym[2 * Ke].real
        i = int(np.argmax(d2))
        vec = None
        if keep_vector:
            vec = np.zeros(Q.size, dtype=complex)
            vec[Q.K - Ke + i] = 1.0
        return LanczosResult(float(d2[i]), float(d2[i] * off.sum()), 0, True, vec)
    if Q.real_symbol is not None:
        rs = Q.real_symbol[mid - 2 * Ke : mid + 2 * Ke + 1]
        T = _Toeplitz(rs, real=True)
        dtype = float
    else:
        T = _Toeplitz(sym, real=False)
        dtype = complex
    res = lanczos_top(lambda x: d * T(d * x), d.size, dtype, tol, max_iter, seed, keep_vector=keep_vector)
    if keep_vector and res.vector is not None:
        u = np.zeros(Q.size, dtype=complex)
        u[Q.K - Ke : Q.K + Ke + 1] = res.vector
        if Q.real_symbol is not None:
            # undo the phase rotation: G = U^* G_real U with U = diag(exp(2 pi i k c))
            c = Q.center
            u *= np.exp(-2j * np.pi * np.mod(Q.band * c, 1.0))
        res.vector = u
    return res


# --------------------------------------------------------------------- energy


@dataclass(frozen=True)
class EnergyResult:
    R: float
    r_star: float
    lambda_max: float
    energy: float
    lanczos_iterations: int
    residual: float
    converged: bool = True
    radii: tuple[float, ...] = ()
    profile: tuple[float, ...] = ()


def radius_grid(R: float, grid: int) -> np.ndarray:
    """``grid`` radii uniformly spaced strictly inside ``(R - R^(1/3), R + R^(1/3))``; one point means ``r = R``."""
    if grid < 1:
        raise ValidationError("radius grid must have at least one point")
    h = float(np.cbrt(R))
    i = np.arange(1, grid + 1)
    return R - h + i * (2.0 * h / (grid + 1))


def energy(
    table: FourierTable,
    R: float,
    radius_grid_points: int = DEFAULT_RADIUS_GRID,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    K: int | None = None,
) -> EnergyResult:
    """``R * max_r lambda_max(G(r))`` over the radius grid."""
    radii = radius_grid(R, radius_grid_points)
    lams, iters, resid, conv = [], 0, [], True
    for r in radii:
        res = lambda_max(build_form(table, r, K), tol, max_iter)
        lams.append(res.eigenvalue)
        iters += res.iterations
        resid.append(res.residual)
        conv &= res.converged
    i = int(np.argmax(lams))
    return EnergyResult(
        float(R),
        float(radii[i]),
        float(lams[i]),
        float(R * lams[i]),
        iters,
        float(resid[i]),
        bool(conv),
        tuple(float(r) for r in radii),
        tuple(float(R * x) for x in lams),
    )


# --------------------------------------------------------- series & integrals


def _signed_bessel(freqs: np.ndarray, r: float) -> np.ndarray:
    if freqs.size == 0:
        return np.zeros(0)
    bv = bessel_vector(r, int(np.max(np.abs(freqs))))
    return bv.signed(freqs)


def extension_series(g, r: float, theta) -> complex:
    """Model series ``sum_k a_k J_k(r) exp(2 pi i k theta)``."""
    c = Coefficients.coerce(g)
    if len(c) == 0:
        return 0j
    jk = _signed_bessel(c.freqs, r)
    th = np.asarray(theta, dtype=float)
    ph = np.exp(2j * np.pi * np.mod(np.multiply.outer(th, c.freqs), 1.0))
    out = ph @ (c.values * jk)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureCheck:
    model: complex
    physical: complex
    unitary_match: float

    def __iter__(self):
        return iter((self.model, self.physical, self.unitary_match))


MIN_QUAD_POINTS = 32


def extension_quadrature_check(g, r: float, theta: float, quad_points: int) -> QuadratureCheck:
    """Compare the physical extension integral with the model series.

    The physical value ``int_0^1 exp(-2 pi i x . xi(t)) g(t) dt`` at
    ``x = r (cos 2 pi theta, sin 2 pi theta)`` is computed by the trapezoid rule
    and should equal ``sum (-i)^k a_k J_k(2 pi r) exp(2 pi i k theta)``.
    ``model`` is the model series at argument ``r``.
    """
    c = Coefficients.coerce(g)
    kmax = c.max_abs_freq
    need = max(MIN_QUAD_POINTS, 8.0 * (r + kmax))
    if quad_points < need or quad_points & (quad_points - 1):
        raise AliasingError(f"quad_points={quad_points} must be a power of two >= {need:g}")
    model = extension_series(c, r, theta)
    if len(c) == 0:
        return QuadratureCheck(0j, 0j, 0.0)
    t = np.arange(quad_points) / quad_points
    gt = np.fft.ifft(_scatter(c, quad_points)) * quad_points
    kern = np.exp(-2j * np.pi * r * np.cos(2 * np.pi * (t - theta)))
    physical = complex(np.mean(kern * gt))
    phases = (-1j) ** (np.mod(c.freqs, 4))
    predicted = extension_series(c.scaled(phases), 2 * np.pi * r, theta)
    scale = max(abs(predicted), np.sqrt(c.norm_sq) * 1e-12, 1e-300)
    return QuadratureCheck(model, physical, abs(physical - predicted) / scale)


def _scatter(c: Coefficients, size: int) -> np.ndarray:
    buf = np.zeros(size, dtype=complex)
    np.add.at(buf, np.mod(c.freqs, size), c.values)
    return buf


def mu_integral_square(table: FourierTable, g) -> float:
    """``int |sum_k c_k e(k t)|^2 dmu(t) = sum_{j,k} c_j conj(c_k) mu_hat(k - j)``.

    Evaluated as ``<c, T c>`` on the contiguous span of the support with a
    circulant-embedded Toeplitz product.
    """
    c = Coefficients.coerce(g)
    if len(c) == 0:
        return 0.0
    lo = int(c.freqs[0])
    span = c.span
    table.require(span)
    x = np.zeros(span + 1, dtype=complex)
    x[c.freqs - lo] = c.values
    if span == 0:
        return float(abs(x[0]) ** 2 * table[0].real)
    T = _Toeplitz(table.slice(span), real=False)
    return float(np.vdot(x, T(x)).real)


def rayleigh_quotient(table: FourierTable, a, r: float, R: float) -> float:
    """``R * int |sum a_k J_k(r) e(k t)|^2 dmu / sum |a_k|^2``."""
    c = Coefficients.coerce(a)
    nrm = c.norm_sq
    if nrm == 0:
        raise ValidationError("zero test vector")
    jg = c.scaled(_signed_bessel(c.freqs, r))
    return float(R) * mu_integral_square(table, jg) / nrm
