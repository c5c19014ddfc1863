"""Sweeps over (measure, R), scaling-law fits, CSV records, SVG plots and the
invariant self-check used by ``extension-energy validate``."""

from __future__ import annotations

import csv
import io
import math
import time
import traceback
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from html import escape

import numpy as np
from scipy import stats

from .bounds import m_r
from .config import SweepConfig
from .errors import SizeError, ValidationError
from .extremizer import DegenerateBandWarning, band_family, knapp_g, select_radius
from .measure import FourierTable, SelfSimilarMeasure, fourier_table
from .operator import default_band, energy


@dataclass
class SweepRecord:
    s: float
    measure_id: str
    R: float
    energy: float
    m_r: float
    ratio: float
    extremizer_rayleigh: float
    knapp_rayleigh: float | None
    wall_time_seconds: float
    error: str = ""


RECORD_FIELDS = [f.name for f in fields(SweepRecord)]


def table_for(mu: SelfSimilarMeasure, R_max: float) -> FourierTable:
    """One transform table covering every form needed up to ``R_max``."""
    return fourier_table(mu, 2 * default_band(R_max + float(np.cbrt(R_max)) + 1.0))


def run_record(mu: SelfSimilarMeasure, R: float, cfg: SweepConfig, table: FourierTable | None = None) -> SweepRecord:
    t0 = time.perf_counter()
    try:
        table = table_for(mu, R) if table is None else table
        en = energy(table, R, cfg.grid)
        mr = m_r(mu, R)
        ext = 0.0
        if cfg.extremizer:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", DegenerateBandWarning)
                    ext = select_radius(table, R, band_family(R), cfg.grid)[1].rayleigh
            except SizeError:
                ext = 0.0
        kn = knapp_g(R, table, mu, cfg.grid).rayleigh if cfg.knapp else None
        rec = SweepRecord(mu.dimension, mu.name, float(R), en.energy, mr.value, en.energy / mr.value, ext, kn, 0.0)
    except Exception as exc:  # isolated per record
        nan = float("nan")
        msg = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        rec = SweepRecord(mu.dimension, mu.name, float(R), nan, nan, nan, nan, None, 0.0, msg)
        if not isinstance(exc, (ValidationError, SizeError, MemoryError)):
            traceback.print_exc()
    if cfg.timing:
        rec.wall_time_seconds = time.perf_counter() - t0
    return rec


def _measure_records(mu: SelfSimilarMeasure, cfg: SweepConfig) -> list[SweepRecord]:
    if not cfg.schedule:
        return []
    try:
        table = table_for(mu, max(cfg.schedule))
    except Exception:
        table = None  # each record then builds its own table and reports its own failure
    return [run_record(mu, R, cfg, table) for R in cfg.schedule]


def sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """One record per (measure, R) in configuration order."""
    if cfg.workers > 1 and len(cfg.measures) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_measure_records, cfg.measures, [cfg] * len(cfg.measures)))
    else:
        parts = [_measure_records(mu, cfg) for mu in cfg.measures]
    return [r for part in parts for r in part]


# ------------------------------------------------------------------------ CSV


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for rec in records:
        w.writerow([_fmt(getattr(rec, f)) for f in RECORD_FIELDS])
    return buf.getvalue()


def records_from_csv(text: str) -> list[SweepRecord]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        missing = [f for f in RECORD_FIELDS if f not in row]
        if missing:
            raise ValidationError(f"CSV lacks columns {missing}")

        def num(key):
            v = row[key]
            return None if v == "" else float(v)

        out.append(
            SweepRecord(
                num("s"),
                row["measure_id"],
                num("R"),
                num("energy"),
                num("m_r"),
                num("ratio"),
                num("extremizer_rayleigh"),
                num("knapp_rayleigh"),
                num("wall_time_seconds"),
                row["error"],
            )
        )
    return out


# ----------------------------------------------------------------------- fits


@dataclass(frozen=True)
class FitReport:
    kind: str
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def fit_xy(x, y, kind: str) -> FitReport:
    """Least squares on ``(log x, log y)`` (power_law) or ``(log x, y)`` (log_linear)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if kind not in ("power_law", "log_linear"):
        raise ValidationError(f"unknown fit kind {kind!r}")
    if x.size < 3:
        raise ValidationError("a fit needs at least 3 points")
    if np.any(x <= 0) or (kind == "power_law" and np.any(y <= 0)):
        raise ValidationError("logarithmic fit needs positive data")
    lx = np.log(x)
    if np.ptp(lx) == 0:
        raise ValidationError("degenerate x values")
    ly = np.log(y) if kind == "power_law" else y
    res = stats.linregress(lx, ly)
    r2 = float(min(1.0, max(0.0, res.rvalue**2))) if np.ptp(ly) > 0 else 1.0
    return FitReport(kind, float(res.slope), float(res.intercept), r2, int(x.size))


def fit_scaling(records, x_field: str = "R", y_field: str = "ratio", kind: str = "power_law") -> FitReport:
    rows = [r for r in records if not getattr(r, "error", "")]
    x = [getattr(r, x_field) for r in rows]
    y = [getattr(r, y_field) for r in rows]
    return fit_xy(x, y, kind)


# ----------------------------------------------------------------------- SVG

_PALETTE = ("#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#2c3e50")


@dataclass(frozen=True)
class PlotSpec:
    x_field: str = "R"
    y_field: str = "ratio"
    title: str = ""
    fit: str | None = None
    log_y: bool = True
    width: int = 640
    height: int = 420


def emit_plot(records, spec: PlotSpec | None = None) -> str:
    """Log-x scatter, one series per measure with optional fitted lines; deterministic text."""
    spec = spec or PlotSpec()
    rows = [r for r in records if not getattr(r, "error", "")]
    pts = [(r, getattr(r, spec.x_field), getattr(r, spec.y_field)) for r in rows]
    pts = [(r, x, y) for r, x, y in pts if x is not None and y is not None and x > 0 and (y > 0 or not spec.log_y)]
    if not pts:
        raise ValidationError("nothing to plot")
    series: dict[str, list] = {}
    for r, x, y in pts:
        series.setdefault(r.measure_id, []).append((r.s, x, y))
    W, H, ml, mr_, mt, mb = spec.width, spec.height, 70, 170, 40, 50
    fy = (lambda v: math.log10(v)) if spec.log_y else (lambda v: v)
    xs = [math.log10(x) for _, x, _ in pts]
    ys = [fy(y) for _, _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    padx, pady = 0.05 * (x1 - x0), 0.08 * (y1 - y0)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady

    def px(v):
        return ml + (v - x0) / (x1 - x0) * (W - ml - mr_)

    def py(v):
        return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{ml}" y1="{H - mb}" x2="{W - mr_}" y2="{H - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{H - mb}" stroke="black"/>',
    ]
    if spec.title:
        out.append(f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(spec.title)}</text>')
    xlab = f"log10 {spec.x_field}"
    ylab = f"log10 {spec.y_field}" if spec.log_y else spec.y_field
    out.append(f'<text x="{(ml + W - mr_) / 2:.1f}" y="{H - 12}" text-anchor="middle" font-size="12">{escape(xlab)}</text>')
    out.append(
        f'<text x="16" y="{(mt + H - mb) / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {(mt + H - mb) / 2:.1f})">{escape(ylab)}</text>'
    )
    for k in range(5):
        tx = x0 + (x1 - x0) * k / 4
        ty = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{px(tx):.1f}" y="{H - mb + 16}" text-anchor="middle" font-size="10">{tx:.2f}</text>')
        out.append(f'<text x="{ml - 6}" y="{py(ty) + 3:.1f}" text-anchor="end" font-size="10">{ty:.3g}</text>')
    for i, (mid, pts_m) in enumerate(series.items()):
        colour = _PALETTE[i % len(_PALETTE)]
        for _, x, y in pts_m:
            out.append(f'<circle class="marker" cx="{px(math.log10(x)):.2f}" cy="{py(fy(y)):.2f}" r="4" fill="{colour}"/>')
        if spec.fit and len(pts_m) >= 3:
            fit = fit_xy([p[1] for p in pts_m], [p[2] for p in pts_m], spec.fit)
            lo = min(math.log(p[1]) for p in pts_m)
            hi = max(math.log(p[1]) for p in pts_m)
            coords = []
            for j in range(33):
                lx = lo + (hi - lo) * j / 32
                v = fit.intercept + fit.slope * lx
                yv = math.exp(v) if spec.fit == "power_law" else v
                if spec.log_y and yv <= 0:
                    continue
                coords.append(f"{px(lx / math.log(10)):.2f},{py(fy(yv)):.2f}")
            out.append(
                f'<polyline class="fit" points="{" ".join(coords)}" fill="none" stroke="{colour}" stroke-dasharray="4 3"/>'
            )
        s = pts_m[0][0]
        ly = mt + 18 * i + 10
        out.append(f'<circle cx="{W - mr_ + 16}" cy="{ly}" r="4" fill="{colour}"/>')
        out.append(f'<text x="{W - mr_ + 26}" y="{ly + 4}" font-size="11">{escape(mid)} (s={s:.4f})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------- validate


def _suite_bessel(inject):
    from scipy.special import jv

    from .bessel import bessel_vector

    worst, dev = 0.0, 0.0
    for r in (10.0, 100.0, 1000.0, 10000.0):
        K = int(math.ceil(1.3 * r)) + 200
        v = bessel_vector(r, K).values
        k = np.arange(1, K)
        worst = max(worst, abs(v[0] ** 2 + 2 * np.sum(v[1:] ** 2) - 1.0))
        worst = max(worst, float(np.max(np.abs(v[:-2] + v[2:] - 2 * k / r * v[1:-1]) / np.maximum(1, np.abs(v[1:-1])))))
        dev = max(dev, float(np.max(np.abs(v[:60] - jv(np.arange(60), r)))))
    return worst <= 1e-8 and dev <= 1e-10, f"identity residual {worst:.2e}, low orders vs scipy {dev:.2e}"


def _suite_fourier(inject):
    from .measure import STANDARD_MEASURES

    worst = 0.0
    for make in STANDARD_MEASURES.values():
        t = fourier_table(make(), 512)
        vals = np.array(t.values)
        if "corrupt_fourier_table" in inject:
            vals[t.N + 7] += 0.25
        worst = max(worst, float(np.max(np.abs(vals - np.conj(vals[::-1])))), abs(vals[t.N] - 1.0))
    return worst <= 1e-12, f"max |mu_hat(-n) - conj mu_hat(n)| {worst:.2e}"


def _suite_operator(inject):
    from .measure import quarter_cantor
    from .operator import build_form, lambda_max

    t = fourier_table(quarter_cantor(), 1200)
    worst = 0.0
    for r in (50.0, 150.0, 300.0):
        Q = build_form(t, r, 300)
        lam = lambda_max(Q).eigenvalue
        ref = np.linalg.eigvalsh(Q.dense())[-1]
        worst = max(worst, abs(lam - ref) / ref)
    return worst <= 1e-8, f"Lanczos vs dense relative error {worst:.2e}"


def _suite_bounds(inject):
    from .bounds import predicted_m_r
    from .measure import lebesgue, quarter_cantor

    a = m_r(lebesgue(), 2.0**12).value / predicted_m_r(1.0, 2.0**12)
    b = m_r(quarter_cantor(), 2.0**12).value / predicted_m_r(0.5, 2.0**12)
    ok = 0.25 <= a <= 4 and 1 / 8 <= b <= 8
    return ok, f"m_r / prediction: lebesgue {a:.3f}, quarter_cantor {b:.3f}"


def _suite_extremizer(inject):
    from .measure import quarter_cantor

    R = 2.0**12
    t = table_for(quarter_cantor(), R)
    en = energy(t, R, 3).energy
    ex = select_radius(t, R, band_family(R), 3)[1].rayleigh
    return ex <= en * (1 + 1e-6) and ex > 0, f"extremizer {ex:.4g} <= energy {en:.4g}"


SUITES = {
    "bessel": _suite_bessel,
    "fourier_symmetry": _suite_fourier,
    "operator": _suite_operator,
    "bounds": _suite_bounds,
    "extremizer": _suite_extremizer,
}


@dataclass(frozen=True)
class SuiteOutcome:
    name: str
    passed: bool
    detail: str
    seconds: float


def validate(suites=None, inject=(), stream=None) -> tuple[int, list[SuiteOutcome]]:
    """Run the named invariant suites (all by default); exit code 0 iff all pass.

    ``inject`` names deliberate faults (currently ``corrupt_fourier_table``)
    so the failure path itself can be tested.
    """
    names = list(SUITES) if not suites else list(suites)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValidationError(f"unknown suite(s) {unknown}; known: {list(SUITES)}")
    inject = set(inject)
    results = []
    for n in names:
        t0 = time.perf_counter()
        try:
            ok, detail = SUITES[n](inject)
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        res = SuiteOutcome(n, bool(ok), detail, time.perf_counter() - t0)
        results.append(res)
        if stream is not None:
            print(f"{'PASS' if ok else 'FAIL'}  {n:<18} {res.seconds:7.2f}s  {detail}", file=stream)
    failed = [r.name for r in results if not r.passed]
    if stream is not None and failed:
        print(f"failing suites: {', '.join(failed)}", file=stream)
    return (1 if failed else 0), results


def record_dict(rec: SweepRecord) -> dict:
    return asdict(rec)
