"""Command-line entry point: ``extension-energy <subcommand> ...``.

Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from pathlib import Path

import numpy as np

from .bessel import bessel_vector, uniform_leading_term
from .bounds import m_r, predicted_m_r
from .config import load_config, parse_number, resolve_measure
from .errors import ExtensionEnergyError
from .extremizer import DegenerateBandWarning, band_family, knapp_g, select_radius
from .measure import fourier_table
from .operator import DEFAULT_MAX_ITER, DEFAULT_TOL, energy
from .sweep import PlotSpec, emit_plot, fit_scaling, records_from_csv, records_to_csv, sweep, table_for, validate

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _number(text: str) -> float:
    try:
        return parse_number(text)
    except ExtensionEnergyError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _writer(out):
    return csv.writer(out, lineterminator="\n")


def _g(v: float) -> str:
    return f"{v:.10g}"


def cmd_measure(a, out) -> int:
    mu = resolve_measure(a.measure)
    table = fourier_table(mu, int(a.N))
    text = table.to_csv(a.output)
    if a.output is None:
        out.write(text)
    return EXIT_OK


def cmd_bessel_validate(a, out) -> int:
    import mpmath as mp

    mp.mp.dps = 40
    w = _writer(out)
    w.writerow(["k", "r", "method", "value", "oracle", "abs_err"])
    worst = 0.0
    rng = np.random.default_rng(a.seed)
    for _ in range(a.samples):
        k = int(rng.integers(0, 61))
        r = float(rng.uniform(0.0, 60.0))
        v = float(bessel_vector(r, 60).values[k])
        o = float(mp.besselj(k, r))
        worst = max(worst, abs(v - o))
        w.writerow([k, _g(r), "recurrence", repr(v), repr(o), f"{abs(v - o):.3e}"])
    for k in (200, 400, 800, 1600):
        r = 1.1 * k
        v = uniform_leading_term(k, r)
        o = float(bessel_vector(r, k).values[k])
        w.writerow([k, _g(r), "uniform_leading", repr(v), repr(o), f"{abs(v - o):.3e}"])
    return EXIT_OK if worst <= a.tolerance else EXIT_FAIL


def cmd_energy(a, out) -> int:
    mu = resolve_measure(a.measure)
    table = table_for(mu, a.R)
    res = energy(table, a.R, a.grid, tol=a.tol, max_iter=a.max_iter)
    w = _writer(out)
    w.writerow(["R", "r_star", "energy", "iterations", "residual"])
    w.writerow([_g(res.R), _g(res.r_star), _g(res.energy), res.lanczos_iterations, f"{res.residual:.3e}"])
    return EXIT_OK if res.converged else EXIT_FAIL


def cmd_mr(a, out) -> int:
    mu = resolve_measure(a.measure)
    res = m_r(mu, a.R, mode=a.mode)
    pred = predicted_m_r(mu.dimension, a.R)
    w = _writer(out)
    w.writerow(["R", "value", "alpha_star", "predicted", "ratio"])
    w.writerow([_g(res.R), _g(res.value), _g(res.alpha_star), _g(pred), _g(res.value / pred)])
    return EXIT_OK


def cmd_extremize(a, out) -> int:
    mu = resolve_measure(a.measure)
    table = table_for(mu, a.R)
    w = _writer(out)
    if a.knapp:
        kn = knapp_g(a.R, table, mu, a.grid)
        w.writerow(["R", "r_star", "rayleigh", "norm_sq", "bands"])
        w.writerow([_g(a.R), _g(kn.r_star), _g(kn.rayleigh), _g(kn.coefficients.norm_sq), "knapp"])
        return EXIT_OK
    fam = band_family(a.R, a.p_min)
    with warnings.catch_warnings():
        warnings.simplefilter("always", DegenerateBandWarning)
        r, ex = select_radius(table, a.R, fam, a.grid)
    w.writerow(["R", "r_star", "rayleigh", "norm_sq", "bands"])
    w.writerow([_g(a.R), _g(r), _g(ex.rayleigh), _g(ex.norm_sq), " ".join(map(str, ex.members))])
    return EXIT_OK


def cmd_sweep(a, out) -> int:
    cfg = load_config(a.config)
    if a.no_timing:
        cfg.timing = False
    if a.workers is not None:
        cfg.workers = a.workers
    recs = sweep(cfg)
    text = records_to_csv(recs)
    if a.output:
        Path(a.output).write_text(text, encoding="utf-8", newline="")
    else:
        out.write(text)
    return EXIT_FAIL if any(r.error for r in recs) else EXIT_OK


def _load_records(path, measure=None):
    recs = records_from_csv(Path(path).read_text(encoding="utf-8"))
    if measure:
        recs = [r for r in recs if r.measure_id == measure]
    return recs


def cmd_fit(a, out) -> int:
    rep = fit_scaling(_load_records(a.input, a.measure_id), a.x, a.y, a.kind)
    w = _writer(out)
    w.writerow(["kind", "slope", "intercept", "r_squared", "n_points"])
    w.writerow([rep.kind, _g(rep.slope), _g(rep.intercept), _g(rep.r_squared), rep.n_points])
    return EXIT_OK


def cmd_plot(a, out) -> int:
    svg = emit_plot(_load_records(a.input, a.measure_id), PlotSpec(a.x, a.y, a.title or "", a.fit, not a.linear_y))
    if a.output:
        Path(a.output).write_text(svg, encoding="utf-8", newline="")
    else:
        out.write(svg)
    return EXIT_OK


def cmd_validate(a, out) -> int:
    code, _ = validate(a.suite or None, a.inject or (), stream=out)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="extension-energy", description="Weighted extension energies of fractal measures on the circle.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("measure", help="tabulate mu_hat(n) as CSV")
    s.add_argument("--measure", required=True, help="standard measure name or config file")
    s.add_argument("--N", type=_number, default=64)
    s.add_argument("--output")
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("bessel-validate", help="Bessel accuracy report as CSV")
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tolerance", type=_number, default=1e-12)
    s.set_defaults(func=cmd_bessel_validate)

    s = sub.add_parser("energy", help="R * max lambda_max over the radius window")
    s.add_argument("--measure", required=True)
    s.add_argument("--R", type=_number, required=True)
    s.add_argument("--grid", type=int, default=9)
    s.add_argument("--tol", type=_number, default=DEFAULT_TOL)
    s.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    s.set_defaults(func=cmd_energy)

    s = sub.add_parser("mr", help="geometric constant M_R")
    s.add_argument("--measure", required=True)
    s.add_argument("--R", type=_number, required=True)
    s.add_argument("--mode", choices=("arc", "rectangle"), default="arc")
    s.set_defaults(func=cmd_mr)

    s = sub.add_parser("extremize", help="Rayleigh quotient of the explicit test functions")
    s.add_argument("--measure", required=True)
    s.add_argument("--R", type=_number, required=True)
    s.add_argument("--grid", type=int, default=9)
    s.add_argument("--p-min", type=int, default=0)
    s.add_argument("--knapp", action="store_true")
    s.set_defaults(func=cmd_extremize)

    s = sub.add_parser("sweep", help="run a configured sweep, CSV out")
    s.add_argument("--config", required=True)
    s.add_argument("--output")
    s.add_argument("--workers", type=int)
    s.add_argument("--no-timing", action="store_true", help="write 0 wall time for byte-identical reruns")
    s.set_defaults(func=cmd_sweep)

    for name, helptext in (("fit", "fit a scaling law to sweep CSV"), ("plot", "SVG plot of sweep CSV")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--input", required=True)
        s.add_argument("--x", default="R")
        s.add_argument("--y", default="ratio")
        s.add_argument("--measure-id")
        if name == "fit":
            s.add_argument("--kind", choices=("power_law", "log_linear"), default="power_law")
            s.set_defaults(func=cmd_fit)
        else:
            s.add_argument("--fit", choices=("power_law", "log_linear"))
            s.add_argument("--title")
            s.add_argument("--linear-y", action="store_true")
            s.add_argument("--output")
            s.set_defaults(func=cmd_plot)

    s = sub.add_parser("validate", help="run invariant suites")
    s.add_argument("--suite", action="append", help="restrict to a suite (repeatable)")
    s.add_argument("--inject", action="append", help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return a.func(a, out)
    except (ExtensionEnergyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
