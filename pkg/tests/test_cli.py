import csv
import io
import math
import re

import numpy as np
import pytest

from extension_energy.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from extension_energy.config import DEFAULT_SCHEDULE, parse_config, parse_number, resolve_measure
from extension_energy.errors import ValidationError
from extension_energy.sweep import (
    RECORD_FIELDS,
    PlotSpec,
    SweepRecord,
    emit_plot,
    fit_scaling,
    fit_xy,
    records_from_csv,
    records_to_csv,
    sweep,
)


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def synthetic(xs, ys, mid="synthetic", s=0.5):
    return [SweepRecord(s, mid, float(x), 1.0, 1.0, float(y), 0.0, None, 0.0) for x, y in zip(xs, ys)]


LEB_CONFIG = """
[sweep]
R = 2^10, 2^12
grid = 3
timing = no

[measure lebesgue]
standard = lebesgue
"""


# ----------------------------------------------------------------------- config


@pytest.mark.parametrize(
    "text,value", [("3/4", 0.75), ("2^10", 1024.0), ("1e-3", 1e-3), (" 7 ", 7.0), ("4^-1", 0.25)]
)
def test_parse_number(text, value):
    assert parse_number(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1/0", "2^^3"])
def test_parse_number_rejects(text):
    with pytest.raises(ValidationError):
        parse_number(text)


def test_config_sections():
    cfg = parse_config(
        """
[sweep]
R_min = 2^10
R_max = 2^14
R_factor = 4
grid = 5
knapp = no

[measure q]
standard = quarter_cantor

[measure custom]
m = 3
rho = 1/5
digits = 0, 2/5, 4/5
"""
    )
    assert cfg.schedule == (1024.0, 4096.0, 16384.0)
    assert cfg.grid == 5 and not cfg.knapp and cfg.extremizer
    assert [mu.name for mu in cfg.measures] == ["q", "custom"]
    assert cfg.measures[0].dimension == pytest.approx(0.5)
    assert cfg.measures[1].dimension == pytest.approx(math.log(3) / math.log(5))


def test_default_schedule():
    assert parse_config("").schedule == DEFAULT_SCHEDULE
    assert DEFAULT_SCHEDULE == tuple(2.0**e for e in range(10, 21, 2))


@pytest.mark.parametrize(
    "text",
    [
        "[measure x]\nm = 2\n",
        "[sweep]\nknapp = maybe\n",
        "[sweep]\nR_min = 10\nR_max = 5\n",
        "not an ini file",
    ],
)
def test_bad_configs(text):
    with pytest.raises(ValidationError):
        parse_config(text)


def test_resolve_measure(tmp_path):
    assert resolve_measure("quarter_cantor").m == 2
    p = tmp_path / "m.ini"
    p.write_text("[measure mine]\nm = 2\nrho = 1/3\ndigits = 0, 2/3\n")
    assert resolve_measure(str(p)).name == "mine"
    with pytest.raises(ValidationError):
        resolve_measure("no_such_measure")


# ------------------------------------------------------------------------ sweep


@pytest.fixture(scope="module")
def leb_records():
    return sweep(parse_config(LEB_CONFIG))


def test_lebesgue_sweep_ratios(leb_records):
    assert len(leb_records) == 2
    for rec in leb_records:
        assert rec.error == ""
        assert 1e-2 <= rec.ratio <= 1e2
        assert rec.ratio == pytest.approx(rec.energy / rec.m_r, rel=1e-12)
        assert rec.extremizer_rayleigh <= rec.energy * (1 + 1e-6)
        assert rec.knapp_rayleigh <= rec.energy * (1 + 1e-6)
        assert rec.s == 1.0 and rec.wall_time_seconds == 0.0


def test_csv_round_trip(leb_records):
    text = records_to_csv(leb_records)
    assert text.splitlines()[0].split(",") == RECORD_FIELDS
    assert "\r" not in text
    back = records_from_csv(text)
    for a, b in zip(leb_records, back):
        assert b.measure_id == a.measure_id
        assert b.ratio == pytest.approx(a.ratio, rel=1e-5)
        # the written ratio agrees with written energy / m_r to output rounding
        assert b.ratio == pytest.approx(b.energy / b.m_r, rel=1e-5)


def test_csv_requires_columns():
    with pytest.raises(ValidationError):
        records_from_csv("s,R\n1,2\n")


def test_failures_are_isolated():
    cfg = parse_config("[sweep]\nR = 2^10, 4\ngrid = 1\nknapp = no\ntiming = no\n[measure l]\nstandard = lebesgue\n")
    recs = sweep(cfg)
    assert recs[0].error == ""
    assert "ValidationError" in recs[1].error
    assert math.isnan(recs[1].energy)


# ------------------------------------------------------------------------- fits


def test_fit_power_law_exact():
    x = np.array([2.0**e for e in range(10, 21, 2)])
    rep = fit_xy(x, x ** (1 / 3), "power_law")
    assert abs(rep.slope - 1 / 3) <= 1e-12
    assert rep.r_squared == pytest.approx(1.0, abs=1e-12)
    assert rep.n_points == 6


def test_fit_log_linear_exact():
    x = np.geomspace(10, 1e6, 7)
    rep = fit_xy(x, 2 + 3 * np.log(x), "log_linear")
    assert rep.slope == pytest.approx(3.0, abs=1e-12)
    assert rep.intercept == pytest.approx(2.0, abs=1e-10)


def test_fit_from_records_skips_errors():
    recs = synthetic([10, 100, 1000], [1, 2, 3]) + [SweepRecord(0.5, "synthetic", 5.0, 0, 0, 9.0, 0, None, 0, "boom")]
    assert fit_scaling(recs, "R", "ratio", "log_linear").n_points == 3


def test_fit_errors():
    with pytest.raises(ValidationError):
        fit_xy([1, 2], [1, 2], "power_law")
    with pytest.raises(ValidationError):
        fit_xy([5, 5, 5], [1, 2, 3], "power_law")
    with pytest.raises(ValidationError):
        fit_xy([1, 2, 3], [1, 2, 3], "cubic")


# ------------------------------------------------------------------------- plot


def test_plot_two_points():
    svg = emit_plot(synthetic([10, 1000], [1, 4]), PlotSpec(title="two"))
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count('class="marker"') == 2


def test_plot_is_deterministic():
    recs = synthetic([10, 100, 1000, 1e4], [1, 2, 2.5, 4])
    spec = PlotSpec(fit="power_law")
    assert emit_plot(recs, spec) == emit_plot(recs, spec)
    assert emit_plot(recs, spec).count('class="fit"') == 1


def test_plot_one_series_per_measure():
    recs = synthetic([10, 100, 1000], [1, 2, 3], "a", 0.5) + synthetic([10, 100, 1000], [2, 3, 4], "b", 1.0)
    svg = emit_plot(recs, PlotSpec(fit="log_linear", log_y=False))
    assert svg.count('class="fit"') == 2
    assert "a (s=0.5000)" in svg and "b (s=1.0000)" in svg


def test_plot_empty():
    with pytest.raises(ValidationError):
        emit_plot([])


# -------------------------------------------------------------------------- CLI


def test_cli_sweep_is_byte_identical(tmp_path):
    cfg = tmp_path / "leb.ini"
    cfg.write_text(LEB_CONFIG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["sweep", "--config", str(cfg), "--output", str(a), "--no-timing"])[0] == EXIT_OK
    assert run(["sweep", "--config", str(cfg), "--output", str(b), "--no-timing"])[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert len(rows(a.read_text())) == 2


def test_cli_empty_config(tmp_path):
    cfg = tmp_path / "empty.ini"
    cfg.write_text("[sweep]\nR = 2^10\n")
    code, out = run(["sweep", "--config", str(cfg)])
    assert code == EXIT_OK
    assert rows(out) == []


def test_cli_fit_and_plot(tmp_path):
    path = tmp_path / "syn.csv"
    path.write_text(records_to_csv(synthetic([10, 100, 1000, 1e4], [10 ** (1 / 3), 100 ** (1 / 3), 10, 1e4 ** (1 / 3)])))
    code, out = run(["fit", "--input", str(path)])
    assert code == EXIT_OK
    assert float(rows(out)[0]["slope"]) == pytest.approx(1 / 3, abs=1e-6)
    svg1, svg2 = tmp_path / "1.svg", tmp_path / "2.svg"
    run(["plot", "--input", str(path), "--fit", "power_law", "--output", str(svg1)])
    run(["plot", "--input", str(path), "--fit", "power_law", "--output", str(svg2)])
    assert svg1.read_bytes() == svg2.read_bytes()


def test_cli_validate_bessel_only():
    code, out = run(["validate", "--suite", "bessel"])
    assert code == EXIT_OK
    assert out.startswith("PASS") and "bessel" in out
    assert "operator" not in out


def test_cli_validate_all():
    code, out = run(["validate"])
    assert code == EXIT_OK
    assert len(re.findall(r"^PASS", out, flags=re.M)) == 5


def test_cli_validate_injected_fault():
    code, out = run(["validate", "--suite", "fourier_symmetry", "--suite", "bessel", "--inject", "corrupt_fourier_table"])
    assert code == EXIT_FAIL
    assert "FAIL  fourier_symmetry" in out
    assert "failing suites: fourier_symmetry" in out


def test_cli_unknown_measure():
    assert run(["mr", "--measure", "nope", "--R", "2^10"])[0] == EXIT_USAGE


def test_cli_usage_errors():
    assert run([])[0] == EXIT_USAGE
    assert run(["energy", "--measure", "lebesgue", "--R", "abc"])[0] == EXIT_USAGE


def test_cli_mr_row():
    code, out = run(["mr", "--measure", "lebesgue", "--R", "2^12"])
    assert code == EXIT_OK
    row = rows(out)[0]
    assert list(row) == ["R", "value", "alpha_star", "predicted", "ratio"]
    assert float(row["predicted"]) == pytest.approx(16.0)


def test_cli_energy_and_extremize():
    code, out = run(["energy", "--measure", "quarter_cantor", "--R", "2^10", "--grid", "3"])
    assert code == EXIT_OK
    en = float(rows(out)[0]["energy"])
    code, out = run(["extremize", "--measure", "quarter_cantor", "--R", "2^10", "--grid", "3"])
    assert code == EXIT_OK
    assert 0 < float(rows(out)[0]["rayleigh"]) <= en * (1 + 1e-6)
    code, out = run(["extremize", "--measure", "quarter_cantor", "--R", "2^10", "--grid", "3", "--knapp"])
    assert rows(out)[0]["bands"] == "knapp"
    assert float(rows(out)[0]["rayleigh"]) <= en * (1 + 1e-6)


def test_cli_measure_table(tmp_path):
    code, out = run(["measure", "--measure", "quarter_cantor", "--N", "16"])
    assert code == EXIT_OK
    assert len(rows(out)) == 33


def test_cli_bessel_validate():
    code, out = run(["bessel-validate", "--samples", "20"])
    assert code == EXIT_OK
    table = rows(out)
    assert list(table[0]) == ["k", "r", "method", "value", "oracle", "abs_err"]
    rec = [r for r in table if r["method"] == "recurrence"]
    assert len(rec) == 20
    assert max(float(r["abs_err"]) for r in rec) <= 1e-12
