"""Plain-text sweep configuration: an INI-style file with one section per measure.

Example::

    [sweep]
    R = 2^10, 2^12, 2^14
    grid = 9
    knapp = yes

    [measure quarter]
    standard = quarter_cantor

    [measure custom]
    m = 2
    rho = 1/4
    digits = 0, 3/4

Numbers may be written as decimals, rationals ``a/b`` or powers ``a^b``.
``R`` may also be given as ``R_min``, ``R_max`` and ``R_factor`` (geometric).
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ValidationError
from .measure import STANDARD_MEASURES, SelfSimilarMeasure, build_self_similar

DEFAULT_SCHEDULE = tuple(float(2**e) for e in range(10, 21, 2))

_POWER = re.compile(r"^\s*([0-9.]+)\s*\^\s*(-?[0-9.]+)\s*$")


def parse_number(text: str) -> float:
    """``"3/4"`` -> 0.75, ``"2^10"`` -> 1024.0, ``"1e-3"`` -> 0.001."""
    text = text.strip()
    m = _POWER.match(text)
    try:
        if m:
            return float(m.group(1)) ** float(m.group(2))
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse number {text!r}") from exc


def parse_list(text: str) -> list[float]:
    return [parse_number(t) for t in text.split(",") if t.strip()]


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ValidationError(f"cannot parse boolean {text!r}")


def standard_measure(name: str) -> SelfSimilarMeasure:
    try:
        return STANDARD_MEASURES[name]()
    except KeyError:
        raise ValidationError(f"unknown measure {name!r}; known: {', '.join(sorted(STANDARD_MEASURES))}") from None


def measure_from_section(name: str, sec) -> SelfSimilarMeasure:
    if "standard" in sec:
        mu = standard_measure(sec["standard"].strip())
        return SelfSimilarMeasure(mu.m, mu.rho, mu.digits, name)
    missing = [k for k in ("m", "rho", "digits") if k not in sec]
    if missing:
        raise ValidationError(f"measure {name!r} lacks {', '.join(missing)}")
    m = int(parse_number(sec["m"]))
    return build_self_similar(m, parse_number(sec["rho"]), parse_list(sec["digits"]), name)


@dataclass
class SweepConfig:
    measures: list[SelfSimilarMeasure] = field(default_factory=list)
    schedule: tuple[float, ...] = DEFAULT_SCHEDULE
    grid: int = 9
    knapp: bool = True
    extremizer: bool = True
    timing: bool = True
    workers: int = 1


def _schedule(sec) -> tuple[float, ...]:
    if "R" in sec:
        return tuple(parse_list(sec["R"]))
    if "R_min" in sec or "R_max" in sec:
        lo = parse_number(sec.get("R_min", "2^10"))
        hi = parse_number(sec.get("R_max", "2^20"))
        f = parse_number(sec.get("R_factor", "4"))
        if lo <= 0 or hi < lo or f <= 1:
            raise ValidationError("need 0 < R_min <= R_max and R_factor > 1")
        n = int(math.floor(math.log(hi / lo) / math.log(f) + 1e-9))
        return tuple(lo * f**i for i in range(n + 1))
    return DEFAULT_SCHEDULE


def parse_config(text: str) -> SweepConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep "R" distinct from "r"
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"malformed config: {exc}") from exc
    cfg = SweepConfig()
    if cp.has_section("sweep"):
        sec = cp["sweep"]
        cfg.schedule = _schedule(sec)
        cfg.grid = int(parse_number(sec.get("grid", "9")))
        cfg.knapp = _parse_bool(sec.get("knapp", "yes"))
        cfg.extremizer = _parse_bool(sec.get("extremizer", "yes"))
        cfg.timing = _parse_bool(sec.get("timing", "yes"))
        cfg.workers = int(parse_number(sec.get("workers", "1")))
    for name in cp.sections():
        if name.startswith("measure"):
            label = name[len("measure") :].strip() or f"measure{len(cfg.measures)}"
            cfg.measures.append(measure_from_section(label, cp[name]))
    return cfg


def load_config(path) -> SweepConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def resolve_measure(spec: str) -> SelfSimilarMeasure:
    """A standard measure name, or a config file whose first measure section is used."""
    if spec in STANDARD_MEASURES:
        return standard_measure(spec)
    p = Path(spec)
    if not p.exists():
        raise ValidationError(f"{spec!r} is neither a standard measure nor a config file")
    cfg = load_config(p)
    if not cfg.measures:
        raise ValidationError(f"config {spec!r} defines no measure")
    return cfg.measures[0]
