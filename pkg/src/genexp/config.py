"""Run configuration: an INI file with ``[curve]``, ``[growth]``, ``[map]`` and ``[run]``.

Example::

    [curve]
    variant = diamond

    [growth]
    variant = exponential
    lam = 1

    [map]
    a = 2
    mode = uncertified

    [run]
    window = -4, 4, -4, 4
    res = 512x512
    max_iter = 50

Lists are comma separated; curve points are Python complex literals such as
``-1j`` or ``0.5+0.5j``. Every error names the offending line or field.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace

from .core import CERTIFIED, UNCERTIFIED, GenExpMap, build_map
from .curve import POLYLINE, SAMPLED, UNIT_CIRCLE, CurveSpec, build_curve
from .errors import GenExpError, InvalidInput, ParseError, ValidationError
from .growth import EXPONENTIAL, LOG_CONVEX_POLYLINE, GrowthSpec, build_growth
from .symbolic import ExternalAddress

SCHEMA = {
    "curve": {"variant", "params", "points", "grid"},
    "growth": {"variant", "lam", "beta", "breakpoints", "log_values", "x_growth"},
    "map": {"a", "mu_target", "mode"},
    "run": {
        "seed", "max_iter", "depth", "window", "res", "address", "point",
        "p", "tol", "t_max", "samples", "workers", "anchors",
    },
}
REQUIRED = {"curve": {"variant"}, "growth": {"variant"}, "map": {"a"}}
CURVE_VARIANTS = (UNIT_CIRCLE, POLYLINE, SAMPLED, "diamond")
GROWTH_VARIANTS = (EXPONENTIAL, LOG_CONVEX_POLYLINE)


@dataclass(frozen=True)
class RunParams:
    seed: int = 0
    max_iter: int = 50
    depth: int = 20
    window: tuple[float, float, float, float] = (-4.0, 4.0, -4.0, 4.0)
    res: tuple[int, int] = (256, 256)
    address: ExternalAddress | None = None
    point: complex | None = None
    p: int = 1
    tol: float = 1e-8
    t_max: float = 50.0
    samples: int = 101
    workers: int = 1
    anchors: str = "ray"


@dataclass(frozen=True, eq=False)
class RunConfig:
    curve: CurveSpec
    growth: GrowthSpec
    x_growth: float
    a: float
    mu_target: float
    mode: str
    run: RunParams
    fmap: GenExpMap = field(repr=False)

    @property
    def seed(self) -> int:
        return self.run.seed


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` entry, by section."""
    out: dict[tuple[str, str], int] = {}
    section = ""
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
        elif "=" in line and not raw[:1].isspace():
            out.setdefault((section, line.split("=", 1)[0].strip().lower()), n)
    return out


def _section_lines(text: str) -> dict[str, int]:
    out: dict[str, int] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        m = re.fullmatch(r"\s*\[([^\]]+)\]\s*", raw)
        if m:
            out.setdefault(m.group(1).strip(), n)
    return out


class _Fields:
    """Typed access to raw string values with field- and line-anchored errors."""

    def __init__(self, values: dict[str, dict[str, str]], lines: dict[tuple[str, str], int]):
        self.values = values
        self.lines = lines

    def has(self, section: str, key: str) -> bool:
        return key in self.values.get(section, {})

    def fail(self, section: str, key: str, reason: str):
        raise ValidationError(f"{section}.{key}", reason, self.lines.get((section, key)))

    def raw(self, section: str, key: str) -> str:
        return self.values[section][key].strip()

    def _convert(self, section, key, conv, what):
        text = self.raw(section, key)
        try:
            return conv(text)
        except (ValueError, TypeError):
            self.fail(section, key, f"expected {what}, got {text!r}")

    def float(self, section, key, default=None):
        if not self.has(section, key):
            return default
        return self._convert(section, key, float, "a number")

    def int(self, section, key, default=None):
        if not self.has(section, key):
            return default
        return self._convert(section, key, int, "an integer")

    def floats(self, section, key):
        return self._convert(section, key, lambda s: tuple(float(v) for v in s.split(",")), "comma-separated numbers")

    def complexes(self, section, key):
        return self._convert(
            section, key, lambda s: tuple(complex(v.replace(" ", "")) for v in s.split(",")), "comma-separated complex numbers"
        )

    def complex(self, section, key):
        return self._convert(section, key, lambda s: complex(s.replace(" ", "")), "a complex number")


def _read_ini(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError(exc.lineno, "entry outside any [section]") from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(exc.lineno, f"duplicate section [{exc.section}]") from None
    except configparser.DuplicateOptionError as exc:
        raise ParseError(exc.lineno, f"duplicate key {exc.option!r} in [{exc.section}]") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ParseError(lineno, f"cannot parse {line.strip()!r}") from None
    if parser.defaults():
        raise ParseError(_section_lines(text).get("DEFAULT"), "[DEFAULT] section is not supported")
    return {s: dict(parser[s]) for s in parser.sections()}


def _check_schema(values, key_lines, section_lines) -> None:
    for section, keys in values.items():
        if section not in SCHEMA:
            raise ParseError(section_lines.get(section), f"unknown section [{section}]")
        for key in keys:
            if key not in SCHEMA[section]:
                raise ParseError(key_lines.get((section, key)), f"unknown key {key!r} in [{section}]")
    for section, keys in REQUIRED.items():
        if section not in values:
            raise ParseError(None, f"missing section [{section}]")
        for key in keys:
            if key not in values[section]:
                raise ValidationError(f"{section}.{key}", "required", section_lines.get(section))


def _curve(fx: _Fields) -> CurveSpec:
    variant = fx.raw("curve", "variant")
    if variant not in CURVE_VARIANTS:
        fx.fail("curve", "variant", f"must be one of {', '.join(CURVE_VARIANTS)}")
    if variant == UNIT_CIRCLE:
        return CurveSpec.unit_circle()
    if variant == "diamond":
        return CurveSpec.diamond()
    for key in ("params", "points"):
        if not fx.has("curve", key):
            fx.fail("curve", key, f"required for variant {variant!r}")
    params, points = fx.floats("curve", "params"), fx.complexes("curve", "points")
    if len(params) != len(points):
        fx.fail("curve", "points", f"{len(points)} points for {len(params)} parameters")
    try:
        factory = CurveSpec.polyline if variant == POLYLINE else CurveSpec.sampled
        return factory(params, points)
    except InvalidInput as exc:
        fx.fail("curve", "params", str(exc))


def _growth(fx: _Fields) -> GrowthSpec:
    variant = fx.raw("growth", "variant")
    if variant not in GROWTH_VARIANTS:
        fx.fail("growth", "variant", f"must be one of {', '.join(GROWTH_VARIANTS)}")
    if variant == EXPONENTIAL:
        return GrowthSpec.exponential(fx.float("growth", "lam", 1.0), fx.float("growth", "beta", 1.0))
    for key in ("breakpoints", "log_values"):
        if not fx.has("growth", key):
            fx.fail("growth", key, f"required for variant {variant!r}")
    return GrowthSpec.log_convex_polyline(fx.floats("growth", "breakpoints"), fx.floats("growth", "log_values"))


def _run_params(fx: _Fields) -> RunParams:
    rp = RunParams()
    updates = {}
    for key in ("seed", "max_iter", "depth", "p", "samples", "workers"):
        if fx.has("run", key):
            updates[key] = fx.int("run", key)
    for key in ("tol", "t_max"):
        if fx.has("run", key):
            updates[key] = fx.float("run", key)
    if fx.has("run", "window"):
        w = fx.floats("run", "window")
        if len(w) != 4:
            fx.fail("run", "window", "expected x0,x1,y0,y1")
        updates["window"] = w
    if fx.has("run", "res"):
        text = fx.raw("run", "res")
        m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
        if not m:
            fx.fail("run", "res", f"expected WxH, got {text!r}")
        updates["res"] = (int(m.group(1)), int(m.group(2)))
    if fx.has("run", "address"):
        try:
            updates["address"] = ExternalAddress.parse(fx.raw("run", "address"))
        except InvalidInput as exc:
            fx.fail("run", "address", str(exc))
    if fx.has("run", "point"):
        updates["point"] = fx.complex("run", "point")
    if fx.has("run", "anchors"):
        updates["anchors"] = fx.raw("run", "anchors")
        if updates["anchors"] not in ("ray", "potential"):
            fx.fail("run", "anchors", "must be 'ray' or 'potential'")
    rp = replace(rp, **updates)
    for key in ("max_iter", "samples", "workers"):
        if getattr(rp, key) < 1:
            fx.fail("run", key, "must be at least 1")
    for key in ("depth", "p"):
        if getattr(rp, key) < 0:
            fx.fail("run", key, "must be non-negative")
    if not rp.tol > 0:
        fx.fail("run", "tol", "must be positive")
    if not rp.t_max > 0:
        fx.fail("run", "t_max", "must be positive")
    return rp


def _override_section(key: str) -> str:
    return "map" if key in SCHEMA["map"] else "run"


def parse_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Parse and validate a configuration, then build and certify the map.

    ``overrides`` maps keys of ``[map]`` or ``[run]`` to raw string values
    (as typed on the command line) and takes precedence over the file.
    """
    values = _read_ini(text)
    key_lines = _key_lines(text)
    _check_schema(values, key_lines, _section_lines(text))
    for key, value in (overrides or {}).items():
        section = _override_section(key)
        if key not in SCHEMA[section]:
            raise ValidationError(key, "unknown option")
        values.setdefault(section, {})[key] = str(value)
        key_lines.pop((section, key), None)
    fx = _Fields(values, key_lines)

    curve_spec = _curve(fx)
    growth_spec = _growth(fx)
    x_growth = fx.float("growth", "x_growth", 0.0)
    a = fx.float("map", "a")
    if not a > 0:
        fx.fail("map", "a", "a must be positive")
    mu_target = fx.float("map", "mu_target", 2.0)
    if not mu_target > 1:
        fx.fail("map", "mu_target", "mu_target must exceed 1")
    mode = fx.raw("map", "mode") if fx.has("map", "mode") else CERTIFIED
    if mode not in (CERTIFIED, UNCERTIFIED):
        fx.fail("map", "mode", f"must be {CERTIFIED!r} or {UNCERTIFIED!r}")
    run = _run_params(fx)

    grid = fx.int("curve", "grid", 4096)
    try:
        curve = build_curve(curve_spec, grid=grid)
    except InvalidInput as exc:
        fx.fail("curve", "variant", f"{exc.code}: {exc}")
    try:
        growth = build_growth(growth_spec, x_growth=x_growth)
    except InvalidInput as exc:
        fx.fail("growth", "variant", f"{exc.code}: {exc}")
    try:
        fmap = build_map(curve, growth, a, mu_target, mode)
    except GenExpError as exc:
        if exc.code == "not_certified":
            fx.fail("map", "a", f"{exc}; use mode = uncertified to proceed anyway")
        if exc.code == "certification_failed":
            fx.fail("map", "mode", str(exc))
        if isinstance(exc, InvalidInput):
            fx.fail("map", "mu_target", f"{exc.code}: {exc}")
        raise
    return RunConfig(curve_spec, growth_spec, x_growth, a, mu_target, mode, run, fmap)
