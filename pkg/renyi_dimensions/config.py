"""
Flat key/value configuration files.

A file holds one ``key = value`` pair per line; ``#`` starts a comment and
blank lines are skipped. Measure files use the keys

    kind      constant | block48 | geometric-blocks | explicit
    q         build exponent (positive, not 1)
    depth     number of cascade levels
    a         constant profile value           (kind = constant)
    ratio     block growth ratio R > 1         (kind = geometric-blocks)
    k_seed    first block index                (kind = geometric-blocks)
    k_list    comma-separated block indices    (kind = geometric-blocks, optional)
    values    comma-separated a_1, a_2, ...    (kind = explicit)

Estimator settings share the same format; see EstimatorSettings for keys.
"""

import logging
import os
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple, Union

from .exceptions import ConfigError, RenyiDimensionsError
from .profiles import KIND_ALIASES, PROFILE_KINDS, WeightProfile

logger = logging.getLogger(__name__)

MEASURE_KEYS = {"kind", "q", "depth", "a", "ratio", "k_seed", "k_list", "values"}


def parse_config(source: str) -> Dict[str, str]:
    """
    Parse key/value text into a dict of raw strings.

    Args:
        source: Either a path to a config file or the config text itself

    Raises:
        ConfigError: On a line without '=', an empty key or a repeated key
    """
    if "\n" not in source and os.path.isfile(source):
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
    else:
        text = source

    entries: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Expected 'key = value', got '{raw.strip()}'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("Empty key", line=number)
        if key in entries:
            raise ConfigError("Duplicate key", line=number, key=key)
        entries[key] = value
    return entries


def dump_config(entries: Mapping[str, object]) -> str:
    """Serialize a mapping back to key/value text with sorted keys."""
    lines = []
    for key in sorted(entries):
        lines.append(f"{key} = {format_value(entries[key])}")
    return "\n".join(lines) + "\n"


def format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(v) for v in value)
    return str(value)


def apply_overrides(entries: Dict[str, str], overrides) -> Dict[str, str]:
    """Return a copy of ``entries`` with ``key=value`` override strings applied."""
    merged = dict(entries)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"Override must look like key=value, got '{item}'")
        key, value = (part.strip() for part in item.split("=", 1))
        merged[key] = value
    return merged


@dataclass(frozen=True)
class MeasureSpec:
    """Everything needed to rebuild a cascade measure deterministically."""

    kind: str
    q: float
    depth: int
    a: Optional[Union[Fraction, float]] = None
    ratio: Optional[float] = None
    k_seed: int = 1
    k_list: Optional[Tuple[int, ...]] = None
    values: Optional[Tuple[Union[Fraction, float], ...]] = None

    @classmethod
    def from_entries(cls, entries: Mapping[str, str]) -> "MeasureSpec":
        for key in entries:
            if key not in MEASURE_KEYS:
                logger.warning("Ignoring unknown measure key '%s'", key)

        kind = _require(entries, "kind")
        kind = KIND_ALIASES.get(kind, kind)
        if kind not in PROFILE_KINDS:
            raise ConfigError(f"Unknown kind '{kind}', expected one of {', '.join(PROFILE_KINDS)}",
                              key="kind")
        q = _parse(entries, "q", _real)
        depth = _parse(entries, "depth", int)
        spec = cls(kind=kind, q=q, depth=depth)

        if kind == "constant":
            spec = replace(spec, a=_parse(entries, "a", _number))
        elif kind == "geometric-blocks":
            k_list = entries.get("k_list")
            spec = replace(
                spec,
                ratio=_parse(entries, "ratio", _real) if "ratio" in entries or not k_list else None,
                k_seed=_parse(entries, "k_seed", int) if "k_seed" in entries else 1,
                k_list=_parse_list(k_list, int, "k_list") if k_list else None,
            )
        elif kind == "explicit":
            spec = replace(spec, values=_parse_list(_require(entries, "values"), _number, "values"))
        return spec

    @classmethod
    def from_file(cls, path: str, overrides=None) -> "MeasureSpec":
        return cls.from_entries(apply_overrides(parse_config(path), overrides))

    def to_entries(self) -> Dict[str, object]:
        entries: Dict[str, object] = {"kind": self.kind, "q": self.q, "depth": self.depth}
        if self.a is not None:
            entries["a"] = self.a
        if self.ratio is not None:
            entries["ratio"] = self.ratio
        if self.kind == "geometric-blocks":
            entries["k_seed"] = self.k_seed
        if self.k_list is not None:
            entries["k_list"] = list(self.k_list)
        if self.values is not None:
            entries["values"] = list(self.values)
        return entries

    def profile(self) -> WeightProfile:
        """The weight profile described by this spec, at least ``depth`` long."""
        try:
            if self.kind == "constant":
                return WeightProfile.constant(self.a, self.depth)
            if self.kind == "block48":
                return WeightProfile.block48(self.depth)
            if self.kind == "geometric-blocks":
                return WeightProfile.geometric_blocks(self.ratio or 2.0, self.depth,
                                                      self.k_seed, self.k_list)
            return WeightProfile.explicit(self.values)
        except RenyiDimensionsError as e:
            raise ConfigError(str(e), key="kind") from e

    def build(self):
        """Build the cascade measure (see measure.build_cascade)."""
        from .measure import build_cascade
        return build_cascade(self.profile(), self.q, self.depth)


@dataclass(frozen=True)
class EstimatorSettings:
    """Tunable constants shared by the estimators and the CLI."""

    tail_fraction: float = 0.5
    tail_terms: int = 5
    grid_base: float = 2.0
    matuszewska_burn_in: float = 0.1
    matuszewska_windows: Tuple[float, ...] = (1 / 64, 1 / 32, 1 / 16, 1 / 8)
    ordering_tolerance: float = 0.05
    cdf_tol: float = 1e-12
    quad_rtol: float = 1e-6
    quad_max_halvings: int = 6
    atom_cap: int = 2 ** 22
    envelope_radius: int = 12

    @classmethod
    def from_entries(cls, entries: Mapping[str, str]) -> "EstimatorSettings":
        known = {f.name: f for f in fields(cls)}
        values = {}
        for key, raw in entries.items():
            if key in MEASURE_KEYS:
                continue
            if key not in known:
                logger.warning("Ignoring unknown setting '%s'", key)
                continue
            default = getattr(cls, key)
            if isinstance(default, tuple):
                values[key] = _parse_list(raw, _real, key)
            else:
                values[key] = _parse({key: raw}, key, type(default))
        return cls(**values)

    def to_entries(self) -> Dict[str, object]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _require(entries: Mapping[str, str], key: str) -> str:
    if key not in entries or entries[key] == "":
        raise ConfigError("Missing required key", key=key)
    return entries[key]


def _parse(entries: Mapping[str, str], key: str, kind):
    raw = _require(entries, key)
    try:
        if kind is int:
            return int(raw)
        return kind(raw)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"Cannot parse '{raw}' as {'an integer' if kind is int else 'a number'}",
                          key=key) from e


def _parse_list(raw: str, kind, key: str) -> tuple:
    try:
        return tuple(kind(part.strip()) for part in raw.split(",") if part.strip())
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"Cannot parse list '{raw}'", key=key) from e


def _number(raw: str) -> Union[Fraction, float]:
    """Integers and p/q fractions stay exact; anything else becomes a float."""
    text = raw.strip()
    if "/" in text or text.lstrip("-").isdigit():
        return Fraction(text)
    return float(text)


def _real(raw: str) -> float:
    return float(_number(raw))
