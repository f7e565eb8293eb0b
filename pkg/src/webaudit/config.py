"""Calibration loading.

Everything tunable lives in one JSON document: device modes, per-mode
scoring curves, metric weights, category bands, outlier bounds, named
throttle profiles, and the quiet-window parameters. A packaged default
ships with the library; any audit can point at its own file instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .collector import MODE_KINDS, DeviceMode, Viewport
from .errors import ParseError, SchemaError
from .metrics import METRIC_KEYS, QuietWindow
from .netsim import ThrottleProfile
from .scoring import CategoryBands, ScoreCurve, WeightTable


@dataclass(frozen=True)
class OutlierBounds:
    """Scores at or beyond these bounds get flagged for manual validation."""

    upper: float = 95.0
    lower: float = 5.0

    def __post_init__(self):
        if not 0 <= self.lower < self.upper <= 100:
            raise ValueError(f"need 0 <= lower < upper <= 100, got {self.lower!r}/{self.upper!r}")


@dataclass(frozen=True)
class ThrottleSpec:
    """A throttle profile as configured.

    cpu_multiplier None defers to the device mode it is resolved against;
    link rates of None mean unlimited.
    """

    rtt_ms: float
    downlink_kbps: float | None
    uplink_kbps: float | None
    cpu_multiplier: float | None

    def resolve(self, mode: DeviceMode | None = None) -> ThrottleProfile:
        cpu = self.cpu_multiplier
        if cpu is None:
            cpu = mode.cpu_multiplier if mode is not None else 1.0
        return ThrottleProfile(
            rtt_ms=self.rtt_ms,
            downlink_kbps=math.inf if self.downlink_kbps is None else self.downlink_kbps,
            uplink_kbps=math.inf if self.uplink_kbps is None else self.uplink_kbps,
            cpu_multiplier=cpu,
        )


@dataclass(frozen=True)
class Calibration:
    modes: Mapping[str, DeviceMode]
    curves: Mapping[str, Mapping[str, ScoreCurve]]
    weights: WeightTable
    bands: CategoryBands
    outliers: OutlierBounds
    throttles: Mapping[str, ThrottleSpec]
    quiet_window: QuietWindow

    def mode(self, kind: str) -> DeviceMode:
        if kind not in self.modes:
            raise SchemaError("$.modes", f"no device mode named {kind!r}")
        return self.modes[kind]

    def curves_for(self, kind: str) -> Mapping[str, ScoreCurve]:
        if kind not in self.curves:
            raise SchemaError("$.curves", f"no curves for mode {kind!r}")
        return self.curves[kind]


def default_calibration_text() -> str:
    return resources.files("webaudit").joinpath("data/calibration.json").read_text("utf-8")


def load_calibration(path: str | Path | None = None) -> Calibration:
    """Load a calibration file; None loads the packaged defaults."""
    if path is None:
        text = default_calibration_text()
        source = "<packaged calibration>"
    else:
        text = Path(path).read_text("utf-8")
        source = str(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc}") from exc
    return calibration_from_dict(data)


def calibration_from_dict(data: Any) -> Calibration:
    if not isinstance(data, dict):
        raise SchemaError("$", "calibration document must be an object")

    modes = {}
    for kind, item in _object(data, "modes", "$").items():
        path = f"$.modes.{kind}"
        if kind not in MODE_KINDS:
            raise SchemaError(path, f"unknown mode kind (expected one of {', '.join(MODE_KINDS)})")
        viewport = _object(item, "viewport", path)
        try:
            modes[kind] = DeviceMode(
                kind=kind,
                viewport=Viewport(
                    width_px=int(_positive(viewport, "width_px", f"{path}.viewport")),
                    height_px=int(_positive(viewport, "height_px", f"{path}.viewport")),
                ),
                cpu_multiplier=_positive(item, "cpu_multiplier", path),
            )
        except ValueError as exc:
            raise SchemaError(path, str(exc)) from exc
    for kind in MODE_KINDS:
        if kind not in modes:
            raise SchemaError("$.modes", f"missing device mode {kind!r}")
    if modes["mobile"].cpu_multiplier < modes["desktop"].cpu_multiplier:
        raise SchemaError("$.modes", "mobile cpu_multiplier must be >= desktop cpu_multiplier")

    curves: dict[str, dict[str, ScoreCurve]] = {}
    for kind, table in _object(data, "curves", "$").items():
        path = f"$.curves.{kind}"
        if kind not in MODE_KINDS:
            raise SchemaError(path, "curves must be keyed by mode kind")
        curves[kind] = {}
        for key in METRIC_KEYS:
            item = _object(table, key, path)
            try:
                curves[kind][key] = ScoreCurve(
                    median_ms=_positive(item, "median_ms", f"{path}.{key}"),
                    podr_ms=_positive(item, "podr_ms", f"{path}.{key}"),
                )
            except Exception as exc:
                raise SchemaError(f"{path}.{key}", str(exc)) from exc
    for kind in MODE_KINDS:
        if kind not in curves:
            raise SchemaError("$.curves", f"missing curves for mode {kind!r}")

    weight_data = _object(data, "weights", "$")
    unknown = sorted(set(weight_data) - set(METRIC_KEYS))
    if unknown:
        raise SchemaError("$.weights", f"unknown metric keys: {', '.join(unknown)}")
    try:
        weights = WeightTable(**{key: float(weight_data[key]) for key in METRIC_KEYS if key in weight_data})
    except (TypeError, KeyError, ValueError) as exc:
        raise SchemaError("$.weights", str(exc)) from exc

    bands_data = data.get("category_bands", {})
    try:
        bands = CategoryBands(
            good_min=float(bands_data.get("good_min", 90.0)),
            average_min=float(bands_data.get("average_min", 50.0)),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError("$.category_bands", str(exc)) from exc

    outlier_data = data.get("outlier_bounds", {})
    try:
        outliers = OutlierBounds(
            upper=float(outlier_data.get("upper", 95.0)),
            lower=float(outlier_data.get("lower", 5.0)),
        )
    except ValueError as exc:
        raise SchemaError("$.outlier_bounds", str(exc)) from exc

    throttles = {}
    for name, item in _object(data, "throttle_profiles", "$").items():
        path = f"$.throttle_profiles.{name}"
        if not isinstance(item, dict):
            raise SchemaError(path, "must be an object")
        throttles[name] = ThrottleSpec(
            rtt_ms=float(item.get("rtt_ms", 0.0)),
            downlink_kbps=_optional_rate(item, "downlink_kbps", path),
            uplink_kbps=_optional_rate(item, "uplink_kbps", path),
            cpu_multiplier=None if item.get("cpu_multiplier") is None else float(item["cpu_multiplier"]),
        )

    quiet_data = data.get("quiet_window", {})
    try:
        quiet = QuietWindow(
            long_task_ms=float(quiet_data.get("long_task_ms", 50.0)),
            window_ms=float(quiet_data.get("window_ms", 5000.0)),
            max_inflight_requests=int(quiet_data.get("max_inflight_requests", 2)),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError("$.quiet_window", str(exc)) from exc

    return Calibration(
        modes=modes,
        curves=curves,
        weights=weights,
        bands=bands,
        outliers=outliers,
        throttles=throttles,
        quiet_window=quiet,
    )


def resolve_throttle(spec: str, calibration: Calibration, mode: DeviceMode | None = None) -> ThrottleProfile:
    """Turn a profile name or a profile-file path into a concrete profile."""
    if spec in calibration.throttles:
        return calibration.throttles[spec].resolve(mode)
    path = Path(spec)
    if not path.exists():
        known = ", ".join(sorted(calibration.throttles))
        raise SchemaError("$.throttle_profiles", f"unknown throttle {spec!r} (profiles: {known}; or pass a file)")
    try:
        data = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("$", "throttle profile file must be an object")
    return ThrottleSpec(
        rtt_ms=float(data.get("rtt_ms", 0.0)),
        downlink_kbps=None if data.get("downlink_kbps") is None else float(data["downlink_kbps"]),
        uplink_kbps=None if data.get("uplink_kbps") is None else float(data["uplink_kbps"]),
        cpu_multiplier=None if data.get("cpu_multiplier") is None else float(data["cpu_multiplier"]),
    ).resolve(mode)


def load_member_regions(path: str | Path | None = None) -> tuple[str, ...]:
    """Region names, one per line; blank lines and # comments are skipped."""
    if path is None:
        text = resources.files("webaudit").joinpath("data/member_regions.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    regions = []
    for line in text.splitlines():
        name = line.strip()
        if name and not name.startswith("#"):
            regions.append(name)
    return tuple(regions)


def _object(data: Any, key: str, path: str) -> dict:
    if not isinstance(data, dict) or not isinstance(data.get(key), dict):
        raise SchemaError(f"{path}.{key}", "must be an object")
    return data[key]


def _positive(item: dict, key: str, path: str) -> float:
    value = item.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
        raise SchemaError(f"{path}.{key}", "must be a positive number")
    return float(value)


def _optional_rate(item: dict, key: str, path: str) -> float | None:
    value = item.get(key)
    if value is None:
        return None
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
        raise SchemaError(f"{path}.{key}", "must be a positive number or null for unlimited")
    return float(value)
