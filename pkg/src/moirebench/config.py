"""Tool configuration: one JSON file driving a full dataset build.

Unknown keys are rejected recursively so a typo ("blur_sgima") fails the
run instead of silently using a default.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .classify import DEFAULT_BAND_EDGES, ContentThresholds
from .dataset import SplitSpec
from .errors import ConfigError, ImageValueError
from .pipeline import PipelineConfig

__all__ = ["ToolConfig", "load_config", "default_config"]


@dataclass(frozen=True)
class ToolConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    content_thresholds: ContentThresholds = field(default_factory=ContentThresholds)
    frequency_band_edges: tuple = DEFAULT_BAND_EDGES
    freq_imbalance_ratio: float = 0.10
    rebalance_retry_cap: int | None = None

    def __post_init__(self):
        edges = tuple(float(e) for e in self.frequency_band_edges)
        object.__setattr__(self, "frequency_band_edges", edges)
        if len(edges) != 2 or not 0.0 < edges[0] < edges[1] < 1.0:
            raise ImageValueError(
                "frequency_band_edges must be two increasing fractions in (0, 1)"
            )
        if self.freq_imbalance_ratio < 0.0:
            raise ImageValueError("freq_imbalance_ratio must be >= 0")
        if self.rebalance_retry_cap is not None and self.rebalance_retry_cap < 0:
            raise ImageValueError("rebalance_retry_cap must be >= 0")

    def to_payload(self) -> dict:
        payload = dataclasses.asdict(self)
        payload["frequency_band_edges"] = list(self.frequency_band_edges)
        return payload


def default_config() -> ToolConfig:
    return ToolConfig()


def _build_section(cls, payload, where):
    if not isinstance(payload, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**payload)
    except (TypeError, ImageValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path) -> ToolConfig:
    """Load and validate a tool config JSON file.

    Every key is optional; omitted sections take their defaults. Raises
    :class:`ConfigError` on unreadable files, malformed JSON, unknown
    keys at any level, or out-of-range values.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: top level must be an object")

    sections = {
        "pipeline": (PipelineConfig, {}),
        "split": (SplitSpec, {}),
        "content_thresholds": (ContentThresholds, {}),
    }
    scalars = {"frequency_band_edges", "freq_imbalance_ratio", "rebalance_retry_cap"}
    unknown = sorted(set(payload) - set(sections) - scalars)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")

    kwargs = {}
    for name, (cls, _) in sections.items():
        if name in payload:
            kwargs[name] = _build_section(cls, payload[name], f"{path}: {name}")
    for name in scalars:
        if name in payload:
            kwargs[name] = payload[name]
    try:
        return ToolConfig(**kwargs)
    except (TypeError, ImageValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
