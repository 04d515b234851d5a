"""Run configuration: thresholds, loss weights, costs, and simulation knobs.

The JSON layout mirrors the report's config_echo, so a report is always
self-describing about the thresholds that produced it.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

from .audit import AuditConfig
from .errors import InvalidParam
from .simulator import CostModel
from .targets import LossWeights

DEFAULT_INITIAL = 10_000.0
DEFAULT_UNIT = 1
DEFAULT_ZOOM = 50


@dataclass(frozen=True, slots=True)
class RunConfig:
    audit: AuditConfig
    loss: LossWeights
    cost: CostModel
    initial: float = DEFAULT_INITIAL
    unit: int = DEFAULT_UNIT
    zoom: int = DEFAULT_ZOOM

    def __post_init__(self):
        if self.initial <= 0:
            raise InvalidParam(f"simulation.initial must be > 0, got {self.initial!r}")
        if not isinstance(self.unit, int) or self.unit < 1:
            raise InvalidParam(f"simulation.unit must be an integer >= 1, got {self.unit!r}")
        if not isinstance(self.zoom, int) or self.zoom < 1:
            raise InvalidParam(f"zoom must be an integer >= 1, got {self.zoom!r}")


def default_config() -> RunConfig:
    return RunConfig(audit=AuditConfig(), loss=LossWeights(), cost=CostModel())


def config_dict(cfg: RunConfig) -> dict:
    """The JSON form, also echoed verbatim into every report."""
    return {
        "thresholds": asdict(cfg.audit),
        "loss": asdict(cfg.loss),
        "cost": asdict(cfg.cost),
        "simulation": {"initial": cfg.initial, "unit": cfg.unit},
        "zoom": cfg.zoom,
    }


def parse_config(document: dict) -> RunConfig:
    """Merge a config document into the defaults; unknown keys are errors."""
    if not isinstance(document, dict):
        raise InvalidParam("config must be a JSON object")
    known = {"thresholds", "loss", "cost", "simulation", "zoom"}
    unknown = set(document) - known
    if unknown:
        raise InvalidParam(f"unknown config keys: {sorted(unknown)}")
    cfg = default_config()
    try:
        if "thresholds" in document:
            cfg = replace(cfg, audit=replace(cfg.audit, **_section(document, "thresholds")))
        if "loss" in document:
            cfg = replace(cfg, loss=replace(cfg.loss, **_section(document, "loss")))
        if "cost" in document:
            cfg = replace(cfg, cost=replace(cfg.cost, **_section(document, "cost")))
        if "simulation" in document:
            cfg = replace(cfg, **_section(document, "simulation"))
        if "zoom" in document:
            cfg = replace(cfg, zoom=document["zoom"])
    except TypeError as err:
        raise InvalidParam(f"bad config: {err}")
    return cfg


def _section(document: dict, name: str) -> dict:
    section = document[name]
    if not isinstance(section, dict):
        raise InvalidParam(f"config key {name!r} must be an object")
    return section


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as err:
            raise InvalidParam(f"{path} is not valid JSON: {err}")
    return parse_config(document)
