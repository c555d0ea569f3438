"""Pipeline configuration: every threshold and default in one place.

All model and layout knobs live here so that a single JSON file can pin an
entire run, and so the pipeline manifest can hash the full configuration.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class LayoutParams:
    """Geometry knobs for the radial tree and the per-major node-link scene."""

    ring_step: float = 1.0          # radius per hierarchy stage
    w_min: float = 0.02             # ribbon width at population 1
    w_scale: float = 0.15           # ribbon width per decade of population
    bar_length: float = 0.6         # gray reference bar at each leaf
    r_min: float = 0.08             # node radius at zero failures
    r_max: float = 0.40             # node radius at the max failure rate
    y_max: float = 3.0              # vertical offset of the least-central course
    core_count: int = 6             # default k for the core flag
    edge_floor: float = 0.0         # edges below this weight are never exported
    relax_iterations: int = 200
    min_separation: float = 0.30
    uniform_leaf_radius: bool = False  # draw every leaf at the outermost ring

    def __post_init__(self) -> None:
        for name in ("ring_step", "w_min", "w_scale", "bar_length",
                     "r_min", "r_max", "y_max", "min_separation"):
            if getattr(self, name) <= 0:
                raise ValueError(f"layout.{name} must be positive")
        if self.core_count < 1:
            raise ValueError("layout.core_count must be >= 1")


@dataclass(frozen=True)
class PipelineConfig:
    """Thresholds for ingestion, modeling, and layout."""

    censor_gap: int = 2                 # terms of silence before "withdrawn"
    min_enrollment: int = 10            # course floor for stage membership
    stage_count: int = 8
    split_threshold: float = 0.5        # relative to each group's max off-diagonal
    split_threshold_per_stage: dict[int, float] = field(default_factory=dict)
    min_graduates: int = 20             # majors below this get no course graph
    min_course_students: int = 10       # course floor inside a major's graph
    curriculum_min_frac: float = 0.05   # graduate fraction defining a curriculum set
    min_courses_for_attribution: int = 3
    failure_tokens: tuple[str, ...] = ("F", "W")
    layout: LayoutParams = field(default_factory=LayoutParams)

    def stage_threshold(self, stage: int) -> float:
        return self.split_threshold_per_stage.get(stage, self.split_threshold)

    def to_json(self) -> str:
        def enc(obj):
            if dataclasses.is_dataclass(obj):
                return dataclasses.asdict(obj)
            raise TypeError(type(obj))

        payload = dataclasses.asdict(self)
        payload["split_threshold_per_stage"] = {
            str(k): v for k, v in self.split_threshold_per_stage.items()
        }
        return json.dumps(payload, indent=2, sort_keys=True, default=enc)

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        raw = json.loads(text)
        layout_raw = raw.pop("layout", {})
        per_stage = raw.pop("split_threshold_per_stage", {})
        known = {f.name for f in dataclasses.fields(cls)} - {"layout", "split_threshold_per_stage"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "failure_tokens" in raw:
            raw["failure_tokens"] = tuple(raw["failure_tokens"])
        return cls(
            **raw,
            split_threshold_per_stage={int(k): float(v) for k, v in per_stage.items()},
            layout=LayoutParams(**layout_raw),
        )

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))
