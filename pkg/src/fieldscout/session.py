"""The exploration loop: acquire, segment, weigh, pick targets, approach, repeat.

A session owns one virtual camera over one scene and walks a decreasing
distance schedule. Every step commits an immutable bundle of artifacts and
is archived to disk with content hashes; replaying a session from its config
and recorded choices reproduces every artifact bit-exactly (wall-clock time
only ever appears in the event log).
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path

from .camera import (
    MosaicGeometry,
    PointingLog,
    SourceScene,
    VirtualCamera,
    mask_from_memory,
)
from .imaging import HsiImage, MosaicSpec, Plane, RgbImage
from .interest import InterestPoint
from .pipeline import AnalysisResult, MosaicAnalyzer
from . import io as fio


class SessionStateError(RuntimeError):
    """An operation arrived in a state the session machine forbids."""


CHOICE_ACTIONS = ("approach", "zoom", "rescan", "stop")


@dataclass
class SessionConfig:
    """Everything a session needs to be reproducible, JSON/TOML-serializable."""

    scene: str | None = None
    distances: tuple[float, ...] = (300.0, 60.0, 10.0)
    mosaic_cols: int = 4
    mosaic_rows: int = 3
    sub_width: int = 48
    sub_height: int = 36
    levels: int = 64
    blur_width: int = 10
    top_k: int = 3
    mode: str = "autonomous"
    mask_memory: bool = False
    max_steps: int | None = None
    min_distance: float = 0.0
    base_fov: float = 30.0
    zoom: float = 1.0
    smoothing_sigma: float = 1.5
    smoothing_radius: int = 4
    peak_fraction: float = 0.001
    max_classes: int = 8
    min_separation: float | None = None
    mask_low_weight: float = 0.1
    mask_threshold_fraction: float = 0.25

    def __post_init__(self):
        self.distances = tuple(float(d) for d in self.distances)
        if not self.distances:
            raise ValueError("distance schedule must not be empty")
        if any(d <= 0 for d in self.distances):
            raise ValueError("distances must be positive")
        if any(b >= a for a, b in zip(self.distances, self.distances[1:])):
            raise ValueError("distance schedule must be strictly decreasing")
        if any(d < self.min_distance for d in self.distances):
            raise ValueError("schedule goes below min_distance")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.mode not in ("autonomous", "interactive"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def spec(self) -> MosaicSpec:
        return MosaicSpec(
            cols=self.mosaic_cols, rows=self.mosaic_rows, sub_width=self.sub_width, sub_height=self.sub_height
        )

    @property
    def step_cap(self) -> int:
        return self.max_steps if self.max_steps is not None else len(self.distances)

    def analyzer(self) -> MosaicAnalyzer:
        return MosaicAnalyzer(
            levels=self.levels,
            blur_width=self.blur_width,
            top_k=self.top_k,
            min_separation=self.min_separation,
            smoothing_sigma=self.smoothing_sigma,
            smoothing_radius=self.smoothing_radius,
            peak_fraction=self.peak_fraction,
            max_classes=self.max_classes,
        ).fit()

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["distances"] = list(self.distances)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        return cls(**d)

    @classmethod
    def from_file(cls, path: str | Path) -> "SessionConfig":
        path = Path(path)
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python 3.10
                import tomli as tomllib
            data = tomllib.loads(path.read_text())
        else:
            data = json.loads(path.read_text())
        return cls.from_dict(data)


@dataclass(eq=False)
class SessionStep:
    """One committed pass of the pipeline; immutable by convention after commit."""

    index: int
    distance: float
    pose: dict
    geometry: MosaicGeometry
    planes: dict[str, Plane]
    analysis: AnalysisResult
    chips: list[RgbImage]
    pointing: PointingLog
    chosen: dict | None = None

    @property
    def points(self) -> list[InterestPoint]:
        return self.analysis.points


class SessionArchive:
    """Deterministic on-disk layout for a session's artifacts."""

    def __init__(self, root: str | Path, config: SessionConfig):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        fio.dump_json(config.to_dict(), self.root / "config.json")

    def step_dir(self, index: int) -> Path:
        return self.root / f"step{index:03d}"

    def write_step(self, step: SessionStep, parameters: dict) -> dict:
        d = self.step_dir(step.index)
        d.mkdir(parents=True, exist_ok=True)
        for ch, plane in step.planes.items():
            fio.save_plane_png(plane, d / f"mosaic_{ch}.png")
        for ch, seg in step.analysis.segmentations.items():
            fio.save_segmentation_png(seg, d / f"seg_{ch}.png")
        for ch, unc in step.analysis.uncommon.items():
            fio.save_map_png(unc, d / f"uncommon_{ch}.png")
        fio.save_map_png(step.analysis.interest_raw, d / "interest_raw.png")
        fio.save_map_png(step.analysis.interest_blur, d / "interest_blur.png")
        if step.analysis.mask is not None:
            fio.save_map_png(step.analysis.mask, d / "mask.png")
        fio.dump_json({"points": [p.to_dict() for p in step.points]}, d / "points.json")
        fio.dump_json(
            {
                "step": step.index,
                "distance": step.distance,
                "pose": step.pose,
                "geometry": step.geometry.to_dict(),
            },
            d / "pose.json",
        )
        (d / "pointing.jsonl").write_text(step.pointing.to_jsonl())
        chips = d / "chips"
        chips.mkdir(exist_ok=True)
        for point, chip in zip(step.points, step.chips):
            fio.save_rgb_png(chip, chips / f"chip{point.rank}.png")
        return fio.write_manifest(d, extra={"step": step.index, "parameters": parameters})

    def append_choice(self, record: dict) -> None:
        with open(self.root / "choices.jsonl", "a") as f:
            f.write(json.dumps(record, sort_keys=True) + "\n")

    def append_event(self, event: dict) -> None:
        with open(self.root / "events.jsonl", "a") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")

    def finalize(self, summary: dict) -> None:
        fio.dump_json(summary, self.root / "session.json")


class Session:
    """State machine over (scene, config): running -> awaiting_choice -> ... -> done."""

    def __init__(
        self,
        config: SessionConfig,
        scene: SourceScene | None = None,
        archive_root: str | Path | None = None,
        on_event=None,
    ):
        self.config = config
        if scene is None:
            if not config.scene:
                raise ValueError("config names no scene and none was provided")
            scene = SourceScene.load(config.scene)
        self.scene = scene
        self.camera = VirtualCamera(
            scene=scene,
            distance=config.distances[0],
            zoom=config.zoom,
            base_fov=config.base_fov,
        )
        self.analyzer = config.analyzer()
        self.steps: list[SessionStep] = []
        self.status = "running"
        self.done_reason: str | None = None
        self.events: list[dict] = []
        self.choices: list[dict] = []
        self._schedule_pos = 0
        self._on_event = on_event
        self.archive = SessionArchive(archive_root, config) if archive_root else None

    # -- events ------------------------------------------------------------

    def _emit(self, event: str, payload: dict) -> None:
        record = {
            "seq": len(self.events) + 1,
            "step": len(self.steps) - 1 if self.steps else None,
            "event": event,
            "payload": payload,
            "timestamp": time.time(),
        }
        self.events.append(record)
        if self.archive:
            self.archive.append_event(record)
        if self._on_event:
            self._on_event(record)

    def _finish(self, reason: str) -> None:
        self.status = "done"
        self.done_reason = reason
        if self.archive:
            self.archive.finalize(self.summary())
        self._emit("session_done", {"reason": reason, "steps": len(self.steps)})

    def summary(self) -> dict:
        return {
            "status": self.status,
            "reason": self.done_reason,
            "mode": self.config.mode,
            "steps": [
                {
                    "index": s.index,
                    "distance": s.distance,
                    "n_points": len(s.points),
                    "chosen": s.chosen,
                }
                for s in self.steps
            ],
        }

    # -- the pipeline step ---------------------------------------------------

    def run_step(self) -> SessionStep:
        """acquire -> butt -> segment x3 -> uncommon x3 -> sum -> (mask) -> blur -> peaks -> chips."""
        if self.status != "running":
            raise SessionStateError(f"cannot run a step while {self.status}")
        self._emit("step_started", {"index": len(self.steps), "distance": self.camera.distance})
        capture = self.camera.acquire_mosaic(self.config.spec, levels=self.config.levels)
        planes = capture.planes()
        hsi = HsiImage(h=planes["h"], s=planes["s"], i=planes["i"])
        mask = None
        if self.config.mask_memory and self.steps:
            prev = self.steps[-1]
            mask = mask_from_memory(
                prev.analysis.interest_blur,
                prev.geometry,
                capture.geometry,
                low_weight=self.config.mask_low_weight,
                threshold_fraction=self.config.mask_threshold_fraction,
            )
        analysis = self.analyzer.analyze_planes(hsi, mask=mask)
        chips = (
            self.camera.acquire_chips(analysis.points, capture.geometry, capture.log)
            if analysis.points
            else []
        )
        step = SessionStep(
            index=len(self.steps),
            distance=self.camera.distance,
            pose=self.camera.pose_dict(),
            geometry=capture.geometry,
            planes=planes,
            analysis=analysis,
            chips=chips,
            pointing=capture.log,
        )
        # archive before publishing: a visible step always has its artifacts on disk
        if self.archive:
            self.archive.write_step(step, parameters=self.config.to_dict())
        self.steps.append(step)
        self._emit(
            "step_committed",
            {
                "index": step.index,
                "distance": step.distance,
                "points": [p.to_dict() for p in step.points],
            },
        )
        if not analysis.points:
            self._finish("no_interest_points")
        elif len(self.steps) >= self.config.step_cap:
            self._finish("max_steps")
        elif self.config.mode == "interactive":
            self.status = "awaiting_choice"
            self._emit("awaiting_choice", {"index": step.index, "ranks": [p.rank for p in step.points]})
        return step

    # -- choices -------------------------------------------------------------

    def _next_distance(self) -> float:
        if self._schedule_pos + 1 >= len(self.config.distances):
            raise SessionStateError("distance schedule exhausted; approach not available")
        return self.config.distances[self._schedule_pos + 1]

    def choose(
        self,
        action: str,
        rank: int | None = None,
        point: tuple[int, int] | None = None,
        factor: float | None = None,
        chooser: str = "human",
    ) -> None:
        """Record and apply one choice (approach/zoom/rescan/stop)."""
        if action not in CHOICE_ACTIONS:
            raise ValueError(f"unknown action {action!r}")
        if self.status == "done":
            raise SessionStateError("session is done")
        if self.config.mode == "interactive" and self.status != "awaiting_choice":
            raise SessionStateError("no choice is awaited")
        if not self.steps:
            raise SessionStateError("no committed step to choose from")
        step = self.steps[-1]

        if action == "approach":
            if point is None:
                if rank is None:
                    raise ValueError("approach needs a rank or an explicit point")
                matches = [p for p in step.points if p.rank == rank]
                if not matches:
                    raise ValueError(f"step {step.index} has no rank-{rank} point")
                target = (matches[0].x, matches[0].y)
            else:
                target = (int(point[0]), int(point[1]))
                if not step.geometry.contains(*target):
                    raise ValueError(f"point {target} lies outside the mosaic")
            new_distance = self._next_distance()
            new_camera = self.camera.approach(target, step.geometry, new_distance)
        elif action == "zoom":
            if factor is None:
                raise ValueError("zoom needs a factor")
            new_camera = self.camera.set_zoom(factor)
        else:
            new_camera = self.camera

        record = {
            "step": step.index,
            "action": action,
            "rank": rank,
            "point": list(point) if point is not None else None,
            "factor": factor,
            "chooser": chooser,
        }
        self.choices.append(record)
        if self.archive:
            self.archive.append_choice(record)
        step.chosen = record

        if action == "stop":
            self._emit("choice_recorded", record)
            self._finish("stopped")
            return
        if action == "approach":
            self._schedule_pos += 1
        self.camera = new_camera
        self.status = "running"
        self._emit(
            "choice_recorded",
            {**record, "fov": self.camera.fov, "distance": self.camera.distance},
        )

    def choose_target(self, rank_or_point, chooser: str = "human") -> None:
        """Approach the given rank (int) or explicit (x, y) mosaic point."""
        if isinstance(rank_or_point, int):
            self.choose("approach", rank=rank_or_point, chooser=chooser)
        else:
            self.choose("approach", point=tuple(rank_or_point), chooser=chooser)

    # -- drivers ---------------------------------------------------------------

    def run_autonomous(self) -> list[SessionStep]:
        """Run the whole schedule with the rank-1 policy."""
        if self.config.mode != "autonomous":
            raise SessionStateError("run_autonomous needs an autonomous-mode config")
        while self.status == "running":
            self.run_step()
            if self.status != "running":
                break
            self.choose("approach", rank=1, chooser="machine")
        return self.steps


def replay_session(
    archive_root: str | Path,
    out_root: str | Path,
    scene: SourceScene | None = None,
) -> Session:
    """Re-run a session from its archived config and choice log.

    With the same scene this reproduces every archived artifact bit-exactly.
    """
    archive_root = Path(archive_root)
    config = SessionConfig.from_dict(fio.load_json(archive_root / "config.json"))
    choices_path = archive_root / "choices.jsonl"
    choices = (
        [json.loads(line) for line in choices_path.read_text().splitlines() if line.strip()]
        if choices_path.exists()
        else []
    )
    session = Session(config, scene=scene, archive_root=out_root)
    session.run_step()
    for record in choices:
        if session.status == "done":
            break
        session.choose(
            action=record["action"],
            rank=record.get("rank"),
            point=tuple(record["point"]) if record.get("point") else None,
            factor=record.get("factor"),
            chooser=record.get("chooser", "human"),
        )
        if session.status == "running":
            session.run_step()
    return session
