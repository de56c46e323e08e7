"""End-to-end wiring: configuration plus the extraction entry point.

One extraction run loads a frame directory, produces per-frame text lines
through the configured text backend, classifies every changed frame pair
through the configured action backend, and aggregates the events into
coding steps.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .actions import ActionEvent, HeuristicActionBackend, SidecarActionBackend
from .changes import diff_region
from .errors import InputError
from .evaluation import DEFAULT_IOU_SWEEP, DEFAULT_OFFSET_SWEEP
from .frames import load_frame_sequence
from .steps import (
    DEFAULT_LINE_MATCH_THRESHOLD,
    DEFAULT_VO_THRESHOLD,
    CodingStep,
    identify_steps,
)
from .textlines import RasterTextBackend, SidecarTextBackend, extract_lines

ACTION_BACKENDS = ("oracle", "heuristic", "sidecar")
TEXT_BACKENDS = ("oracle", "raster", "sidecar")


@dataclass(frozen=True)
class PipelineConfig:
    fps: float | None = None  # None: manifest value, else 1.0
    diff_tolerance: int = 0
    vo_threshold: float = DEFAULT_VO_THRESHOLD
    line_match_threshold: float = DEFAULT_LINE_MATCH_THRESHOLD
    action_backend: str = "oracle"
    text_backend: str = "oracle"
    popup_bridge: bool = False
    iou_sweep: tuple[float, ...] = DEFAULT_IOU_SWEEP
    offset_sweep: tuple[int, ...] = DEFAULT_OFFSET_SWEEP

    def validate(self) -> None:
        if self.fps is not None and self.fps <= 0:
            raise InputError("fps must be positive")
        if self.diff_tolerance < 0:
            raise InputError("diff_tolerance must be >= 0")
        for name in ("vo_threshold", "line_match_threshold"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise InputError(f"{name} must be in [0, 1]")
        if self.action_backend not in ACTION_BACKENDS:
            raise InputError(f"action_backend must be one of {ACTION_BACKENDS}")
        if self.text_backend not in TEXT_BACKENDS:
            raise InputError(f"text_backend must be one of {TEXT_BACKENDS}")


def config_from_file(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Read flat ``key = value`` lines into a config; unknown keys are errors."""
    base = base or PipelineConfig()
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc}") from exc
    values: dict[str, object] = {}
    known = {f.name: f for f in fields(PipelineConfig)}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in known:
            raise InputError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _parse_config_value(key, value, path, lineno)
    config = replace(base, **values)
    config.validate()
    return config


def _parse_config_value(key: str, value: str, path, lineno):
    try:
        if key == "fps":
            return float(value)
        if key == "diff_tolerance":
            return int(value)
        if key in ("vo_threshold", "line_match_threshold"):
            return float(value)
        if key in ("action_backend", "text_backend"):
            return value
        if key == "popup_bridge":
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if key == "iou_sweep":
            return tuple(float(v) for v in value.split(",") if v.strip())
        if key == "offset_sweep":
            return tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    raise InputError(f"{path}:{lineno}: unhandled config key {key!r}")


@dataclass
class ExtractionResult:
    steps: list[CodingStep]
    events: list[ActionEvent]
    frame_count: int
    source_id: str


def extract_steps(
    frames_dir: str | Path,
    config: PipelineConfig | None = None,
    actions_sidecar: str | Path | None = None,
    text_sidecar: str | Path | None = None,
) -> ExtractionResult:
    """Run the full extraction pipeline over one frame directory."""
    config = config or PipelineConfig()
    config.validate()
    directory = Path(frames_dir)
    seq = load_frame_sequence(directory, fps=config.fps)

    if config.text_backend in ("oracle", "sidecar"):
        sidecar = Path(text_sidecar) if text_sidecar else directory / "text.jsonl"
        if not sidecar.is_file():
            raise InputError(f"text backend {config.text_backend!r} needs {sidecar}")
        text_backend = SidecarTextBackend(sidecar)
    else:
        text_backend = RasterTextBackend()
    lines_per_frame = extract_lines(seq, text_backend)

    if config.action_backend in ("oracle", "sidecar"):
        sidecar = Path(actions_sidecar) if actions_sidecar else directory / "actions.jsonl"
        if not sidecar.is_file():
            raise InputError(f"action backend {config.action_backend!r} needs {sidecar}")
        action_backend = SidecarActionBackend(sidecar)
    else:
        action_backend = HeuristicActionBackend(pixel_tolerance=config.diff_tolerance)

    events = []
    for i in range(len(seq) - 1):
        region = diff_region(seq[i], seq[i + 1], tolerance=config.diff_tolerance)
        if region is None:
            continue
        action = action_backend.recognize(
            seq[i], seq[i + 1], region, lines_per_frame[i], lines_per_frame[i + 1]
        )
        events.append(ActionEvent(action, i, i + 1, region))

    steps = identify_steps(
        seq,
        events,
        lines_per_frame,
        vo_threshold=config.vo_threshold,
        line_match_threshold=config.line_match_threshold,
        popup_bridge=config.popup_bridge,
    )
    return ExtractionResult(
        steps=steps,
        events=events,
        frame_count=len(seq),
        source_id=seq.source_id,
    )
