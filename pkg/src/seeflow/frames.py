"""Frame and frame-sequence containers plus directory I/O.

A screencast enters the pipeline as a directory of numbered PNG files
(``frame_000000.png``, ``frame_000001.png``, ...) produced upstream by
sampling the video at a fixed rate. An optional ``manifest.json`` sidecar
carries the source id, the sampling rate and the frame count.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionMismatch, InputError, MissingFrame

FRAME_NAME_FORMAT = "frame_{:06d}.png"
_FRAME_NAME_RE = re.compile(r"^frame_(\d{6})\.png$")
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True, eq=False)
class Frame:
    """One decoded screenshot: zero-based index, timestamp and RGB pixels.

    Equality is identity (the pixel grid makes value equality expensive);
    compare ``pixels`` explicitly where content matters.
    """

    index: int
    timestamp_s: float
    pixels: np.ndarray = field(repr=False)  # uint8, shape (height, width, 3)

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError("pixels must have shape (height, width, 3)")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise ValueError("frame dimensions must be positive")
        self.pixels.setflags(write=False)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class FrameSequence:
    """Immutable ordered frame list sharing one resolution and sampling rate."""

    frames: tuple[Frame, ...]
    fps: float
    source_id: str = ""

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        for i, frame in enumerate(self.frames):
            if frame.index != i:
                raise ValueError(f"frame at position {i} has index {frame.index}")
        if self.frames:
            w, h = self.frames[0].width, self.frames[0].height
            for frame in self.frames:
                if (frame.width, frame.height) != (w, h):
                    raise ValueError("frames must share one resolution")

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, index: int) -> Frame:
        return self.frames[index]

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height


def sequence_from_arrays(arrays, fps: float, source_id: str = "") -> FrameSequence:
    """Build an in-memory FrameSequence from HxWx3 uint8 arrays."""
    frames = tuple(
        Frame(index=i, timestamp_s=i / fps, pixels=np.ascontiguousarray(a, dtype=np.uint8))
        for i, a in enumerate(arrays)
    )
    return FrameSequence(frames=frames, fps=fps, source_id=source_id)


def read_manifest(dir_path: str | Path) -> dict | None:
    path = Path(dir_path) / MANIFEST_NAME
    if not path.is_file():
        return None
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"unreadable manifest {path}: {exc}") from exc
    if not isinstance(manifest, dict):
        raise InputError(f"manifest {path} must hold a JSON object")
    return manifest


def load_frame_sequence(
    dir_path: str | Path,
    fps: float | None = None,
    source_id: str | None = None,
) -> FrameSequence:
    """Load ``frame_NNNNNN.png`` files, contiguous from index 0.

    ``fps`` / ``source_id`` default to the manifest values when present,
    otherwise to 1.0 and the directory name. Loading is deterministic:
    the files read are determined by the index range, not by listing order.

    Raises MissingFrame on a gap (or an empty directory), DimensionMismatch
    when a frame's resolution differs from frame 0, DecodeError for
    undecodable files.
    """
    directory = Path(dir_path)
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    manifest = read_manifest(directory)
    if fps is None:
        fps = float(manifest.get("fps", 1.0)) if manifest else 1.0
    if fps <= 0:
        raise InputError(f"fps must be positive, got {fps}")
    if source_id is None:
        if manifest and "source_id" in manifest:
            source_id = str(manifest["source_id"])
        else:
            source_id = directory.name

    indices = sorted(
        int(m.group(1))
        for p in directory.iterdir()
        if (m := _FRAME_NAME_RE.match(p.name))
    )
    if not indices:
        raise MissingFrame(0, str(directory))
    for expected, got in enumerate(indices):
        if got != expected:
            raise MissingFrame(expected, str(directory))

    frames = []
    dims: tuple[int, int] | None = None
    for index in indices:
        path = directory / FRAME_NAME_FORMAT.format(index)
        try:
            with Image.open(path) as img:
                pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except (OSError, UnidentifiedImageError, ValueError) as exc:
            raise DecodeError(f"cannot decode {path}: {exc}") from exc
        size = (pixels.shape[1], pixels.shape[0])
        if dims is None:
            dims = size
        elif size != dims:
            raise DimensionMismatch(index, dims, size)
        frames.append(Frame(index=index, timestamp_s=index / fps, pixels=pixels))
    return FrameSequence(frames=tuple(frames), fps=fps, source_id=source_id)


def write_frame_sequence(
    seq: FrameSequence,
    dir_path: str | Path,
    compress_level: int = 1,
    write_manifest: bool = True,
) -> None:
    """Write a sequence back to disk; inverse of load_frame_sequence."""
    directory = Path(dir_path)
    directory.mkdir(parents=True, exist_ok=True)
    for frame in seq:
        Image.fromarray(np.asarray(frame.pixels)).save(
            directory / FRAME_NAME_FORMAT.format(frame.index),
            compress_level=compress_level,
        )
    if write_manifest:
        manifest = {"source_id": seq.source_id, "fps": seq.fps, "frame_count": len(seq)}
        (directory / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
