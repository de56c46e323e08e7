"""Word-box detection/recognition contracts and text-line assembly.

Word boxes come from a pluggable backend (sidecar echo for precomputed
detections, raster grid decoding for synthetic frames). Boxes are merged
into text lines by scanning left-to-right, top-to-bottom and joining a box
into the current line when (1) its horizontal middle falls within the
line's vertical extent and (2) the gap to the line is smaller than the
average character width of the two boxes. Lines are tracked across frames
with an order-preserving matching on longest-common-substring similarity.
"""

from __future__ import annotations

import json
import weakref
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from . import glyphs
from .errors import BoundsError, SidecarFormatError
from .frames import Frame, FrameSequence


@dataclass(frozen=True)
class WordBox:
    """One detected word; text is empty until recognition fills it."""

    x1: int
    y1: int
    x2: int
    y2: int
    text: str = ""

    def __post_init__(self):
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"degenerate word box {(self.x1, self.y1, self.x2, self.y2)}")

    @property
    def char_count(self) -> int:
        return len(self.text)

    def with_text(self, text: str) -> "WordBox":
        return WordBox(self.x1, self.y1, self.x2, self.y2, text)


@dataclass(frozen=True)
class TextLine:
    """A merged line of text with its union bounding box."""

    x1: int
    y1: int
    x2: int
    y2: int
    text: str
    frame_index: int = 0
    line_ordinal: int = 0

    def __post_init__(self):
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"degenerate line box {(self.x1, self.y1, self.x2, self.y2)}")
        if not self.text:
            raise ValueError("text line must not be empty")

    @property
    def y_span(self) -> tuple[int, int]:
        return (self.y1, self.y2)


@dataclass(frozen=True)
class LineMatching:
    """Order-preserving pairs (ordinal_a, ordinal_b, similarity)."""

    pairs: tuple[tuple[int, int, float], ...]

    def ordinal_pairs(self) -> set[tuple[int, int]]:
        return {(a, b) for a, b, _ in self.pairs}

    def match_for_a(self, ordinal_a: int) -> tuple[int, float] | None:
        for a, b, sim in self.pairs:
            if a == ordinal_a:
                return b, sim
        return None


def longest_common_substring_length(s: str, t: str) -> int:
    if not s or not t:
        return 0
    if len(s) < len(t):
        s, t = t, s
    prev = [0] * (len(t) + 1)
    best = 0
    for i in range(1, len(s) + 1):
        cur = [0] * (len(t) + 1)
        si = s[i - 1]
        for j in range(1, len(t) + 1):
            if si == t[j - 1]:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best


def line_similarity(s: str, t: str) -> float:
    """Longest-common-substring length over the longer string's length."""
    longest = max(len(s), len(t))
    if longest == 0:
        return 1.0
    return longest_common_substring_length(s, t) / longest


def _scan_sorted(words: Sequence[WordBox]) -> list[WordBox]:
    return sorted(words, key=lambda w: (w.y1, w.x1, w.y2, w.x2))


def merge_word_boxes(words: Iterable[WordBox], frame_index: int = 0) -> list[TextLine]:
    """Merge recognized word boxes into text lines.

    Scan order is top-to-bottom then left-to-right. A box B2 joins the
    line currently ending at box B1 iff
      1. (B2.y1 + B2.y2) / 2 lies within [B1.y1, B1.y2], and
      2. B2.x1 - B1.x2 < ((B2.x2 - B2.x1) + (B1.x2 - B1.x1)) / num_c,
         where num_c sums the character counts of the two boxes.
    On a merge B1 becomes the union box with concatenated text and summed
    char count; otherwise B2 starts a new line. The result is independent
    of the input ordering. Word texts are joined with single spaces.
    """
    ordered = _scan_sorted(list(words))
    for w in ordered:
        if w.char_count < 1:
            raise ValueError(f"word box at {(w.x1, w.y1)} has no recognized text")
    lines: list[TextLine] = []
    if not ordered:
        return lines

    def close(parts: list[WordBox], box: tuple[int, int, int, int]):
        lines.append(
            TextLine(
                x1=box[0], y1=box[1], x2=box[2], y2=box[3],
                text=" ".join(p.text for p in parts),
                frame_index=frame_index,
                line_ordinal=len(lines),
            )
        )

    parts = [ordered[0]]
    box = (ordered[0].x1, ordered[0].y1, ordered[0].x2, ordered[0].y2)
    chars = ordered[0].char_count
    for b2 in ordered[1:]:
        mid_ok = box[1] <= (b2.y1 + b2.y2) / 2 <= box[3]
        num_c = chars + b2.char_count
        avg_char_w = ((b2.x2 - b2.x1) + (box[2] - box[0])) / num_c
        gap_ok = (b2.x1 - box[2]) < avg_char_w
        if mid_ok and gap_ok:
            parts.append(b2)
            box = (min(box[0], b2.x1), min(box[1], b2.y1),
                   max(box[2], b2.x2), max(box[3], b2.y2))
            chars = num_c
        else:
            close(parts, box)
            parts = [b2]
            box = (b2.x1, b2.y1, b2.x2, b2.y2)
            chars = b2.char_count
    close(parts, box)
    return lines


def match_text_lines(
    lines_a: Sequence[TextLine],
    lines_b: Sequence[TextLine],
    similarity_threshold: float = 0.95,
) -> LineMatching:
    """Order-preserving maximum-cardinality matching between two line lists.

    A pair is admissible when its similarity reaches the threshold. Among
    maximum-cardinality matchings the total similarity is maximized; any
    remaining tie prefers earlier ordinals on both sides.
    """
    n, m = len(lines_a), len(lines_b)
    sims: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(m):
            sim = line_similarity(lines_a[i].text, lines_b[j].text)
            if sim >= similarity_threshold:
                sims[(i, j)] = sim

    # dp[i][j]: best (count, total_sim, pairs) for suffixes a[i:], b[j:];
    # computed backwards so pair lists can be compared lexicographically.
    empty: tuple[tuple[int, int, float], ...] = ()
    dp: list[list[tuple[int, float, tuple]]] = [
        [(0, 0.0, empty)] * (m + 1) for _ in range(n + 2)
    ]
    for i in range(n - 1, -1, -1):
        row = dp[i]
        below = dp[i + 1]
        for j in range(m - 1, -1, -1):
            best = _better(below[j], row[j + 1])
            sim = sims.get((i, j))
            if sim is not None:
                count, total, pairs = below[j + 1]
                cand = (count + 1, total + sim, ((i, j, sim),) + pairs)
                best = _better(best, cand)
            row[j] = best
    return LineMatching(pairs=dp[0][0][2])


def _better(x: tuple[int, float, tuple], y: tuple[int, float, tuple]):
    if x[0] != y[0]:
        return x if x[0] > y[0] else y
    if x[1] != y[1]:
        return x if x[1] > y[1] else y
    xk = tuple(p[:2] for p in x[2])
    yk = tuple(p[:2] for p in y[2])
    return x if xk <= yk else y


class TextBackend(Protocol):
    """Word detection and character recognition for one frame source."""

    def detect_words(self, frame: Frame) -> list[WordBox]:
        ...

    def recognize_text(self, frame: Frame, box: WordBox) -> str:
        ...


def _check_bounds(frame: Frame, box: WordBox) -> None:
    if box.x1 < 0 or box.y1 < 0 or box.x2 > frame.width or box.y2 > frame.height:
        raise BoundsError(
            f"box {(box.x1, box.y1, box.x2, box.y2)} outside frame "
            f"{frame.width}x{frame.height}"
        )


class SidecarTextBackend:
    """Echoes word boxes and texts recorded in a text.jsonl sidecar."""

    def __init__(self, sidecar_path: str | Path):
        self.words_by_frame = read_text_sidecar(sidecar_path)

    def detect_words(self, frame: Frame) -> list[WordBox]:
        words = self.words_by_frame.get(frame.index, [])
        return [w.with_text("") for w in words]

    def recognize_text(self, frame: Frame, box: WordBox) -> str:
        _check_bounds(frame, box)
        hits = [
            w for w in self.words_by_frame.get(frame.index, [])
            if w.x1 >= box.x1 and w.y1 >= box.y1 and w.x2 <= box.x2 and w.y2 <= box.y2
        ]
        hits.sort(key=lambda w: (w.y1, w.x1))
        rows: list[list[str]] = []
        row_y1 = None
        for w in hits:
            if row_y1 is None or w.y1 != row_y1:
                rows.append([])
                row_y1 = w.y1
            rows[-1].append(w.text)
        return "\n".join(" ".join(row) for row in rows)


class RasterTextBackend:
    """Decodes the monospace glyph grid rendered by the synthesizer.

    Assumes dark-on-light text laid out on a fixed cell grid anchored at
    ``origin``; selection-inverted cells decode through the inverted glyph
    table. This is a controlled-input test backend, not a general OCR.
    """

    def __init__(
        self,
        cell_w: int = glyphs.GLYPH_W,
        cell_h: int = glyphs.GLYPH_H,
        origin: tuple[int, int] = (0, 0),
    ):
        if (cell_w, cell_h) != (glyphs.GLYPH_W, glyphs.GLYPH_H):
            raise ValueError("raster backend supports only the built-in glyph cell size")
        self.cell_w = cell_w
        self.cell_h = cell_h
        self.origin = origin
        self._grid_cache: "weakref.WeakKeyDictionary[Frame, list[str]]" = (
            weakref.WeakKeyDictionary()
        )

    def _decode_grid(self, frame: Frame) -> list[str]:
        cached = self._grid_cache.get(frame)
        if cached is not None:
            return cached
        grid = self._decode_grid_uncached(frame)
        self._grid_cache[frame] = grid
        return grid

    def _decode_grid_uncached(self, frame: Frame) -> list[str]:
        ox, oy = self.origin
        rows = (frame.height - oy) // self.cell_h
        cols = (frame.width - ox) // self.cell_w
        # binarize the whole frame once; cells then decode by table lookup
        ink = frame.pixels.mean(axis=2) < glyphs.INK_THRESHOLD
        text_rows = []
        for r in range(rows):
            chars = []
            y = oy + r * self.cell_h
            for c in range(cols):
                x = ox + c * self.cell_w
                cell = np.ascontiguousarray(ink[y:y + self.cell_h, x:x + self.cell_w])
                decoded = glyphs.decode_ink_mask(cell)
                chars.append(decoded[0] if decoded else " ")
            text_rows.append("".join(chars))
        return text_rows

    def detect_words(self, frame: Frame) -> list[WordBox]:
        # boxes padded 1 px horizontally, mirroring the synthesizer sidecar
        ox, oy = self.origin
        boxes = []
        for r, row in enumerate(self._decode_grid(frame)):
            c = 0
            while c < len(row):
                if row[c] == " ":
                    c += 1
                    continue
                start = c
                while c < len(row) and row[c] != " ":
                    c += 1
                boxes.append(
                    WordBox(
                        x1=max(0, ox + start * self.cell_w - 1),
                        y1=oy + r * self.cell_h,
                        x2=min(frame.width, ox + c * self.cell_w + 1),
                        y2=oy + (r + 1) * self.cell_h,
                    )
                )
        return boxes

    def _cell_span(self, px1: int, px2: int, origin: int, size: int) -> tuple[int, int]:
        # snap padded pixel coordinates to the nearest cell boundaries
        lo = (px1 - origin + size // 2) // size
        hi = (px2 - origin + size // 2) // size
        return lo, hi

    def recognize_text(self, frame: Frame, box: WordBox) -> str:
        _check_bounds(frame, box)
        ox, oy = self.origin
        c1, c2 = self._cell_span(box.x1, box.x2, ox, self.cell_w)
        r1, r2 = self._cell_span(box.y1, box.y2, oy, self.cell_h)
        grid = self._decode_grid(frame)
        rows = [grid[r][c1:c2].rstrip() for r in range(max(0, r1), min(r2, len(grid)))]
        return "\n".join(rows).strip("\n")


def extract_words(frame: Frame, backend: TextBackend) -> list[WordBox]:
    """Detect and recognize words on one frame, dropping empty recognitions."""
    words = []
    for box in backend.detect_words(frame):
        text = backend.recognize_text(frame, box)
        if text:
            words.append(box.with_text(text))
    return words


def extract_lines(seq: FrameSequence, backend: TextBackend) -> dict[int, list[TextLine]]:
    """Per-frame merged text lines for a whole sequence."""
    return {
        frame.index: merge_word_boxes(extract_words(frame, backend), frame.index)
        for frame in seq
    }


# text.jsonl sidecar I/O

def read_text_sidecar(path: str | Path) -> dict[int, list[WordBox]]:
    result: dict[int, list[WordBox]] = {}
    path = Path(path)
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SidecarFormatError(f"cannot read text sidecar {path}: {exc}") from exc
    for lineno, raw in enumerate(raw_lines, start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
            frame = int(record["frame"])
            words = [
                WordBox(
                    x1=int(w["x1"]), y1=int(w["y1"]),
                    x2=int(w["x2"]), y2=int(w["y2"]),
                    text=str(w["text"]),
                )
                for w in record["words"]
            ]
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise SidecarFormatError(f"{path}:{lineno}: {exc}") from exc
        if frame in result:
            raise SidecarFormatError(f"{path}:{lineno}: duplicate record for frame {frame}")
        result[frame] = words
    return result


def write_text_sidecar(words_by_frame: dict[int, list[WordBox]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame in sorted(words_by_frame):
            record = {
                "frame": frame,
                "words": [
                    {"x1": w.x1, "y1": w.y1, "x2": w.x2, "y2": w.y2, "text": w.text}
                    for w in words_by_frame[frame]
                ],
            }
            fh.write(json.dumps(record) + "\n")
