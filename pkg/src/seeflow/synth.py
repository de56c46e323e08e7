"""Synthetic screencast generation with exact ground truth.

A session script is an ordered list of editing events, one per frame
transition, applied to a grid of monospace glyph cells: typing and
deleting characters on buffer rows, one-frame line selections (rendered as
inverted cells), viewport scrolling, buffer switches and an opaque pop-up
rectangle. Rendering the script yields the frame PNGs plus three sidecars:
exact word boxes (text.jsonl), scripted action labels (actions.jsonl) and
the ground-truth coding steps (gt.jsonl) obtained by replaying the
recognized events through the step-identification semantics with perfect
perception inputs.
"""

from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .actions import ActionEvent, ActionType, write_actions_sidecar
from .changes import diff_region
from .errors import ParamError, ScriptError
from .evaluation import GroundTruthStep, gt_from_step, write_gt_jsonl
from .frames import FrameSequence, sequence_from_arrays, write_frame_sequence
from .glyphs import GLYPH_H, GLYPH_W, glyph_bitmap
from .steps import identify_steps
from .textlines import TextLine, WordBox, merge_word_boxes, write_text_sidecar

POPUP_FILL = (200, 200, 200)
BACKGROUND = (255, 255, 255)
INK = (0, 0, 0)

SCRIPT_CHARSET = "".join(chr(c) for c in range(0x20, 0x7F))


# scripted events

@dataclass(frozen=True)
class TypeChar:
    line: int
    col: int
    char: str


@dataclass(frozen=True)
class DeleteChar:
    line: int
    col: int


@dataclass(frozen=True)
class SelectLines:
    first: int
    last: int


@dataclass(frozen=True)
class Scroll:
    lines: int


@dataclass(frozen=True)
class SwitchWindow:
    buffer: str


@dataclass(frozen=True)
class Popup:
    show: bool
    rect: tuple[int, int, int, int] | None = None


@dataclass(frozen=True)
class Idle:
    pass


ScriptEvent = Union[TypeChar, DeleteChar, SelectLines, Scroll, SwitchWindow, Popup, Idle]

_ACTION_FOR_EVENT = {
    TypeChar: ActionType.ENTER_CHARS,
    DeleteChar: ActionType.DELETE_CHARS,
    SelectLines: ActionType.SELECT_CHARS,
    Scroll: ActionType.SCROLL_CONTENT,
    SwitchWindow: ActionType.SWITCH_WINDOWS,
    Popup: ActionType.TRIGGER_OR_LEAVE_POPUP,
}


@dataclass(frozen=True)
class SessionScript:
    """Canvas geometry plus one scripted event per frame transition."""

    canvas_w: int
    canvas_h: int
    events: tuple[ScriptEvent, ...]
    cell_w: int = GLYPH_W
    cell_h: int = GLYPH_H

    def __post_init__(self):
        if (self.cell_w, self.cell_h) != (GLYPH_W, GLYPH_H):
            raise ParamError(
                f"cell size must match the built-in font ({GLYPH_W}x{GLYPH_H})"
            )
        if self.canvas_w < 4 * self.cell_w or self.canvas_h < 2 * self.cell_h:
            raise ParamError("canvas too small for the glyph grid")

    @property
    def view_cols(self) -> int:
        return self.canvas_w // self.cell_w

    @property
    def view_rows(self) -> int:
        return self.canvas_h // self.cell_h


def script_to_json_dict(script: SessionScript) -> dict:
    events = []
    for event in script.events:
        if isinstance(event, TypeChar):
            events.append({"type": "type_char", "line": event.line, "col": event.col,
                           "char": event.char})
        elif isinstance(event, DeleteChar):
            events.append({"type": "delete_char", "line": event.line, "col": event.col})
        elif isinstance(event, SelectLines):
            events.append({"type": "select_lines", "first": event.first, "last": event.last})
        elif isinstance(event, Scroll):
            events.append({"type": "scroll", "lines": event.lines})
        elif isinstance(event, SwitchWindow):
            events.append({"type": "switch_window", "buffer": event.buffer})
        elif isinstance(event, Popup):
            record: dict = {"type": "popup", "op": "show" if event.show else "hide"}
            if event.rect is not None:
                record["rect"] = list(event.rect)
            events.append(record)
        elif isinstance(event, Idle):
            events.append({"type": "idle"})
        else:
            raise TypeError(f"unknown event {event!r}")
    return {
        "canvas": {"width": script.canvas_w, "height": script.canvas_h},
        "cell": {"width": script.cell_w, "height": script.cell_h},
        "events": events,
    }


def script_from_json_dict(data: Mapping) -> SessionScript:
    try:
        canvas = data["canvas"]
        cell = data.get("cell", {"width": GLYPH_W, "height": GLYPH_H})
        raw_events = data["events"]
    except (KeyError, TypeError) as exc:
        raise ParamError(f"malformed script object: {exc}") from exc
    events: list[ScriptEvent] = []
    for i, rec in enumerate(raw_events):
        try:
            kind = rec["type"]
            if kind == "type_char":
                events.append(TypeChar(int(rec["line"]), int(rec["col"]), str(rec["char"])))
            elif kind == "delete_char":
                events.append(DeleteChar(int(rec["line"]), int(rec["col"])))
            elif kind == "select_lines":
                events.append(SelectLines(int(rec["first"]), int(rec["last"])))
            elif kind == "scroll":
                events.append(Scroll(int(rec["lines"])))
            elif kind == "switch_window":
                events.append(SwitchWindow(str(rec["buffer"])))
            elif kind == "popup":
                rect = tuple(int(v) for v in rec["rect"]) if rec.get("op") == "show" else None
                events.append(Popup(show=rec.get("op") == "show", rect=rect))
            elif kind == "idle":
                events.append(Idle())
            else:
                raise ScriptError(i, f"unknown event type {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise ScriptError(i, f"malformed event record: {exc}") from exc
    return SessionScript(
        canvas_w=int(canvas["width"]),
        canvas_h=int(canvas["height"]),
        cell_w=int(cell["width"]),
        cell_h=int(cell["height"]),
        events=tuple(events),
    )


def read_script(path: str | Path) -> SessionScript:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParamError(f"cannot read script {path}: {exc}") from exc
    return script_from_json_dict(data)


def write_script(script: SessionScript, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(script_to_json_dict(script), indent=2) + "\n", encoding="utf-8"
    )


# simulation

@dataclass
class _Buffer:
    rows: list[str] = field(default_factory=list)
    scroll: int = 0


@dataclass(frozen=True)
class _View:
    """What is on screen after an event: visible row texts, selection, pop-up."""

    rows: tuple[str, ...]
    selected_rows: frozenset[int]  # visible row indices drawn inverted
    popup: tuple[int, int, int, int] | None


class _Session:
    def __init__(self, script: SessionScript):
        self.script = script
        self.buffers: dict[str, _Buffer] = {"main": _Buffer()}
        self.current = "main"
        self.selection: tuple[int, int] | None = None  # buffer row span
        self.popup: tuple[int, int, int, int] | None = None

    @property
    def buffer(self) -> _Buffer:
        return self.buffers[self.current]

    def _require_visible(self, index: int, line: int) -> None:
        scroll = self.buffer.scroll
        if not (scroll <= line < scroll + self.script.view_rows):
            raise ScriptError(index, f"line {line} is outside the viewport")

    def apply(self, event: ScriptEvent, index: int) -> None:
        script = self.script
        buffer = self.buffer
        # selection renders for exactly one frame; only select_lines re-asserts it
        self.selection = None
        if isinstance(event, TypeChar):
            if len(event.char) != 1 or event.char not in SCRIPT_CHARSET:
                raise ScriptError(index, f"unsupported character {event.char!r}")
            if event.line < 0:
                raise ScriptError(index, f"negative line {event.line}")
            self._require_visible(index, event.line)
            while len(buffer.rows) <= event.line:
                buffer.rows.append("")
            row = buffer.rows[event.line]
            if not (0 <= event.col <= len(row)):
                raise ScriptError(index, f"column {event.col} outside row of length {len(row)}")
            if len(row) + 1 > script.view_cols:
                raise ScriptError(index, f"line {event.line} would overflow the viewport")
            buffer.rows[event.line] = row[:event.col] + event.char + row[event.col:]
        elif isinstance(event, DeleteChar):
            if not (0 <= event.line < len(buffer.rows)):
                raise ScriptError(index, f"no line {event.line} to delete from")
            self._require_visible(index, event.line)
            row = buffer.rows[event.line]
            if not (0 <= event.col < len(row)):
                raise ScriptError(index, f"column {event.col} outside row of length {len(row)}")
            buffer.rows[event.line] = row[:event.col] + row[event.col + 1:]
        elif isinstance(event, SelectLines):
            if not (0 <= event.first <= event.last):
                raise ScriptError(index, f"bad selection span ({event.first}, {event.last})")
            self._require_visible(index, event.first)
            self._require_visible(index, event.last)
            self.selection = (event.first, event.last)
        elif isinstance(event, Scroll):
            if event.lines == 0:
                raise ScriptError(index, "scroll by zero lines")
            target = buffer.scroll + event.lines
            limit = max(0, len(buffer.rows) - 1)
            if not (0 <= target <= limit):
                raise ScriptError(index, f"scroll to offset {target} outside [0, {limit}]")
            buffer.scroll = target
        elif isinstance(event, SwitchWindow):
            if not event.buffer:
                raise ScriptError(index, "empty buffer name")
            self.buffers.setdefault(event.buffer, _Buffer())
            self.current = event.buffer
        elif isinstance(event, Popup):
            if event.show:
                if self.popup is not None:
                    raise ScriptError(index, "pop-up already shown")
                rect = event.rect
                if rect is None:
                    raise ScriptError(index, "pop-up show needs a rect")
                x1, y1, x2, y2 = rect
                if not (0 <= x1 < x2 <= script.canvas_w and 0 <= y1 < y2 <= script.canvas_h):
                    raise ScriptError(index, f"pop-up rect {rect} outside the canvas")
                if (x1 % script.cell_w or x2 % script.cell_w
                        or y1 % script.cell_h or y2 % script.cell_h):
                    raise ScriptError(index, f"pop-up rect {rect} not cell-aligned")
                self.popup = rect
            else:
                if self.popup is None:
                    raise ScriptError(index, "no pop-up to hide")
                self.popup = None
        elif isinstance(event, Idle):
            pass
        else:
            raise ScriptError(index, f"unknown event {event!r}")

    def view(self) -> _View:
        script = self.script
        buffer = self.buffer
        rows = tuple(
            buffer.rows[buffer.scroll + r] if buffer.scroll + r < len(buffer.rows) else ""
            for r in range(script.view_rows)
        )
        selected: set[int] = set()
        if self.selection is not None:
            first, last = self.selection
            for line in range(first, last + 1):
                visible = line - buffer.scroll
                if 0 <= visible < script.view_rows:
                    selected.add(visible)
        return _View(rows=rows, selected_rows=frozenset(selected), popup=self.popup)


def validate_script(script: SessionScript) -> None:
    """Raise ScriptError (naming the event index) on the first invalid event."""
    session = _Session(script)
    for i, event in enumerate(script.events):
        session.apply(event, i)


# rendering and perfect perception

def _render_view(view: _View, script: SessionScript) -> np.ndarray:
    canvas = np.full((script.canvas_h, script.canvas_w, 3), 255, dtype=np.uint8)
    cw, ch = script.cell_w, script.cell_h
    for r, text in enumerate(view.rows):
        if not text:
            continue
        inverted = r in view.selected_rows
        y = r * ch
        for c, char in enumerate(text):
            bitmap = glyph_bitmap(char)
            cell = canvas[y:y + ch, c * cw:(c + 1) * cw]
            if inverted:
                cell[:, :] = INK
                cell[bitmap] = BACKGROUND
            elif char != " ":
                cell[bitmap] = INK
    if view.popup is not None:
        x1, y1, x2, y2 = view.popup
        canvas[y1:y2, x1:x2] = POPUP_FILL
    return canvas


def _view_words(view: _View, script: SessionScript) -> list[WordBox]:
    # Boxes are padded 1 px horizontally beyond the glyph cells (detector
    # style); a single-space gap then stays below the average character
    # width so the line merger joins words of one row.
    cw, ch = script.cell_w, script.cell_h
    popup = view.popup
    words: list[WordBox] = []
    for r, text in enumerate(view.rows):
        y1, y2 = r * ch, (r + 1) * ch

        def occluded(col: int) -> bool:
            if popup is None:
                return False
            px1, py1, px2, py2 = popup
            return px1 <= col * cw and (col + 1) * cw <= px2 and py1 <= y1 and y2 <= py2

        c = 0
        while c < len(text):
            if text[c] == " " or occluded(c):
                c += 1
                continue
            start = c
            chars = []
            while c < len(text) and text[c] != " " and not occluded(c):
                chars.append(text[c])
                c += 1
            words.append(
                WordBox(
                    x1=max(0, start * cw - 1),
                    y1=y1,
                    x2=min(script.canvas_w, c * cw + 1),
                    y2=y2,
                    text="".join(chars),
                )
            )
    return words


@dataclass
class SynthResult:
    """Everything one rendered scenario produced, plus where it was written."""

    out_dir: Path
    frames: FrameSequence
    words_per_frame: dict[int, list[WordBox]]
    lines_per_frame: dict[int, list[TextLine]]
    events: list[ActionEvent]
    sidecar_events: list[ActionEvent]
    ground_truth: list[GroundTruthStep]


def render_session(
    script: SessionScript,
    out_dir: str | Path,
    source_id: str | None = None,
    seed: int = 0,
    noise_amplitude: int = 0,
    fps: float = 1.0,
    compress_level: int = 1,
) -> SynthResult:
    """Render a script to a scenario directory with sidecars and ground truth.

    Frame count is event count + 1. The ground truth is derived by running
    the step-identification semantics over the scripted actions, the exact
    change regions and the exact text lines, so a perception-perfect
    extraction of the same directory reproduces it. ``noise_amplitude``
    adds per-pixel uniform jitter to the written frames only; sidecars and
    ground truth stay exact.
    """
    validate_script(script)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if source_id is None:
        source_id = out.name

    session = _Session(script)
    views = [session.view()]
    for i, event in enumerate(script.events):
        session.apply(event, i)
        views.append(session.view())

    arrays = [_render_view(v, script) for v in views]
    seq = sequence_from_arrays(arrays, fps=fps, source_id=source_id)
    words_per_frame = {i: _view_words(v, script) for i, v in enumerate(views)}
    lines_per_frame = {
        i: merge_word_boxes(words, i) for i, words in words_per_frame.items()
    }

    events: list[ActionEvent] = []
    sidecar_events: list[ActionEvent] = []
    for i, event in enumerate(script.events):
        region = diff_region(seq[i], seq[i + 1])
        if region is None:
            # invisible effect (e.g. trailing space); perception sees idle
            continue
        if isinstance(event, Idle):
            # only the automatic clearing of a one-frame selection gets here
            action = ActionType.OTHER_ACTION
        else:
            action = _ACTION_FOR_EVENT[type(event)]
            sidecar_events.append(ActionEvent(action, i, i + 1))
        events.append(ActionEvent(action, i, i + 1, region))

    gt_steps = [
        gt_from_step(step, provenance="synth")
        for step in identify_steps(seq, events, lines_per_frame)
    ]

    write_seq = seq
    if noise_amplitude > 0:
        rng = np.random.default_rng(seed)
        noisy = [
            np.clip(
                a.astype(np.int16)
                + rng.integers(-noise_amplitude, noise_amplitude + 1, a.shape),
                0, 255,
            ).astype(np.uint8)
            for a in arrays
        ]
        write_seq = sequence_from_arrays(noisy, fps=fps, source_id=source_id)

    write_frame_sequence(write_seq, out, compress_level=compress_level)
    write_text_sidecar(words_per_frame, out / "text.jsonl")
    write_actions_sidecar(sidecar_events, out / "actions.jsonl")
    write_gt_jsonl(gt_steps, out / "gt.jsonl")
    write_script(script, out / "script.json")

    return SynthResult(
        out_dir=out,
        frames=seq,
        words_per_frame=words_per_frame,
        lines_per_frame=lines_per_frame,
        events=events,
        sidecar_events=sidecar_events,
        ground_truth=gt_steps,
    )


# random script generation

DEFAULT_STEP_MIX: dict[str, float] = {
    "enter": 0.365,
    "delete": 0.005,
    "edit": 0.209,
    "select": 0.421,
}


@dataclass(frozen=True)
class RandomScriptParams:
    n_events: int = 60
    canvas_w: int = 256
    canvas_h: int = 192
    step_mix: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_STEP_MIX))
    idle_rate: float = 0.10
    scroll_rate: float = 0.06
    popup_rate: float = 0.0
    switch_rate: float = 0.0
    mid_scroll_rate: float = 0.08
    mid_popup_rate: float = 0.0
    min_line_chars: int = 3
    max_line_chars: int = 12

    def validate(self) -> None:
        if self.n_events < 1:
            raise ParamError("n_events must be >= 1")
        if set(self.step_mix) != {"enter", "delete", "edit", "select"}:
            raise ParamError("step_mix must have exactly enter/delete/edit/select keys")
        if any(p < 0 for p in self.step_mix.values()):
            raise ParamError("step_mix probabilities must be non-negative")
        if abs(sum(self.step_mix.values()) - 1.0) > 1e-9:
            raise ParamError("step_mix probabilities must sum to 1")
        for name in ("idle_rate", "scroll_rate", "popup_rate", "switch_rate",
                     "mid_scroll_rate", "mid_popup_rate"):
            if not 0 <= getattr(self, name) < 1:
                raise ParamError(f"{name} must be in [0, 1)")
        if self.idle_rate + self.scroll_rate + self.popup_rate + self.switch_rate >= 1:
            raise ParamError("interlude rates must sum below 1")
        if not 1 <= self.min_line_chars <= self.max_line_chars:
            raise ParamError("bad line length range")
        cols = self.canvas_w // GLYPH_W
        rows = self.canvas_h // GLYPH_H
        if cols < self.max_line_chars + 1 or rows < 4:
            raise ParamError("canvas too small for the configured line lengths")


_WORD_CHARS = string.ascii_lowercase + string.digits + "_.=(){};"


class _ScriptBuilder:
    """Emits valid events against a mirrored session, one episode at a time."""

    def __init__(self, params: RandomScriptParams, rng: random.Random):
        self.params = params
        self.rng = rng
        self.script_shell = SessionScript(
            canvas_w=params.canvas_w, canvas_h=params.canvas_h, events=()
        )
        self.session = _Session(self.script_shell)
        self.events: list[ScriptEvent] = []
        self.blocked_rows: set[int] = set()  # buffer rows of the last coding episode

    # state helpers

    @property
    def buffer(self) -> _Buffer:
        return self.session.buffer

    def visible_rows(self) -> list[int]:
        scroll = self.buffer.scroll
        return list(range(scroll, scroll + self.script_shell.view_rows))

    def row_text(self, line: int) -> str:
        rows = self.buffer.rows
        return rows[line] if line < len(rows) else ""

    def emit(self, event: ScriptEvent) -> None:
        self.session.apply(event, len(self.events))
        self.events.append(event)

    def unique_line_text(self) -> str:
        rng = self.rng
        existing = set(self.buffer.rows)
        for _ in range(64):
            length = rng.randint(self.params.min_line_chars, self.params.max_line_chars)
            words = []
            remaining = length
            while remaining > 0:
                size = min(remaining, rng.randint(2, 5))
                words.append("".join(rng.choice(_WORD_CHARS) for _ in range(size)))
                remaining -= size + 1
            text = " ".join(words)[:length].rstrip()
            if text and text not in existing:
                return text
        raise ParamError("could not draw a unique line text")

    # episodes

    def idle(self) -> None:
        self.emit(Idle())

    def scroll_interlude(self) -> bool:
        limit = max(0, len(self.buffer.rows) - 1)
        options = [
            k for k in (-3, -2, -1, 1, 2, 3)
            if 0 <= self.buffer.scroll + k <= limit
        ]
        if not options:
            return False
        self.emit(Scroll(self.rng.choice(options)))
        return True

    def popup_interlude(self) -> bool:
        rect = self._popup_rect()
        self.emit(Popup(show=True, rect=rect))
        for _ in range(self.rng.randint(0, 2)):
            self.emit(Idle())
        self.emit(Popup(show=False))
        self.blocked_rows = set()  # pop-up events terminate any open aggregation
        return True

    def _popup_rect(self) -> tuple[int, int, int, int]:
        rng = self.rng
        cols = self.script_shell.view_cols
        rows = self.script_shell.view_rows
        w = rng.randint(4, min(12, cols - 1))
        h = rng.randint(2, min(4, rows - 1))
        c0 = rng.randint(0, cols - w)
        r0 = rng.randint(0, rows - h)
        return (c0 * GLYPH_W, r0 * GLYPH_H, (c0 + w) * GLYPH_W, (r0 + h) * GLYPH_H)

    def switch_interlude(self) -> bool:
        target = "alt" if self.session.current == "main" else "main"
        current_view = self.session.view().rows
        target_buffer = self.session.buffers.get(target, _Buffer())
        target_rows = tuple(
            target_buffer.rows[target_buffer.scroll + r]
            if target_buffer.scroll + r < len(target_buffer.rows) else ""
            for r in range(self.script_shell.view_rows)
        )
        if target_rows == current_view and self.session.selection is None:
            return False  # switch would be invisible
        self.emit(SwitchWindow(target))
        self.blocked_rows = set()
        return True

    def _pick_row(self, want_empty: bool) -> int | None:
        rows = [
            r for r in self.visible_rows()
            if r not in self.blocked_rows
            and (self.row_text(r).strip() == "") == want_empty
        ]
        return self.rng.choice(rows) if rows else None

    def enter_episode(self) -> None:
        row = self._pick_row(want_empty=True)
        if row is None:
            limit = max(0, len(self.buffer.rows) - 1)
            if self.buffer.scroll != limit:
                self.emit(Scroll(limit - self.buffer.scroll))
            row = self._pick_row(want_empty=True)
            if row is None:
                self.idle()
                return
        text = self.unique_line_text()
        mid_scroll_at = None
        if self.rng.random() < self.params.mid_scroll_rate and len(text) >= 4:
            mid_scroll_at = self.rng.randint(2, len(text) - 1)
        mid_popup_at = None
        if self.rng.random() < self.params.mid_popup_rate and len(text) >= 4:
            mid_popup_at = self.rng.randint(2, len(text) - 1)
        for col, char in enumerate(text):
            if col == mid_scroll_at:
                self._mid_scroll(row)
            if col == mid_popup_at:
                self.emit(Popup(show=True, rect=self._popup_rect()))
                self.emit(Popup(show=False))
            self.emit(TypeChar(row, col, char))
        self.blocked_rows = {row}

    def _mid_scroll(self, keep_row: int) -> None:
        limit = max(0, len(self.buffer.rows) - 1)
        view_rows = self.script_shell.view_rows
        options = [
            k for k in (-2, -1, 1, 2)
            if 0 <= self.buffer.scroll + k <= limit
            and self.buffer.scroll + k <= keep_row < self.buffer.scroll + k + view_rows
        ]
        if options:
            self.emit(Scroll(self.rng.choice(options)))

    def edit_episode(self) -> None:
        row = self._pick_row(want_empty=False)
        if row is None:
            self.enter_episode()
            return
        n_ops = self.rng.randint(1, 4)
        for _ in range(n_ops):
            text = self.row_text(row)
            can_grow = len(text) + 1 <= self.script_shell.view_cols - 1
            do_delete = len(text) >= 2 and (not can_grow or self.rng.random() < 0.25)
            for _ in range(32):
                if do_delete:
                    col = self.rng.randrange(len(text))
                    candidate = text[:col] + text[col + 1:]
                    event: ScriptEvent = DeleteChar(row, col)
                else:
                    col = self.rng.randint(0, len(text))
                    char = self.rng.choice(_WORD_CHARS)
                    candidate = text[:col] + char + text[col:]
                    event = TypeChar(row, col, char)
                others = {
                    t for i, t in enumerate(self.buffer.rows) if i != row
                }
                if candidate.strip() and candidate not in others:
                    self.emit(event)
                    break
        self.blocked_rows = {row}

    def delete_episode(self) -> None:
        row = self._pick_row(want_empty=False)
        if row is None:
            self.enter_episode()
            return
        for col in range(len(self.row_text(row)) - 1, -1, -1):
            self.emit(DeleteChar(row, col))
        self.blocked_rows = {row}

    def select_episode(self) -> None:
        nonempty = [
            r for r in self.visible_rows() if self.row_text(r).strip() != ""
        ]
        if not nonempty:
            self.enter_episode()
            return
        span = None
        if self.rng.random() < 0.4:
            # block selection over consecutive nonempty rows
            runs = []
            for r in nonempty:
                if runs and runs[-1][-1] == r - 1:
                    runs[-1].append(r)
                else:
                    runs.append([r])
            long_runs = [run for run in runs if len(run) >= 2]
            if long_runs:
                run = self.rng.choice(long_runs)
                size = self.rng.randint(2, min(3, len(run)))
                start = self.rng.randint(0, len(run) - size)
                span = (run[start], run[start + size - 1])
        if span is None:
            choices = [r for r in nonempty if r not in self.blocked_rows]
            if not choices:
                self.idle()
                return
            row = self.rng.choice(choices)
            span = (row, row)
        self.emit(SelectLines(span[0], span[1]))
        self.idle()  # lets the one-frame selection clear before the next episode
        self.blocked_rows = set()

    def coding_episode(self) -> None:
        kinds, weights = zip(*sorted(self.params.step_mix.items()))
        kind = self.rng.choices(kinds, weights=weights)[0]
        if kind == "enter":
            self.enter_episode()
        elif kind == "edit":
            self.edit_episode()
        elif kind == "delete":
            self.delete_episode()
        else:
            self.select_episode()

    def build(self) -> SessionScript:
        params = self.params
        while len(self.events) < params.n_events:
            draw = self.rng.random()
            if draw < params.idle_rate:
                self.idle()
            elif draw < params.idle_rate + params.scroll_rate:
                if not self.scroll_interlude():
                    self.idle()
            elif draw < params.idle_rate + params.scroll_rate + params.popup_rate:
                self.popup_interlude()
            elif (draw < params.idle_rate + params.scroll_rate + params.popup_rate
                    + params.switch_rate):
                if not self.switch_interlude():
                    self.idle()
            else:
                self.coding_episode()
                # separate consecutive coding episodes so aggregations close
                self.idle()
        return SessionScript(
            canvas_w=params.canvas_w,
            canvas_h=params.canvas_h,
            events=tuple(self.events),
        )


def generate_random_script(params: RandomScriptParams, seed: int) -> SessionScript:
    """Reproducible random editing-session script honoring the step-type mix."""
    params.validate()
    rng = random.Random(seed)
    script = _ScriptBuilder(params, rng).build()
    validate_script(script)
    return script
