"""Aggregation of primitive actions into line-granularity coding steps.

The scan walks the recognized action events in frame order. Cursor/mouse
movement and unchanged frame pairs are skipped. A coding-related action
opens a candidate step: the text lines it affected are located by maximum
vertical overlap between the change region and runs of vertically
continuous lines. Multi-line hits emit an immediate two-frame step; a
single active line starts an aggregation that follows the line across
subsequent coding actions (and across scrolls, by re-matching the line in
the post-scroll frame) until a non-coding action arrives or the line can
no longer be matched. The closed step is typed enter/delete/edit/select
from how the line began and ended.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

from .actions import (
    BRIDGEABLE,
    ActionCategory,
    ActionEvent,
    ActionType,
    category_of,
)
from .changes import ChangeRegion
from .errors import InputError, InvalidSpan, MissingLines
from .frames import FrameSequence
from .textlines import TextLine, match_text_lines

DEFAULT_VO_THRESHOLD = 0.75
DEFAULT_LINE_MATCH_THRESHOLD = 0.95


class StepType(Enum):
    ENTER_TEXT = "enter"
    DELETE_TEXT = "delete"
    EDIT_TEXT = "edit"
    SELECT_TEXT = "select"

    @classmethod
    def from_wire(cls, name: str) -> "StepType":
        try:
            return cls(name)
        except ValueError:
            raise InputError(f"unknown step type {name!r}") from None


@dataclass(frozen=True)
class CodingStep:
    """One extracted step: an inclusive frame interval, a type and the text."""

    source_id: str
    start_frame: int
    end_frame: int
    start_time_s: float
    end_time_s: float
    step_type: StepType
    text: str

    def __post_init__(self):
        if self.end_frame < self.start_frame + 1:
            raise ValueError(
                f"step [{self.start_frame}, {self.end_frame}] spans fewer than two frames"
            )

    @property
    def frame_interval(self) -> tuple[int, int]:
        return (self.start_frame, self.end_frame)


@dataclass(frozen=True)
class ActiveLines:
    """A run of vertically continuous lines best overlapping a change region."""

    ordinals: tuple[int, ...]
    lines: tuple[TextLine, ...]
    overlap_ratio: float


def vertical_overlap(
    region_span: tuple[float, float], lines_span: tuple[float, float]
) -> float:
    """Interval intersection over union of two vertical spans.

    The union is the covering interval when the spans overlap or touch and
    the sum of lengths when they are disjoint, so the result is 1.0 exactly
    for identical spans and 0.0 exactly for disjoint ones.
    """
    (a1, a2), (b1, b2) = region_span, lines_span
    if a1 >= a2 or b1 >= b2:
        raise InvalidSpan(f"degenerate span in {region_span} / {lines_span}")
    inter = min(a2, b2) - max(a1, b1)
    if inter <= 0:
        return 0.0
    union = max(a2, b2) - min(a1, b1)
    return inter / union


def locate_active_lines(
    region: ChangeRegion,
    lines: Sequence[TextLine],
    vo_threshold: float = DEFAULT_VO_THRESHOLD,
) -> ActiveLines | None:
    """Best run of vertically continuous lines for a change region.

    Every contiguous run of the top-to-bottom line list is scored by the
    vertical overlap of its covering span with the region span; the best
    run is returned when its overlap exceeds the threshold. Ties prefer
    the topmost, then the shortest run.
    """
    ordered = sorted(lines, key=lambda l: (l.y1, l.x1))
    best: ActiveLines | None = None
    for i in range(len(ordered)):
        y1 = ordered[i].y1
        y2 = ordered[i].y2
        for j in range(i, len(ordered)):
            y2 = max(y2, ordered[j].y2)
            vo = vertical_overlap(region.y_span, (y1, y2))
            if vo > vo_threshold and (best is None or vo > best.overlap_ratio):
                run = ordered[i:j + 1]
                best = ActiveLines(
                    ordinals=tuple(l.line_ordinal for l in run),
                    lines=tuple(run),
                    overlap_ratio=vo,
                )
    return best


_IMMEDIATE_TYPE = {
    ActionType.ENTER_CHARS: StepType.ENTER_TEXT,
    ActionType.SELECT_CHARS: StepType.SELECT_TEXT,
    ActionType.DELETE_CHARS: StepType.DELETE_TEXT,
}


class _LineTracker:
    """Frame-indexed line lookup with the matching helpers the scan needs."""

    def __init__(self, lines_per_frame, vo_threshold, match_threshold):
        if isinstance(lines_per_frame, Mapping):
            self._lines = dict(lines_per_frame)
        else:
            self._lines = {i: v for i, v in enumerate(lines_per_frame)}
        self.vo_threshold = vo_threshold
        self.match_threshold = match_threshold

    def lines_for(self, frame_index: int) -> list[TextLine]:
        try:
            return list(self._lines[frame_index])
        except KeyError:
            raise MissingLines(frame_index) from None

    def rep_position(self, line: TextLine, frame_index: int) -> int | None:
        """List position of the identical line (same box and text) in a frame."""
        for pos, cand in enumerate(self.lines_for(frame_index)):
            if (cand.x1, cand.y1, cand.x2, cand.y2, cand.text) == (
                line.x1, line.y1, line.x2, line.y2, line.text,
            ):
                return pos
        return None

    def string_match(
        self, line: TextLine, frame_from: int, frame_to: int
    ) -> TextLine | None:
        """The line paired with ``line`` by cross-frame text matching."""
        rep = self.rep_position(line, frame_from)
        if rep is None:
            return None
        lines_from = self.lines_for(frame_from)
        lines_to = self.lines_for(frame_to)
        matching = match_text_lines(lines_from, lines_to, self.match_threshold)
        for a, b, _ in matching.pairs:
            if a == rep:
                return lines_to[b]
        return None

    def carry_forward(
        self, line: TextLine, frame_from: int, frame_to: int
    ) -> TextLine | None:
        """Follow a line into the next frame; None when it vanished.

        Prefers the cross-frame text matching, then the best vertically
        overlapping line above the threshold.
        """
        matched = self.string_match(line, frame_from, frame_to)
        if matched is not None:
            return matched
        best = None
        best_vo = self.vo_threshold
        for cand in self.lines_for(frame_to):
            vo = vertical_overlap(line.y_span, cand.y_span)
            if vo > best_vo:
                best, best_vo = cand, vo
        return best

    def coding_match(
        self, line: TextLine, cand: TextLine, frame_from: int, frame_to: int
    ) -> bool:
        """Does the next coding action's active line continue ``line``?

        Matched when cross-frame text matching pairs the two lines, or when
        their vertical spans overlap above the threshold (large single-line
        edits such as paste or completion).
        """
        if frame_from == frame_to:
            rep = self.rep_position(line, frame_from)
            if rep is not None and rep == self.rep_position(cand, frame_to):
                return True
        else:
            matched = self.string_match(line, frame_from, frame_to)
            if matched is not None and matched == cand:
                return True
        return vertical_overlap(line.y_span, cand.y_span) > self.vo_threshold


def identify_steps(
    frames: FrameSequence,
    events: Sequence[ActionEvent],
    lines_per_frame: Mapping[int, Sequence[TextLine]] | Sequence[Sequence[TextLine]],
    vo_threshold: float = DEFAULT_VO_THRESHOLD,
    line_match_threshold: float = DEFAULT_LINE_MATCH_THRESHOLD,
    popup_bridge: bool = False,
) -> list[CodingStep]:
    """Aggregate recognized action events into ordered coding steps.

    ``events`` must be ordered by frame pair with change regions attached
    to every coding-related event; ``lines_per_frame`` must cover every
    frame an event references (MissingLines otherwise). With
    ``popup_bridge`` enabled, pop-up events behave like scrolls: the active
    line is re-matched across the pop-up transition instead of closing the
    step.
    """
    tracker = _LineTracker(lines_per_frame, vo_threshold, line_match_threshold)
    for prev, nxt in zip(events, events[1:]):
        if nxt.frame_a_index <= prev.frame_a_index:
            raise ValueError("events must be strictly ordered by frame pair")

    steps: list[CodingStep] = []

    def emit(start: int, end: int, step_type: StepType, text: str) -> None:
        steps.append(
            CodingStep(
                source_id=frames.source_id,
                start_frame=start,
                end_frame=end,
                start_time_s=start / frames.fps,
                end_time_s=end / frames.fps,
                step_type=step_type,
                text=text,
            )
        )

    def target_frame(event: ActionEvent) -> int:
        if event.action is ActionType.DELETE_CHARS:
            return event.frame_a_index
        return event.frame_b_index

    def located(event: ActionEvent) -> ActiveLines | None:
        if event.region is None:
            raise ValueError(
                f"coding event at ({event.frame_a_index}, {event.frame_b_index}) "
                "has no change region"
            )
        return locate_active_lines(
            event.region, tracker.lines_for(target_frame(event)), vo_threshold
        )

    i = 0
    n = len(events)
    while i < n:
        opener = events[i]
        if category_of(opener.action) is not ActionCategory.CODING_RELATED:
            i += 1
            continue
        active = located(opener)
        if active is None:
            # erroneously recognized coding action: no active line
            i += 1
            continue

        start_frame = opener.frame_a_index
        if len(active.lines) > 1:
            emit(
                start_frame,
                opener.frame_b_index,
                _IMMEDIATE_TYPE[opener.action],
                "\n".join(l.text for l in active.lines),
            )
            i += 1
            continue

        # Single active line: aggregate continual coding actions on it.
        start_active = locate_active_lines(
            opener.region, tracker.lines_for(start_frame), vo_threshold
        )
        start_text = (
            "\n".join(l.text for l in start_active.lines) if start_active else ""
        )

        cur_line: TextLine | None = active.lines[0]
        cur_frame = target_frame(opener)
        if opener.action is ActionType.DELETE_CHARS:
            cur_line = tracker.carry_forward(cur_line, cur_frame, opener.frame_b_index)
            cur_frame = opener.frame_b_index
        seen_actions = {opener.action}
        last_end = opener.frame_b_index

        j = i + 1
        while cur_line is not None and j < n:
            nxt = events[j]
            cat = category_of(nxt.action)
            if cat is ActionCategory.SKIP:
                j += 1
                continue
            if cat is ActionCategory.NON_CODING:
                bridgeable = nxt.action in BRIDGEABLE or (
                    popup_bridge and nxt.action is ActionType.TRIGGER_OR_LEAVE_POPUP
                )
                if bridgeable:
                    adopted = tracker.string_match(
                        cur_line, nxt.frame_a_index, nxt.frame_b_index
                    )
                    if adopted is not None:
                        cur_line = adopted
                        cur_frame = nxt.frame_b_index
                        j += 1
                        continue
                break
            cand_active = located(nxt)
            if cand_active is None or len(cand_active.lines) != 1:
                break
            cand = cand_active.lines[0]
            if not tracker.coding_match(cur_line, cand, nxt.frame_a_index, target_frame(nxt)):
                break
            cur_line = cand
            cur_frame = target_frame(nxt)
            if nxt.action is ActionType.DELETE_CHARS:
                cur_line = tracker.carry_forward(cur_line, cur_frame, nxt.frame_b_index)
                cur_frame = nxt.frame_b_index
            seen_actions.add(nxt.action)
            last_end = nxt.frame_b_index
            j += 1

        # the affected text is the tracked line as of the step's end frame;
        # a vanished line falls back to its start-frame content
        if cur_line is None:
            step_type = StepType.DELETE_TEXT
            text = start_text
        elif seen_actions == {ActionType.SELECT_CHARS}:
            step_type = StepType.SELECT_TEXT
            text = cur_line.text
        elif not start_text.strip():
            step_type = StepType.ENTER_TEXT
            text = cur_line.text
        else:
            step_type = StepType.EDIT_TEXT
            text = cur_line.text
        emit(start_frame, last_end, step_type, text)
        i = j

    return steps


# steps.jsonl I/O

def write_steps_jsonl(steps: Sequence[CodingStep], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for step in steps:
            fh.write(json.dumps(step_to_record(step)) + "\n")


def step_to_record(step: CodingStep) -> dict:
    return {
        "source_id": step.source_id,
        "start_frame": step.start_frame,
        "end_frame": step.end_frame,
        "start_s": step.start_time_s,
        "end_s": step.end_time_s,
        "type": step.step_type.value,
        "text": step.text,
    }


def step_from_record(record: dict) -> CodingStep:
    try:
        return CodingStep(
            source_id=str(record.get("source_id", "")),
            start_frame=int(record["start_frame"]),
            end_frame=int(record["end_frame"]),
            start_time_s=float(record["start_s"]),
            end_time_s=float(record["end_s"]),
            step_type=StepType.from_wire(record["type"]),
            text=str(record.get("text", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad step record {record!r}: {exc}") from exc


def read_steps_jsonl(path: str | Path) -> list[CodingStep]:
    path = Path(path)
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read steps file {path}: {exc}") from exc
    steps = []
    for lineno, raw in enumerate(raw_lines, start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
        steps.append(step_from_record(record))
    return steps
