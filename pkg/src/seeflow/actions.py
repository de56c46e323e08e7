"""Primitive HCI action taxonomy and recognizer backends.

Ten action types partition into three handling categories: cursor/mouse
movement is skipped outright, enter/delete/select-chars drive coding-step
aggregation, and the remaining types are non-coding (with scroll-content
additionally bridgeable during aggregation). Recognition is a pluggable
backend: precomputed labels from a sidecar file, or pixel/text heuristics
sufficient for the controlled frames the synthesizer produces.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .changes import ChangeRegion
from .errors import DuplicateEvent, SidecarFormatError, UnknownAction
from .frames import Frame
from .textlines import TextLine, match_text_lines


class ActionType(Enum):
    MOVE_CURSOR = "move_cursor"
    MOVE_MOUSE_EDITABLE = "move_mouse_editable"
    MOVE_MOUSE_NON_EDITABLE = "move_mouse_non_editable"
    ENTER_CHARS = "enter_chars"
    DELETE_CHARS = "delete_chars"
    SELECT_CHARS = "select_chars"
    SCROLL_CONTENT = "scroll_content"
    TRIGGER_OR_LEAVE_POPUP = "trigger_or_leave_popup"
    SWITCH_WINDOWS = "switch_windows"
    OTHER_ACTION = "other_action"

    @classmethod
    def from_wire(cls, name: str) -> "ActionType":
        try:
            return cls(name)
        except ValueError:
            raise UnknownAction(name) from None


class ActionCategory(Enum):
    SKIP = "skip"
    CODING_RELATED = "coding_related"
    NON_CODING = "non_coding"


_CATEGORY = {
    ActionType.MOVE_CURSOR: ActionCategory.SKIP,
    ActionType.MOVE_MOUSE_EDITABLE: ActionCategory.SKIP,
    ActionType.MOVE_MOUSE_NON_EDITABLE: ActionCategory.SKIP,
    ActionType.ENTER_CHARS: ActionCategory.CODING_RELATED,
    ActionType.DELETE_CHARS: ActionCategory.CODING_RELATED,
    ActionType.SELECT_CHARS: ActionCategory.CODING_RELATED,
    ActionType.SCROLL_CONTENT: ActionCategory.NON_CODING,
    ActionType.TRIGGER_OR_LEAVE_POPUP: ActionCategory.NON_CODING,
    ActionType.SWITCH_WINDOWS: ActionCategory.NON_CODING,
    ActionType.OTHER_ACTION: ActionCategory.NON_CODING,
}

#: Non-coding actions that may bridge an ongoing aggregation.
BRIDGEABLE = frozenset({ActionType.SCROLL_CONTENT})


def category_of(action: ActionType) -> ActionCategory:
    """Total mapping from action type to its handling category."""
    return _CATEGORY[action]


@dataclass(frozen=True)
class ActionEvent:
    """One classified action spanning a consecutive frame pair.

    The change region is None for events decoded from a sidecar (the file
    carries labels only); the pipeline attaches regions from diff_region.
    """

    action: ActionType
    frame_a_index: int
    frame_b_index: int
    region: ChangeRegion | None = None

    def __post_init__(self):
        if self.frame_b_index != self.frame_a_index + 1:
            raise ValueError("action event must span consecutive frames")
        if self.region is not None and (
            self.region.frame_a_index != self.frame_a_index
            or self.region.frame_b_index != self.frame_b_index
        ):
            raise ValueError("region frame indices do not match the event")


def load_precomputed_actions(sidecar_path: str | Path) -> list[ActionEvent]:
    """Decode an actions.jsonl sidecar into events ordered by frame pair."""
    path = Path(sidecar_path)
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SidecarFormatError(f"cannot read action sidecar {path}: {exc}") from exc
    events = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(raw_lines, start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
            frame_a = int(record["frame_a"])
            frame_b = int(record["frame_b"])
            name = str(record["action"])
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise SidecarFormatError(f"{path}:{lineno}: {exc}") from exc
        if frame_b != frame_a + 1:
            raise SidecarFormatError(
                f"{path}:{lineno}: pair ({frame_a}, {frame_b}) is not consecutive"
            )
        if (frame_a, frame_b) in seen:
            raise DuplicateEvent(frame_a, frame_b)
        seen.add((frame_a, frame_b))
        events.append(ActionEvent(ActionType.from_wire(name), frame_a, frame_b))
    events.sort(key=lambda e: e.frame_a_index)
    return events


def write_actions_sidecar(events: Sequence[ActionEvent], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in sorted(events, key=lambda e: e.frame_a_index):
            fh.write(
                json.dumps(
                    {
                        "frame_a": event.frame_a_index,
                        "frame_b": event.frame_b_index,
                        "action": event.action.value,
                    }
                )
                + "\n"
            )


class ActionBackend(Protocol):
    def recognize(
        self,
        f_a: Frame,
        f_b: Frame,
        region: ChangeRegion,
        lines_a: Sequence[TextLine],
        lines_b: Sequence[TextLine],
    ) -> ActionType:
        ...


class SidecarActionBackend:
    """Echoes precomputed labels; unknown frame pairs fall back to other-action."""

    def __init__(self, sidecar_path: str | Path):
        self._by_pair: dict[tuple[int, int], ActionType] = {
            (e.frame_a_index, e.frame_b_index): e.action
            for e in load_precomputed_actions(sidecar_path)
        }

    def recognize(self, f_a, f_b, region, lines_a, lines_b) -> ActionType:
        return self._by_pair.get((f_a.index, f_b.index), ActionType.OTHER_ACTION)


class HeuristicActionBackend:
    """Rule-based recognition for controlled (synthesizer-style) frames.

    Rules, in order:
      scroll   - text lines pair up exactly under one uniform nonzero
                 vertical shift that is a whole number of line heights
      switch   - the change region covers more than ``switch_area_fraction``
                 of the frame and no line text survives the transition
      popup    - the region is one uniform non-background color in exactly
                 one of the two frames (appearing = trigger, going = leave)
      select   - no line text changed, and some line's pixels flipped
                 foreground/background with the dark side in the new frame
      enter /  - exactly one visual row's text changed and the shorter text
      delete     is a subsequence of the longer
    Anything else is other-action.
    """

    def __init__(
        self,
        switch_area_fraction: float = 0.9,
        background: tuple[int, int, int] = (255, 255, 255),
        pixel_tolerance: int = 0,
    ):
        self.switch_area_fraction = switch_area_fraction
        self.background = np.array(background, dtype=np.int16)
        self.pixel_tolerance = pixel_tolerance

    def recognize(self, f_a, f_b, region, lines_a, lines_b) -> ActionType:
        if self._is_scroll(lines_a, lines_b):
            return ActionType.SCROLL_CONTENT
        if self._is_switch(f_a, region, lines_a, lines_b):
            return ActionType.SWITCH_WINDOWS
        popup = self._popup_side(f_a, f_b, region)
        if popup is not None:
            return ActionType.TRIGGER_OR_LEAVE_POPUP
        rows_a = _rows_by_span(lines_a)
        rows_b = _rows_by_span(lines_b)
        changed = [
            key
            for key in set(rows_a) | set(rows_b)
            if rows_a.get(key, "") != rows_b.get(key, "")
        ]
        if not changed and self._selection_appeared(f_a, f_b, region, lines_b):
            return ActionType.SELECT_CHARS
        if len(changed) == 1:
            old = rows_a.get(changed[0], "")
            new = rows_b.get(changed[0], "")
            if len(new) > len(old) and _is_subsequence(old, new):
                return ActionType.ENTER_CHARS
            if len(old) > len(new) and _is_subsequence(new, old):
                return ActionType.DELETE_CHARS
        return ActionType.OTHER_ACTION

    def _is_scroll(self, lines_a, lines_b) -> bool:
        if not lines_a or not lines_b:
            return False
        pairs = match_text_lines(lines_a, lines_b, similarity_threshold=1.0).pairs
        if not pairs or 2 * len(pairs) <= min(len(lines_a), len(lines_b)):
            return False
        shifts = {lines_b[j].y1 - lines_a[i].y1 for i, j, _ in pairs}
        if len(shifts) != 1:
            return False
        shift = shifts.pop()
        heights = Counter(l.y2 - l.y1 for l in lines_a)
        pitch = heights.most_common(1)[0][0]
        return shift != 0 and pitch > 0 and shift % pitch == 0

    def _is_switch(self, f_a, region, lines_a, lines_b) -> bool:
        if region.area <= self.switch_area_fraction * f_a.width * f_a.height:
            return False
        texts_a = {l.text for l in lines_a}
        texts_b = {l.text for l in lines_b}
        return bool(texts_a or texts_b) and texts_a.isdisjoint(texts_b)

    def _popup_side(self, f_a, f_b, region) -> str | None:
        for side, frame in (("b", f_b), ("a", f_a)):
            crop = frame.pixels[region.y1:region.y2, region.x1:region.x2]
            flat = crop.reshape(-1, 3).astype(np.int16)
            spread = flat.max(axis=0) - flat.min(axis=0)
            if (spread <= 2 * self.pixel_tolerance).all():
                color = flat[0]
                if (np.abs(color - self.background) > self.pixel_tolerance).any():
                    return side
        return None

    def _selection_appeared(self, f_a, f_b, region, lines_b) -> bool:
        # check the part of each line inside the region (line boxes carry a
        # little detector padding outside the flipped pixels)
        tol = self.pixel_tolerance
        for line in lines_b:
            x1, x2 = max(line.x1, region.x1), min(line.x2, region.x2)
            y1, y2 = max(line.y1, region.y1), min(line.y2, region.y2)
            if x1 >= x2 or y1 >= y2:
                continue
            crop_a = f_a.pixels[y1:y2, x1:x2].astype(np.int16)
            crop_b = f_b.pixels[y1:y2, x1:x2].astype(np.int16)
            if (np.abs(crop_b - (255 - crop_a)) <= 2 * tol).all():
                dark_fraction = float((crop_b.mean(axis=2) < 128).mean())
                if dark_fraction > 0.5:
                    return True
        return False


def _rows_by_span(lines: Sequence[TextLine]) -> dict[tuple[int, int], str]:
    """Full visual-row text keyed by vertical span, left-to-right."""
    rows: dict[tuple[int, int], list[TextLine]] = {}
    for line in lines:
        rows.setdefault(line.y_span, []).append(line)
    return {
        span: " ".join(l.text for l in sorted(group, key=lambda l: l.x1))
        for span, group in rows.items()
    }


def _is_subsequence(short: str, long: str) -> bool:
    it = iter(long)
    return all(ch in it for ch in short)


def recognize_action(
    f_a: Frame,
    f_b: Frame,
    region: ChangeRegion,
    lines_a: Sequence[TextLine],
    lines_b: Sequence[TextLine],
    backend: ActionBackend,
) -> ActionType:
    """Classify the action behind one change region using the given backend."""
    return backend.recognize(f_a, f_b, region, lines_a, lines_b)
