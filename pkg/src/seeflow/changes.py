"""Pixel diffing between consecutive frames.

The change region is the smallest axis-aligned rectangle containing every
pixel that differs by more than the tolerance in any channel; identical
frames yield no region. Disconnected changes are boxed by one rectangle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .frames import Frame


@dataclass(frozen=True)
class ChangeRegion:
    """Tight bounding box of differing pixels; x2/y2 are exclusive."""

    x1: int
    y1: int
    x2: int
    y2: int
    frame_a_index: int
    frame_b_index: int

    def __post_init__(self):
        if not (0 <= self.x1 < self.x2 and 0 <= self.y1 < self.y2):
            raise ValueError(f"degenerate region {(self.x1, self.y1, self.x2, self.y2)}")
        if self.frame_b_index != self.frame_a_index + 1:
            raise ValueError("change region must span consecutive frames")

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def y_span(self) -> tuple[int, int]:
        return (self.y1, self.y2)


def diff_region(f_a: Frame, f_b: Frame, tolerance: int = 0) -> ChangeRegion | None:
    """Compare two consecutive frames; None when no pixel exceeds tolerance.

    A pixel counts as changed when any channel differs by more than
    ``tolerance``. The result is symmetric in its two frame arguments.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    if f_a.pixels.shape != f_b.pixels.shape:
        raise DimensionMismatch(
            f_b.index, (f_a.width, f_a.height), (f_b.width, f_b.height)
        )
    delta = np.abs(f_a.pixels.astype(np.int16) - f_b.pixels.astype(np.int16))
    changed = (delta > tolerance).any(axis=2)
    if not changed.any():
        return None
    rows = np.flatnonzero(changed.any(axis=1))
    cols = np.flatnonzero(changed.any(axis=0))
    return ChangeRegion(
        x1=int(cols[0]),
        y1=int(rows[0]),
        x2=int(cols[-1]) + 1,
        y2=int(rows[-1]) + 1,
        frame_a_index=f_a.index,
        frame_b_index=f_b.index,
    )
