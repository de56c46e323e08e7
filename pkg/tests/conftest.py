import numpy as np
import pytest

from seeflow.frames import Frame, FrameSequence, sequence_from_arrays
from seeflow.textlines import TextLine, WordBox


def make_frame(index: int, pixels: np.ndarray, fps: float = 1.0) -> Frame:
    return Frame(index=index, timestamp_s=index / fps, pixels=np.ascontiguousarray(pixels, dtype=np.uint8))


def blank(height: int = 48, width: int = 64, value: int = 255) -> np.ndarray:
    return np.full((height, width, 3), value, dtype=np.uint8)


def make_sequence(arrays, fps: float = 1.0, source_id: str = "test") -> FrameSequence:
    return sequence_from_arrays(arrays, fps=fps, source_id=source_id)


def line(text: str, row: int, ordinal: int, frame: int = 0,
         x1: int = 0, pitch: int = 16, char_w: int = 8) -> TextLine:
    """Text line on a 16px-pitch row grid, sized like the glyph cells."""
    return TextLine(
        x1=x1,
        y1=row * pitch,
        x2=x1 + max(1, len(text)) * char_w,
        y2=(row + 1) * pitch,
        text=text,
        frame_index=frame,
        line_ordinal=ordinal,
    )


def word(x1, y1, x2, y2, text) -> WordBox:
    return WordBox(x1=x1, y1=y1, x2=x2, y2=y2, text=text)


@pytest.fixture
def rng():
    import random

    return random.Random(20240801)
