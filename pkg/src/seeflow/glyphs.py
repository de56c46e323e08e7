"""Built-in 8x16 bitmap font used by the synthesizer and the raster text backend.

Glyph bitmaps are derived deterministically from a hash of the character
code, thinned to roughly 25% ink so that an inverted (selected) cell is
clearly darker than a normal one. The shapes are not legible as letters;
the only requirements are that the char -> bitmap mapping is injective
(also against inverted bitmaps) and stable across platforms, which makes
recognition on clean renders exact by construction.
"""

from __future__ import annotations

import hashlib

import numpy as np

GLYPH_W = 8
GLYPH_H = 16

# Printable ASCII minus space; space renders as a blank cell.
PRINTABLE = "".join(chr(c) for c in range(0x21, 0x7F))

INK_THRESHOLD = 128  # channel mean below this counts as ink


def _bitmap_for(ch: str) -> np.ndarray:
    digest = hashlib.sha256(b"seeflow-glyph:" + ch.encode("ascii")).digest()
    bits = np.unpackbits(np.frombuffer(digest, dtype=np.uint8))
    # AND two independent bit planes -> ~25% ink density
    plane_a = bits[:GLYPH_W * GLYPH_H]
    plane_b = bits[GLYPH_W * GLYPH_H:2 * GLYPH_W * GLYPH_H]
    return (plane_a & plane_b).astype(bool).reshape(GLYPH_H, GLYPH_W)


def _build_table() -> dict[str, np.ndarray]:
    table = {ch: _bitmap_for(ch) for ch in PRINTABLE}
    keys = {}
    blank = np.zeros((GLYPH_H, GLYPH_W), dtype=bool)
    keys[blank.tobytes()] = " "
    keys[(~blank).tobytes()] = "\x00"  # inverted space
    for ch, bmp in table.items():
        if not bmp.any() or bmp.all():
            raise AssertionError(f"degenerate glyph for {ch!r}")
        for key in (bmp.tobytes(), (~bmp).tobytes()):
            if key in keys:
                raise AssertionError(f"glyph collision between {ch!r} and {keys[key]!r}")
            keys[key] = ch
    return table


GLYPHS: dict[str, np.ndarray] = _build_table()

_DECODE: dict[bytes, tuple[str, bool]] = {}
for _ch, _bmp in GLYPHS.items():
    _DECODE[_bmp.tobytes()] = (_ch, False)
    _DECODE[(~_bmp).tobytes()] = (_ch, True)
_DECODE[np.zeros((GLYPH_H, GLYPH_W), dtype=bool).tobytes()] = (" ", False)
_DECODE[np.ones((GLYPH_H, GLYPH_W), dtype=bool).tobytes()] = (" ", True)


def glyph_bitmap(ch: str) -> np.ndarray:
    """Ink mask (GLYPH_H x GLYPH_W bools) for a printable ASCII character."""
    if ch == " ":
        return np.zeros((GLYPH_H, GLYPH_W), dtype=bool)
    try:
        return GLYPHS[ch]
    except KeyError:
        raise KeyError(f"no glyph for character {ch!r}") from None


def decode_ink_mask(ink: np.ndarray) -> tuple[str, bool] | None:
    """Table lookup of a binarized glyph cell; None for non-glyph patterns."""
    return _DECODE.get(ink.tobytes())


def decode_cell(cell: np.ndarray) -> tuple[str, bool] | None:
    """Recover (character, inverted) from one rendered glyph cell.

    ``cell`` is an RGB uint8 array of shape (GLYPH_H, GLYPH_W, 3). Pixels
    are binarized against INK_THRESHOLD first, so per-pixel jitter below
    that margin does not affect the result. Returns None for patterns that
    are not a rendered glyph (e.g. pop-up fill).
    """
    if cell.shape != (GLYPH_H, GLYPH_W, 3):
        raise ValueError(f"cell shape {cell.shape} != ({GLYPH_H}, {GLYPH_W}, 3)")
    ink = cell.mean(axis=2) < INK_THRESHOLD
    return decode_ink_mask(np.ascontiguousarray(ink))
