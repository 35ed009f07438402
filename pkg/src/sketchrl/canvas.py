"""Canvas array helpers and the stroke rasterizer.

Canvases are M x M float32 arrays indexed [row, col] = [y, x] holding binary
ink values: 1.0 = ink, 0.0 = blank.
"""

import numpy as np

from .errors import ContractViolation

DEFAULT_SIZE = 84


def blank_canvas(m=DEFAULT_SIZE):
    return np.zeros((m, m), dtype=np.float32)


def as_canvas(pixels, m=None):
    """Validate an array as a binary canvas, returning a float32 copy-free view."""
    arr = np.asarray(pixels, dtype=np.float32)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractViolation(f"canvas must be square 2-D, got shape {arr.shape}")
    if m is not None and arr.shape[0] != m:
        raise ContractViolation(f"canvas size {arr.shape[0]} != expected {m}")
    if not np.isin(arr, (0.0, 1.0)).all():
        raise ContractViolation("canvas pixels must be binary 0/1")
    return arr


def bresenham_points(x0, y0, x1, y1):
    """Integer cells on the line segment from (x0, y0) to (x1, y1), inclusive.

    The endpoint pair is canonicalized (lexicographically smaller (x, y)
    first) before walking, so the returned pixel set is independent of the
    direction the segment is given in.
    """
    if (x1, y1) < (x0, y0):
        x0, y0, x1, y1 = x1, y1, x0, y0
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    points = []
    x, y = x0, y0
    while True:
        points.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x += sx
        if e2 < dx:
            err += dx
            y += sy
    return points


def rasterize_segment(canvas, frm, to):
    """Set every cell on the Bresenham line from `frm` to `to` to ink.

    Mutates `canvas` in place and returns it.  Endpoints are (x, y) cell
    pairs and must be inside the canvas.
    """
    m = canvas.shape[0]
    for x, y in (frm, to):
        if not (0 <= x < m and 0 <= y < m):
            raise ContractViolation(f"segment endpoint ({x}, {y}) outside {m}x{m} canvas")
    for x, y in bresenham_points(frm[0], frm[1], to[0], to[1]):
        canvas[y, x] = 1.0
    return canvas
