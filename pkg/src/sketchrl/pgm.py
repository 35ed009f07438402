"""Canvas import/export: binary PGM (P5) and raw row-major bytes.

Ink pixels are written as 255, blank as 0, maxval 255.  Round-trips are
bit-exact for binary canvases.
"""

import numpy as np

from .errors import ContractViolation


def canvas_to_bytes(canvas):
    """Row-major uint8 bytes: ink -> 255, blank -> 0."""
    return ((np.asarray(canvas) > 0.5).astype(np.uint8) * 255).tobytes()


def canvas_from_bytes(data, m):
    if len(data) != m * m:
        raise ContractViolation(f"expected {m * m} bytes for a {m}x{m} canvas, got {len(data)}")
    arr = np.frombuffer(data, dtype=np.uint8).reshape(m, m)
    return (arr > 127).astype(np.float32)


def write_pgm(canvas, path):
    m = canvas.shape[0]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{m} {m}\n255\n".encode("ascii"))
        fh.write(canvas_to_bytes(canvas))


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    # Header: magic, width, height, maxval tokens, separated by whitespace.
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    if tokens[0] != b"P5":
        raise ContractViolation(f"not a binary PGM file: magic {tokens[0]!r}")
    width, height, maxval = (int(t) for t in tokens[1:])
    if width != height:
        raise ContractViolation(f"canvas PGM must be square, got {width}x{height}")
    if maxval != 255:
        raise ContractViolation(f"expected maxval 255, got {maxval}")
    return canvas_from_bytes(data[pos : pos + width * height], width)
