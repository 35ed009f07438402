"""Shared fixtures: synthetic sketch data standing in for the real corpus.

No drawing data ships with the repository, so tests synthesize parametric
stroke polylines per category (a triangle is three jittered vertices, a sun
is a polygon ring plus rays, and so on). The shapes only need to be
category-consistent and structurally valid, not artful.
"""

import math

import numpy as np
import pytest

from sketchrl.quickdraw import Dataset, SketchRecord, ingest

ALL_CATEGORIES = (
    "book", "hammer", "chair", "fan", "mountain", "flower", "bus", "whale",
    "wine bottle", "dog", "triangle", "sun", "mona lisa",
)


def _jitter(rng, pts, amount=6):
    out = []
    for x, y in pts:
        out.append(
            (
                float(min(255, max(0, x + rng.integers(-amount, amount + 1)))),
                float(min(255, max(0, y + rng.integers(-amount, amount + 1)))),
            )
        )
    return out


def _poly(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return (xs, ys)


def _ring(cx, cy, r, n, phase=0.0):
    return [
        (cx + r * math.cos(phase + 2 * math.pi * i / n), cy + r * math.sin(phase + 2 * math.pi * i / n))
        for i in range(n + 1)
    ]


def synth_strokes(category, rng):
    """Stroke polylines (0..255 coords) that loosely evoke the category."""
    if category == "triangle":
        pts = _jitter(rng, [(40, 200), (128, 40), (216, 200), (40, 200)])
        return [_poly(pts)]
    if category == "sun":
        ring = _jitter(rng, _ring(128, 128, 60, 12), 3)
        rays = []
        for i in range(6):
            a = 2 * math.pi * i / 6
            rays.append(
                _poly(
                    _jitter(
                        rng,
                        [
                            (128 + 70 * math.cos(a), 128 + 70 * math.sin(a)),
                            (128 + 110 * math.cos(a), 128 + 110 * math.sin(a)),
                        ],
                        3,
                    )
                )
            )
        return [_poly(ring)] + rays
    if category == "book":
        spine = _jitter(rng, [(60, 40), (60, 216), (196, 216), (196, 40), (60, 40)])
        crease = _jitter(rng, [(128, 40), (128, 216)])
        return [_poly(spine), _poly(crease)]
    if category == "hammer":
        handle = _jitter(rng, [(60, 220), (170, 70)])
        head = _jitter(rng, [(140, 40), (220, 110)])
        return [_poly(handle), _poly(head)]
    if category == "chair":
        back = _jitter(rng, [(80, 40), (80, 200)])
        seat = _jitter(rng, [(80, 130), (180, 130)])
        legs = _jitter(rng, [(180, 130), (180, 210)])
        return [_poly(back), _poly(seat), _poly(legs)]
    if category == "fan":
        blades = []
        for i in range(4):
            a = math.pi * i / 4
            blades.append(
                _poly(_jitter(rng, [(128, 128), (128 + 90 * math.cos(a), 128 - 90 * math.sin(a))], 4))
            )
        return blades
    if category == "mountain":
        pts = _jitter(rng, [(20, 210), (90, 80), (140, 160), (190, 50), (240, 210)])
        return [_poly(pts)]
    if category == "flower":
        stem = _jitter(rng, [(128, 240), (128, 140)])
        petals = _jitter(rng, _ring(128, 100, 35, 8), 4)
        return [_poly(stem), _poly(petals)]
    if category == "bus":
        body = _jitter(rng, [(30, 90), (30, 180), (226, 180), (226, 90), (30, 90)])
        window = _jitter(rng, [(60, 110), (110, 110), (110, 150), (60, 150), (60, 110)])
        return [_poly(body), _poly(window)]
    if category == "whale":
        back = _jitter(rng, _ring(128, 170, 80, 8)[:6], 4)
        tail = _jitter(rng, [(200, 150), (235, 120), (235, 180), (200, 150)])
        return [_poly(back), _poly(tail)]
    if category == "wine bottle":
        pts = _jitter(rng, [(110, 40), (110, 90), (95, 120), (95, 220), (160, 220), (160, 120), (145, 90), (145, 40)])
        return [_poly(pts)]
    if category == "dog":
        body = _jitter(rng, _ring(130, 160, 55, 7), 4)
        head = _jitter(rng, _ring(200, 110, 28, 6), 3)
        return [_poly(body), _poly(head)]
    if category == "mona lisa":
        face = _jitter(rng, _ring(128, 110, 45, 9), 3)
        frame = _jitter(rng, [(40, 30), (40, 226), (216, 226), (216, 30), (40, 30)])
        smile = _jitter(rng, [(105, 140), (128, 152), (151, 140)])
        return [_poly(face), _poly(frame), _poly(smile)]
    raise ValueError(f"no synthetic generator for {category!r}")


def make_record(category, rng):
    strokes = synth_strokes(category, rng)
    return SketchRecord(category=category, strokes=strokes, recognized=True)


def write_category_ndjson(path, category, count, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    with open(path, "w", encoding="utf-8") as fh:
        for _ in range(count):
            fh.write(make_record(category, rng).to_json_line() + "\n")
    return path


@pytest.fixture(scope="session")
def raw_sketch_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("raw_ndjson")
    for i, category in enumerate(ALL_CATEGORIES):
        write_category_ndjson(root / f"{category.replace(' ', '_')}.ndjson", category, 30, seed=1000 + i)
    return root


@pytest.fixture(scope="session")
def synth_dataset(raw_sketch_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("dataset")
    manifest = ingest(str(raw_sketch_dir), list(ALL_CATEGORIES), train_size=24, seed=7, out_dir=str(out))
    return Dataset(manifest)


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.Philox(1234))
