"""Quick, Draw! simplified-format ingestion.

Input files are newline-delimited JSON, one drawing per line, with fields
"word", "recognized", and "drawing" (a list of strokes, each a pair of
equal-length x/y coordinate lists with values in 0..255).  Gzip-compressed
files are accepted transparently.
"""

import gzip
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .canvas import blank_canvas, rasterize_segment
from .errors import ConfigurationError, SketchFormatError, SketchParseError

SOURCE_MAX = 255  # simplified-format coordinate bound

# Category roster used in the experiments: eight categories are trained on,
# five are held out entirely for testing.
TRAIN_CATEGORIES = ("book", "hammer", "chair", "fan", "mountain", "flower", "bus", "whale")
TEST_ONLY_CATEGORIES = ("wine bottle", "dog", "triangle", "sun", "mona lisa")


@dataclass
class SketchRecord:
    """One parsed drawing: category label plus stroke polylines."""

    category: str
    strokes: list  # list of (x_list, y_list) pairs
    recognized: bool

    @property
    def stroke_count(self):
        return len(self.strokes)

    @property
    def point_count(self):
        return sum(len(xs) for xs, _ in self.strokes)

    def to_json_line(self):
        """Lossless re-serialization of the parsed fields."""
        drawing = [[list(xs), list(ys)] for xs, ys in self.strokes]
        return json.dumps(
            {"word": self.category, "recognized": self.recognized, "drawing": drawing},
            separators=(",", ":"),
        )


@dataclass(frozen=True)
class ComplexityMetrics:
    stroke_count: int
    point_count: int
    stroke_velocity: float


@dataclass
class DatasetSplit:
    train: list
    test: list
    seed: int


def parse_ndjson_line(line, line_number=None):
    """Parse one simplified-format JSON line into a SketchRecord."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SketchParseError(f"malformed JSON: {exc}", line_number) from exc
    if not isinstance(obj, dict):
        raise SketchParseError("line is not a JSON object", line_number)
    for field in ("word", "recognized", "drawing"):
        if field not in obj:
            raise SketchFormatError(f"missing field {field!r}", line_number)
    if not isinstance(obj["word"], str):
        raise SketchFormatError(f"field 'word' must be a string, got {type(obj['word']).__name__}", line_number)
    drawing = obj["drawing"]
    if not isinstance(drawing, list) or not drawing:
        raise SketchFormatError("drawing must be a non-empty stroke list", line_number)
    strokes = []
    for i, stroke in enumerate(drawing):
        if not (isinstance(stroke, list) and len(stroke) == 2):
            raise SketchFormatError(f"stroke {i} is not an [x[], y[]] pair", line_number)
        xs, ys = stroke
        if len(xs) != len(ys):
            raise SketchFormatError(f"stroke {i} has ragged x/y lists ({len(xs)} vs {len(ys)})", line_number)
        if len(xs) < 1:
            raise SketchFormatError(f"stroke {i} is empty", line_number)
        for coords in (xs, ys):
            for c in coords:
                if not isinstance(c, (int, float)) or isinstance(c, bool):
                    raise SketchFormatError(f"stroke {i} has a non-numeric coordinate {c!r}", line_number)
                if not 0 <= c <= SOURCE_MAX:
                    raise SketchFormatError(f"stroke {i} coordinate {c} outside [0, {SOURCE_MAX}]", line_number)
        strokes.append((list(xs), list(ys)))
    return SketchRecord(category=obj["word"], strokes=strokes, recognized=bool(obj["recognized"]))


def _open_text(path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def load_ndjson(path, recognized_only=True):
    """Parse every line of a (possibly gzipped) ndjson file."""
    records = []
    with _open_text(path) as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = parse_ndjson_line(line, line_number=n)
            if recognized_only and not record.recognized:
                continue
            records.append(record)
    return records


def scale_coordinate(c, m):
    """Map a source coordinate in 0..255 onto a cell index in 0..m-1."""
    return int(math.floor(c * (m - 1) / SOURCE_MAX + 0.5))


def rasterize_sketch(record, m=84):
    """Draw a record onto a blank M x M canvas.

    Coordinates scale by (m-1)/255 with round-to-nearest; points within a
    stroke are joined by the environment's Bresenham rasterizer, and strokes
    are never joined to each other.
    """
    canvas = blank_canvas(m)
    for xs, ys in record.strokes:
        cells = [(scale_coordinate(x, m), scale_coordinate(y, m)) for x, y in zip(xs, ys)]
        for a, b in zip(cells, cells[1:]):
            rasterize_segment(canvas, a, b)
        if len(cells) == 1:
            canvas[cells[0][1], cells[0][0]] = 1.0
    return canvas


def complexity_metrics(record):
    """Stroke/point counts plus stroke velocity in source pixels per point.

    Velocity uses the raw 0..255 coordinates, before any canvas scaling.
    """
    points = record.point_count
    length = 0.0
    for xs, ys in record.strokes:
        for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
            length += math.hypot(x1 - x0, y1 - y0)
    return ComplexityMetrics(
        stroke_count=record.stroke_count,
        point_count=points,
        stroke_velocity=length / points if points else 0.0,
    )


def split_dataset(records, seed, train_size):
    """Deterministic shuffle under `seed`; first `train_size` records train."""
    if train_size > len(records):
        raise ConfigurationError(f"train_size {train_size} exceeds {len(records)} records")
    rng = np.random.Generator(np.random.Philox(seed))
    order = rng.permutation(len(records))
    shuffled = [records[i] for i in order]
    return DatasetSplit(train=shuffled[:train_size], test=shuffled[train_size:], seed=seed)


# ---------------------------------------------------------------------------
# Dataset directory layout: ingest writes per-category split files plus a
# manifest that downstream commands (train, eval) load.
# ---------------------------------------------------------------------------


def ingest(input_dir, categories, train_size, seed, out_dir, recognized_only=True, canvas_size=84):
    """Split each category's ndjson file and write a self-contained dataset dir.

    Looks for <category>.ndjson or <category>.ndjson.gz inside `input_dir`
    (spaces in category names may be underscores in filenames).
    """
    os.makedirs(os.path.join(out_dir, "train"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "test"), exist_ok=True)
    manifest = {
        "seed": seed,
        "canvas_size": canvas_size,
        "recognized_only": recognized_only,
        "categories": [],
    }
    for category in categories:
        path = _find_category_file(input_dir, category)
        records = load_ndjson(path, recognized_only=recognized_only)
        split = split_dataset(records, seed, train_size)
        safe = category.replace(" ", "_")
        train_file = os.path.join("train", f"{safe}.ndjson")
        test_file = os.path.join("test", f"{safe}.ndjson")
        _write_records(os.path.join(out_dir, train_file), split.train)
        _write_records(os.path.join(out_dir, test_file), split.test)
        manifest["categories"].append(
            {
                "name": category,
                "train_file": train_file,
                "test_file": test_file,
                "train_count": len(split.train),
                "test_count": len(split.test),
                "total": len(records),
            }
        )
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest_path


def _find_category_file(input_dir, category):
    stems = (category, category.replace(" ", "_"), category.replace(" ", "%20"))
    for stem in stems:
        for suffix in (".ndjson", ".ndjson.gz"):
            path = os.path.join(input_dir, stem + suffix)
            if os.path.exists(path):
                return path
    raise ConfigurationError(f"no ndjson file for category {category!r} in {input_dir}")


def _write_records(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json_line() + "\n")


class Dataset:
    """A loaded ingest output directory."""

    def __init__(self, manifest_path):
        with open(manifest_path, "r", encoding="utf-8") as fh:
            self.manifest = json.load(fh)
        self.root = os.path.dirname(os.path.abspath(manifest_path))
        self.canvas_size = self.manifest.get("canvas_size", 84)
        self._cache = {}

    @property
    def categories(self):
        return [c["name"] for c in self.manifest["categories"]]

    def _entry(self, category):
        for c in self.manifest["categories"]:
            if c["name"] == category:
                return c
        raise ConfigurationError(f"category {category!r} not in dataset manifest")

    def records(self, category, split):
        key = (category, split)
        if key not in self._cache:
            entry = self._entry(category)
            path = os.path.join(self.root, entry[f"{split}_file"])
            self._cache[key] = load_ndjson(path, recognized_only=False)
        return self._cache[key]

    def canvas(self, record):
        return rasterize_sketch(record, self.canvas_size)
