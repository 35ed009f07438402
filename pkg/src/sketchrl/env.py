"""The drawing MDP: canvas state, pen movement, and network input streams.

The agent draws on an M x M binary canvas by picking cells inside the 11x11
patch around the pen.  Observations are a 4-channel global stream (generated
canvas, reference canvas, distance map, colour map) plus the 11x11 local
patch of the generated canvas centred on the pen.
"""

from dataclasses import dataclass

import numpy as np

from .actions import MAX_OFFSET, PATCH_SIZE, decode_action
from .canvas import as_canvas, blank_canvas, rasterize_segment
from .errors import ContractViolation

DEFAULT_TOTAL_STROKES = 150


@dataclass(frozen=True)
class PenState:
    x: int
    y: int
    down: bool


@dataclass(frozen=True)
class StepInfo:
    """Per-step outcome: post-clamp displacement, ink delta, speed class."""

    dx: int
    dy: int
    pixels_changed: int
    slow_flag: bool
    terminal: bool


@dataclass(frozen=True)
class StateSnapshot:
    """Compact, exact state descriptor: packed canvas bits + pen + step count.

    The reference canvas is not stored; callers keep it separately (it is
    immutable during an episode) and pair it back up when rebuilding streams.
    """

    packed: bytes
    m: int
    pen_x: int
    pen_y: int
    pen_down: bool
    k: int

    def canvas(self):
        bits = np.unpackbits(np.frombuffer(self.packed, dtype=np.uint8), count=self.m * self.m)
        return bits.reshape(self.m, self.m).astype(np.float32)


def pack_canvas(canvas):
    return np.packbits(canvas.astype(np.uint8).ravel()).tobytes()


def distance_map(pen_x, pen_y, m):
    """Per-cell Euclidean distance to the pen, normalized by the canvas size."""
    ys = np.arange(m, dtype=np.float32)[:, None]
    xs = np.arange(m, dtype=np.float32)[None, :]
    return np.hypot(xs - pen_x, ys - pen_y) / np.float32(m)


def colour_map(pen_down, m):
    """Constant channel: all ones while the pen touches the canvas, else zeros."""
    return np.full((m, m), 1.0 if pen_down else 0.0, dtype=np.float32)


def local_patch(canvas, pen_x, pen_y, n=PATCH_SIZE):
    """The n x n window of `canvas` centred on the pen, zero-padded at borders."""
    m = canvas.shape[0]
    if not (0 <= pen_x < m and 0 <= pen_y < m):
        raise ContractViolation(f"pen ({pen_x}, {pen_y}) outside {m}x{m} canvas")
    half = n // 2
    patch = np.zeros((n, n), dtype=np.float32)
    y0, y1 = max(0, pen_y - half), min(m, pen_y + half + 1)
    x0, x1 = max(0, pen_x - half), min(m, pen_x + half + 1)
    patch[y0 - pen_y + half : y1 - pen_y + half, x0 - pen_x + half : x1 - pen_x + half] = canvas[y0:y1, x0:x1]
    return patch


def build_streams(canvas, reference, pen_x, pen_y, pen_down):
    """Assemble (4, M, M) global stream and (11, 11) local patch for a state."""
    m = canvas.shape[0]
    glob = np.empty((4, m, m), dtype=np.float32)
    glob[0] = canvas
    glob[1] = reference
    glob[2] = distance_map(pen_x, pen_y, m)
    glob[3] = colour_map(pen_down, m)
    return glob, local_patch(canvas, pen_x, pen_y)


class DrawingEnv:
    """Single-writer drawing environment over one reference sketch.

    One instance is mutated by one logical thread; instances share nothing.
    """

    def __init__(self, reference, total_strokes=DEFAULT_TOTAL_STROKES, m=None):
        self.reference = as_canvas(reference, m)
        self.m = self.reference.shape[0]
        self.total_strokes = total_strokes
        self.reset()

    def reset(self, reference=None):
        """Blank the canvas and recentre the pen (up).  Optionally swap the reference."""
        if reference is not None:
            self.reference = as_canvas(reference, self.m)
        self.generated = blank_canvas(self.m)
        self.pen_x = self.m // 2
        self.pen_y = self.m // 2
        self.pen_down = False
        self.k = 0
        return self

    @property
    def pen(self):
        return PenState(self.pen_x, self.pen_y, self.pen_down)

    @property
    def done(self):
        return self.k >= self.total_strokes

    def step(self, action_index):
        """Apply one action: move the pen (clamped) and ink the segment if down.

        Returns a StepInfo carrying the post-clamp displacement; a move is
        "slow" when it covers fewer than 5 cells in both axes.
        """
        if self.done:
            raise ContractViolation(f"episode already terminal at k={self.k}")
        action = decode_action(action_index)
        old_x, old_y = self.pen_x, self.pen_y
        new_x = min(max(old_x + action.dx, 0), self.m - 1)
        new_y = min(max(old_y + action.dy, 0), self.m - 1)
        pixels_changed = 0
        if action.pen_down:
            before = int(self.generated.sum())
            rasterize_segment(self.generated, (old_x, old_y), (new_x, new_y))
            pixels_changed = int(self.generated.sum()) - before
        self.pen_x, self.pen_y = new_x, new_y
        self.pen_down = action.pen_down
        self.k += 1
        dx, dy = new_x - old_x, new_y - old_y
        return StepInfo(
            dx=dx,
            dy=dy,
            pixels_changed=pixels_changed,
            slow_flag=abs(dx) < MAX_OFFSET and abs(dy) < MAX_OFFSET,
            terminal=self.done,
        )

    def global_stream(self):
        glob, _ = build_streams(self.generated, self.reference, self.pen_x, self.pen_y, self.pen_down)
        return glob

    def local_patch(self):
        return local_patch(self.generated, self.pen_x, self.pen_y)

    def snapshot(self):
        return StateSnapshot(
            packed=pack_canvas(self.generated),
            m=self.m,
            pen_x=self.pen_x,
            pen_y=self.pen_y,
            pen_down=self.pen_down,
            k=self.k,
        )


@dataclass(frozen=True)
class TraceStep:
    action: int
    dx: int
    dy: int
    pen_down: bool


@dataclass
class EpisodeTrace:
    """Post-clamp movement record of one episode, enough to replay it anywhere."""

    m: int
    start_x: int
    start_y: int
    steps: list


def trace_episode(reference, action_indices, total_strokes=None):
    """Replay actions through a fresh environment, recording the movement trace.

    Returns (trace, final canvas).
    """
    env = DrawingEnv(reference, total_strokes=total_strokes or max(len(action_indices), 1))
    trace = EpisodeTrace(m=env.m, start_x=env.pen_x, start_y=env.pen_y, steps=[])
    for idx in action_indices:
        info = env.step(idx)
        trace.steps.append(TraceStep(action=idx, dx=info.dx, dy=info.dy, pen_down=decode_action(idx).pen_down))
    return trace, env.generated
