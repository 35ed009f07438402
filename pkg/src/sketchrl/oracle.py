"""Random-stroke episode generator for supervised pre-training.

Each episode scribbles on a blank canvas with randomly sampled actions; the
finished canvas then serves as the reference channel, so every recorded step
becomes a (state, action) pair demonstrating how to reproduce that canvas.

Action sampling is integer-only on a counter-based generator (Philox) so the
same seed regenerates the same episode on any platform: per step, one draw
decides the pen (down with probability 4/5) and one draw picks the
displacement cell uniformly.
"""

from dataclasses import dataclass

import numpy as np

from .actions import NUM_CELLS
from .canvas import DEFAULT_SIZE, blank_canvas
from .env import DrawingEnv, build_streams
from .errors import ConfigurationError

PRETRAIN_MAX_STROKES = 100
PEN_DOWN_NUM = 4  # pen goes down when integers(0,5) < 4
PEN_DOWN_DEN = 5


@dataclass
class OracleEpisode:
    seed: int
    actions: list  # action index per step
    snapshots: list  # StateSnapshot per step, plus one terminal snapshot
    final_canvas: np.ndarray

    @property
    def n_strokes(self):
        return len(self.actions)


def _sample_action(rng):
    pen_down = int(rng.integers(0, PEN_DOWN_DEN)) < PEN_DOWN_NUM
    cell = int(rng.integers(0, NUM_CELLS))
    return int(pen_down) * NUM_CELLS + cell


def generate_episode(rng_seed, n_strokes, m=DEFAULT_SIZE, max_strokes=PRETRAIN_MAX_STROKES):
    """Run n_strokes random actions from reset and record every state."""
    if not 1 <= n_strokes <= max_strokes:
        raise ConfigurationError(f"n_strokes must be in [1, {max_strokes}], got {n_strokes}")
    rng = np.random.Generator(np.random.Philox(rng_seed))
    env = DrawingEnv(reference=blank_canvas(m), total_strokes=n_strokes, m=m)
    env.reset()
    actions = []
    snapshots = [env.snapshot()]
    for _ in range(n_strokes):
        action = _sample_action(rng)
        env.step(action)
        actions.append(action)
        snapshots.append(env.snapshot())
    return OracleEpisode(
        seed=rng_seed,
        actions=actions,
        snapshots=snapshots,
        final_canvas=env.generated.copy(),
    )


def episode_samples(episode):
    """Unroll an episode into supervised (global, local, label) triples.

    The reference channel of every state is the episode's own final canvas,
    which is what makes the recorded action the right answer.
    """
    samples = []
    for k, action in enumerate(episode.actions):
        snap = episode.snapshots[k]
        gs, lp = build_streams(
            snap.canvas(), episode.final_canvas, snap.pen_x, snap.pen_y, snap.pen_down
        )
        samples.append((gs, lp, action))
    return samples


def emit_supervised_batch(rng_seed, batch_size, m=DEFAULT_SIZE):
    """Collect batch_size supervised samples from fresh random episodes.

    Episode lengths are uniform in 1..100; episodes are generated until the
    sample budget is met, then the list is truncated to exactly batch_size.
    """
    if batch_size < 1:
        raise ConfigurationError(f"batch_size must be >= 1, got {batch_size}")
    master = np.random.Generator(np.random.Philox(rng_seed))
    samples = []
    while len(samples) < batch_size:
        episode_seed = int(master.integers(0, 2**62))
        n_strokes = int(master.integers(1, PRETRAIN_MAX_STROKES + 1))
        episode = generate_episode(episode_seed, n_strokes, m=m)
        samples.extend(episode_samples(episode))
    return samples[:batch_size]
