"""Experience replay.

Transitions store state descriptors (packed canvas bits plus pen metadata)
rather than raw network streams; the distance and colour channels are cheap
to rebuild on sampling and would otherwise dominate memory by two orders of
magnitude.
"""

from dataclasses import dataclass

from .env import StateSnapshot, build_streams
from .errors import ContractViolation


@dataclass(frozen=True)
class Transition:
    state: StateSnapshot
    action: int
    reward: float
    next_state: StateSnapshot
    terminal: bool
    ref_id: int = 0  # key into the trainer's reference-canvas table


def transition_streams(snapshot, reference):
    """Rebuild the (global, local) network inputs a snapshot described."""
    return build_streams(snapshot.canvas(), reference, snapshot.pen_x, snapshot.pen_y, snapshot.pen_down)


class ReplayBuffer:
    """FIFO ring of at most `capacity` transitions; uniform sampling with
    replacement under the caller-provided generator."""

    def __init__(self, capacity=10_000):
        if capacity < 1:
            raise ContractViolation(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._items = [None] * capacity
        self._next = 0  # insertion cursor
        self.pushes = 0

    def __len__(self):
        return min(self.pushes, self.capacity)

    def push(self, transition):
        self._items[self._next] = transition
        self._next = (self._next + 1) % self.capacity
        self.pushes += 1

    def oldest(self):
        if self.pushes == 0:
            raise ContractViolation("buffer is empty")
        if self.pushes <= self.capacity:
            return self._items[0]
        return self._items[self._next]

    def sample(self, batch_size, rng):
        return [item for _, item in self.sample_with_ids(batch_size, rng)]

    def sample_with_ids(self, batch_size, rng):
        """Uniform sample of (push id, transition) pairs; the push id is the
        0-based global insertion counter, stable for a transition's lifetime."""
        if len(self) == 0:
            raise ContractViolation("cannot sample from an empty buffer")
        size = len(self)
        first_id = self.pushes - size
        idx = rng.integers(0, size, size=batch_size)
        if self.pushes <= self.capacity:
            return [(first_id + int(i), self._items[i]) for i in idx]
        # ring has wrapped: logical order starts at the cursor
        return [(first_id + int(i), self._items[(self._next + int(i)) % self.capacity]) for i in idx]
