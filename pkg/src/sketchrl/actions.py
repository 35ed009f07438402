"""Action space of the drawing agent.

An action selects a target cell inside the 11x11 patch centred on the pen
plus a pen contact flag, giving 11 * 11 * 2 = 242 discrete actions.  The
index layout puts the contact flag in the high "bit":

    index = pen_down * 121 + (dy + 5) * 11 + (dx + 5)
"""

from dataclasses import dataclass

from .errors import ContractViolation

PATCH_SIZE = 11
MAX_OFFSET = PATCH_SIZE // 2  # 5 cells in each direction
NUM_CELLS = PATCH_SIZE * PATCH_SIZE  # 121
NUM_ACTIONS = 2 * NUM_CELLS  # 242


@dataclass(frozen=True)
class ActionDecoded:
    """Signed cell offsets in [-5, +5] plus the pen contact flag."""

    dx: int
    dy: int
    pen_down: bool


def decode_action(index):
    """Map an action index in [0, 241] to its (dx, dy, pen_down) triple."""
    if not 0 <= index < NUM_ACTIONS:
        raise ContractViolation(f"action index {index} outside [0, {NUM_ACTIONS - 1}]")
    pen_down = index >= NUM_CELLS
    cell = index % NUM_CELLS
    dy = cell // PATCH_SIZE - MAX_OFFSET
    dx = cell % PATCH_SIZE - MAX_OFFSET
    return ActionDecoded(dx=dx, dy=dy, pen_down=pen_down)


def encode_action(dx, dy, pen_down):
    """Inverse of :func:`decode_action`."""
    if not (-MAX_OFFSET <= dx <= MAX_OFFSET and -MAX_OFFSET <= dy <= MAX_OFFSET):
        raise ContractViolation(f"offsets ({dx}, {dy}) outside [-5, +5]")
    cell = (dy + MAX_OFFSET) * PATCH_SIZE + (dx + MAX_OFFSET)
    return int(bool(pen_down)) * NUM_CELLS + cell
