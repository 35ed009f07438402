"""Cartesian gridmap transfer: patch actions to end-effector waypoints.

Each canvas cell is an l1 x l1 square in the drawing plane; pen lifts move
the tool l2 metres along z. The exporter walks an episode's post-clamp
displacements, the simulator inverts the mapping back to cells and redraws,
and a round-trip must reproduce the environment's canvas bit for bit.
"""

import json
import math
from dataclasses import dataclass

from .actions import MAX_OFFSET
from .canvas import blank_canvas, rasterize_segment
from .errors import ConfigurationError, ContractViolation, TrajectoryFidelityError

HEADER_FORMAT = "gridmap-trajectory"
HEADER_VERSION = 1
_Z_TOL = 1e-9


@dataclass(frozen=True)
class GridmapConfig:
    l1: float = 0.005  # cell edge, metres
    l2: float = 0.020  # pen-lift offset along z, metres
    origin: tuple = (0.0, 0.0)  # cartesian position of canvas cell (0, 0)
    z_canvas: float = 0.0  # drawing-plane height

    def __post_init__(self):
        if self.l1 <= 0 or self.l2 <= 0:
            raise ConfigurationError(f"cell sizes must be positive, got l1={self.l1}, l2={self.l2}")


@dataclass(frozen=True)
class Waypoint:
    step: int
    x: float
    y: float
    z: float
    pen_down: bool
    action: "int | None"  # None for the initial pose


def to_cartesian(p_current, p_agent, l1):
    """One displacement in metres: p' = p + (dx, dy) * l1."""
    x, y = p_current
    return (x + p_agent.dx * l1, y + p_agent.dy * l1)


def cell_to_cartesian(cell_x, cell_y, cfg):
    return (cfg.origin[0] + cell_x * cfg.l1, cfg.origin[1] + cell_y * cfg.l1)


def export_trajectory(trace, cfg, path):
    """Write the waypoint file for an episode trace: a header line describing
    the geometry, the initial pose, then one waypoint per step."""
    waypoints = trajectory_waypoints(trace, cfg)
    header = {
        "format": HEADER_FORMAT,
        "version": HEADER_VERSION,
        "l1": cfg.l1,
        "l2": cfg.l2,
        "origin": list(cfg.origin),
        "z_canvas": cfg.z_canvas,
        "m": trace.m,
        "start_cell": [trace.start_x, trace.start_y],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for wp in waypoints:
            fh.write(
                json.dumps(
                    {"step": wp.step, "x": wp.x, "y": wp.y, "z": wp.z, "pen_down": wp.pen_down, "action": wp.action},
                    sort_keys=True,
                )
                + "\n"
            )
    return path


def trajectory_waypoints(trace, cfg):
    """The waypoint sequence for a trace: initial pose plus one per step."""
    x, y = cell_to_cartesian(trace.start_x, trace.start_y, cfg)
    up_z = cfg.z_canvas + cfg.l2
    waypoints = [Waypoint(step=0, x=x, y=y, z=up_z, pen_down=False, action=None)]
    for n, step in enumerate(trace.steps, start=1):
        if abs(step.dx) > MAX_OFFSET or abs(step.dy) > MAX_OFFSET:
            raise ContractViolation(f"step {n} displacement ({step.dx}, {step.dy}) exceeds the patch")
        x += step.dx * cfg.l1
        y += step.dy * cfg.l1
        z = cfg.z_canvas if step.pen_down else up_z
        waypoints.append(Waypoint(step=n, x=x, y=y, z=z, pen_down=step.pen_down, action=step.action))
    return waypoints


def read_trajectory(path):
    """Parse a waypoint file back into (header, waypoints)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise TrajectoryFidelityError("empty trajectory file")
    header = json.loads(lines[0])
    if header.get("format") != HEADER_FORMAT:
        raise TrajectoryFidelityError(f"not a {HEADER_FORMAT} file")
    waypoints = []
    for line in lines[1:]:
        obj = json.loads(line)
        waypoints.append(
            Waypoint(
                step=int(obj["step"]),
                x=float(obj["x"]),
                y=float(obj["y"]),
                z=float(obj["z"]),
                pen_down=bool(obj["pen_down"]),
                action=obj.get("action"),
            )
        )
    return header, waypoints


def _recover_cell(value, origin, l1, axis, step, m):
    cell = (value - origin) / l1
    nearest = int(math.floor(cell + 0.5))
    if abs(value - (origin + nearest * l1)) > 0.5 * l1:
        raise TrajectoryFidelityError(f"waypoint {step}: {axis} residual exceeds half a cell")
    if not 0 <= nearest < m:
        raise TrajectoryFidelityError(f"waypoint {step}: {axis} cell {nearest} outside the {m}-cell grid")
    return nearest


def simulate_execution(header, waypoints, cfg=None):
    """Replay a waypoint sequence onto a fresh canvas.

    Positions are snapped to the nearest cell; any residual beyond half a
    cell, an off-grid cell, or a z outside the two legal planes signals a
    corrupted trajectory.
    """
    if cfg is None:
        cfg = GridmapConfig(
            l1=header["l1"], l2=header["l2"], origin=tuple(header["origin"]), z_canvas=header["z_canvas"]
        )
    m = int(header["m"])
    canvas = blank_canvas(m)
    prev = None
    up_z = cfg.z_canvas + cfg.l2
    for wp in waypoints:
        cx = _recover_cell(wp.x, cfg.origin[0], cfg.l1, "x", wp.step, m)
        cy = _recover_cell(wp.y, cfg.origin[1], cfg.l1, "y", wp.step, m)
        expected_z = cfg.z_canvas if wp.pen_down else up_z
        if abs(wp.z - expected_z) > _Z_TOL:
            raise TrajectoryFidelityError(f"waypoint {wp.step}: z={wp.z} matches neither pen plane")
        if wp.pen_down:
            if prev is None:
                raise TrajectoryFidelityError("pen down on the initial pose")
            rasterize_segment(canvas, prev, (cx, cy))
        prev = (cx, cy)
    return canvas


def simulate_execution_file(path):
    header, waypoints = read_trajectory(path)
    return simulate_execution(header, waypoints)
