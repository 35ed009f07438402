"""Greedy sketch execution and result reporting.

A draw runs the trained net with epsilon 0 for a full episode, logging every
action and reward, and optionally writes the artifact set: final canvas as
PGM and PNG, a trajectory overlay image (start coloured purple shading to
red, mirroring the published visualization), the episode JSON, and the
gridmap waypoint file.
"""

import csv
import io
import json
import os
from dataclasses import dataclass

import numpy as np

from .canvas import as_canvas
from .config import RewardConfig
from .env import DrawingEnv, EpisodeTrace, TraceStep, build_streams
from .errors import ConfigurationError, ContractViolation
from .gridmap import GridmapConfig, export_trajectory
from .nn import Network, load_checkpoint, q_network_spec
from .pgm import write_pgm
from .policy import greedy_action
from .quickdraw import SketchRecord, complexity_metrics, rasterize_sketch
from .rewards import eval_similarity_percent, similarity_s, step_reward

REPORT_COLUMNS = (
    "MSE Simil.",
    "DQN Rew.",
    "Sketch strokes",
    "Sketch points",
    "Sketch Vel.",
    "Categ. Strokes",
    "Categ. Points",
    "Categ. Vel.",
)


@dataclass
class EpisodeReport:
    category: str
    mse_similarity_pct: float
    dqn_reward: float
    dqn_reward_pixel: float  # subtotal from the pixel-difference regime
    sketch_strokes: "int | None" = None
    sketch_points: "int | None" = None
    sketch_velocity: "float | None" = None
    categ_strokes: "float | None" = None
    categ_points: "float | None" = None
    categ_velocity: "float | None" = None


def load_q_network(path):
    """Instantiate the Q-net a checkpoint describes, honouring its config echo."""
    bundle = load_checkpoint(path)
    cfg_echo = bundle.meta.get("config", {}) if isinstance(bundle.meta, dict) else {}
    fc1 = cfg_echo.get("fc1_activation", "linear")
    m = int(cfg_echo.get("canvas_size", 84))
    spec = q_network_spec(fc1, m=m)
    bundle = load_checkpoint(path, spec=spec)
    return Network(spec, bundle.params), bundle


def run_draw(q_checkpoint, reference, reward_cfg=None, category=None, classifier=None,
             out_dir=None, grid_cfg=None):
    """Greedy episode on one reference. Returns (record, canvas, report).

    `reference` may be a rasterized canvas or a parsed sketch record (whose
    complexity metrics then fill the per-sketch report columns).
    """
    net = q_checkpoint if isinstance(q_checkpoint, Network) else load_q_network(q_checkpoint)[0]
    rcfg = reward_cfg or RewardConfig()

    metrics = None
    if isinstance(reference, SketchRecord):
        metrics = complexity_metrics(reference)
        if category is None:
            category = reference.category
        reference = rasterize_sketch(reference, net.spec.streams[0].input_shape[1])
    reference = as_canvas(reference)

    theta_index = None
    if classifier is not None and category is not None:
        theta_index = classifier.category_index(category)

    env = DrawingEnv(reference, total_strokes=rcfg.total_strokes)
    trace = EpisodeTrace(m=env.m, start_x=env.pen_x, start_y=env.pen_y, steps=[])
    steps = []
    s_k = similarity_s(env.generated, reference, rcfg.alpha_sim)
    total = 0.0
    pixel_total = 0.0
    while not env.done:
        k = env.k
        glob, loc = build_streams(env.generated, reference, env.pen_x, env.pen_y, env.pen_down)
        q = net.forward(glob, loc[None])
        action = greedy_action(q)
        info = env.step(action)
        s_k1 = similarity_s(env.generated, reference, rcfg.alpha_sim)
        if k < rcfg.pixel_strokes:
            theta = 0.0
        elif theta_index is not None:
            theta = classifier.theta(env.generated, theta_index)
        else:
            theta = 0.0
        r = step_reward(rcfg, k, info.slow_flag, s_k, s_k1, theta)
        total += r
        if k < rcfg.pixel_strokes:
            pixel_total += s_k - s_k1
        steps.append(
            {
                "k": k,
                "action": action,
                "dx": info.dx,
                "dy": info.dy,
                "pen_down": bool(env.pen_down),
                "slow": info.slow_flag,
                "reward": r,
                "s_after": s_k1,
            }
        )
        trace.steps.append(TraceStep(action=action, dx=info.dx, dy=info.dy, pen_down=env.pen_down))
        s_k = s_k1

    similarity_pct = eval_similarity_percent(env.generated, reference)
    record = {
        "category": category,
        "m": env.m,
        "start_x": trace.start_x,
        "start_y": trace.start_y,
        "steps": steps,
        "dqn_reward": float(total),
        "dqn_reward_pixel": float(pixel_total),
        "s_final": float(s_k),
        "similarity_pct": float(similarity_pct),
    }
    report = EpisodeReport(
        category=category or "",
        mse_similarity_pct=float(similarity_pct),
        dqn_reward=float(total),
        dqn_reward_pixel=float(pixel_total),
        sketch_strokes=metrics.stroke_count if metrics else None,
        sketch_points=metrics.point_count if metrics else None,
        sketch_velocity=metrics.stroke_velocity if metrics else None,
    )
    if out_dir:
        _write_draw_artifacts(out_dir, env, reference, trace, record, grid_cfg or GridmapConfig())
    return record, env.generated.copy(), report


def _write_draw_artifacts(out_dir, env, reference, trace, record, grid_cfg):
    os.makedirs(out_dir, exist_ok=True)
    write_pgm(env.generated, os.path.join(out_dir, "final.pgm"))
    with open(os.path.join(out_dir, "episode.json"), "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
    export_trajectory(trace, grid_cfg, os.path.join(out_dir, "trajectory.jsonl"))
    _render_overlay(os.path.join(out_dir, "overlay.png"), env.generated, reference, trace)


def _render_overlay(path, generated, reference, trace):
    """Trajectory over the canvases; waypoint colour runs purple -> red."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    m = generated.shape[0]
    base = np.ones((m, m, 3), dtype=np.float32)
    base[reference > 0.5] = (0.8, 0.8, 0.8)
    base[generated > 0.5] = (0.15, 0.15, 0.15)

    fig, ax = plt.subplots(figsize=(4, 4), dpi=120)
    ax.imshow(base, interpolation="nearest")
    xs, ys = [trace.start_x], [trace.start_y]
    for step in trace.steps:
        xs.append(xs[-1] + step.dx)
        ys.append(ys[-1] + step.dy)
    cmap = matplotlib.colormaps["rainbow"]
    n = max(len(xs) - 1, 1)
    for i in range(len(xs) - 1):
        ax.plot(xs[i : i + 2], ys[i : i + 2], color=cmap(i / n), linewidth=1.2, alpha=0.9)
    ax.set_xlim(-0.5, m - 0.5)
    ax.set_ylim(m - 0.5, -0.5)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def category_averages(dataset, category, split="train"):
    """Mean stroke/point/velocity complexity over a category's split."""
    records = dataset.records(category, split)
    if not records:
        raise ContractViolation(f"category {category!r} has no records in the {split} split")
    stats = [complexity_metrics(r) for r in records]
    return (
        float(np.mean([s.stroke_count for s in stats])),
        float(np.mean([s.point_count for s in stats])),
        float(np.mean([s.stroke_velocity for s in stats])),
    )


def report(episodes, dataset=None, split="train"):
    """Markdown and CSV tables over the published result columns.

    When a dataset is given, the category-average columns are (re)computed
    over the full split; otherwise the values already on each report are used.
    """
    if not episodes:
        raise ContractViolation("report needs at least one episode")
    reports = [e if isinstance(e, EpisodeReport) else EpisodeReport(**e) for e in episodes]
    cache = {}
    rows = []
    for rep in reports:
        categ = (rep.categ_strokes, rep.categ_points, rep.categ_velocity)
        if dataset is not None and rep.category:
            if rep.category not in cache:
                try:
                    cache[rep.category] = category_averages(dataset, rep.category, split)
                except (ConfigurationError, ContractViolation):
                    cache[rep.category] = categ
            categ = cache[rep.category]
        rows.append(
            [
                rep.category,
                rep.mse_similarity_pct,
                rep.dqn_reward,
                rep.sketch_strokes,
                rep.sketch_points,
                rep.sketch_velocity,
                categ[0],
                categ[1],
                categ[2],
            ]
        )

    header = ["Sketch", *REPORT_COLUMNS]
    md_lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for row in rows:
        md_lines.append("| " + " | ".join(_fmt(v) for v in row) + " |")
    markdown = "\n".join(md_lines) + "\n"

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return markdown, buf.getvalue()


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)
