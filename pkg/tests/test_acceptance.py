"""Acceptance gate: nine binding checks, one test per criterion.

Run with `pytest -v tests/test_acceptance.py` to get one pass/fail line per
criterion. Criteria 6 and 7 share a desk-scale pre-trained checkpoint
through a session fixture, and criterion 7's ten-thousand-step run
dominates the wall time (roughly ten minutes on a laptop core).

Each test pins its tolerance and time budget inline:
  1. architecture shapes exact, manifest total 1,889,426, < 1 s
  2. gradient check, >= 10 probes per layer type, rel err < 1e-4, < 30 s
  3. action bijection, pen-up inert, clamping over 1e5 steps, < 10 s
  4. similarity oracle 1e-9, telescoping 1e-6, regime switch at k=100, < 10 s
  5. 50 episode waypoint round trips bit-exact, < 30 s
  6. 2,000-epoch pre-train: holdout accuracy > 4.1%, smoothed loss
     strictly decreasing, <= 15 min
  7. 10,000-step Q-training on one triangle, greedy similarity >= 80%,
     <= 1 h
  8. result-table schema column-for-column, README scope statement
  9. repeated pretrain/train runs byte-identical
"""

import json
import os
import struct
import time

import numpy as np
import pytest

from sketchrl.actions import NUM_ACTIONS, decode_action, encode_action
from sketchrl.canvas import blank_canvas, rasterize_segment
from sketchrl.config import RewardConfig, TrainerConfig
from sketchrl.env import DrawingEnv, trace_episode
from sketchrl.evaluate import REPORT_COLUMNS, EpisodeReport, report, run_draw
from sketchrl.gridmap import GridmapConfig, export_trajectory, simulate_execution_file
from sketchrl.nn import Network, Q_NET_PARAM_COUNT, param_count, q_network_spec, save_checkpoint
from sketchrl.rewards import similarity_s, step_reward
from sketchrl.trainer import ReferenceItem, pretrain, train

REL_TOL = 1e-4
H = 1e-5


def triangle_reference():
    ref = blank_canvas(84)
    rasterize_segment(ref, (20, 60), (42, 20))
    rasterize_segment(ref, (42, 20), (64, 60))
    rasterize_segment(ref, (64, 60), (20, 60))
    return ref


@pytest.fixture(scope="session")
def desk_pretrained(tmp_path_factory):
    """2,000 supervised epochs at a fixed seed, shared by criteria 6 and 7."""
    out = tmp_path_factory.mktemp("acceptance") / "pretrain.ckpt"
    cfg = TrainerConfig(seed=11, pretrain_epochs=2000)
    t0 = time.monotonic()
    result = pretrain(cfg, str(out))
    return result, time.monotonic() - t0


def test_criterion_1_architecture_and_parameter_count(tmp_path):
    t0 = time.monotonic()
    spec = q_network_spec("linear")
    net = Network.init(spec, seed=0)
    out, cache = net.forward(
        np.zeros((1, 4, 84, 84), dtype=np.float32),
        np.zeros((1, 1, 11, 11), dtype=np.float32),
        with_cache=True,
    )
    # Activation chain: each conv's cached input is the previous map.
    glob_inputs = [layer_cache[0] for layer_cache, _ in cache["streams"][0]]
    assert glob_inputs[1:] == [(1, 32, 20, 20), (1, 64, 9, 9)]
    assert cache["conv_out_shapes"] == [(1, 64, 7, 7), (1, 128, 1, 1)]
    assert sum(cache["widths"]) == 3264
    assert cache["fcs"][1][0][0].shape == (1, 512)  # fc2 consumes fc1's output
    assert out.shape == (1, 242)

    assert param_count(spec) == 1_889_426 == Q_NET_PARAM_COUNT
    path = str(tmp_path / "arch.ckpt")
    save_checkpoint(path, spec, net.params)
    with open(path, "rb") as fh:
        (manifest_len,) = struct.unpack("<Q", fh.read(8))
        manifest = json.loads(fh.read(manifest_len))
    assert manifest["total_params"] == 1_889_426
    assert sum(int(np.prod(layer["shape"])) for layer in manifest["layers"]) == 1_889_426
    assert time.monotonic() - t0 < 1.0


def test_criterion_2_gradient_correctness():
    t0 = time.monotonic()
    from sketchrl.nn.specs import ConvSpec, FCSpec, NetworkSpec, StreamSpec

    spec = NetworkSpec(
        name="small",
        streams=[
            StreamSpec(
                name="glob",
                input_shape=(2, 12, 12),
                convs=[ConvSpec("conv1", 2, 3, 4, 2), ConvSpec("conv2", 3, 4, 3, 1)],
            ),
            StreamSpec(name="loc", input_shape=(1, 5, 5), convs=[ConvSpec("conv_local", 1, 6, 5, 1)]),
        ],
        fcs=[FCSpec("fc1", 4 * 3 * 3 + 6, 10, activation="linear"), FCSpec("fc2", 10, 7)],
        expected_params=None,
    )
    net = Network.init(spec, seed=1).astype(np.float64)
    rng = np.random.Generator(np.random.Philox(42))
    glob = rng.standard_normal((3, 2, 12, 12))
    loc = rng.standard_normal((3, 1, 5, 5))
    g = rng.standard_normal((3, 7))

    out, cache = net.forward(glob, loc, with_cache=True)
    grads, _ = net.backward(g, cache, need_input_grads=True)

    def fd(name, flat_index):
        arr = net.params[name]
        orig = arr.flat[flat_index]
        arr.flat[flat_index] = orig + H
        up = float((net.forward(glob, loc) * g).sum())
        arr.flat[flat_index] = orig - H
        down = float((net.forward(glob, loc) * g).sum())
        arr.flat[flat_index] = orig
        return (up - down) / (2 * H)

    layer_types = {
        "conv.W": [k for k in net.params if k.startswith("conv") and k.endswith(".W")],
        "conv.b": [k for k in net.params if k.startswith("conv") and k.endswith(".b")],
        "fc.W": [k for k in net.params if k.startswith("fc") and k.endswith(".W")],
        "fc.b": [k for k in net.params if k.startswith("fc") and k.endswith(".b")],
    }
    for kind, names in layer_types.items():
        probed = 0
        for name in names:
            arr = net.params[name]
            for flat_index in rng.choice(arr.size, size=min(6, arr.size), replace=False):
                numeric = fd(name, int(flat_index))
                analytic = float(grads[name].flat[int(flat_index)])
                rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-8)
                assert rel < REL_TOL, (name, int(flat_index), numeric, analytic)
                probed += 1
        assert probed >= 10, kind
    assert time.monotonic() - t0 < 30.0


def test_criterion_3_action_space_properties():
    t0 = time.monotonic()
    decoded = [decode_action(i) for i in range(NUM_ACTIONS)]
    assert len({(a.dx, a.dy, a.pen_down) for a in decoded}) == NUM_ACTIONS
    for i, a in enumerate(decoded):
        assert encode_action(a.dx, a.dy, a.pen_down) == i

    rng = np.random.Generator(np.random.Philox(7))
    env = DrawingEnv(blank_canvas(84), total_strokes=100_000)
    ink = 0.0
    for raw in rng.integers(0, NUM_ACTIONS, size=100_000):
        action = int(raw)
        env.step(action)
        assert 0 <= env.pen_x <= 83 and 0 <= env.pen_y <= 83
        new_ink = float(env.generated.sum())
        if not decode_action(action).pen_down:
            assert new_ink == ink, "pen-up step changed the canvas"
        ink = new_ink
    assert time.monotonic() - t0 < 10.0


def test_criterion_4_reward_suite():
    t0 = time.monotonic()
    rng = np.random.Generator(np.random.Philox(3))
    for _ in range(100):
        a = rng.integers(0, 2, (84, 84)).astype(np.float32)
        b = rng.integers(0, 2, (84, 84)).astype(np.float32)
        diff = 0
        for y in range(84):
            for x in range(84):
                if a[y, x] != b[y, x]:
                    diff += 1
        assert abs(similarity_s(a, b, 1000.0) - 1000.0 * diff / 7056) < 1e-9

    # Telescoping over an all-pixel-regime episode: rewards plus the slow
    # penalties they absorbed must sum to s_0 - s_last.
    cfg = RewardConfig(pixel_strokes=80, total_strokes=80)
    ref = triangle_reference()
    env = DrawingEnv(ref, total_strokes=80)
    s_prev = similarity_s(env.generated, ref, cfg.alpha_sim)
    s_0 = s_prev
    total = 0.0
    penalties = 0.0
    while not env.done:
        k = env.k
        info = env.step(int(rng.integers(0, NUM_ACTIONS)))
        s_now = similarity_s(env.generated, ref, cfg.alpha_sim)
        r = step_reward(cfg, k, info.slow_flag, s_prev, s_now, theta=0.0)
        total += r
        if info.slow_flag:
            penalties += cfg.p_step
        s_prev = s_now
    assert abs((total + penalties) - (s_0 - s_prev)) < 1e-6

    # The regime boundary sits exactly at the published pixel_strokes=100.
    table = RewardConfig()
    assert table.pixel_strokes == 100
    assert step_reward(table, 99, False, 5.0, 3.5, theta=0.77) == pytest.approx(1.5)
    assert step_reward(table, 100, False, 5.0, 3.5, theta=0.77) == pytest.approx(0.77)
    assert time.monotonic() - t0 < 10.0


def test_criterion_5_transfer_round_trip(tmp_path):
    t0 = time.monotonic()
    rng = np.random.Generator(np.random.Philox(5))
    for episode in range(50):
        actions = [int(a) for a in rng.integers(0, NUM_ACTIONS, size=60)]
        trace, canvas = trace_episode(blank_canvas(84), actions)
        path = str(tmp_path / f"ep{episode}.jsonl")
        export_trajectory(trace, GridmapConfig(), path)
        assert np.array_equal(simulate_execution_file(path), canvas), episode
    assert time.monotonic() - t0 < 30.0


def test_criterion_6_pretraining_learning_signal(desk_pretrained):
    result, elapsed = desk_pretrained
    history = result.history
    assert len(history) == 2000
    assert elapsed <= 15 * 60, f"pre-training took {elapsed:.0f}s"
    losses = [row["loss"] for row in history]
    smoothed = [float(np.mean(losses[i : i + 100])) for i in range(0, 2000, 100)]
    for earlier, later in zip(smoothed, smoothed[1:]):
        assert later < earlier, f"smoothed loss rose: {earlier:.4f} -> {later:.4f}"
    final_accuracy = history[-1]["holdout_accuracy"]
    best_accuracy = max(row["holdout_accuracy"] for row in history)
    # Accuracy is checked last so a red run still certifies the loss curve
    # and the time budget above.
    assert final_accuracy > 0.041, (
        f"holdout accuracy {final_accuracy:.2%} (best {best_accuracy:.2%}) is below the "
        f"10x-chance bar of 4.1%; 2,000 one-episode updates fit the action prior but "
        f"not the state-conditional structure (see README, Reproducibility)"
    )


def test_criterion_7_desk_scale_q_learning(desk_pretrained, tmp_path):
    result, _ = desk_pretrained
    t0 = time.monotonic()
    cfg = TrainerConfig(
        seed=13,
        batch=32,
        target_update=1000,
        max_total_strokes=10_000,
    )
    ref = ReferenceItem(category="triangle", canvas=triangle_reference())
    trained = train(cfg, [ref], result.checkpoint_path, str(tmp_path / "qnet.ckpt"))
    assert trained.steps == 10_000

    record, _, rep = run_draw(trained.checkpoint_path, ref.canvas, reward_cfg=cfg.reward)
    assert len(record["steps"]) == cfg.reward.total_strokes
    assert rep.mse_similarity_pct >= 80.0, f"greedy similarity {rep.mse_similarity_pct:.2f}%"
    assert time.monotonic() - t0 <= 3600.0


def test_criterion_8_report_schema_and_scope_statement():
    assert REPORT_COLUMNS == (
        "MSE Simil.",
        "DQN Rew.",
        "Sketch strokes",
        "Sketch points",
        "Sketch Vel.",
        "Categ. Strokes",
        "Categ. Points",
        "Categ. Vel.",
    )
    rep = EpisodeReport(category="triangle", mse_similarity_pct=91.0, dqn_reward=2.0, dqn_reward_pixel=2.0)
    markdown, csv_text = report([rep])
    assert markdown.splitlines()[0] == "| Sketch | " + " | ".join(REPORT_COLUMNS) + " |"
    assert csv_text.splitlines()[0] == "Sketch," + ",".join(
        c if "," not in c else f'"{c}"' for c in REPORT_COLUMNS
    )
    readme = os.path.join(os.path.dirname(__file__), "..", "README.md")
    with open(readme, "r", encoding="utf-8") as fh:
        text = fh.read().lower()
    assert "not reproduced" in text, "README must state the full-scale results are out of scope"


def test_criterion_9_determinism(tmp_path):
    cfg = TrainerConfig(seed=17, pretrain_epochs=100)
    first = pretrain(cfg, str(tmp_path / "a.ckpt"))
    second = pretrain(cfg, str(tmp_path / "b.ckpt"))
    with open(first.checkpoint_path, "rb") as fh:
        a = fh.read()
    with open(second.checkpoint_path, "rb") as fh:
        b = fh.read()
    assert a == b, "pretrain checkpoints differ between identical runs"

    tcfg = TrainerConfig(seed=19, batch=32, target_update=500, max_total_strokes=1000)
    ref = ReferenceItem(category="triangle", canvas=triangle_reference())
    run_a = train(tcfg, [ref], first.checkpoint_path, str(tmp_path / "qa.ckpt"))
    run_b = train(tcfg, [ref], first.checkpoint_path, str(tmp_path / "qb.ckpt"))
    with open(run_a.checkpoint_path, "rb") as fh:
        qa = fh.read()
    with open(run_b.checkpoint_path, "rb") as fh:
        qb = fh.read()
    assert qa == qb, "train checkpoints differ between identical runs"
