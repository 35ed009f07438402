"""Reward arithmetic against brute-force pixel counting."""

import numpy as np
import pytest

from sketchrl.actions import NUM_ACTIONS
from sketchrl.canvas import blank_canvas
from sketchrl.config import RewardConfig
from sketchrl.env import DrawingEnv
from sketchrl.errors import ContractViolation
from sketchrl.rewards import (
    eval_similarity_percent,
    pixel_difference,
    similarity_s,
    step_reward,
)


def brute_force_diff(gen, ref):
    # Ground truth by explicit double loop; deliberately slow and obvious.
    count = 0
    for y in range(gen.shape[0]):
        for x in range(gen.shape[1]):
            if gen[y, x] != ref[y, x]:
                count += 1
    return count


def test_pixel_difference_against_brute_force(rng):
    for _ in range(25):
        m = int(rng.integers(4, 24))
        gen = (rng.random((m, m)) < 0.5).astype(np.float32)
        ref = (rng.random((m, m)) < 0.5).astype(np.float32)
        assert pixel_difference(gen, ref) == brute_force_diff(gen, ref)


def test_similarity_matches_brute_force_to_tolerance(rng):
    for _ in range(40):
        gen = (rng.random((84, 84)) < 0.3).astype(np.float32)
        ref = (rng.random((84, 84)) < 0.3).astype(np.float32)
        want = 1000.0 * brute_force_diff(gen, ref) / (84 * 84)
        assert similarity_s(gen, ref) == pytest.approx(want, abs=1e-9)


def test_similarity_known_values():
    blank = blank_canvas()
    assert similarity_s(blank, blank) == 0.0
    full = np.ones((84, 84), dtype=np.float32)
    assert similarity_s(blank, full) == pytest.approx(1000.0)
    one = blank_canvas()
    one[3, 4] = 1.0
    assert similarity_s(one, blank) == pytest.approx(1000.0 / 7056)


def test_similarity_is_symmetric(rng):
    gen = (rng.random((84, 84)) < 0.4).astype(np.float32)
    ref = (rng.random((84, 84)) < 0.4).astype(np.float32)
    assert similarity_s(gen, ref) == similarity_s(ref, gen)


def test_shape_mismatch_rejected():
    with pytest.raises(ContractViolation):
        pixel_difference(blank_canvas(84), blank_canvas(42))


def test_eval_similarity_percent_extremes():
    blank = blank_canvas()
    assert eval_similarity_percent(blank, blank) == 100.0
    assert eval_similarity_percent(blank, 1.0 - blank) == 0.0
    half = blank_canvas()
    half[:42] = 1.0
    assert eval_similarity_percent(half, blank) == pytest.approx(50.0)


def test_step_reward_regimes():
    cfg = RewardConfig()
    # Pixel regime: improvement of 0.3 at normal speed.
    assert step_reward(cfg, 0, False, 1.0, 0.7, theta=0.9) == pytest.approx(0.3)
    # Slow move costs p_step on top.
    assert step_reward(cfg, 50, True, 1.0, 0.7, theta=0.9) == pytest.approx(0.3 - 0.02)
    # Worsening the canvas goes negative.
    assert step_reward(cfg, 99, False, 0.5, 0.8, theta=0.9) == pytest.approx(-0.3)
    # Classifier regime ignores pixels and slowness.
    assert step_reward(cfg, 100, True, 1.0, 0.0, theta=0.25) == 0.25
    assert step_reward(cfg, 149, False, 0.0, 9.0, theta=0.75) == 0.75


def test_step_reward_switches_exactly_at_pixel_strokes():
    cfg = RewardConfig()
    just_before = step_reward(cfg, cfg.pixel_strokes - 1, False, 2.0, 1.0, theta=0.123)
    at = step_reward(cfg, cfg.pixel_strokes, False, 2.0, 1.0, theta=0.123)
    assert just_before == pytest.approx(1.0)
    assert at == pytest.approx(0.123)


def test_step_reward_bounds_checked():
    cfg = RewardConfig()
    with pytest.raises(ContractViolation):
        step_reward(cfg, -1, False, 0.0, 0.0, 0.0)
    with pytest.raises(ContractViolation):
        step_reward(cfg, cfg.total_strokes, False, 0.0, 0.0, 0.0)


def test_pixel_rewards_telescope_over_an_episode(rng):
    # Sum of (s_k - s_{k+1}) collapses to s_0 - s_last, independent of the path.
    cfg = RewardConfig()
    ref = (rng.random((84, 84)) < 0.15).astype(np.float32)
    env = DrawingEnv(ref, total_strokes=80)
    s = [similarity_s(env.generated, ref, cfg.alpha_sim)]
    total = 0.0
    penalties = 0.0
    for k in range(80):
        info = env.step(int(rng.integers(0, NUM_ACTIONS)))
        s.append(similarity_s(env.generated, ref, cfg.alpha_sim))
        r = step_reward(cfg, k, info.slow_flag, s[-2], s[-1], theta=0.0)
        total += r
        if info.slow_flag:
            penalties += cfg.p_step
    assert total + penalties == pytest.approx(s[0] - s[-1], abs=1e-6)
