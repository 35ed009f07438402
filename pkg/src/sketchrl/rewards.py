"""Reward machinery.

The per-step similarity s_k scales the fraction of differing pixels between
the generated and reference canvases by alpha_sim; for binary canvases the
squared pixel difference and the differing-pixel count coincide. Rewards run
in two regimes over an episode: pixel-difference shaping (with a slowness
penalty) for the first pixel_strokes steps, then the classifier's confidence
in the target category for the remainder.
"""

import numpy as np

from .errors import ContractViolation


def pixel_difference(gen, ref):
    """Number of cells where the two binary canvases disagree."""
    gen = np.asarray(gen)
    ref = np.asarray(ref)
    if gen.shape != ref.shape:
        raise ContractViolation(f"canvas shapes differ: {gen.shape} vs {ref.shape}")
    return int(np.count_nonzero(gen != ref))


def similarity_s(gen, ref, alpha_sim=1000.0):
    """s = alpha_sim * (differing pixels) / M^2. Zero iff identical."""
    diff = pixel_difference(gen, ref)
    m2 = np.asarray(gen).size
    return alpha_sim * diff / m2


def eval_similarity_percent(gen, ref):
    """100 * (1 - differing-pixel fraction): 100 iff identical, 0 iff complementary."""
    diff = pixel_difference(gen, ref)
    return 100.0 * (1.0 - diff / np.asarray(gen).size)


def step_reward(cfg, k, slow_flag, s_k, s_k1, theta):
    """Reward for step index k (0-based).

    k < pixel_strokes: r = (s_k - s_{k+1}) minus p_step when the move was slow.
    pixel_strokes <= k < total_strokes: r = theta (classifier confidence).
    """
    if not 0 <= k < cfg.total_strokes:
        raise ContractViolation(f"step index {k} outside [0, {cfg.total_strokes})")
    if k < cfg.pixel_strokes:
        r = s_k - s_k1
        if slow_flag:
            r -= cfg.p_step
        return r
    return float(theta)
