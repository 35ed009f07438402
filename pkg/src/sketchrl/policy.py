"""Behavior policy and bootstrap targets."""

import numpy as np

from .errors import ContractViolation


def greedy_action(q):
    """Argmax with the lowest index winning ties."""
    q = np.asarray(q)
    if q.ndim != 1:
        raise ContractViolation(f"expected a Q-value vector, got shape {q.shape}")
    return int(np.argmax(q))


def epsilon_greedy(q, epsilon, rng):
    """Greedy with probability 1-epsilon, else uniform over all actions.

    The uniform draw may also land on the greedy action; one rng draw decides
    the branch and (only when exploring) a second picks the action.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ContractViolation(f"epsilon must be in [0,1], got {epsilon}")
    q = np.asarray(q)
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(0, q.shape[-1]))
    return greedy_action(q)


def td_target(reward, terminal, next_q, gamma):
    """y = r for terminal transitions, else r + gamma * max_a next_q[a]."""
    if terminal:
        return float(reward)
    next_q = np.asarray(next_q)
    return float(reward) + gamma * float(next_q.max())


def td_target_batch(rewards, terminals, next_q, gamma):
    """Vectorized td_target over a batch; next_q is (B, num_actions)."""
    rewards = np.asarray(rewards, dtype=np.float64)
    terminals = np.asarray(terminals, dtype=bool)
    next_q = np.asarray(next_q)
    if next_q.ndim != 2 or rewards.shape != (next_q.shape[0],) or terminals.shape != rewards.shape:
        raise ContractViolation(
            f"bad batch shapes {rewards.shape} / {terminals.shape} / {next_q.shape}"
        )
    bootstrap = next_q.max(axis=1) * np.where(terminals, 0.0, gamma)
    return rewards + bootstrap
