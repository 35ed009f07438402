"""Loss functions: categorical cross-entropy and masked action-value MSE.

Single-sample forms return (loss, grad_out) pairs feeding Network.backward;
batch forms average and return the per-sample output gradients already scaled
by 1/B so one backward pass yields the mean-loss gradient.
"""

import numpy as np

from ..errors import ContractViolation


def softmax(logits, axis=-1):
    """Max-subtracted softmax; finite for logit magnitudes up to 1e4 and beyond."""
    z = logits - np.max(logits, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def cross_entropy_loss(logits, label):
    """loss = -log softmax(logits)[label]; grad = softmax - onehot."""
    logits = np.asarray(logits)
    if logits.ndim != 1:
        raise ContractViolation(f"expected a logit vector, got shape {logits.shape}")
    if not 0 <= label < logits.shape[0]:
        raise ContractViolation(f"label {label} outside [0, {logits.shape[0] - 1}]")
    z = logits - logits.max()
    log_norm = np.log(np.exp(z).sum())
    loss = float(log_norm - z[label])
    grad = softmax(logits)
    grad[label] -= 1.0
    return loss, grad


def cross_entropy_batch(logits, labels):
    """Mean cross-entropy over a (B,K) batch; grad is (B,K), scaled by 1/B."""
    logits = np.asarray(logits)
    labels = np.asarray(labels)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ContractViolation(f"bad batch shapes {logits.shape} / {labels.shape}")
    b, k = logits.shape
    if labels.min() < 0 or labels.max() >= k:
        raise ContractViolation("label outside logit range")
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    picked = z[np.arange(b), labels]
    loss = float((log_norm - picked).mean())
    grad = softmax(logits)
    grad[np.arange(b), labels] -= 1.0
    grad /= b
    return loss, grad


def q_mse_loss(q, action, target):
    """loss = (q[action] - target)^2; grad nonzero only at `action`."""
    q = np.asarray(q)
    if q.ndim != 1:
        raise ContractViolation(f"expected a Q-value vector, got shape {q.shape}")
    if not 0 <= action < q.shape[0]:
        raise ContractViolation(f"action {action} outside [0, {q.shape[0] - 1}]")
    diff = float(q[action]) - float(target)
    grad = np.zeros_like(q)
    grad[action] = 2.0 * diff
    return diff * diff, grad


def q_mse_batch(q, actions, targets):
    """Mean squared error over chosen actions; grad (B,K) scaled by 1/B."""
    q = np.asarray(q)
    actions = np.asarray(actions)
    targets = np.asarray(targets)
    if q.ndim != 2 or actions.shape != (q.shape[0],) or targets.shape != (q.shape[0],):
        raise ContractViolation(f"bad batch shapes {q.shape} / {actions.shape} / {targets.shape}")
    b = q.shape[0]
    rows = np.arange(b)
    diff = q[rows, actions] - targets
    grad = np.zeros_like(q)
    grad[rows, actions] = 2.0 * diff / b
    return float((diff * diff).mean()), grad
