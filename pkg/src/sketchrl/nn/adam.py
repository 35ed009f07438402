"""Adam with bias correction.

State is a pair of moment dicts keyed like the parameter dict plus a step
counter. Updates return fresh parameter arrays (so a target network holding
the previous dict is unaffected); the moment arrays update in place.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation, TrainingFault

BETA1 = 0.9
BETA2 = 0.999
EPS_ADAM = 1e-8


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = field(default=EPS_ADAM)


def adam_init(params):
    return AdamState(
        m={k: np.zeros_like(p) for k, p in params.items()},
        v={k: np.zeros_like(p) for k, p in params.items()},
        t=0,
    )


def adam_update(params, grads, state, lr):
    """One Adam step. Halts with diagnostics on any non-finite gradient."""
    for name, g in grads.items():
        if name not in params:
            raise ContractViolation(f"gradient for unknown parameter {name!r}")
        if g.shape != params[name].shape:
            raise ContractViolation(
                f"gradient shape {g.shape} != param shape {params[name].shape} for {name!r}"
            )
        if not np.isfinite(g).all():
            bad = int(np.size(g) - np.isfinite(g).sum())
            raise TrainingFault(f"non-finite gradient in {name!r} ({bad} entries) at step t={state.t}")

    t = state.t + 1
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    new_params = {}
    for name, p in params.items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        step = lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        new_params[name] = p - step.astype(p.dtype)
    state.t = t
    return new_params, state
