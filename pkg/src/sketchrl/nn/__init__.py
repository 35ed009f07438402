"""Minimal conv/dense network core: fixed-topology forward/backward passes,
two loss functions, Adam, and portable checkpoints."""

from .adam import AdamState, adam_init, adam_update
from .checkpoint import decode_rng_state, encode_rng_state, load_checkpoint, save_checkpoint
from .losses import (
    cross_entropy_batch,
    cross_entropy_loss,
    q_mse_batch,
    q_mse_loss,
    softmax,
)
from .network import Network
from .specs import (
    Q_NET_PARAM_COUNT,
    ConvSpec,
    FCSpec,
    NetworkSpec,
    StreamSpec,
    classifier_spec,
    param_count,
    q_network_spec,
)

__all__ = [
    "AdamState",
    "adam_init",
    "adam_update",
    "decode_rng_state",
    "encode_rng_state",
    "load_checkpoint",
    "save_checkpoint",
    "cross_entropy_batch",
    "cross_entropy_loss",
    "q_mse_batch",
    "q_mse_loss",
    "softmax",
    "Network",
    "Q_NET_PARAM_COUNT",
    "ConvSpec",
    "FCSpec",
    "NetworkSpec",
    "StreamSpec",
    "classifier_spec",
    "param_count",
    "q_network_spec",
]
