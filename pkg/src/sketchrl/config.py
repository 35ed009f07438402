"""Run configuration.

Config files are flat JSON. Every hyperparameter listed in the experiment
table is accepted (and emitted) under its published name verbatim, alongside
snake_case canonical keys. Three published names appear twice in the table
(once per training phase); the verbatim key carries the Q-learning phase
value and the pre-training phase value lives under its canonical key only
(lr_pretrain, loss_pretrain, pretrain_total_strokes).
"""

import json
import re
from dataclasses import asdict, dataclass, field

from .errors import ConfigurationError


@dataclass
class RewardConfig:
    alpha_sim: float = 1000.0
    p_step: float = 0.02
    pixel_strokes: int = 100
    total_strokes: int = 150
    slow_threshold: int = 5

    def validate(self):
        if self.pixel_strokes > self.total_strokes:
            raise ConfigurationError(
                f"pixel_strokes {self.pixel_strokes} exceeds total_strokes {self.total_strokes}"
            )
        if self.alpha_sim <= 0:
            raise ConfigurationError("alpha_sim must be positive")
        if self.p_step < 0:
            raise ConfigurationError("p_step must be non-negative")


@dataclass
class TrainerConfig:
    gamma: float = 0.9
    epsilon: float = 0.1
    batch: int = 128
    lr_pretrain: float = 1e-5
    lr_q: float = 1e-6
    target_update: int = 10_000
    max_total_strokes: int = 150_000
    pretrain_epochs: int = 60_000
    seed: int = 0
    replay_size: int = 10_000
    canvas_size: int = 84
    local_patch_size: int = 11
    num_actions: int = 242
    optimizer: str = "Adam"
    loss_pretrain: str = "Categorical Cross-Entropy"
    loss_q: str = "Mean squared error"
    pretrain_total_strokes: int = 100
    pretrain_stroke_min: int = 1
    pretrain_stroke_max: int = 100
    train_size: int = 3000
    double_q_mode: str = "target_network"  # or "coin_flip"
    fc1_activation: str = "linear"
    snapshot_every: int = 0  # extra checkpoint cadence in steps; 0 disables
    holdout_batch: int = 256  # held-out sample count for pre-training accuracy
    reward: RewardConfig = field(default_factory=RewardConfig)

    def validate(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigurationError(f"gamma must be in [0,1], got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigurationError(f"epsilon must be in [0,1], got {self.epsilon}")
        if self.batch < 1:
            raise ConfigurationError("batch must be >= 1")
        if self.optimizer != "Adam":
            raise ConfigurationError(f"only the Adam optimizer is implemented, got {self.optimizer!r}")
        if self.double_q_mode not in ("target_network", "coin_flip"):
            raise ConfigurationError(f"unknown double_q_mode {self.double_q_mode!r}")
        if self.fc1_activation not in ("linear", "relu"):
            raise ConfigurationError(f"fc1_activation must be linear or relu, got {self.fc1_activation!r}")
        if not 1 <= self.pretrain_stroke_min <= self.pretrain_stroke_max <= self.pretrain_total_strokes:
            raise ConfigurationError("pre-training stroke range must satisfy 1 <= min <= max <= total")
        if self.replay_size < 1 or self.target_update < 1:
            raise ConfigurationError("replay_size and target_update must be >= 1")
        self.reward.validate()
        return self


# Published hyperparameter names, verbatim, mapped to canonical fields.
TABLE_ALIASES = {
    "Canvas size": "canvas_size",
    "Local patch size": "local_patch_size",
    "Number of actions": "num_actions",
    "Discount (γ)": "gamma",
    "Experience replay size": "replay_size",
    "Batch size": "batch",
    "Optimizer": "optimizer",
    "Epochs": "pretrain_epochs",
    "Strokes per Epoch": "strokes_per_epoch",
    "Learning rate": "lr_q",
    "Loss function": "loss_q",
    "Target update frequency": "target_update",
    "Epsilon": "epsilon",
    "pixel_strokes": "pixel_strokes",
    "total_strokes": "total_strokes",
    "max_total_strokes": "max_total_strokes",
    "Train dataset size": "train_size",
    "Similarity scale": "alpha_sim",
    "P_step": "p_step",
}

_REWARD_FIELDS = {"alpha_sim", "p_step", "pixel_strokes", "total_strokes", "slow_threshold"}
_TRAINER_FIELDS = {k for k in TrainerConfig.__dataclass_fields__ if k != "reward"}


def _parse_stroke_range(value):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return int(value[0]), int(value[1])
    nums = re.findall(r"\d+", str(value))
    if len(nums) != 2:
        raise ConfigurationError(f"cannot parse stroke range from {value!r}")
    return int(nums[0]), int(nums[1])


def config_from_dict(data):
    """Build a validated TrainerConfig from a flat dict of canonical and/or
    published-name keys. Conflicting duplicate values and unknown keys error."""
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a JSON object")
    resolved = {}

    def put(field_name, value, source_key):
        if field_name in resolved and resolved[field_name] != value:
            raise ConfigurationError(
                f"key {source_key!r} conflicts with an earlier value for {field_name!r}"
            )
        resolved[field_name] = value

    for key, value in data.items():
        name = TABLE_ALIASES.get(key, key)
        if name == "strokes_per_epoch":
            lo, hi = _parse_stroke_range(value)
            put("pretrain_stroke_min", lo, key)
            put("pretrain_stroke_max", hi, key)
        elif name == "canvas_size" and isinstance(value, str):
            nums = re.findall(r"\d+", value)
            if len(set(nums)) != 1:
                raise ConfigurationError(f"canvas must be square, got {value!r}")
            put("canvas_size", int(nums[0]), key)
        elif name == "local_patch_size" and isinstance(value, str):
            nums = re.findall(r"\d+", value)
            if len(set(nums)) != 1:
                raise ConfigurationError(f"local patch must be square, got {value!r}")
            put("local_patch_size", int(nums[0]), key)
        elif name in _REWARD_FIELDS or name in _TRAINER_FIELDS:
            put(name, value, key)
        else:
            raise ConfigurationError(f"unknown config key {key!r}")

    reward_kwargs = {k: resolved.pop(k) for k in list(resolved) if k in _REWARD_FIELDS}
    cfg = TrainerConfig(reward=RewardConfig(**reward_kwargs), **resolved)
    _coerce_numeric_fields(cfg)
    return cfg.validate()


def _coerce_numeric_fields(cfg):
    for obj in (cfg, cfg.reward):
        for name, f in obj.__dataclass_fields__.items():
            tname = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
            if tname not in ("int", "float"):
                continue
            value = getattr(obj, name)
            if isinstance(value, (bool, str)):
                raise ConfigurationError(f"config field {name!r} must be numeric, got {value!r}")
            if tname == "int":
                if float(value) != int(value):
                    raise ConfigurationError(f"config field {name!r} must be an integer, got {value!r}")
                setattr(obj, name, int(value))
            else:
                setattr(obj, name, float(value))


def config_to_dict(cfg):
    """Flat dict with canonical keys plus every published name verbatim."""
    flat = asdict(cfg)
    flat.update(flat.pop("reward"))
    for alias, name in TABLE_ALIASES.items():
        if name == "strokes_per_epoch":
            flat[alias] = f"{cfg.pretrain_stroke_min}-{cfg.pretrain_stroke_max}"
        else:
            flat[alias] = flat[name]
    return flat


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    return path
