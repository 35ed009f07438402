"""Training loops: supervised pre-training on oracle episodes and Double
Q-learning over the drawing environment.

Determinism contract: given (seed, config, references) every run is
bit-reproducible on one platform. All randomness flows from counter-based
generators seeded here; no wall-clock or filesystem-order dependence.
"""

import json
from dataclasses import dataclass

import numpy as np

from .canvas import as_canvas
from .config import TrainerConfig, config_to_dict
from .env import DrawingEnv, local_patch
from .errors import ConfigurationError, TrainingFault
from .nn import Network, adam_init, adam_update, cross_entropy_batch, load_checkpoint, q_mse_batch, q_network_spec, save_checkpoint
from .nn.checkpoint import encode_rng_state
from .oracle import emit_supervised_batch, episode_samples, generate_episode
from .policy import epsilon_greedy, td_target_batch
from .replay import ReplayBuffer, Transition
from .rewards import eval_similarity_percent, similarity_s, step_reward

_SEED_SPAN = 2**62
_HOLDOUT_SEED_OFFSET = 1_000_003  # fixed offset isolating held-out data from the epoch stream


@dataclass
class PretrainResult:
    checkpoint_path: str
    history: list


@dataclass
class TrainResult:
    checkpoint_path: str
    episodes: list
    steps: int


@dataclass
class ReferenceItem:
    """A drawable target: category label, canvas, and (if the classifier
    knows the category) the index of its head."""

    category: str
    canvas: np.ndarray
    theta_index: "int | None" = None


def references_from_dataset(dataset, classifier=None, categories=None, split="train"):
    items = []
    for category in categories or dataset.categories:
        idx = classifier.category_index(category) if classifier is not None else None
        for record in dataset.records(category, split):
            items.append(ReferenceItem(category=category, canvas=dataset.canvas(record), theta_index=idx))
    if not items:
        raise ConfigurationError("dataset yielded no reference sketches")
    return items


def _stack_samples(samples):
    glob = np.stack([s[0] for s in samples])
    loc = np.stack([s[1] for s in samples])[:, None, :, :]
    labels = np.array([s[2] for s in samples], dtype=np.int64)
    return glob, loc, labels


# ---------------------------------------------------------------------------
# Supervised pre-training
# ---------------------------------------------------------------------------


def pretrain(cfg: TrainerConfig, out_path, log_path=None):
    """One oracle episode per epoch, one cross-entropy Adam update on its steps.

    Logs per-epoch loss and accuracy on a fixed held-out oracle batch. On a
    training fault the last good state is checkpointed before the error
    propagates.
    """
    cfg.validate()
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    net = Network.init(q_network_spec(cfg.fc1_activation, m=cfg.canvas_size), cfg.seed)
    adam = adam_init(net.params)

    hold = emit_supervised_batch(cfg.seed + _HOLDOUT_SEED_OFFSET, cfg.holdout_batch, m=cfg.canvas_size)
    hold_glob, hold_loc, hold_labels = _stack_samples(hold)

    history = []
    log_fh = open(log_path, "w", encoding="utf-8") if log_path else None
    try:
        for epoch in range(cfg.pretrain_epochs):
            episode_seed = int(rng.integers(0, _SEED_SPAN))
            n_strokes = int(rng.integers(cfg.pretrain_stroke_min, cfg.pretrain_stroke_max + 1))
            episode = generate_episode(
                episode_seed, n_strokes, m=cfg.canvas_size, max_strokes=cfg.pretrain_total_strokes
            )
            glob, loc, labels = _stack_samples(episode_samples(episode))

            try:
                logits, cache = net.forward(glob, loc, with_cache=True)
                loss, grad = cross_entropy_batch(logits, labels)
                if not np.isfinite(loss):
                    raise TrainingFault(f"non-finite pre-training loss at epoch {epoch}")
                grads = net.backward(grad, cache)
                net.params, adam = adam_update(net.params, grads, adam, cfg.lr_pretrain)
            except TrainingFault:
                _save_qnet(out_path, net, adam, epoch, rng, cfg, phase="pretrain", fault=True)
                raise

            acc = _action_accuracy(net, hold_glob, hold_loc, hold_labels)
            row = {"epoch": epoch, "loss": float(loss), "holdout_accuracy": acc}
            history.append(row)
            if log_fh:
                log_fh.write(json.dumps(row, sort_keys=True) + "\n")
    finally:
        if log_fh:
            log_fh.close()

    _save_qnet(out_path, net, adam, cfg.pretrain_epochs, rng, cfg, phase="pretrain")
    return PretrainResult(checkpoint_path=str(out_path), history=history)


def _action_accuracy(net, glob, loc, labels, batch=128):
    hits = 0
    for start in range(0, len(labels), batch):
        logits = net.forward(glob[start : start + batch], loc[start : start + batch])
        hits += int((np.argmax(logits, axis=1) == labels[start : start + batch]).sum())
    return hits / len(labels)


def _save_qnet(path, net, adam, step, rng, cfg, phase, fault=False):
    meta = {"phase": phase, "config": config_to_dict(cfg)}
    if fault:
        meta["fault"] = "training halted; this is the last good state"
    save_checkpoint(
        path, net.spec, net.params, adam=adam, step=step, rng_state=encode_rng_state(rng), meta=meta
    )


# ---------------------------------------------------------------------------
# Double Q-learning
# ---------------------------------------------------------------------------


def _batch_streams(snapshots, refs, m):
    """Vectorized stream rebuild for a sampled batch.

    Bit-identical to env.build_streams per sample: the distance channel is
    computed in float32 with the same elementwise operations.
    """
    b = len(snapshots)
    glob = np.empty((b, 4, m, m), dtype=np.float32)
    loc = np.empty((b, 1, 11, 11), dtype=np.float32)
    px = np.empty(b, dtype=np.float32)
    py = np.empty(b, dtype=np.float32)
    for i, (snap, ref) in enumerate(zip(snapshots, refs)):
        canvas = snap.canvas()
        glob[i, 0] = canvas
        glob[i, 1] = ref
        glob[i, 3] = 1.0 if snap.pen_down else 0.0
        loc[i, 0] = local_patch(canvas, snap.pen_x, snap.pen_y)
        px[i] = snap.pen_x
        py[i] = snap.pen_y
    axis = np.arange(m, dtype=np.float32)
    glob[:, 2] = np.hypot(
        axis[None, None, :] - px[:, None, None], axis[None, :, None] - py[:, None, None]
    ) / np.float32(m)
    return glob, loc


class _DoubleQ:
    """Online/target pair, or the coin-flip two-estimator variant.

    In target-network mode the bootstrap max_a Q'(s',a) is memoized per
    (transition, target version): transitions are immutable and the target
    net only changes on sync, so each value is computed once and reused
    across the many times replay resamples that transition.
    """

    def __init__(self, cfg, params):
        spec = q_network_spec(cfg.fc1_activation, m=cfg.canvas_size)
        self.mode = cfg.double_q_mode
        self.net_a = Network(spec, params)
        self.adam_a = adam_init(self.net_a.params)
        if self.mode == "coin_flip":
            self.net_b = self.net_a.copy()
            self.adam_b = adam_init(self.net_b.params)
        else:
            self.target_params = {k: v.copy() for k, v in self.net_a.params.items()}
            self.target_version = 0
            self._boot_cache = {}

    def q_values(self, glob, loc):
        """Behavior values: the online net, or the mean of both estimators."""
        if self.mode == "coin_flip":
            return (self.net_a.forward(glob, loc) + self.net_b.forward(glob, loc)) / 2.0
        return self.net_a.forward(glob, loc)

    def sync(self):
        if self.mode != "coin_flip":
            self.target_params = {k: v.copy() for k, v in self.net_a.params.items()}
            self.target_version += 1
            self._boot_cache.clear()

    def _bootstraps(self, ids, batch, ref_canvases, m):
        """max_a Q'(s',a) per sampled transition, via the memo."""
        fresh = []
        seen = set()
        for tid, tr in zip(ids, batch):
            if tr.terminal or tid in self._boot_cache or tid in seen:
                continue
            seen.add(tid)
            fresh.append((tid, tr))
        if fresh:
            glob, loc = _batch_streams(
                [tr.next_state for _, tr in fresh], [ref_canvases[tr.ref_id] for _, tr in fresh], m
            )
            next_q = Network(self.net_a.spec, self.target_params).forward(glob, loc)
            for (tid, _), value in zip(fresh, next_q.max(axis=1)):
                self._boot_cache[tid] = float(value)
        return np.array([0.0 if tr.terminal else self._boot_cache[tid] for tid, tr in zip(ids, batch)])

    def update(self, ids, batch, ref_canvases, cfg, coin):
        rewards = np.array([t.reward for t in batch], dtype=np.float64)
        terminals = np.array([t.terminal for t in batch], dtype=bool)
        refs = [ref_canvases[t.ref_id] for t in batch]
        glob, loc = _batch_streams([t.state for t in batch], refs, cfg.canvas_size)
        if self.mode == "coin_flip":
            learner, learner_adam, other = (
                (self.net_a, self.adam_a, self.net_b) if coin == 0 else (self.net_b, self.adam_b, self.net_a)
            )
            next_glob, next_loc = _batch_streams([t.next_state for t in batch], refs, cfg.canvas_size)
            next_q = other.forward(next_glob, next_loc)
            targets = td_target_batch(rewards, terminals, next_q, cfg.gamma)
        else:
            learner, learner_adam = self.net_a, self.adam_a
            targets = rewards + cfg.gamma * np.where(
                terminals, 0.0, self._bootstraps(ids, batch, ref_canvases, cfg.canvas_size)
            )
        actions = np.array([t.action for t in batch], dtype=np.int64)
        q, cache = learner.forward(glob, loc, with_cache=True)
        loss, grad = q_mse_batch(q, actions, targets.astype(q.dtype))
        if not np.isfinite(loss):
            raise TrainingFault("non-finite Q loss")
        grads = learner.backward(grad, cache)
        learner.params, _ = adam_update(learner.params, grads, learner_adam, cfg.lr_q)
        return loss

    @property
    def exported(self):
        return self.net_a, self.adam_a


def train(cfg: TrainerConfig, references, pretrained_path, out_path, classifier=None, log_path=None,
          snapshot_dir=None):
    """Q-learning over the drawing MDP for cfg.max_total_strokes env steps.

    Each episode draws a reference uniformly from `references`; behavior is
    epsilon-greedy on the online net; one Adam update per step once the
    replay buffer holds a full batch; the target net syncs every
    cfg.target_update steps. Returns the final checkpoint plus the per-episode
    log records.
    """
    cfg.validate()
    if isinstance(references, ReferenceItem):
        references = [references]
    if not references:
        raise ConfigurationError("no references to train on")

    spec = q_network_spec(cfg.fc1_activation, m=cfg.canvas_size)
    bundle = load_checkpoint(pretrained_path, spec=spec)
    dq = _DoubleQ(cfg, bundle.params)

    rng = np.random.Generator(np.random.Philox(cfg.seed))
    replay = ReplayBuffer(cfg.replay_size)
    ref_canvases = [as_canvas(item.canvas, cfg.canvas_size) for item in references]

    rcfg = cfg.reward
    episodes = []
    steps_done = 0
    log_fh = open(log_path, "w", encoding="utf-8") if log_path else None
    try:
        while steps_done < cfg.max_total_strokes:
            ref_id = int(rng.integers(0, len(references)))
            item = references[ref_id]
            reference = ref_canvases[ref_id]
            env = DrawingEnv(reference, total_strokes=rcfg.total_strokes, m=cfg.canvas_size)
            s_k = similarity_s(env.generated, reference, rcfg.alpha_sim)
            sum_reward = 0.0
            sum_pixel_reward = 0.0
            episode_steps = 0

            while not env.done and steps_done < cfg.max_total_strokes:
                k = env.k
                state = env.snapshot()
                glob, loc = _batch_streams([state], [reference], cfg.canvas_size)
                q = dq.q_values(glob, loc)[0]
                action = epsilon_greedy(q, cfg.epsilon, rng)
                info = env.step(action)
                s_k1 = similarity_s(env.generated, reference, rcfg.alpha_sim)

                if k < rcfg.pixel_strokes:
                    theta = 0.0
                elif classifier is not None and item.theta_index is not None:
                    theta = classifier.theta(env.generated, item.theta_index)
                else:
                    theta = 0.0
                r = step_reward(rcfg, k, info.slow_flag, s_k, s_k1, theta)
                if k < rcfg.pixel_strokes:
                    sum_pixel_reward += s_k - s_k1
                sum_reward += r

                replay.push(Transition(state, action, r, env.snapshot(), info.terminal, ref_id=ref_id))
                s_k = s_k1
                steps_done += 1
                episode_steps += 1

                if len(replay) >= cfg.batch:
                    try:
                        _update_from_replay(dq, replay, ref_canvases, cfg, rng)
                    except TrainingFault:
                        net, adam = dq.exported
                        _save_qnet(out_path, net, adam, steps_done, rng, cfg, phase="train", fault=True)
                        raise
                if steps_done % cfg.target_update == 0:
                    dq.sync()
                if snapshot_dir and cfg.snapshot_every and steps_done % cfg.snapshot_every == 0:
                    net, adam = dq.exported
                    _save_qnet(
                        f"{snapshot_dir}/step{steps_done:08d}.ckpt", net, adam, steps_done, rng, cfg, "train"
                    )

            row = {
                "episode": len(episodes),
                "category": item.category,
                "steps": episode_steps,
                "sum_reward": float(sum_reward),
                "sum_pixel_reward": float(sum_pixel_reward),
                "s_final": float(s_k),
                "similarity_pct": eval_similarity_percent(env.generated, reference),
                "epsilon": cfg.epsilon,
                "lr": cfg.lr_q,
            }
            episodes.append(row)
            if log_fh:
                log_fh.write(json.dumps(row, sort_keys=True) + "\n")
    finally:
        if log_fh:
            log_fh.close()

    net, adam = dq.exported
    _save_qnet(out_path, net, adam, steps_done, rng, cfg, phase="train")
    return TrainResult(checkpoint_path=str(out_path), episodes=episodes, steps=steps_done)


def _update_from_replay(dq, replay, ref_canvases, cfg, rng):
    pairs = replay.sample_with_ids(cfg.batch, rng)
    coin = int(rng.integers(0, 2)) if cfg.double_q_mode == "coin_flip" else 0
    ids = [tid for tid, _ in pairs]
    batch = [tr for _, tr in pairs]
    return dq.update(ids, batch, ref_canvases, cfg, coin)
