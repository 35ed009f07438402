"""Sketch-category classifier supplying the confidence reward term.

Reuses the Q-network's global conv trunk on a single canvas channel with a
softmax head over the trained categories. Categories outside the roster have
no head and contribute zero reward downstream.
"""

import json

import numpy as np

from .canvas import as_canvas
from .errors import ConfigurationError, ContractViolation, TrainingFault
from .nn import (
    Network,
    adam_init,
    adam_update,
    classifier_spec,
    cross_entropy_batch,
    load_checkpoint,
    save_checkpoint,
    softmax,
)
from .quickdraw import TRAIN_CATEGORIES

DEFAULT_CLS_LR = 1e-4


class SketchClassifier:
    def __init__(self, network, categories):
        if network.spec.fcs[-1].out_features != len(categories):
            raise ContractViolation(
                f"head width {network.spec.fcs[-1].out_features} != {len(categories)} categories"
            )
        self.network = network
        self.categories = tuple(categories)

    @classmethod
    def init(cls, seed, categories=TRAIN_CATEGORIES, m=84):
        spec = classifier_spec(num_classes=len(categories), m=m)
        return cls(Network.init(spec, seed), categories)

    @classmethod
    def load(cls, path):
        bundle = load_checkpoint(path)
        if bundle.kind != "classifier":
            raise ContractViolation(f"checkpoint kind {bundle.kind!r} is not a classifier")
        categories = tuple(bundle.meta.get("categories", ()))
        if not categories:
            raise ContractViolation("classifier checkpoint lacks its category roster")
        m = int(bundle.meta.get("canvas_size", 84))
        spec = classifier_spec(num_classes=len(categories), m=m)
        bundle = load_checkpoint(path, spec=spec)  # re-validate against the exact spec
        return cls(Network(spec, bundle.params), categories)

    def save(self, path, step=0, rng_state=None, extra_meta=None):
        meta = {
            "categories": list(self.categories),
            "canvas_size": self.network.spec.streams[0].input_shape[1],
        }
        if extra_meta:
            meta.update(extra_meta)
        return save_checkpoint(
            path, self.network.spec, self.network.params, step=step, rng_state=rng_state, meta=meta
        )

    def category_index(self, name):
        try:
            return self.categories.index(name)
        except ValueError:
            return None

    def logits(self, canvas):
        canvas = as_canvas(canvas)
        return self.network.forward(canvas[None])

    def probs(self, canvas):
        return softmax(self.logits(canvas))

    def theta(self, canvas, category):
        """Softmax probability of `category` (index or roster name) for the canvas."""
        if isinstance(category, str):
            idx = self.category_index(category)
            if idx is None:
                raise ContractViolation(f"category {category!r} is not in the trained roster")
        else:
            idx = int(category)
            if not 0 <= idx < len(self.categories):
                raise ContractViolation(f"category index {idx} outside [0, {len(self.categories)})")
        return float(self.probs(canvas)[idx])

    def predict(self, canvas):
        return int(np.argmax(self.logits(canvas)))


def _stack_dataset(dataset, categories):
    xs, ys = [], []
    for idx, category in enumerate(categories):
        for record in dataset.records(category, "train"):
            xs.append(dataset.canvas(record))
            ys.append(idx)
    x = np.stack(xs)[:, None, :, :].astype(np.float32)
    y = np.array(ys, dtype=np.int64)
    return x, y


def train_classifier(
    dataset,
    out_path,
    seed=0,
    epochs=5,
    lr=DEFAULT_CLS_LR,
    batch=128,
    categories=TRAIN_CATEGORIES,
    holdout_fraction=0.1,
    log_path=None,
):
    """Cross-entropy training over the rasterized train split.

    A deterministic slice of the data is held out for the accuracy log and
    never trained on. Returns (checkpoint_path, history) where history holds
    one {epoch, loss, holdout_accuracy} record per epoch.
    """
    categories = tuple(categories)
    if len(categories) < 2:
        raise ConfigurationError(f"need at least 2 categories, got {len(categories)}")
    x, y = _stack_dataset(dataset, categories)
    if len(x) < 2:
        raise ConfigurationError("dataset too small to split")

    rng = np.random.Generator(np.random.Philox(seed))
    order = rng.permutation(len(x))
    n_hold = max(1, int(round(len(x) * holdout_fraction)))
    hold_idx, train_idx = order[:n_hold], order[n_hold:]
    if len(train_idx) == 0:
        raise ConfigurationError("holdout fraction leaves no training data")
    x_hold, y_hold = x[hold_idx], y[hold_idx]
    x_train, y_train = x[train_idx], y[train_idx]

    clf = SketchClassifier.init(seed, categories=categories, m=dataset.canvas_size)
    net = clf.network
    adam = adam_init(net.params)
    history = []
    for epoch in range(epochs):
        perm = rng.permutation(len(x_train))
        losses = []
        for start in range(0, len(perm), batch):
            sel = perm[start : start + batch]
            logits, cache = net.forward(x_train[sel], with_cache=True)
            loss, grad = cross_entropy_batch(logits, y_train[sel])
            if not np.isfinite(loss):
                raise TrainingFault(f"non-finite classifier loss at epoch {epoch}")
            grads = net.backward(grad, cache)
            net.params, adam = adam_update(net.params, grads, adam, lr)
            losses.append(loss)
        acc = holdout_accuracy(net, x_hold, y_hold)
        history.append({"epoch": epoch, "loss": float(np.mean(losses)), "holdout_accuracy": acc})

    clf.network = net
    path = clf.save(out_path, step=epochs, extra_meta={"epochs": epochs, "lr": lr, "seed": seed})
    if log_path:
        with open(log_path, "w", encoding="utf-8") as fh:
            for row in history:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    return path, history


def holdout_accuracy(net, x_hold, y_hold, batch=256):
    hits = 0
    for start in range(0, len(x_hold), batch):
        logits = net.forward(x_hold[start : start + batch])
        hits += int((np.argmax(logits, axis=1) == y_hold[start : start + batch]).sum())
    return hits / len(x_hold)
