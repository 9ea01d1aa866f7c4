from __future__ import annotations

import csv
import logging
import warnings

import numpy as np

from ..errors import Diverged
from . import ops
from .network import DcnnConfig, DcnnModel

log = logging.getLogger(__name__)

HISTORY_FIELDS = ("epoch", "train_loss", "train_acc", "val_loss", "val_acc")


class Sgd:
    def __init__(self, params, lr, momentum):
        self.lr, self.momentum = lr, momentum
        self.velocity = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params, grads):
        for k, p in params.items():
            v = self.velocity[k]
            v *= self.momentum
            v += grads[k]
            p -= self.lr * v


class Adam:
    def __init__(self, params, lr, betas, eps):
        self.lr, (self.b1, self.b2), self.eps = lr, betas, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1 - self.b1**self.t
        c2 = 1 - self.b2**self.t
        for k, p in params.items():
            g = grads[k]
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            p -= (self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)).astype(p.dtype)


def clip_gradients(grads, params, max_norm):
    """Rescale ``grads`` in place so their joint L2 norm is at most ``max_norm``.

    Returns the norm before clipping.
    """
    norm = float(np.sqrt(sum(float(np.sum(np.square(grads[k], dtype=np.float64))) for k in params)))
    if max_norm is not None and norm > max_norm:
        scale = max_norm / norm
        for k in params:
            grads[k] *= scale
    return norm


def _as_array(images):
    if isinstance(images, (list, tuple)):
        return np.stack([getattr(im, "pixels", im) for im in images])
    return np.asarray(images)


def evaluate(model: DcnnModel, images, labels, batch_size=128):
    """Mean loss and accuracy in inference mode."""
    logits = model.logits(images, batch_size).astype(np.float64)
    labels = np.asarray(labels)
    loss, _ = ops.softmax_crossentropy(logits, np.eye(model.n_classes)[labels])
    return loss, float(np.mean(np.argmax(logits, axis=1) == labels))


def train(images, labels, cfg: DcnnConfig, val_images=None, val_labels=None, progress=None):
    """Mini-batch training with per-epoch seeded shuffling.

    Parameters
    ----------
    images : (N, H, W, 3) uint8 array or list of ScalogramImage
    labels : (N,) class indices
    cfg : DcnnConfig
    val_images, val_labels : optional held-out set. When omitted,
        ``cfg.val_fraction`` of the training data is held out (stratified).
    progress : optional callable ``progress(history_row)`` per epoch.

    Returns
    -------
    model : DcnnModel
    history : list of dicts with keys ``HISTORY_FIELDS``

    Raises
    ------
    Diverged
        if a mini-batch loss is not finite; carries the model as of the
        last completed epoch.
    """
    x_all = _as_array(images)
    y_all = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(y_all, minlength=cfg.n_classes)
    if np.any(counts < 10):
        warnings.warn(f"small classes in training set: {counts.tolist()}", stacklevel=2)

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    if val_images is None and cfg.val_fraction > 0:
        val_idx = []
        for c in range(cfg.n_classes):
            idx = np.flatnonzero(y_all == c)
            k = int(round(cfg.val_fraction * idx.size))
            val_idx.extend(rng.permutation(idx)[:k].tolist())
        val_mask = np.zeros(y_all.size, bool)
        val_mask[val_idx] = True
        val_images, val_labels = x_all[val_mask], y_all[val_mask]
        x_all, y_all = x_all[~val_mask], y_all[~val_mask]
    elif val_images is not None:
        val_images, val_labels = _as_array(val_images), np.asarray(val_labels)

    model = DcnnModel(cfg)
    dt = np.dtype(cfg.dtype)
    model.state["input_mean"] = (x_all.reshape(-1, 3).astype(np.float64).mean(axis=0) / 255.0).astype(dt)
    x_prep = model.prepare(x_all)
    onehot = np.eye(cfg.n_classes, dtype=dt)[y_all]
    opt = (Sgd(model.params, cfg.lr, cfg.momentum) if cfg.optimizer == "sgd"
           else Adam(model.params, cfg.lr, cfg.adam_betas, cfg.adam_eps))

    history = []
    checkpoint = model.copy()
    n = x_prep.shape[0]
    for epoch in range(1, cfg.epochs + 1):
        if cfg.lr_decay_epoch and epoch > cfg.lr_decay_epoch:
            opt.lr = cfg.lr * cfg.lr_decay ** ((epoch - 1) // cfg.lr_decay_epoch)
        order = rng.permutation(n)
        tot_loss = tot_correct = seen = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            if idx.size < 2:
                continue
            logits, caches = model.forward(x_prep[idx], train=True)
            loss, dlogits = ops.softmax_crossentropy(logits, onehot[idx])
            if not np.isfinite(loss):
                raise Diverged(f"non-finite loss at epoch {epoch}, sample offset {start}", checkpoint, history)
            grads = model.backward(dlogits.astype(dt), caches)
            # the first FC layer has a wide non-negative input, so early steps
            # can overshoot badly at the default rate; cap them
            clip_gradients(grads, model.params, cfg.clip_norm)
            opt.step(model.params, grads)
            tot_loss += loss * idx.size
            tot_correct += int(np.sum(np.argmax(logits, axis=1) == y_all[idx]))
            seen += idx.size
        row = {"epoch": epoch, "train_loss": tot_loss / seen, "train_acc": tot_correct / seen,
               "val_loss": float("nan"), "val_acc": float("nan")}
        if val_images is not None and len(val_labels):
            row["val_loss"], row["val_acc"] = evaluate(model, val_images, val_labels)
        history.append(row)
        log.info("epoch %d loss %.4f acc %.4f val_acc %.4f", epoch, row["train_loss"], row["train_acc"], row["val_acc"])
        if progress is not None:
            progress(row)
        checkpoint = model.copy()
    return model, history


def write_history(history, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_FIELDS)
        for row in history:
            w.writerow([row["epoch"]] + [repr(float(row[k])) for k in HISTORY_FIELDS[1:]])
