"""The 2-D CNN: stem conv, a two-conv block with a skip from the pooled
stem, a second pool and three fully connected layers.

    conv 7x7/2 -> BN -> ReLU -> maxpool 2      (= stem)
    conv 3x3 -> BN -> ReLU -> conv 3x3 -> BN -> ReLU
    + stem (add, or concatenate along channels)
    maxpool 2 -> FC -> ReLU -> FC -> ReLU -> FC -> softmax
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ShapeMismatch
from ..serialization import register
from . import ops


@dataclass
class DcnnConfig:
    input_side: int = 64
    n_classes: int = 5
    stem_filters: int = 64
    stem_kernel: int = 7
    stem_stride: int = 2
    block_filters: int = 64
    fc_sizes: tuple = (256, 64)
    pool: int = 2
    skip: str = "add"  # or "concat"
    bn_affine: bool = True
    bn_eps: float = 1e-5
    bn_momentum: float = 0.1
    optimizer: str = "sgd"  # or "adam"
    lr: float = 0.01
    momentum: float = 0.9
    adam_betas: tuple = (0.9, 0.999)
    adam_eps: float = 1e-8
    lr_decay_epoch: int = 20
    lr_decay: float = 0.1
    clip_norm: float | None = 5.0  # global gradient L2 norm cap; None disables
    batch_size: int = 32
    epochs: int = 30
    val_fraction: float = 0.1
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        self.fc_sizes = tuple(self.fc_sizes)
        self.adam_betas = tuple(self.adam_betas)
        if self.skip not in ("add", "concat"):
            raise ValueError("skip must be 'add' or 'concat'")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError("optimizer must be 'sgd' or 'adam'")
        if self.skip == "add" and self.block_filters != self.stem_filters:
            raise ShapeMismatch("additive skip needs block_filters == stem_filters")
        self.shapes()

    def shapes(self) -> dict:
        """Static shape propagation; raises ShapeMismatch on an invalid stack."""
        s = self.input_side
        pad = self.stem_kernel // 2
        stem = ops.conv_output_size(s, self.stem_kernel, self.stem_stride, pad)
        if stem < self.pool:
            raise ShapeMismatch(f"input side {s} too small for this stack")
        p1 = stem // self.pool
        p2 = p1 // self.pool
        if p2 < 1:
            raise ShapeMismatch(f"input side {s} too small for this stack")
        ch = self.block_filters + (self.stem_filters if self.skip == "concat" else 0)
        return {"stem": (self.stem_filters, stem, stem), "pool1": (self.stem_filters, p1, p1),
                "block": (ch, p1, p1), "pool2": (ch, p2, p2), "flat": ch * p2 * p2}

    @property
    def flat_dim(self) -> int:
        return self.shapes()["flat"]


def _he_uniform(rng, shape, fan_in, dtype):
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


@register("dcnn")
class DcnnModel:
    """Network parameters plus BN running statistics and the input
    per-channel mean. Predicts from RGB images."""

    input_kind = "images"

    def __init__(self, config: DcnnConfig, params=None, state=None):
        self.config = config
        self.n_classes = config.n_classes
        dt = np.dtype(config.dtype)
        if params is None:
            params, state = self._init(np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(0,))), dt)
        self.params = params
        self.state = state

    def _init(self, rng, dt):
        c = self.config
        k, f, g = c.stem_kernel, c.stem_filters, c.block_filters
        p = {
            "conv1_w": _he_uniform(rng, (f, 3, k, k), 3 * k * k, dt),
            "conv1_b": np.zeros(f, dt),
            "conv2_w": _he_uniform(rng, (g, f, 3, 3), f * 9, dt),
            "conv2_b": np.zeros(g, dt),
            "conv3_w": _he_uniform(rng, (g, g, 3, 3), g * 9, dt),
            "conv3_b": np.zeros(g, dt),
        }
        st = {"input_mean": np.zeros(3, dt)}
        for i, ch in ((1, f), (2, g), (3, g)):
            if c.bn_affine:
                p[f"bn{i}_gamma"] = np.ones(ch, dt)
                p[f"bn{i}_beta"] = np.zeros(ch, dt)
            st[f"bn{i}_mean"] = np.zeros(ch, dt)
            st[f"bn{i}_var"] = np.ones(ch, dt)
        sizes = (c.flat_dim, *c.fc_sizes, c.n_classes)
        for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
            p[f"fc{i}_w"] = _he_uniform(rng, (n_out, n_in), n_in, dt)
            p[f"fc{i}_b"] = np.zeros(n_out, dt)
        return p, st

    @property
    def n_fc(self):
        return len(self.config.fc_sizes) + 1

    # -- inputs --------------------------------------------------------------

    def prepare(self, images) -> np.ndarray:
        """(N, H, W, 3) uint8 / list of ScalogramImage -> mean-subtracted NCHW floats."""
        if isinstance(images, (list, tuple)):
            images = np.stack([getattr(im, "pixels", im) for im in images])
        x = np.asarray(images)
        if x.ndim == 3:
            x = x[None]
        if x.shape[1:] != (self.config.input_side, self.config.input_side, 3):
            raise ShapeMismatch(f"expected images of shape ({self.config.input_side}, {self.config.input_side}, 3), got {x.shape[1:]}")
        dt = np.dtype(self.config.dtype)
        x = x.astype(dt) / dt.type(255.0) if x.dtype == np.uint8 else x.astype(dt)
        x = x.transpose(0, 3, 1, 2) - self.state["input_mean"].reshape(1, 3, 1, 1)
        return np.ascontiguousarray(x)

    # -- forward / backward --------------------------------------------------

    def _bn(self, i, x, train, caches):
        c = self.config
        out, cache = ops.batchnorm_forward(
            x, self.params.get(f"bn{i}_gamma"), self.params.get(f"bn{i}_beta"),
            self.state[f"bn{i}_mean"], self.state[f"bn{i}_var"], train, c.bn_eps, c.bn_momentum,
        )
        caches[f"bn{i}"] = cache
        return out

    def forward(self, x, train=False):
        """Logits for prepared input ``x``; returns ``(logits, caches)``."""
        c, p, caches = self.config, self.params, {}
        h, caches["conv1"] = ops.conv2d_forward(x, p["conv1_w"], p["conv1_b"], c.stem_stride, c.stem_kernel // 2)
        h = self._bn(1, h, train, caches)
        h, caches["relu1"] = ops.relu_forward(h)
        stem, caches["pool1"] = ops.maxpool_forward(h, c.pool)
        h, caches["conv2"] = ops.conv2d_forward(stem, p["conv2_w"], p["conv2_b"], 1, 1)
        h = self._bn(2, h, train, caches)
        h, caches["relu2"] = ops.relu_forward(h)
        h, caches["conv3"] = ops.conv2d_forward(h, p["conv3_w"], p["conv3_b"], 1, 1)
        h = self._bn(3, h, train, caches)
        h, caches["relu3"] = ops.relu_forward(h)
        h = h + stem if c.skip == "add" else np.concatenate([h, stem], axis=1)
        h, caches["pool2"] = ops.maxpool_forward(h, c.pool)
        caches["flat_shape"] = h.shape
        h = h.reshape(h.shape[0], -1)
        for i in range(1, self.n_fc + 1):
            h, caches[f"fc{i}"] = ops.fc_forward(h, p[f"fc{i}_w"], p[f"fc{i}_b"])
            if i < self.n_fc:
                h, caches[f"fc_relu{i}"] = ops.relu_forward(h)
        return h, caches

    def backward(self, dlogits, caches) -> dict:
        c, g = self.config, {}
        dh = dlogits
        for i in range(self.n_fc, 0, -1):
            if i < self.n_fc:
                dh = ops.relu_backward(dh, caches[f"fc_relu{i}"])
            dh, g[f"fc{i}_w"], g[f"fc{i}_b"] = ops.fc_backward(dh, caches[f"fc{i}"])
        dh = ops.maxpool_backward(dh.reshape(caches["flat_shape"]), caches["pool2"])
        if c.skip == "add":
            dstem = dh
        else:
            dh, dstem = dh[:, : c.block_filters], dh[:, c.block_filters:]
        dh = ops.relu_backward(dh, caches["relu3"])
        dh = self._bn_back(3, dh, caches, g)
        dh, g["conv3_w"], g["conv3_b"] = ops.conv2d_backward(dh, caches["conv3"])
        dh = ops.relu_backward(dh, caches["relu2"])
        dh = self._bn_back(2, dh, caches, g)
        dh, g["conv2_w"], g["conv2_b"] = ops.conv2d_backward(dh, caches["conv2"])
        dh = ops.maxpool_backward(dh + dstem, caches["pool1"])
        dh = ops.relu_backward(dh, caches["relu1"])
        dh = self._bn_back(1, dh, caches, g)
        dx, g["conv1_w"], g["conv1_b"] = ops.conv2d_backward(dh, caches["conv1"])
        g["input"] = dx
        return g

    def _bn_back(self, i, dh, caches, g):
        dx, dgamma, dbeta = ops.batchnorm_backward(dh, caches[f"bn{i}"])
        if dgamma is not None:
            g[f"bn{i}_gamma"], g[f"bn{i}_beta"] = dgamma, dbeta
        return dx

    # -- inference -----------------------------------------------------------

    def logits(self, images, batch_size=128) -> np.ndarray:
        x = self.prepare(images)
        out = [self.forward(x[i:i + batch_size], train=False)[0] for i in range(0, x.shape[0], batch_size)]
        return np.concatenate(out)

    def predict_proba(self, images) -> np.ndarray:
        return ops.softmax(self.logits(images).astype(np.float64))

    def predict(self, images) -> np.ndarray:
        return np.argmax(self.logits(images), axis=1)

    def copy(self) -> "DcnnModel":
        return DcnnModel(copy.deepcopy(self.config), copy.deepcopy(self.params), copy.deepcopy(self.state))

    # -- serialization -------------------------------------------------------

    def get_state(self):
        arrays = {f"param/{k}": v for k, v in self.params.items()}
        arrays.update({f"state/{k}": v for k, v in self.state.items()})
        return {"config": asdict(self.config)}, arrays

    @classmethod
    def from_state(cls, params, arrays):
        cfg = DcnnConfig(**params["config"])
        p = {k[len("param/"):]: v for k, v in arrays.items() if k.startswith("param/")}
        s = {k[len("state/"):]: v for k, v in arrays.items() if k.startswith("state/")}
        return cls(cfg, p, s)
