"""Central finite differences for the layer gradient checks."""

import numpy as np

STEP = 1e-3


def numeric_grad(f, x, step=STEP):
    """d f / d x by central differences; ``f`` reads ``x`` in place."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + step
        fp = f()
        x[i] = old - step
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * step)
    return g


def rel_error(a, b):
    a, b = np.ravel(a), np.ravel(b)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / scale)


def distinct_values(rng, shape, spacing=0.01):
    """Random array whose entries differ pairwise by at least ``spacing``."""
    n = int(np.prod(shape))
    return (rng.permutation(n) * spacing - n * spacing / 2).reshape(shape)


def away_from_zero(rng, shape, margin=0.05):
    x = rng.normal(size=shape)
    return np.where(np.abs(x) < margin, np.sign(x + 1e-300) * margin + x, x)


def layer_checks(rng):
    """One random instance per layer kind; returns ``{layer: rel_error}``."""
    from ramanwt.dcnn import ops

    out = {}

    # convolution: input, kernel and bias gradients
    n, c, f = 2, 3, 4
    stride, pad = int(rng.integers(1, 3)), int(rng.integers(0, 2))
    x = rng.normal(size=(n, c, 5, 5))
    w = rng.normal(size=(f, c, 3, 3))
    b = rng.normal(size=f)
    y, cache = ops.conv2d_forward(x, w, b, stride, pad)
    R = rng.normal(size=y.shape)
    dx, dw, db = ops.conv2d_backward(R, cache)

    def loss():
        return float(np.sum(ops.conv2d_forward(x, w, b, stride, pad)[0] * R))

    out["conv"] = max(rel_error(dx, numeric_grad(loss, x)), rel_error(dw, numeric_grad(loss, w)),
                      rel_error(db, numeric_grad(loss, b)))

    # ReLU away from the kink
    x = away_from_zero(rng, (3, 4, 3, 3))
    y, mask = ops.relu_forward(x)
    R = rng.normal(size=y.shape)
    out["relu"] = rel_error(ops.relu_backward(R, mask),
                            numeric_grad(lambda: float(np.sum(ops.relu_forward(x)[0] * R)), x))

    # max pooling on distinct values
    x = distinct_values(rng, (2, 3, 4, 6))
    y, cache = ops.maxpool_forward(x, 2)
    R = rng.normal(size=y.shape)
    out["maxpool"] = rel_error(ops.maxpool_backward(R, cache),
                               numeric_grad(lambda: float(np.sum(ops.maxpool_forward(x, 2)[0] * R)), x))

    # batch norm, training mode: mean and variance paths included
    x = rng.normal(1.0, 2.0, size=(4, 3, 3, 3))
    gamma = rng.uniform(0.5, 1.5, 3)
    beta = rng.normal(size=3)

    def bn(xx, gg, bb):
        return ops.batchnorm_forward(xx, gg, bb, np.zeros(3), np.ones(3), train=True)

    y, cache = bn(x, gamma, beta)
    R = rng.normal(size=y.shape)
    dx, dg, dbeta = ops.batchnorm_backward(R, cache)

    def loss():
        return float(np.sum(bn(x, gamma, beta)[0] * R))

    out["batchnorm"] = max(rel_error(dx, numeric_grad(loss, x)), rel_error(dg, numeric_grad(loss, gamma)),
                           rel_error(dbeta, numeric_grad(loss, beta)))

    # fully connected
    x = rng.normal(size=(5, 7))
    w = rng.normal(size=(4, 7))
    b = rng.normal(size=4)
    y, cache = ops.fc_forward(x, w, b)
    R = rng.normal(size=y.shape)
    dx, dw, db = ops.fc_backward(R, cache)

    def loss():
        return float(np.sum(ops.fc_forward(x, w, b)[0] * R))

    out["fc"] = max(rel_error(dx, numeric_grad(loss, x)), rel_error(dw, numeric_grad(loss, w)),
                    rel_error(db, numeric_grad(loss, b)))

    # softmax cross-entropy
    z = rng.normal(size=(6, 5))
    t = np.eye(5)[rng.integers(0, 5, 6)]
    _, dz = ops.softmax_crossentropy(z, t)
    out["softmax_ce"] = rel_error(dz, numeric_grad(lambda: ops.softmax_crossentropy(z, t)[0], z))
    return out
