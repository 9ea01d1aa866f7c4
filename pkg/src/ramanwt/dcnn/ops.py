"""Forward and backward passes of the network's layers.

Every ``*_forward`` returns ``(out, cache)``; the matching ``*_backward``
takes the upstream gradient and that cache. Tensors are NCHW.
"""

from __future__ import annotations

import numpy as np

from ..errors import BatchTooSmall, ShapeMismatch


def conv_output_size(size, kernel, stride=1, pad=0):
    return (size + 2 * pad - kernel) // stride + 1


def _im2col(x, kh, kw, stride, pad):
    """Columns of shape (C*kh*kw, N*Ho*Wo), rows ordered (c, i, j)."""
    n, c, h, w = x.shape
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    ho = conv_output_size(h, kh, stride, pad)
    wo = conv_output_size(w, kw, stride, pad)
    cols = np.empty((c, kh, kw, n, ho, wo), dtype=x.dtype)
    xt = x.transpose(1, 0, 2, 3)
    for i in range(kh):
        for j in range(kw):
            cols[:, i, j] = xt[:, :, i:i + stride * ho:stride, j:j + stride * wo:stride]
    return cols.reshape(c * kh * kw, n * ho * wo), ho, wo


def conv2d_forward(x, w, b, stride=1, pad=0):
    """Cross-correlation ``y[f] = b[f] + sum_c w[f, c] * x[c]``.

    ``x`` is (N, C, H, W), ``w`` is (F, C, kh, kw), ``b`` is (F,).
    """
    n, c, h, wd = x.shape
    f, cw, kh, kw = w.shape
    if c != cw:
        raise ShapeMismatch(f"input has {c} channels, kernel expects {cw}")
    if stride < 1:
        raise ShapeMismatch("stride must be >= 1")
    if h + 2 * pad < kh or wd + 2 * pad < kw:
        raise ShapeMismatch(f"kernel {kh}x{kw} does not fit padded input {h + 2 * pad}x{wd + 2 * pad}")
    cols, ho, wo = _im2col(x, kh, kw, stride, pad)
    out = w.reshape(f, -1) @ cols + b[:, None]
    out = out.reshape(f, n, ho, wo).transpose(1, 0, 2, 3)
    return np.ascontiguousarray(out), (x.shape, cols, w, stride, pad)


def conv2d_backward(dout, cache):
    """Returns ``(dx, dw, db)``."""
    (n, c, h, wd), cols, w, stride, pad = cache
    f, _, kh, kw = w.shape
    ho, wo = dout.shape[2:]
    dmat = dout.transpose(1, 0, 2, 3).reshape(f, -1)
    dw = (dmat @ cols.T).reshape(w.shape)
    db = dmat.sum(axis=1)
    dcols = (w.reshape(f, -1).T @ dmat).reshape(c, kh, kw, n, ho, wo)
    dxp = np.zeros((c, n, h + 2 * pad, wd + 2 * pad), dtype=dout.dtype)
    for i in range(kh):
        for j in range(kw):
            dxp[:, :, i:i + stride * ho:stride, j:j + stride * wo:stride] += dcols[:, i, j]
    dx = dxp[:, :, pad:pad + h, pad:pad + wd] if pad else dxp
    return np.ascontiguousarray(dx.transpose(1, 0, 2, 3)), dw, db


def relu_forward(x):
    return np.maximum(x, 0), x > 0


def relu_backward(dout, mask):
    return dout * mask


def maxpool_forward(x, window=2, stride=None):
    """Max over non-overlapping ``window x window`` blocks.

    Trailing rows/columns that do not fill a block are dropped.
    """
    stride = window if stride is None else stride
    if stride != window:
        raise ShapeMismatch("max pooling uses non-overlapping windows (stride == window)")
    n, c, h, w = x.shape
    ho, wo = h // window, w // window
    if ho == 0 or wo == 0:
        raise ShapeMismatch(f"pool window {window} larger than input {h}x{w}")
    blocks = x[:, :, : ho * window, : wo * window].reshape(n, c, ho, window, wo, window)
    blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, ho, wo, window * window)
    arg = np.argmax(blocks, axis=-1)  # first occurrence on ties
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
    return out, (x.shape, arg, window)


def maxpool_backward(dout, cache):
    shape, arg, k = cache
    n, c, h, w = shape
    ho, wo = arg.shape[2:]
    blocks = np.zeros((n, c, ho, wo, k * k), dtype=dout.dtype)
    np.put_along_axis(blocks, arg[..., None], dout[..., None], axis=-1)
    blocks = blocks.reshape(n, c, ho, wo, k, k).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, ho * k, wo * k)
    dx = np.zeros(shape, dtype=dout.dtype)
    dx[:, :, : ho * k, : wo * k] = blocks
    return dx


def batchnorm_forward(x, gamma, beta, running_mean, running_var, train=True, eps=1e-5, momentum=0.1):
    """Per-channel batch normalization over (N, H, W).

    In training mode the batch statistics are used and ``running_mean`` /
    ``running_var`` are updated in place with ``momentum`` (the running
    variance uses the unbiased estimate). In inference mode the running
    statistics are used. ``gamma``/``beta`` may be ``None`` for a
    normalization without affine transform.
    """
    axes = (0, 2, 3)
    shape = (1, -1, 1, 1)
    if train:
        m = x.shape[0] * x.shape[2] * x.shape[3]
        if x.shape[0] < 2:
            raise BatchTooSmall("batch normalization in training mode needs batch >= 2")
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
        running_mean *= 1 - momentum
        running_mean += momentum * mean
        running_var *= 1 - momentum
        running_var += momentum * var * (m / max(m - 1, 1))
    else:
        mean, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean.reshape(shape)) * inv_std.reshape(shape)
    out = xhat
    if gamma is not None:
        out = gamma.reshape(shape) * xhat + beta.reshape(shape)
    return out, (xhat, inv_std, gamma, train)


def batchnorm_backward(dout, cache):
    """Returns ``(dx, dgamma, dbeta)``; the parameter grads are ``None`` without affine."""
    xhat, inv_std, gamma, train = cache
    axes = (0, 2, 3)
    shape = (1, -1, 1, 1)
    dgamma = dbeta = None
    dxhat = dout
    if gamma is not None:
        dgamma = np.sum(dout * xhat, axis=axes)
        dbeta = np.sum(dout, axis=axes)
        dxhat = dout * gamma.reshape(shape)
    if not train:
        return dxhat * inv_std.reshape(shape), dgamma, dbeta
    m = xhat.shape[0] * xhat.shape[2] * xhat.shape[3]
    s1 = dxhat.sum(axis=axes).reshape(shape)
    s2 = (dxhat * xhat).sum(axis=axes).reshape(shape)
    dx = inv_std.reshape(shape) / m * (m * dxhat - s1 - xhat * s2)
    return dx, dgamma, dbeta


def fc_forward(x, w, b):
    """``y = x W^T + b`` with ``W`` of shape (out, in)."""
    if x.shape[1] != w.shape[1]:
        raise ShapeMismatch(f"fully connected layer expects {w.shape[1]} inputs, got {x.shape[1]}")
    return x @ w.T + b, (x, w)


def fc_backward(dout, cache):
    x, w = cache
    return dout @ w, dout.T @ x, dout.sum(axis=0)


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_crossentropy(logits, targets):
    """Mean categorical cross-entropy of softmax(logits) against one-hot rows.

    Returns ``(loss, dlogits)`` with ``dlogits = (softmax - targets) / N``.
    For two classes this equals the binary cross-entropy of the
    positive-class probability.
    """
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    log_p = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -float(np.sum(targets * log_p)) / n
    return loss, (np.exp(log_p) - targets) / n


def binary_crossentropy(p, y):
    """``-1/N sum y log p + (1 - y) log(1 - p)`` for probabilities ``p``."""
    p = np.asarray(p, dtype=float)
    y = np.asarray(y, dtype=float)
    return -float(np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))
