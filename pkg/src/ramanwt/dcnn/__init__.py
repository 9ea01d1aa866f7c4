"""Hand-written 2-D CNN over scalogram images."""

from .network import DcnnConfig, DcnnModel
from .ops import (
    batchnorm_backward,
    batchnorm_forward,
    binary_crossentropy,
    conv2d_backward,
    conv2d_forward,
    fc_backward,
    fc_forward,
    maxpool_backward,
    maxpool_forward,
    relu_backward,
    relu_forward,
    softmax,
    softmax_crossentropy,
)
from .train import HISTORY_FIELDS, clip_gradients, evaluate, train, write_history
