from src.lib.autodiff.ops import (
    conv2d,
    elementwise,
    log_mean_exp,
    log_softmax,
    mean,
    pick,
    sigmoid,
    softmax,
    spatial_sum,
)
from src.lib.autodiff.optim import Adam, AdamState, StepDecaySchedule, adam_step
from src.lib.autodiff.tensor import Function, Tensor

__all__ = [
    "Adam",
    "AdamState",
    "Function",
    "StepDecaySchedule",
    "Tensor",
    "adam_step",
    "conv2d",
    "elementwise",
    "log_mean_exp",
    "log_softmax",
    "mean",
    "pick",
    "sigmoid",
    "softmax",
    "spatial_sum",
]
