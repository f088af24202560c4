"""Adam with L2 weight decay folded into the gradient, and a step-decay schedule."""
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from src.exceptions.autodiff import OptimizerError
from src.lib.autodiff.tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First/second moment estimates per parameter name and the step counter."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """
    One bias-corrected Adam update.

    The L2 term enters the gradient as `grad + weight_decay * param` before the
    moment updates. Inputs are not modified; new arrays and a new state are
    returned.

    Raises:
        OptimizerError: If `lr` is not positive or a moment shape disagrees with
            its parameter.
    """
    if lr <= 0:
        raise OptimizerError(f"learning rate must be positive, got {lr}")
    step = state.step + 1
    new_params: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for name, param in params.items():
        grad = grads[name] + weight_decay * param
        m = state.m.get(name, np.zeros_like(param))
        v = state.v.get(name, np.zeros_like(param))
        if m.shape != param.shape or v.shape != param.shape:
            raise OptimizerError(f"moment shape mismatch for '{name}'")
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1**step)
        v_hat = v / (1.0 - beta2**step)
        new_params[name] = param - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name], new_v[name] = m, v
    return new_params, AdamState(m=new_m, v=new_v, step=step)


class Adam:
    """Stateful wrapper applying `adam_step` to a named set of leaf tensors."""

    def __init__(
        self,
        parameters: Mapping[str, Tensor],
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.parameters = dict(parameters)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.weight_decay = weight_decay
        self.state = AdamState()

    def step(self, lr: float) -> None:
        params = {name: t.data for name, t in self.parameters.items()}
        grads = {
            name: t.grad if t.grad is not None else np.zeros_like(t.data)
            for name, t in self.parameters.items()
        }
        updated, self.state = adam_step(
            params,
            grads,
            self.state,
            lr,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            weight_decay=self.weight_decay,
        )
        for name, tensor in self.parameters.items():
            tensor.assign(updated[name])

    def zero_grad(self) -> None:
        for tensor in self.parameters.values():
            tensor.zero_grad()


@dataclass(frozen=True)
class StepDecaySchedule:
    """lr(epoch) = max(floor, lr_init / factor ** floor(epoch / every))."""

    lr_init: float = 5e-5
    factor: float = 10.0
    every: int = 20
    floor: float = 5e-7

    def __post_init__(self) -> None:
        if not self.lr_init > self.floor > 0:
            raise OptimizerError("schedule needs lr_init > floor > 0")
        if self.every < 1 or self.factor <= 0:
            raise OptimizerError("schedule needs every >= 1 and factor > 0")

    def lr(self, epoch: int) -> float:
        return max(self.floor, self.lr_init / self.factor ** math.floor(epoch / self.every))
