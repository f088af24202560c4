"""
Semantic fusion of the representation bank and the loss stack.

Bag distributions are Tensors of shape [N] (or [B, N]) whose last axis sums to 1.
Batched losses are means of the per-sample losses.
"""
from collections.abc import Sequence

import numpy as np

from src.exceptions.autodiff import ShapeError
from src.exceptions.training import ConfigurationError
from src.lib.autodiff import Function, Tensor, log_softmax, pick, softmax, spatial_sum
from src.models.descriptors import InstanceRepresentation, RepresentationBank
from src.schemas.model import AlignmentMode, InstanceRole
from src.schemas.training import LossBreakdown

LOG_EPS = 1e-12

# A BagDistribution is a Tensor of probabilities over scene categories.
BagDistribution = Tensor


def aggregate_bank(bank: RepresentationBank) -> InstanceRepresentation:
    """X_final = X1 + X2 + X3 + X4."""
    x1, x2, x3, x4 = (element.tensor for element in bank)
    return InstanceRepresentation(x1 + x2 + x3 + x4, InstanceRole.FINAL)


def bag_distribution(x: InstanceRepresentation | Tensor) -> BagDistribution:
    """Y = softmax(sum over all positions of each category channel)."""
    tensor = x.tensor if isinstance(x, InstanceRepresentation) else x
    if tensor.ndim < 3 or tensor.shape[-3] < 2:
        raise ShapeError(f"need at least 2 category channels, got shape {tensor.shape}")
    return softmax(spatial_sum(tensor))


def log_bag_distribution(x: InstanceRepresentation | Tensor) -> Tensor:
    """log Y computed from the channel sums directly; exp of it is `bag_distribution`."""
    tensor = x.tensor if isinstance(x, InstanceRepresentation) else x
    if tensor.ndim < 3 or tensor.shape[-3] < 2:
        raise ShapeError(f"need at least 2 category channels, got shape {tensor.shape}")
    return log_softmax(spatial_sum(tensor))


def _check_labels(labels: np.ndarray, num_classes: int) -> None:
    if np.any(labels < 0) or np.any(labels >= num_classes):
        raise ShapeError(f"label out of range [0, {num_classes}): {labels.tolist()}")


def classification_loss(
    y_pred: BagDistribution, label: int | Sequence[int] | np.ndarray
) -> Tensor:
    """
    Cross-entropy -log y_pred[label] against the one-hot ground truth.

    Works on probabilities, so a label probability below 1e-12 gets no gradient.
    Training goes through `cross_entropy` on log-probabilities instead.
    """
    labels = np.asarray(label)
    _check_labels(labels, y_pred.shape[-1])
    picked = pick(y_pred, labels)
    return -(picked.clip(LOG_EPS, 1.0).log().mean())


class NegativeLogLikelihood(Function):
    """
    Mean of -log_probs[label] per row, reported value capped at -ln(1e-12).

    The cap applies to the value only; the gradient is the uncapped one, so a
    saturated wrong prediction still pushes its logits apart.
    """

    CAP = -float(np.log(LOG_EPS))

    def forward(self, log_probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
        self.labels = labels
        self.rows = np.arange(log_probs.shape[0]) if log_probs.ndim == 2 else None
        picked = -(log_probs[self.rows, labels] if self.rows is not None else log_probs[labels])
        self.capped = picked > self.CAP
        return np.asarray(np.minimum(picked, self.CAP).mean())

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        shape = self.inputs[0].shape
        out = np.zeros(shape)
        if self.rows is None:
            out[self.labels] = -grad
        else:
            np.add.at(out, (self.rows, self.labels), -grad / shape[0])
        return (out,)

    def decision(self) -> np.ndarray:
        return np.atleast_1d(self.capped)


def cross_entropy(
    log_probs: Tensor, label: int | Sequence[int] | np.ndarray
) -> Tensor:
    """
    -log y[label] from log-probabilities of shape [N] or [B, N], mean over the batch.

    Matches `classification_loss` on the distribution exp(log_probs) wherever the
    label probability is above 1e-12.
    """
    labels = np.asarray(label, dtype=np.intp)
    if log_probs.ndim == 1 and labels.ndim != 0:
        raise ShapeError("rank-1 log-probabilities take a single label")
    if log_probs.ndim == 2 and labels.shape != (log_probs.shape[0],):
        raise ShapeError(f"need {log_probs.shape[0]} labels, got shape {labels.shape}")
    if log_probs.ndim not in (1, 2):
        raise ShapeError(f"cross_entropy needs rank 1 or 2, got shape {log_probs.shape}")
    _check_labels(labels, log_probs.shape[-1])
    return NegativeLogLikelihood.apply(log_probs, labels=labels)


def difference_map(bank: RepresentationBank) -> InstanceRepresentation:
    """X_difference = sum over k = 2..4 of |X_k - X1|, position by position."""
    base = bank[1].tensor
    diff = (bank[2].tensor - base).abs()
    diff = diff + (bank[3].tensor - base).abs()
    diff = diff + (bank[4].tensor - base).abs()
    return InstanceRepresentation(diff, InstanceRole.DIFFERENCE)


def alignment_distribution(x_diff: InstanceRepresentation | Tensor) -> BagDistribution:
    """Y_d = softmax(spatial sum of X_difference)."""
    return bag_distribution(x_diff)


def alignment_loss(y_d: BagDistribution) -> Tensor:
    """
    L_sealig = -(1/N) * sum_i [y_i ln y_i + (1 - y_i) ln(1 - y_i)].

    Arguments of the logarithms are clamped to [1e-12, 1 - 1e-12]. Each term is a
    binary entropy, so the loss lies in [0, ln 2].
    """
    y = y_d.clip(LOG_EPS, 1.0 - LOG_EPS)
    complement = 1.0 - y
    terms = y * y.log() + complement * complement.log()
    return -terms.mean()


def alignment_norm_loss(x_diff: InstanceRepresentation) -> Tensor:
    """Mean absolute disagreement between descriptors and the base representation."""
    return x_diff.tensor.mean()


def alignment_objective(bank: RepresentationBank, mode: AlignmentMode) -> Tensor:
    x_diff = difference_map(bank)
    if mode == AlignmentMode.NORM:
        return alignment_norm_loss(x_diff)
    return alignment_loss(alignment_distribution(x_diff))


def total_loss(
    l_cls: Tensor, l_sealig: Tensor | None, alpha: float
) -> tuple[Tensor, LossBreakdown]:
    """
    L = L_cls + alpha * L_sealig.

    Returns the differentiable total together with its float breakdown. With
    `alpha == 0` (or no alignment term) the total is L_cls itself.
    """
    if alpha < 0:
        raise ConfigurationError(f"alpha must be >= 0, got {alpha}")
    if l_sealig is None or alpha == 0:
        total = l_cls
    else:
        total = l_cls + alpha * l_sealig
    breakdown = LossBreakdown(
        l_cls=l_cls.item(),
        l_sealig=l_sealig.item() if l_sealig is not None else 0.0,
        alpha=alpha,
        total=total.item(),
    )
    return total, breakdown
