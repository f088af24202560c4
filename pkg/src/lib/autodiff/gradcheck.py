"""
Central finite-difference checks of reverse-mode gradients.

Perturbations that flip a branch of a non-smooth node (relu side, abs sign,
clip range, local-max or peak masks) cross a kink where the finite difference
is meaningless; `check_gradients` detects these through the graph's decision
patterns and skips them instead of reporting a spurious mismatch.
"""
from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np

from src.lib.autodiff.tensor import Tensor


@dataclass
class GradientCheckReport:
    checked: int = 0
    skipped: int = 0
    worst_error: float = 0.0
    worst_entry: str = ""

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.checked > 0 and self.worst_error < tolerance


def relative_error(analytic: float, numeric: float, floor: float = 1e-4) -> float:
    """|a - n| / max(|a|, |n|, floor); the floor bounds the ratio for tiny gradients."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def decision_signature(output: Tensor) -> np.ndarray:
    """All branch decisions taken while computing `output`, flattened."""
    patterns = [p.ravel() for p in output.decisions()]
    if not patterns:
        return np.zeros(0, dtype=bool)
    return np.concatenate(patterns)


def _evaluate(
    fn: Callable[[], Tensor], tensor: Tensor, index: tuple[int, ...], value: float
) -> tuple[float, np.ndarray]:
    original = tensor.data
    perturbed = original.copy()
    perturbed[index] = value
    tensor.assign(perturbed)
    try:
        out = fn()
        return out.item(), decision_signature(out)
    finally:
        tensor.assign(original)


def numerical_gradient(
    fn: Callable[[], Tensor], tensor: Tensor, index: tuple[int, ...], h: float = 1e-5
) -> float:
    """Central difference (f(x+h) - f(x-h)) / 2h at one entry of a leaf tensor."""
    base = float(tensor.data[index])
    plus, _ = _evaluate(fn, tensor, index, base + h)
    minus, _ = _evaluate(fn, tensor, index, base - h)
    return (plus - minus) / (2.0 * h)


def check_gradients(
    fn: Callable[[], Tensor],
    tensors: Mapping[str, Tensor],
    entries_per_tensor: int | None = None,
    h: float = 1e-5,
    rng: np.random.Generator | None = None,
) -> GradientCheckReport:
    """
    Compare `backward` gradients of the scalar `fn()` against central differences.

    Args:
        fn: Rebuilds the scalar loss from the current tensor values.
        tensors: Leaf tensors to check, by name.
        entries_per_tensor: Number of randomly chosen entries per tensor; all
            entries when None.
        h: Finite-difference step.
        rng: Source of entry choices.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    for tensor in tensors.values():
        tensor.zero_grad()
    loss = fn()
    loss.backward()
    analytic = {
        name: (t.grad.copy() if t.grad is not None else np.zeros(t.shape))
        for name, t in tensors.items()
    }
    baseline = decision_signature(loss)

    report = GradientCheckReport()
    for name, tensor in tensors.items():
        flat_indices = np.arange(tensor.size)
        if entries_per_tensor is not None and entries_per_tensor < tensor.size:
            flat_indices = rng.choice(tensor.size, entries_per_tensor, replace=False)
        for flat in flat_indices:
            index = np.unravel_index(int(flat), tensor.shape)
            base = float(tensor.data[index])
            plus, sig_plus = _evaluate(fn, tensor, index, base + h)
            minus, sig_minus = _evaluate(fn, tensor, index, base - h)
            if not (
                np.array_equal(sig_plus, baseline) and np.array_equal(sig_minus, baseline)
            ):
                report.skipped += 1
                continue
            numeric = (plus - minus) / (2.0 * h)
            error = relative_error(float(analytic[name][index]), numeric)
            report.checked += 1
            if error > report.worst_error:
                report.worst_error = error
                report.worst_entry = f"{name}{tuple(int(i) for i in index)}"
    return report
