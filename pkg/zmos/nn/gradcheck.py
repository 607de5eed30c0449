"""
Finite-difference checks of analytic gradients.
"""


from typing import Callable, Mapping

import torch

DEFAULT_EPSILON = 1e-5
DEFAULT_FLOOR = 1e-5
"""
Magnitudes below this are treated as this when computing relative
errors, so that tiny gradients don't dominate the result.
"""


@torch.no_grad()
def numerical_gradient(
    objective: Callable[[], float],
    tensor: torch.Tensor,
    epsilon: float = DEFAULT_EPSILON,
) -> torch.Tensor:
    """
    Estimates a gradient with central differences by perturbing a tensor
    in-place. The tensor is restored afterwards.

    Args:
        objective: Computes the scalar objective from the current tensor
            values.
        tensor: The tensor to differentiate with respect to.
        epsilon: The perturbation size.

    Returns:
        The estimated gradient.

    """
    gradient = torch.zeros_like(tensor)
    flat = tensor.view(-1)
    flat_gradient = gradient.view(-1)
    for index in range(flat.numel()):
        original = flat[index].item()
        flat[index] = original + epsilon
        plus = objective()
        flat[index] = original - epsilon
        minus = objective()
        flat[index] = original
        flat_gradient[index] = (plus - minus) / (2 * epsilon)
    return gradient


def max_relative_error(
    objective: Callable[[], float],
    tensors: Mapping[str, torch.Tensor],
    analytic: Mapping[str, torch.Tensor],
    epsilon: float = DEFAULT_EPSILON,
    floor: float = DEFAULT_FLOOR,
) -> float:
    """
    Compares analytic gradients with central finite differences.

    Args:
        objective: Computes the scalar objective from the current tensor
            values.
        tensors: The tensors to check, by name.
        analytic: The analytic gradient of each tensor, by name.
        epsilon: The perturbation size.
        floor: Lower bound on the magnitude used to normalize errors.

    Returns:
        The largest elementwise `|a - n| / max(|a|, |n|, floor)` over all
        tensors.

    """
    worst = 0.0
    for name, tensor in tensors.items():
        numerical = numerical_gradient(objective, tensor, epsilon)
        expected = analytic[name].detach()
        scale = torch.maximum(expected.abs(), numerical.abs()).clamp_min(floor)
        error = ((expected - numerical).abs() / scale).max().item()
        worst = max(worst, error)
    return worst
