"""
Adam updates for named parameter sets.
"""


from typing import Dict, Mapping

import torch


class AdamState:
    """
    Moment estimates carried between Adam steps. The moments themselves
    live inside a `torch.optim.Adam` that is created on the first step.
    """

    def __init__(self) -> None:
        self.__optimizer: torch.optim.Adam | None = None
        self.__names: tuple[str, ...] = ()

    @property
    def steps(self) -> int:
        """
        Number of steps taken so far.
        """
        if self.__optimizer is None:
            return 0
        first = self.__optimizer.param_groups[0]["params"][0]
        state = self.__optimizer.state.get(first, {})
        return int(state.get("step", 0))

    def optimizer_for(
        self,
        params: Mapping[str, torch.Tensor],
        lr: float,
        beta1: float,
        beta2: float,
        eps: float,
    ) -> torch.optim.Adam:
        """
        Gets the optimizer for a set of parameters, creating it if needed,
        and applies the current hyperparameters.

        Args:
            params: The parameters being optimized.
            lr: The learning rate.
            beta1: Decay rate of the first moment.
            beta2: Decay rate of the second moment.
            eps: Denominator offset.

        Raises:
            `ValueError` if the parameter names changed since the first
            step.

        Returns:
            The optimizer.

        """
        names = tuple(params)
        if self.__optimizer is None:
            self.__names = names
            self.__optimizer = torch.optim.Adam(
                list(params.values()), lr=lr, foreach=False
            )
        elif names != self.__names:
            raise ValueError("Parameter set changed between Adam steps.")

        for group in self.__optimizer.param_groups:
            group.update(lr=lr, betas=(beta1, beta2), eps=eps)
        return self.__optimizer


def adam_step(
    params: Mapping[str, torch.Tensor],
    grads: Mapping[str, torch.Tensor],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """
    Applies one bias-corrected Adam update to the parameters, in-place.

    Args:
        params: The parameters, which must be leaf tensors.
        grads: The gradient of every parameter. Extra entries, such as the
            input gradient, are ignored.
        state: The optimizer state.
        lr: The learning rate.
        beta1: Decay rate of the first moment.
        beta2: Decay rate of the second moment.
        eps: Denominator offset.

    Returns:
        The updated state.

    """
    optimizer = state.optimizer_for(params, lr, beta1, beta2, eps)
    for name, param in params.items():
        param.grad = grads[name].detach().clone()
    optimizer.step()
    optimizer.zero_grad(set_to_none=True)
    return state


def zero_gradients(
    params: Mapping[str, torch.Tensor]
) -> Dict[str, torch.Tensor]:
    """
    Args:
        params: The parameters.

    Returns:
        A zero gradient for every parameter, used to start accumulating.

    """
    return {name: torch.zeros_like(p) for name, p in params.items()}
