"""Resilient propagation with weight backtracking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backprop import Gradient, History, _batch, _check_shapes, _dataset_arrays, run_epochs
from .network import Mlp


@dataclass
class RpropState:
    """Per-weight update values plus the memory needed for backtracking.

    ``prev_step`` is the weight change applied at the previous step; it is
    undone when the gradient flips sign.
    """

    update_values: list[np.ndarray]
    prev_gradient: list[np.ndarray]
    prev_step: list[np.ndarray]
    eta_minus: float = 0.5
    eta_plus: float = 1.2
    delta_min: float = 1e-6
    delta_max: float = 50.0

    def __post_init__(self):
        if not 0 < self.eta_minus < 1 < self.eta_plus:
            raise ValueError(f"need 0 < eta_minus < 1 < eta_plus, got {self.eta_minus}, {self.eta_plus}")
        if not 0 < self.delta_min <= self.delta_max:
            raise ValueError(f"need 0 < delta_min <= delta_max, got {self.delta_min}, {self.delta_max}")
        if any(np.any(d <= 0) for d in self.update_values):
            raise ValueError("update values must be positive")

    @classmethod
    def initial(cls, net: Mlp, delta_init: float = 0.1, **factors) -> "RpropState":
        params = net.params()
        return cls(
            [np.full_like(p, delta_init) for p in params],
            [np.zeros_like(p) for p in params],
            [np.zeros_like(p) for p in params],
            **factors,
        )

    def mean_update_value(self) -> float:
        return float(np.concatenate([d.ravel() for d in self.update_values]).mean())


def rprop_step(net: Mlp, g: Gradient, st: RpropState) -> tuple[Mlp, RpropState]:
    """One epoch-level RPROP update.

    With ``p = prev_grad * grad`` per weight:

    * ``p > 0``: grow the update value (capped at ``delta_max``) and step
      ``-sign(grad) * delta``.
    * ``p < 0``: shrink the update value (floored at ``delta_min``), undo the
      previous step and store a zero gradient so the next step does not adapt.
    * ``p == 0``: step ``-sign(grad) * delta`` with the update value unchanged.
    """
    grads = g.params()
    _check_shapes(net, grads, "gradient")
    _check_shapes(net, st.update_values, "rprop state")

    new_params, deltas, prev_grads, steps = [], [], [], []
    for w, grad, delta, prev, last in zip(net.params(), grads, st.update_values,
                                          st.prev_gradient, st.prev_step):
        p = prev * grad
        grow, shrink = p > 0, p < 0
        delta = np.where(grow, np.minimum(delta * st.eta_plus, st.delta_max), delta)
        delta = np.where(shrink, np.maximum(delta * st.eta_minus, st.delta_min), delta)
        step = np.where(shrink, -last, -np.sign(grad) * delta)
        new_params.append(w + step)
        deltas.append(delta)
        prev_grads.append(np.where(shrink, 0.0, grad))
        steps.append(step)

    new_state = RpropState(deltas, prev_grads, steps, st.eta_minus, st.eta_plus,
                           st.delta_min, st.delta_max)
    return net.with_params(new_params), new_state


@dataclass(frozen=True)
class RpropConfig:
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    delta_max: float = 50.0
    delta_min: float = 1e-6
    delta_init: float = 0.1
    max_epochs: int = 5000
    error_target: float = 1e-3


def train_rprop(net: Mlp, data, cfg: RpropConfig = RpropConfig()) -> tuple[Mlp, History]:
    """Full-batch RPROP: one update per presentation of the whole training set.

    The returned history also carries the mean update value after each step.
    """
    X, T = _batch(net, *_dataset_arrays(data))
    state = RpropState.initial(net, cfg.delta_init, eta_minus=cfg.eta_minus, eta_plus=cfg.eta_plus,
                               delta_min=cfg.delta_min, delta_max=cfg.delta_max)
    history = History()

    def step(n, g):
        nonlocal state
        n, state = rprop_step(n, g, state)
        history.mean_delta.append(state.mean_update_value())
        return n

    return run_epochs(net, X, T, step, cfg.max_epochs, cfg.error_target, history)
