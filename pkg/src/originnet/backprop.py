"""Chain-rule gradients of the batch MSE and gradient descent with momentum."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .network import ArchitectureError, Mlp, forward, sigmoid_slope

STOP_TARGET = "target_reached"
STOP_MAX_EPOCHS = "max_epochs"


@dataclass
class Gradient:
    """dE/dw per weight matrix and dE/dw_B per bias vector, shaped like the network."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    @classmethod
    def from_params(cls, params) -> "Gradient":
        params = list(params)
        return cls(params[0::2], params[1::2])


def _check_shapes(net: Mlp, arrays, what: str) -> None:
    ref = net.params()
    if len(arrays) != len(ref) or any(a.shape != r.shape for a, r in zip(arrays, ref)):
        raise ArchitectureError(f"{what} shapes do not match the network")


def _batch(net: Mlp, X, T) -> tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    if X.shape[0] != T.shape[0]:
        raise ValueError(f"{X.shape[0]} samples but {T.shape[0]} targets")
    if T.shape[1] != net.weights[-1].shape[0]:
        raise ArchitectureError(f"targets have width {T.shape[1]}, network has "
                                f"{net.weights[-1].shape[0]} outputs")
    return X, T


def error(net: Mlp, X, T) -> float:
    """Batch MSE over every output neuron and sample, on raw outputs."""
    X, T = _batch(net, X, T)
    O = forward(net, X).output
    return float(np.sum((T - O) ** 2) / T.size)


def loss_and_gradient(net: Mlp, X, T) -> tuple[float, Gradient]:
    X, T = _batch(net, X, T)
    trace = forward(net, X)
    O = trace.output
    diff = T - O
    loss = float(np.sum(diff ** 2) / T.size)

    # dE/dO for E = sum((T-O)^2) / (m*n)
    delta = (-2.0 / T.size) * diff * sigmoid_slope(O, net.sigma)
    gw, gb = [], []
    for l in range(len(net.weights) - 1, -1, -1):
        gw.append(delta.T @ trace.activations[l])
        gb.append(delta.sum(axis=0))
        if l:
            delta = (delta @ net.weights[l]) * sigmoid_slope(trace.activations[l], net.sigma)
    return loss, Gradient(gw[::-1], gb[::-1])


def gradient(net: Mlp, X, T) -> Gradient:
    return loss_and_gradient(net, X, T)[1]


@dataclass
class MomentumState:
    previous: list[np.ndarray]
    epsilon: float = 0.9
    alpha: float = 0.1

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"learning rate must be in (0, 1), got {self.epsilon}")
        if not 0 <= self.alpha < 1:
            raise ValueError(f"momentum must be in [0, 1), got {self.alpha}")

    @classmethod
    def zeros(cls, net: Mlp, epsilon: float = 0.9, alpha: float = 0.1) -> "MomentumState":
        return cls([np.zeros_like(p) for p in net.params()], epsilon, alpha)


def momentum_step(net: Mlp, g: Gradient, st: MomentumState) -> tuple[Mlp, MomentumState]:
    """Apply ``dw = -epsilon * grad + alpha * dw_prev`` to every weight and bias weight."""
    grads = g.params()
    _check_shapes(net, grads, "gradient")
    _check_shapes(net, st.previous, "momentum state")
    steps = [-st.epsilon * gp + st.alpha * prev for gp, prev in zip(grads, st.previous)]
    new_net = net.with_params([p + s for p, s in zip(net.params(), steps)])
    return new_net, MomentumState(steps, st.epsilon, st.alpha)


@dataclass
class History:
    """Per-epoch training MSE; ``mse[t]`` is measured before update ``t``."""

    mse: list[float] = field(default_factory=list)
    stop_reason: str = ""
    mean_delta: list[float] = field(default_factory=list)

    @property
    def epochs_used(self) -> int:
        """Number of weight updates performed."""
        return max(len(self.mse) - 1, 0)

    def to_records(self) -> list[dict]:
        recs = [{"epoch": t, "mse": e} for t, e in enumerate(self.mse)]
        for rec, d in zip(recs, self.mean_delta):
            rec["mean_delta"] = d
        return recs

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_records(), fh)
            fh.write("\n")


def run_epochs(net: Mlp, X, T, step, max_epochs: int, error_target: float, history: History | None = None):
    """Shared batch training loop.

    ``step(net, grad) -> net`` performs one update. Training stops at the first
    measured MSE <= ``error_target`` or after ``max_epochs`` updates.
    """
    if max_epochs < 0:
        raise ValueError("max_epochs must be >= 0")
    history = history if history is not None else History()
    epoch = 0
    while True:
        loss, g = loss_and_gradient(net, X, T)
        if not np.isfinite(loss):
            raise FloatingPointError(f"non-finite training error at epoch {epoch}")
        history.mse.append(loss)
        if loss <= error_target:
            history.stop_reason = STOP_TARGET
            break
        if epoch == max_epochs:
            history.stop_reason = STOP_MAX_EPOCHS
            break
        net = step(net, g)
        epoch += 1
    return net, history


@dataclass(frozen=True)
class BackpropConfig:
    epsilon: float = 0.9
    alpha: float = 0.1
    max_epochs: int = 5000
    error_target: float = 1e-3
    mode: str = "batch"  # or "online": one update per sample


def _dataset_arrays(data):
    if hasattr(data, "features"):
        if len(data) == 0:
            raise ValueError("empty dataset")
        return data.features, data.target_matrix
    X, T = data
    return X, T


def train_backprop(net: Mlp, data, cfg: BackpropConfig = BackpropConfig()) -> tuple[Mlp, History]:
    """Gradient descent with momentum, full-batch by default.

    ``data`` is a :class:`PreprocessedDataset` or an ``(X, T)`` pair.
    """
    X, T = _batch(net, *_dataset_arrays(data))
    state = MomentumState.zeros(net, cfg.epsilon, cfg.alpha)

    if cfg.mode == "batch":
        def step(n, g):
            nonlocal state
            n, state = momentum_step(n, g, state)
            return n
    elif cfg.mode == "online":
        def step(n, _g):
            nonlocal state
            for i in range(X.shape[0]):
                n, state = momentum_step(n, gradient(n, X[i:i + 1], T[i:i + 1]), state)
            return n
    else:
        raise ValueError(f"unknown backprop mode {cfg.mode!r}")

    return run_epochs(net, X, T, step, cfg.max_epochs, cfg.error_target)
