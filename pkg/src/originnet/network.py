"""Multilayer perceptron with sigmoid units and a bias neuron per layer."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

FORMAT_VERSION = 1

# Smallest positive normal and largest double below 1: keep activations
# strictly inside (0, 1) once the exponential saturates.
_ACT_LO = np.finfo(float).tiny
_ACT_HI = 1.0 - np.finfo(float).epsneg


class ArchitectureError(ValueError):
    pass


@dataclass(frozen=True)
class Architecture:
    layer_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise ArchitectureError("an architecture needs an input and an output layer")
        if any(s < 1 for s in sizes):
            raise ArchitectureError(f"layer sizes must be positive, got {sizes}")
        object.__setattr__(self, "layer_sizes", sizes)

    def __str__(self) -> str:
        return "-".join(str(s) for s in self.layer_sizes)

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]


@dataclass
class Mlp:
    """Layered weights.

    ``weights[l]`` has shape (to-neurons, from-neurons); ``biases[l]`` holds
    the weights from the bias neuron (output fixed at 1) into layer ``l + 1``.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    sigma: float = 1.0

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.biases = [np.asarray(b, dtype=float) for b in self.biases]
        if not self.sigma > 0:
            raise ValueError(f"sigmoid slope must be positive, got {self.sigma}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ArchitectureError("need one bias vector per weight matrix")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ArchitectureError(f"layer {l}: weight {w.shape} / bias {b.shape} mismatch")
            if l and w.shape[1] != self.weights[l - 1].shape[0]:
                raise ArchitectureError(f"layer {l}: expects {w.shape[1]} inputs, "
                                        f"previous layer has {self.weights[l - 1].shape[0]}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l}: non-finite weights")

    @property
    def architecture(self) -> Architecture:
        return Architecture((self.weights[0].shape[1], *(w.shape[0] for w in self.weights)))

    def params(self) -> list[np.ndarray]:
        """Weights and bias vectors interleaved: w0, b0, w1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def with_params(self, params) -> "Mlp":
        params = list(params)
        return Mlp(params[0::2], params[1::2], self.sigma)

    def copy(self) -> "Mlp":
        return self.with_params([p.copy() for p in self.params()])

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "architecture": list(self.architecture.layer_sizes),
            "sigma": self.sigma,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Mlp":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {d.get('format_version')!r}")
        net = cls([np.array(w, dtype=float) for w in d["weights"]],
                  [np.array(b, dtype=float) for b in d["biases"]], float(d["sigma"]))
        if list(net.architecture.layer_sizes) != list(d["architecture"]):
            raise ArchitectureError("stored architecture does not match weight shapes")
        return net


def save_model(net: Mlp, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(net.to_dict(), fh, indent=1)
        fh.write("\n")


def load_model(path) -> Mlp:
    with open(path, encoding="utf-8") as fh:
        return Mlp.from_dict(json.load(fh))


def init_weights(arch, seed: int = 0, half_width: float = 0.5, sigma: float = 1.0) -> Mlp:
    if not isinstance(arch, Architecture):
        arch = Architecture(tuple(arch))
    if not half_width > 0:
        raise ValueError("initialization half-width must be positive")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_from, n_to in zip(arch.layer_sizes[:-1], arch.layer_sizes[1:]):
        weights.append(rng.uniform(-half_width, half_width, (n_to, n_from)))
        biases.append(rng.uniform(-half_width, half_width, n_to))
    return Mlp(weights, biases, sigma)


def sigmoid(I, sigma: float = 1.0):
    """Logistic function ``1 / (1 + exp(-sigma * I))``.

    Evaluated as ``1/(1+e)`` for ``I >= 0`` and ``e/(1+e)`` otherwise, with
    ``e = exp(-sigma*|I|)``, so the exponential never overflows.
    """
    z = sigma * np.asarray(I, dtype=float)
    e = np.exp(-np.abs(z))
    out = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    out = np.clip(out, _ACT_LO, _ACT_HI)
    return float(out) if out.ndim == 0 else out


def sigmoid_slope(o, sigma: float = 1.0):
    """dO/dI expressed through the activation."""
    return sigma * o * (1.0 - o)


@dataclass
class ForwardTrace:
    """Per-layer pre-activations and activations.

    ``activations[0]`` is the raw input; ``pre_activations[l]`` and
    ``activations[l + 1]`` belong to the ``l``-th weight layer. Works for a
    single sample (1-D) or a batch (rows are samples).
    """

    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


def forward(net: Mlp, x) -> ForwardTrace:
    x = np.asarray(x, dtype=float)
    n_in = net.weights[0].shape[1]
    if x.shape[-1:] != (n_in,) or x.ndim > 2:
        raise ArchitectureError(f"input has shape {x.shape}, network expects {n_in} features")
    pres, acts = [], [x]
    o = x
    for w, b in zip(net.weights, net.biases):
        I = o @ w.T + b
        o = np.asarray(sigmoid(I, net.sigma))
        pres.append(I)
        acts.append(o)
    return ForwardTrace(pres, acts)


def predict(net: Mlp, X) -> np.ndarray:
    return forward(net, X).output


def threshold_outputs(o) -> np.ndarray:
    return (np.asarray(o, dtype=float) >= 0.5).astype(int)
