"""Identification accuracy, MSE and coefficient of determination."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .ingest import codes_to_matrix
from .network import forward, threshold_outputs


class DegenerateTargetError(ValueError):
    """A target column is constant, so R^2 has a zero denominator."""


@dataclass(frozen=True)
class EvalResult:
    accuracy_percent: float
    mse: float
    r2: float
    n_correct: int
    n_total: int

    def __post_init__(self):
        if not 0 <= self.n_correct <= self.n_total:
            raise ValueError("n_correct must lie in [0, n_total]")

    def to_dict(self) -> dict:
        d = asdict(self)
        # JSON has no NaN
        if isinstance(d["r2"], float) and math.isnan(d["r2"]):
            d["r2"] = None
        return d


def _as_matrix(x) -> np.ndarray:
    if len(x) and hasattr(x[0], "code"):
        return codes_to_matrix(x)
    a = np.asarray(x, dtype=float)
    return a.reshape(1, -1) if a.ndim == 1 and a.size else a


def _count_correct(predictions, targets, mode: str) -> int:
    P, T = _as_matrix(predictions), _as_matrix(targets)
    if P.shape[0] == 0:
        raise ValueError("accuracy of an empty set is undefined")
    if P.shape != T.shape:
        raise ValueError(f"prediction shape {P.shape} != target shape {T.shape}")
    if mode == "exact":
        return int(np.sum(np.all(P == T, axis=1)))
    if mode == "argmax":
        return int(np.sum(np.argmax(P, axis=1) == np.argmax(T, axis=1)))
    raise ValueError(f"unknown accuracy mode {mode!r}")


def accuracy(predictions, targets, mode: str = "exact") -> float:
    """Percentage of samples identified correctly.

    In ``exact`` mode a sample counts only when the whole thresholded vector
    equals its one-hot code, so patterns like ``0000`` or ``1100`` are wrong.
    ``argmax`` mode compares the largest entries instead and expects raw
    outputs.
    """
    P = _as_matrix(predictions)
    return 100.0 * _count_correct(P, targets, mode) / P.shape[0]


def mse(outputs, targets) -> float:
    O, T = _as_matrix(outputs), _as_matrix(targets)
    if O.shape != T.shape:
        raise ValueError(f"output shape {O.shape} != target shape {T.shape}")
    if O.size == 0:
        raise ValueError("mse of an empty set is undefined")
    return float(np.sum((T - O) ** 2) / O.size)


def r_squared(outputs, targets, standard: bool = False, skip_degenerate: bool = False) -> float:
    """Coefficient of determination averaged over output columns.

    Per column: ``1 - [(1/n) sum (T-O)^2] / [(1/(n-1)) sum (T-mean T)^2]``.
    The mismatched 1/n and 1/(n-1) normalizers are intentional; pass
    ``standard=True`` for the usual ``1 - SSE/SST``.

    Constant target columns raise :class:`DegenerateTargetError` unless
    ``skip_degenerate`` is set, in which case they are left out of the mean
    (NaN if no column survives). 1-D inputs are read as a single column.
    """
    O, T = (np.asarray(a, dtype=float)[:, None] if np.ndim(a) == 1 and not hasattr(a[0], "code")
            else _as_matrix(a) for a in (outputs, targets))
    if O.shape != T.shape:
        raise ValueError(f"output shape {O.shape} != target shape {T.shape}")
    n = T.shape[0]
    if n < 2:
        raise ValueError("R^2 needs at least two samples")
    sse = np.sum((T - O) ** 2, axis=0)
    sst = np.sum((T - T.mean(axis=0)) ** 2, axis=0)
    ok = sst > 0
    if not np.all(ok) and not skip_degenerate:
        cols = np.flatnonzero(~ok).tolist()
        raise DegenerateTargetError(f"constant target column(s) {cols}: R^2 denominator is zero")
    if not np.any(ok):
        return float("nan")
    if standard:
        per_col = 1.0 - sse[ok] / sst[ok]
    else:
        per_col = 1.0 - (sse[ok] / n) / (sst[ok] / (n - 1))
    return float(np.mean(per_col))


def evaluate(net, data, accuracy_mode: str = "exact", standard_r2: bool = False) -> EvalResult:
    """Score a network on a dataset: thresholded outputs for accuracy, raw for MSE and R^2."""
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    T = data.target_matrix
    if T.shape[1] != net.weights[-1].shape[0]:
        raise ValueError(f"dataset has {T.shape[1]} classes, network has {net.weights[-1].shape[0]} outputs")
    O = forward(net, data.features).output
    pred = threshold_outputs(O) if accuracy_mode == "exact" else O
    n_correct = _count_correct(pred, T, accuracy_mode)
    r2 = (r_squared(O, T, standard=standard_r2, skip_degenerate=True)
          if len(data) >= 2 else float("nan"))
    return EvalResult(100.0 * n_correct / len(data), mse(O, T), r2, n_correct, len(data))
