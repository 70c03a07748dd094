"""Repeated random-split protocol and the architecture/optimizer sweep."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .backprop import BackpropConfig, train_backprop
from .metrics import EvalResult, evaluate
from .network import Architecture, init_weights
from .rprop import RpropConfig, train_rprop

log = logging.getLogger(__name__)

OPTIMIZERS = ("backprop", "rprop")
# hidden layouts of the reference sweep; input/output sizes come from the data
DEFAULT_HIDDEN = ((3, 5), (4, 6), (5, 7), (6, 8), (15,))


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    train_fraction: float
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]


def _largest_remainder(counts: dict, total: int) -> dict:
    exact = {k: total * c / sum(counts.values()) for k, c in counts.items()}
    alloc = {k: math.floor(v) for k, v in exact.items()}
    order = sorted(counts, key=lambda k: (-(exact[k] - alloc[k]), str(k)))
    for k in order[:total - sum(alloc.values())]:
        alloc[k] += 1
    return alloc


def make_split(n: int, train_fraction: float = 0.8, seed: int = 0, labels=None) -> SplitPlan:
    """Draw ``round(train_fraction * n)`` training indices without replacement.

    Passing ``labels`` switches to stratified sampling: each class contributes
    its proportional share (largest-remainder rounding), still summing to the
    same training size.
    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    n_train = round(train_fraction * n)
    if n_train < 1 or n_train > n - 1:
        raise ValueError(f"split of {n} samples at {train_fraction} leaves an empty side")
    rng = np.random.default_rng(seed)
    if labels is None:
        train = rng.choice(n, size=n_train, replace=False)
    else:
        labels = list(labels)
        if len(labels) != n:
            raise ValueError("one label per sample required for stratification")
        groups: dict = {}
        for i, lab in enumerate(labels):
            groups.setdefault(lab, []).append(i)
        alloc = _largest_remainder({k: len(v) for k, v in groups.items()}, n_train)
        train = np.concatenate([
            rng.choice(np.array(groups[k]), size=alloc[k], replace=False) for k in sorted(groups, key=str)
        ])
    train_set = set(int(i) for i in train)
    test = tuple(i for i in range(n) if i not in train_set)
    return SplitPlan(seed, train_fraction, tuple(sorted(train_set)), test)


def shibata_hidden(n_in: int, n_out: int) -> float:
    """Hidden-layer size heuristic sqrt(n_in * n_out), unrounded."""
    if n_in <= 0 or n_out <= 0:
        raise ValueError("neuron counts must be positive")
    return math.sqrt(n_in * n_out)


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 63-bit seed from the master seed and an identifying tuple (SHA-256)."""
    key = "|".join(str(p) for p in (master_seed, *parts)).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


@dataclass(frozen=True)
class ExperimentConfig:
    epsilon: float = 0.9
    alpha: float = 0.1
    max_epochs: int = 5000
    error_target: float = 1e-3
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    delta_max: float = 50.0
    delta_min: float = 1e-6
    delta_init: float = 0.1
    sigma: float = 1.0
    init_half_width: float = 0.5
    train_fraction: float = 0.8
    stratified: bool = False
    backprop_mode: str = "batch"
    accuracy_mode: str = "exact"

    def backprop(self) -> BackpropConfig:
        return BackpropConfig(self.epsilon, self.alpha, self.max_epochs, self.error_target,
                              self.backprop_mode)

    def rprop(self) -> RpropConfig:
        return RpropConfig(self.eta_plus, self.eta_minus, self.delta_max, self.delta_min,
                           self.delta_init, self.max_epochs, self.error_target)


@dataclass
class RunReport:
    run_id: int
    architecture: str
    optimizer: str
    training: EvalResult
    testing: EvalResult
    epochs_used: int
    stop_reason: str
    split_seed: int
    init_seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["training"] = self.training.to_dict()
        d["testing"] = self.testing.to_dict()
        return d


def _mean(values) -> float:
    vals = [v for v in values if not math.isnan(v)]
    return float(np.mean(vals)) if vals else float("nan")


@dataclass
class AggregateReport:
    architecture: str
    optimizer: str
    training: dict
    testing: dict
    n_runs: int

    @classmethod
    def from_runs(cls, runs: list[RunReport]) -> "AggregateReport":
        def summary(which):
            res = [getattr(r, which) for r in runs]
            return {
                "mse": _mean(e.mse for e in res),
                "accuracy": _mean(e.accuracy_percent for e in res),
                "r2": _mean(e.r2 for e in res),
            }
        return cls(runs[0].architecture, runs[0].optimizer, summary("training"),
                   summary("testing"), len(runs))


def _check_arch(data, arch: Architecture) -> None:
    n_in = data.features.shape[1]
    n_out = len(data.vocabulary)
    if arch.n_inputs != n_in or arch.n_outputs != n_out:
        raise ValueError(f"architecture {arch} does not fit data with {n_in} features "
                         f"and {n_out} classes")


def run_single(data, arch: Architecture, optimizer: str, cfg: ExperimentConfig,
               master_seed: int, run_id: int) -> RunReport:
    split_seed = derive_seed(master_seed, arch, optimizer, run_id, "split")
    init_seed = derive_seed(master_seed, arch, optimizer, run_id, "init")
    labels = None
    if cfg.stratified:
        labels = [t.name for t in data.targets]
    plan = make_split(len(data), cfg.train_fraction, split_seed, labels)
    train, test = data.subset(plan.train_indices), data.subset(plan.test_indices)

    net = init_weights(arch, init_seed, cfg.init_half_width, cfg.sigma)
    if optimizer == "backprop":
        net, hist = train_backprop(net, train, cfg.backprop())
    elif optimizer == "rprop":
        net, hist = train_rprop(net, train, cfg.rprop())
    else:
        raise ValueError(f"unknown optimizer {optimizer!r}; choose from {OPTIMIZERS}")

    return RunReport(run_id, str(arch), optimizer,
                     evaluate(net, train, cfg.accuracy_mode),
                     evaluate(net, test, cfg.accuracy_mode),
                     hist.epochs_used, hist.stop_reason, split_seed, init_seed)


def run_protocol(data, arch, optimizer: str, cfg: ExperimentConfig = ExperimentConfig(),
                 repeats: int = 30, master_seed: int = 0) -> tuple[list[RunReport], AggregateReport]:
    """Train/evaluate ``repeats`` times on fresh random splits and average.

    Split and initialization seeds derive from (master_seed, arch, optimizer,
    run id), so a run never depends on what else is executed alongside it.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if optimizer not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {optimizer!r}; choose from {OPTIMIZERS}")
    arch = arch if isinstance(arch, Architecture) else Architecture(tuple(arch))
    _check_arch(data, arch)
    runs = []
    for r in range(repeats):
        runs.append(run_single(data, arch, optimizer, cfg, master_seed, r))
        log.debug("%s/%s run %d: %s", arch, optimizer, r, runs[-1].testing)
    agg = AggregateReport.from_runs(runs)
    log.info("%s %s: train acc %.2f%%, test acc %.2f%%", arch, optimizer,
             agg.training["accuracy"], agg.testing["accuracy"])
    return runs, agg


def default_suite(n_in: int = 47, n_out: int = 4) -> list[tuple[Architecture, str]]:
    return [(Architecture((n_in, *hidden, n_out)), opt)
            for opt in OPTIMIZERS for hidden in DEFAULT_HIDDEN]


@dataclass
class SweepEntry:
    runs: list[RunReport]
    aggregate: AggregateReport

    def to_dict(self) -> dict:
        a = self.aggregate
        return {"architecture": a.architecture, "optimizer": a.optimizer,
                "training": a.training, "testing": a.testing,
                "runs": [r.to_dict() for r in self.runs]}


@dataclass
class SweepReport:
    entries: list[SweepEntry]
    config: ExperimentConfig
    master_seed: int
    repeats: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"master_seed": self.master_seed, "repeats": self.repeats,
                "config": asdict(self.config), **self.extra,
                "suite": [e.to_dict() for e in self.entries]}

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_json_safe(self.to_dict()), fh, indent=2, allow_nan=False)
            fh.write("\n")

    def table_rows(self) -> list[list]:
        rows = []
        for e in self.entries:
            a = e.aggregate
            rows.append([a.architecture, a.optimizer,
                         a.training["mse"], a.testing["mse"],
                         a.training["accuracy"], a.testing["accuracy"],
                         a.training["r2"], a.testing["r2"]])
        return rows

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TABLE_HEADER)
            for row in self.table_rows():
                w.writerow(row[:2] + [f"{x:.17g}" for x in row[2:]])

    def format_table(self) -> str:
        lines = [f"{'Network Architecture':<22}{'Optimizer':<10}{'MSE train':>11}{'MSE test':>11}"
                 f"{'Acc train':>11}{'Acc test':>11}{'R2 train':>10}{'R2 test':>10}"]
        for arch, opt, mtr, mte, atr, ate, rtr, rte in self.table_rows():
            lines.append(f"{arch:<22}{opt:<10}{mtr:>11.5f}{mte:>11.5f}{atr:>11.2f}{ate:>11.2f}"
                         f"{rtr:>10.2f}{rte:>10.2f}")
        return "\n".join(lines)


TABLE_HEADER = ["Network Architecture", "Optimizer", "MSE Training", "MSE Testing",
                "Accuracy Training (%)", "Accuracy Testing (%)", "R2 Training", "R2 Testing"]


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _run_entry(args) -> SweepEntry:
    data, arch, optimizer, cfg, repeats, master_seed = args
    return SweepEntry(*run_protocol(data, arch, optimizer, cfg, repeats, master_seed))


def sweep(data, suite=None, cfg: ExperimentConfig = ExperimentConfig(), master_seed: int = 0,
          repeats: int = 30, jobs: int = 1) -> SweepReport:
    """Run the protocol for each (architecture, optimizer) pair.

    ``suite`` defaults to the five hidden layouts under both optimizers. With
    ``jobs > 1`` entries run in worker processes; results keep suite order.
    """
    if suite is None:
        suite = default_suite(data.features.shape[1], len(data.vocabulary))
    suite = [(a if isinstance(a, Architecture) else Architecture(tuple(a)), o) for a, o in suite]
    if not suite:
        raise ValueError("empty sweep suite")
    tasks = [(data, arch, opt, cfg, repeats, master_seed) for arch, opt in suite]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_run_entry, tasks))
    else:
        entries = [_run_entry(t) for t in tasks]
    return SweepReport(entries, cfg, master_seed, repeats)
