"""Zero replacement, log10 transform and per-experiment z-scoring."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .ingest import OriginCode, RawMatrix, codes_to_matrix, encode_origins, write_csv

ZERO_FLOOR = 1e-5


@dataclass(frozen=True)
class Provenance:
    zero_floor: float
    log_base: int
    axis: str
    constant_rows: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["constant_rows"] = list(self.constant_rows)
        return d


@dataclass
class PreprocessedDataset:
    features: np.ndarray
    targets: list[OriginCode]
    vocabulary: list[str]
    provenance: Provenance | None = None
    origins: list[str] = field(default_factory=list)
    regions: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 2:
            raise ValueError("features must be 2-D")
        if len(self.targets) != self.features.shape[0]:
            raise ValueError("one target per feature row required")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def target_matrix(self) -> np.ndarray:
        return codes_to_matrix(self.targets)

    def subset(self, indices) -> "PreprocessedDataset":
        idx = list(indices)
        return PreprocessedDataset(
            self.features[idx],
            [self.targets[i] for i in idx],
            list(self.vocabulary),
            self.provenance,
            [self.origins[i] for i in idx] if self.origins else [],
            [self.regions[i] for i in idx] if self.regions else [],
        )


def replace_zeros(m: RawMatrix, floor: float = ZERO_FLOOR) -> RawMatrix:
    if not floor > 0:
        raise ValueError(f"zero floor must be positive, got {floor}")
    values = m.values.copy()
    values[values == 0] = floor
    return m.with_values(values)


def log_transform(m: RawMatrix) -> RawMatrix:
    if np.any(m.values <= 0):
        r, c = np.argwhere(m.values <= 0)[0]
        raise ValueError(
            f"non-positive entry at row {r}, column {c}; replace zeros before the log step"
        )
    return m.with_values(np.log10(m.values))


def _zscore(x: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=axis, keepdims=True)
    dev = x - mean
    std = np.sqrt((dev ** 2).sum(axis=axis, keepdims=True) / (x.shape[axis] - 1))
    # the mean of equal values can be off by an ulp, so test the values themselves
    constant = (x.max(axis=axis, keepdims=True) == x.min(axis=axis, keepdims=True)) | (std == 0)
    safe = np.where(constant, 1.0, std)
    z = np.where(constant, 0.0, dev / safe)
    return z, np.flatnonzero(constant)


def normalize_rows(m) -> np.ndarray:
    """Z-score each experiment row with the n-1 sample standard deviation.

    Constant rows map to all zeros.
    """
    x = m.values if isinstance(m, RawMatrix) else np.asarray(m, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError("row normalization needs at least 2 entries per row")
    return _zscore(x, axis=1)[0]


def normalize_columns(m) -> np.ndarray:
    x = m.values if isinstance(m, RawMatrix) else np.asarray(m, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("column normalization needs at least 2 rows")
    return _zscore(x, axis=0)[0]


def preprocess_pipeline(m: RawMatrix, floor: float = ZERO_FLOOR, axis: str = "row") -> PreprocessedDataset:
    if axis not in ("row", "column"):
        raise ValueError(f"axis must be 'row' or 'column', got {axis!r}")
    logged = log_transform(replace_zeros(m, floor))
    if logged.values.shape[1 if axis == "row" else 0] < 2:
        raise ValueError(f"{axis} normalization needs at least 2 entries")
    z, constant = _zscore(logged.values, axis=1 if axis == "row" else 0)
    codes, vocab = encode_origins(m.origins)
    prov = Provenance(floor, 10, axis, tuple(int(i) for i in constant))
    return PreprocessedDataset(z, codes, vocab, prov, list(m.origins), list(m.regions))


def dataset_from_features(m: RawMatrix) -> PreprocessedDataset:
    """Wrap an already-normalized feature table (e.g. a preprocess output)."""
    codes, vocab = encode_origins(m.origins)
    return PreprocessedDataset(m.values, codes, vocab, None, list(m.origins), list(m.regions))


def write_preprocessed(ds: PreprocessedDataset, path, metabolites=None) -> str:
    """Write features as CSV plus a ``<path>.provenance.json`` sidecar; returns the sidecar path."""
    raw = RawMatrix(ds.features, ds.origins or [c.name for c in ds.targets],
                    ds.regions or [""] * len(ds), list(metabolites or []))
    write_csv(raw, path)
    sidecar = f"{path}.provenance.json"
    with open(sidecar, "w", encoding="utf-8") as fh:
        payload = {"provenance": ds.provenance.to_dict() if ds.provenance else None,
                   "vocabulary": ds.vocabulary}
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar
