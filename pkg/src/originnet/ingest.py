"""Loading, label encoding and synthetic generation of metabolite matrices.

A metabolite matrix is stored as CSV with the header
``origin,region,m1,...,mN``; one row per experiment, one column per metabolite.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

PAPER_ORIGINS = ("Java", "Bali", "Manado", "Toli-Toli")


class DataFormatError(ValueError):
    """Raised for malformed or invalid metabolite tables."""


@dataclass
class RawMatrix:
    """Experiments x metabolites concentration table with per-row labels."""

    values: np.ndarray
    origins: list[str]
    regions: list[str]
    metabolites: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] < 1:
            raise DataFormatError("values must be a 2-D matrix with at least one metabolite column")
        n = self.values.shape[0]
        if len(self.origins) != n or len(self.regions) != n:
            raise DataFormatError(
                f"label lengths ({len(self.origins)}, {len(self.regions)}) do not match {n} rows"
            )
        if not self.metabolites:
            self.metabolites = [f"m{j + 1}" for j in range(self.values.shape[1])]
        elif len(self.metabolites) != self.values.shape[1]:
            raise DataFormatError("metabolite names do not match column count")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def with_values(self, values: np.ndarray) -> "RawMatrix":
        return RawMatrix(values, list(self.origins), list(self.regions), list(self.metabolites))


@dataclass(frozen=True)
class OriginCode:
    name: str
    code: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.code) != [0] * (len(self.code) - 1) + [1]:
            raise ValueError(f"code {self.code} is not one-hot")


def load_csv(path, allow_negative: bool = False) -> RawMatrix:
    """Read a metabolite table.

    ``allow_negative`` is for already-normalized feature tables; raw
    concentrations must be non-negative.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if len(header) < 3 or [h.strip() for h in header[:2]] != ["origin", "region"]:
            raise DataFormatError(f"{path}: header must start with 'origin,region' and name >= 1 metabolite")
        metabolites = [h.strip() for h in header[2:]]
        width = len(header)

        rows, origins, regions = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) != width:
                raise DataFormatError(f"{path}: line {lineno} has {len(rec)} fields, expected {width}")
            row = []
            for col, text in zip(metabolites, rec[2:]):
                try:
                    x = float(text)
                except ValueError:
                    raise DataFormatError(
                        f"{path}: line {lineno}, column {col}: non-numeric value {text!r}"
                    ) from None
                if not np.isfinite(x):
                    raise DataFormatError(f"{path}: line {lineno}, column {col}: non-finite value")
                if x < 0 and not allow_negative:
                    raise DataFormatError(
                        f"{path}: line {lineno}, column {col}: negative concentration {x}"
                    )
                row.append(x)
            origins.append(rec[0].strip())
            regions.append(rec[1].strip())
            rows.append(row)

    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return RawMatrix(np.array(rows, dtype=float), origins, regions, metabolites)


def write_csv(m: RawMatrix, path) -> None:
    # 17 significant digits round-trips every double
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["origin", "region", *m.metabolites])
        for origin, region, row in zip(m.origins, m.regions, m.values):
            w.writerow([origin, region, *(f"{x:.17g}" for x in row)])


def encode_origins(origins) -> tuple[list[OriginCode], list[str]]:
    """One-hot encode origin names.

    The four known origins keep their fixed order (Java, Bali, Manado,
    Toli-Toli) so Java is ``1000`` and Toli-Toli ``0001``. Any other label set
    is ordered by first appearance.
    """
    origins = list(origins)
    if not origins:
        raise ValueError("cannot encode an empty origin list")
    if set(origins) <= set(PAPER_ORIGINS):
        vocab = list(PAPER_ORIGINS)
    else:
        vocab = list(dict.fromkeys(origins))
    index = {name: i for i, name in enumerate(vocab)}
    codes = []
    for name in origins:
        code = [0] * len(vocab)
        code[index[name]] = 1
        codes.append(OriginCode(name, tuple(code)))
    return codes, vocab


def codes_to_matrix(codes) -> np.ndarray:
    return np.array([c.code for c in codes], dtype=float)


@dataclass(frozen=True)
class SyntheticSpec:
    """Class/region layout for :func:`generate_synthetic`.

    ``layout`` maps each origin to its per-region experiment counts. The
    default gives Java 8+8+6 and every other origin 3x8, i.e. 94 rows.
    """

    layout: tuple[tuple[str, tuple[int, ...]], ...] = (
        ("Java", (8, 8, 6)),
        ("Bali", (8, 8, 8)),
        ("Manado", (8, 8, 8)),
        ("Toli-Toli", (8, 8, 8)),
    )
    n_metabolites: int = 47
    biomarkers_per_origin: int = 7
    zero_fraction: float = 0.08
    # log10 concentration ranges
    background_range: tuple[float, float] = (-4.0, 0.0)
    biomarker_range: tuple[float, float] = (0.3, 1.0)
    region_shift: float = 0.25

    def validate(self) -> None:
        if not self.layout:
            raise ValueError("spec needs at least one origin")
        for name, regions in self.layout:
            if not regions or any(c < 1 for c in regions):
                raise ValueError(f"origin {name!r} needs >= 1 region with >= 1 experiment")
        if self.n_metabolites < 1:
            raise ValueError("spec needs at least one metabolite")
        if self.biomarkers_per_origin * len(self.layout) > self.n_metabolites:
            raise ValueError("not enough metabolites for disjoint biomarker sets")
        if not 0 <= self.zero_fraction < 1:
            raise ValueError("zero_fraction must be in [0, 1)")


def generate_synthetic(seed: int = 42, spec: SyntheticSpec | None = None) -> RawMatrix:
    """Deterministic stand-in for an origin-labelled metabolite table.

    Every origin owns a disjoint block of biomarker columns whose
    concentrations sit in ``biomarker_range`` (2..10 by default); the rest
    are log-uniform over ``background_range``. A fraction of background
    entries is set to exactly zero.
    """
    spec = spec or SyntheticSpec()
    spec.validate()
    rng = np.random.default_rng(seed)
    n_met = spec.n_metabolites
    bpo = spec.biomarkers_per_origin
    columns = rng.permutation(n_met)
    markers = {
        name: columns[i * bpo:(i + 1) * bpo] for i, (name, _) in enumerate(spec.layout)
    }

    lo, hi = spec.background_range
    blo, bhi = spec.biomarker_range
    rows, origins, regions = [], [], []
    for name, counts in spec.layout:
        for r, count in enumerate(counts):
            # per-region offset keeps regions distinguishable within an origin
            shift = rng.uniform(-spec.region_shift, spec.region_shift, n_met)
            for _ in range(count):
                logx = np.clip(rng.uniform(lo, hi, n_met) + shift, lo, hi)
                logx[markers[name]] = rng.uniform(blo, bhi, bpo)
                x = 10.0 ** logx
                background = np.setdiff1d(np.arange(n_met), markers[name])
                zeros = background[rng.random(background.size) < spec.zero_fraction]
                x[zeros] = 0.0
                rows.append(x)
                origins.append(name)
                regions.append(f"{name}-{r + 1}")
    return RawMatrix(np.array(rows), origins, regions)
