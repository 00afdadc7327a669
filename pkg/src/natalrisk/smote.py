"""Minority oversampling for categorical features.

Classic SMOTE interpolates real-valued features along the segment between a
minority record and one of its minority nearest neighbours.  Here features
are binary or ordinal, so a single interpolation position λ is drawn per
synthetic record and every feature is rounded back into its domain: binary
features take the base value when λ < 0.5 and the neighbour value otherwise,
ordinal features take the nearest bin to the rank interpolation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .dataset import PROV_SMOTE, Dataset, DatasetView, PatientRecord
from .errors import (
    DegenerateTarget,
    InsufficientMinority,
    MinorityTooSmall,
    NotMinorityRecord,
    SchemaMismatch,
)
from .schema import KIND_BINARY


@dataclass(frozen=True)
class SmoteParams:
    percent: int  # oversampling amount, multiple of 100
    k: int = 5  # neighbour count, clamped to minority-1
    seed: int = 0

    def __post_init__(self):
        if self.percent < 0 or self.percent % 100 != 0:
            raise ValueError(f"percent must be a non-negative multiple of 100, got {self.percent}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


def minority_value(view: DatasetView) -> str:
    """The less frequent target value; ties go to the lower value index."""
    targets = view.target_values()
    seen = set(targets)
    present = [v for v in view.class_values() if v in seen]
    if len(present) < 2:
        raise DegenerateTarget(f"target {view.target!r} has a single class")
    counts = {v: 0 for v in present}
    for t in targets:
        counts[t] += 1
    return min(present, key=lambda v: (counts[v], view.class_values().index(v)))


def _minority_indices(view: DatasetView, minority: str) -> list[int]:
    return [i for i, r in enumerate(view.records) if r.get(view.target) == minority]


def _feature_modes(view: DatasetView, indices: list[int]) -> dict:
    """Per-predictor mode over the given records' known values.

    Used only to impute missing cells for distance computation.  Ties and the
    all-missing case resolve to the lowest value index.
    """
    modes = {}
    for name in view.predictors:
        domain = view.values_of(name)
        counts = {v: 0 for v in domain}
        for i in indices:
            v = view.records[i].get(name)
            if v is not None:
                counts[v] += 1
        modes[name] = max(domain, key=lambda v: (counts[v], -domain.index(v)))
    return modes


def _distance(view: DatasetView, a: PatientRecord, b: PatientRecord, modes: dict) -> float:
    """Hamming distance; ordinal features contribute |rank delta| / bin count."""
    total = 0.0
    for name in view.predictors:
        d = view.schema.definition(name)
        va = a.get(name) if a.get(name) is not None else modes[name]
        vb = b.get(name) if b.get(name) is not None else modes[name]
        if d.kind == KIND_BINARY:
            total += 0.0 if va == vb else 1.0
        else:
            total += abs(d.bins.index(va) - d.bins.index(vb)) / len(d.bins)
    return total


def minority_neighbors(view: DatasetView, index: int, k: int) -> list[int]:
    """The k nearest minority records to ``index``, excluding itself.

    Ordered by (distance, record index); the indexed record must itself be
    in the minority class.
    """
    minority = minority_value(view)
    indices = _minority_indices(view, minority)
    if index not in indices:
        raise NotMinorityRecord(f"record {index} is not a minority-class record")
    others = [i for i in indices if i != index]
    if len(others) < k:
        raise InsufficientMinority(k, len(others))
    modes = _feature_modes(view, indices)
    base = view.records[index]
    others.sort(key=lambda i: (_distance(view, base, view.records[i], modes), i))
    return others[:k]


def synthesize_one(view: DatasetView, base: PatientRecord, neighbor: PatientRecord,
                   rng: random.Random) -> PatientRecord:
    """One synthetic record interpolated from base toward neighbor.

    A single λ in [0,1) is drawn from ``rng``.  Missingness comes from the
    base record; a base-known / neighbour-missing feature keeps the base
    value.  Columns outside the view stay missing.
    """
    label = base.get(view.target)
    if label is None or neighbor.get(view.target) != label:
        raise SchemaMismatch("base and neighbor must share a known target value")
    lam = rng.random()
    interpolated = {}
    for name in view.predictors:
        d = view.schema.definition(name)
        bv = base.get(name)
        nv = neighbor.get(name)
        if bv is None:
            interpolated[name] = None
        elif nv is None:
            interpolated[name] = bv
        elif d.kind == KIND_BINARY:
            interpolated[name] = bv if lam < 0.5 else nv
        else:
            rank = d.bins.index(bv) + lam * (d.bins.index(nv) - d.bins.index(bv))
            interpolated[name] = d.bins[int(math.floor(rank + 0.5))]
    schema = view.schema
    values = {n: None for n in schema.factor_names}
    outcomes = {n: None for n in schema.outcome_names}
    interpolated[view.target] = label
    for name, v in interpolated.items():
        if schema.is_outcome(name):
            outcomes[name] = v
        else:
            values[name] = v
    return PatientRecord(values=values, outcomes=outcomes, provenance=PROV_SMOTE)


def smote(view: DatasetView, params: SmoteParams) -> Dataset:
    """Append percent/100 synthetic records per minority record.

    Originals are untouched and keep their order; synthetics are appended
    after them.  Deterministic for identical (view, params).
    """
    minority = minority_value(view)
    indices = _minority_indices(view, minority)
    if len(indices) < 2:
        raise MinorityTooSmall(f"minority class has {len(indices)} records, need at least 2")
    if params.percent == 0:
        return Dataset(schema=view.schema, records=view.records)
    k = min(params.k, len(indices) - 1)
    neighbor_lists = {i: minority_neighbors(view, i, k) for i in indices}
    rng = random.Random(params.seed)
    passes = params.percent // 100
    synthetic = []
    for i in indices:
        base = view.records[i]
        neighbors = neighbor_lists[i]
        for _ in range(passes):
            neighbor = view.records[neighbors[rng.randrange(k)]]
            synthetic.append(synthesize_one(view, base, neighbor, rng))
    return Dataset(schema=view.schema, records=view.records + tuple(synthetic))
