"""Patient records, CSV ingestion, and read-only feature views.

CSV wire format: UTF-8, comma separated, LF line endings, one header row of
canonical column names.  Cells are ``0``/``1`` for binary variables, a bin
label for ordinal ones, and the empty string for missing.  Canonical column
order is the catalog order (factors, derived factors, outcomes).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import (
    BadValue,
    DuplicateColumn,
    EmptyInput,
    EmptyPredictorSet,
    EmptyViewAfterExclusion,
    MissingColumn,
    TargetInPredictors,
    UnknownColumn,
    UnknownName,
)
from .schema import ABSENT, KIND_BINARY, PRESENT, RiskFactorSchema

PROV_REAL = "real"
PROV_SYNTHETIC = "synthetic_generator"
PROV_SMOTE = "smote"


@dataclass(frozen=True)
class PatientRecord:
    """One newborn: factor values, outcome values, and data lineage.

    Values are ``absent``/``present`` for binary variables, a bin label for
    ordinal ones, or ``None`` for missing.
    """

    values: dict  # factor name -> value | None
    outcomes: dict  # outcome name -> value | None
    provenance: str = PROV_REAL

    def get(self, name: str):
        if name in self.values:
            return self.values[name]
        return self.outcomes.get(name)

    def same_data(self, other: "PatientRecord") -> bool:
        """Value equality ignoring provenance (CSV does not carry lineage)."""
        return self.values == other.values and self.outcomes == other.outcomes


def make_record(schema: RiskFactorSchema, cells: dict, provenance: str = PROV_REAL,
                row: int | None = None) -> PatientRecord:
    """Build a validated record from a name -> value mapping.

    Unlisted outcomes default to missing; unlisted factors likewise.  Keys
    outside the catalog raise ``UnknownName``.
    """
    values: dict = {}
    outcomes: dict = {}
    for name in cells:
        if name not in schema:
            raise UnknownName(name)
    for name in schema.factor_names:
        values[name] = schema.check_value(name, cells.get(name), row)
    for name in schema.outcome_names:
        outcomes[name] = schema.check_value(name, cells.get(name), row)
    return PatientRecord(values=values, outcomes=outcomes, provenance=provenance)


@dataclass(frozen=True)
class Dataset:
    """An ordered, schema-validated collection of patient records."""

    schema: RiskFactorSchema
    records: tuple[PatientRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> tuple:
        self.schema.definition(name)
        return tuple(r.get(name) for r in self.records)


def _cell_to_value(schema: RiskFactorSchema, name: str, cell: str, row: int):
    if cell == "":
        return None
    d = schema.definition(name)
    if d.kind == KIND_BINARY:
        if cell == "0":
            return ABSENT
        if cell == "1":
            return PRESENT
        raise BadValue(row, name, cell)
    if cell in d.bins:
        return cell
    raise BadValue(row, name, cell)


def _value_to_cell(schema: RiskFactorSchema, name: str, value) -> str:
    if value is None:
        return ""
    if schema.definition(name).kind == KIND_BINARY:
        return "1" if value == PRESENT else "0"
    return value


def parse_dataset(csv_text: str, schema: RiskFactorSchema,
                  provenance: str = PROV_REAL) -> Dataset:
    """Parse CSV text into a dataset.

    All 33 collected factor columns are required; derived-factor and outcome
    columns are optional (absent column means the value is missing on every
    record).  Row order is preserved.
    """
    if not csv_text.strip():
        raise EmptyInput("empty CSV input")
    reader = csv.reader(io.StringIO(csv_text))
    rows = list(reader)
    header = rows[0]
    seen: set[str] = set()
    for name in header:
        if name not in schema:
            raise UnknownColumn(name)
        if name in seen:
            raise DuplicateColumn(name)
        seen.add(name)
    required = tuple(f.name for f in schema.factors)
    for name in required:
        if name not in seen:
            raise MissingColumn(name)

    records = []
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise BadValue(i, header[min(len(row), len(header) - 1)],
                           f"expected {len(header)} cells, got {len(row)}")
        cells = {name: _cell_to_value(schema, name, cell, i)
                 for name, cell in zip(header, row)}
        records.append(make_record(schema, cells, provenance=provenance, row=i))
    return Dataset(schema=schema, records=tuple(records))


def write_dataset(dataset: Dataset, columns: tuple[str, ...] | None = None) -> str:
    """Serialize to canonical CSV (provenance is in-memory lineage, not data)."""
    schema = dataset.schema
    if columns is None:
        columns = schema.all_names
    else:
        for name in columns:
            schema.definition(name)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for r in dataset.records:
        writer.writerow([_value_to_cell(schema, name, r.get(name)) for name in columns])
    return out.getvalue()


@dataclass(frozen=True)
class DatasetView:
    """A logical projection: one target column plus ordered predictor columns.

    Records whose target value is missing are excluded up front and counted
    in ``excluded_missing_target``.  The view never copies or mutates the
    underlying records.
    """

    schema: RiskFactorSchema
    target: str
    predictors: tuple[str, ...]
    records: tuple[PatientRecord, ...]
    excluded_missing_target: int = 0
    _col_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def width(self) -> int:
        return len(self.predictors)

    def __len__(self) -> int:
        return len(self.records)

    def target_values(self) -> tuple:
        return self.column(self.target)

    def column(self, name: str) -> tuple:
        if name not in self._col_cache:
            if name != self.target and name not in self.predictors:
                raise UnknownName(name)
            self._col_cache[name] = tuple(r.get(name) for r in self.records)
        return self._col_cache[name]

    def values_of(self, name: str) -> tuple[str, ...]:
        return self.schema.values_of(name)

    def class_values(self) -> tuple[str, ...]:
        """Domain of the target, in catalog value order."""
        return self.schema.values_of(self.target)

    def with_records(self, records: tuple[PatientRecord, ...]) -> "DatasetView":
        return DatasetView(schema=self.schema, target=self.target,
                           predictors=self.predictors, records=records,
                           excluded_missing_target=0)


def feature_view(dataset: Dataset, target: str, predictors) -> DatasetView:
    """Project a dataset onto (target, predictors).

    Predictors are reordered canonically (catalog order) so downstream
    tie-breaking by lower catalog index is well defined.
    """
    schema = dataset.schema
    schema.definition(target)
    predictors = set(predictors)
    if not predictors:
        raise EmptyPredictorSet("predictor set is empty")
    if target in predictors:
        raise TargetInPredictors(f"target {target!r} cannot be a predictor")
    for name in predictors:
        if name not in schema:
            raise UnknownName(name)
    ordered = tuple(n for n in schema.all_names if n in predictors)
    kept = tuple(r for r in dataset.records if r.get(target) is not None)
    excluded = len(dataset.records) - len(kept)
    if not kept:
        raise EmptyViewAfterExclusion("no records with a known target value")
    return DatasetView(schema=schema, target=target, predictors=ordered,
                       records=kept, excluded_missing_target=excluded)
