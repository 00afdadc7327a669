"""Exception hierarchy for the natalrisk package.

Every error carries a stable machine-readable ``code`` (used by the CLI and
the HTTP service error payloads) and a human-readable ``detail``.
"""

from __future__ import annotations


class NatalRiskError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# --- schema / dataset -------------------------------------------------------

class UnknownColumn(NatalRiskError):
    code = "unknown_column"

    def __init__(self, name: str):
        super().__init__(f"unknown column: {name}")
        self.name = name


class DuplicateColumn(NatalRiskError):
    code = "duplicate_column"

    def __init__(self, name: str):
        super().__init__(f"duplicate column: {name}")
        self.name = name


class MissingColumn(NatalRiskError):
    code = "missing_column"

    def __init__(self, name: str):
        super().__init__(f"required factor column missing: {name}")
        self.name = name


class BadValue(NatalRiskError):
    code = "bad_value"

    def __init__(self, row: int | None, column: str, value: str):
        where = f"row {row}, " if row is not None else ""
        super().__init__(f"bad value ({where}column {column!r}): {value!r}")
        self.row = row
        self.column = column
        self.value = value


class EmptyInput(NatalRiskError):
    code = "empty_input"


class InvalidSpec(NatalRiskError):
    code = "invalid_spec"


class UnknownName(NatalRiskError):
    code = "unknown_name"

    def __init__(self, name: str):
        super().__init__(f"unknown schema name: {name}")
        self.name = name


class EmptyPredictorSet(NatalRiskError):
    code = "empty_predictor_set"


class TargetInPredictors(NatalRiskError):
    code = "target_in_predictors"


class EmptyViewAfterExclusion(NatalRiskError):
    code = "empty_view_after_exclusion"


# --- smote ------------------------------------------------------------------

class NotMinorityRecord(NatalRiskError):
    code = "not_minority_record"


class InsufficientMinority(NatalRiskError):
    code = "insufficient_minority"

    def __init__(self, k: int, available: int):
        super().__init__(f"need {k} minority neighbours, only {available} available")
        self.k = k
        self.available = available


class SchemaMismatch(NatalRiskError):
    code = "schema_mismatch"


class DegenerateTarget(NatalRiskError):
    code = "degenerate_target"


class MinorityTooSmall(NatalRiskError):
    code = "minority_too_small"


# --- dtree ------------------------------------------------------------------

class AllZeroCounts(NatalRiskError):
    code = "all_zero_counts"


class UnknownFeature(NatalRiskError):
    code = "unknown_feature"

    def __init__(self, name: str):
        super().__init__(f"unknown feature: {name}")
        self.name = name


class EmptyView(NatalRiskError):
    code = "empty_view"


# --- bayesnet ---------------------------------------------------------------

class VariableMismatch(NatalRiskError):
    code = "variable_mismatch"


class CyclicGraph(NatalRiskError):
    code = "cyclic_graph"


class UnknownVariable(NatalRiskError):
    code = "unknown_variable"

    def __init__(self, name: str):
        super().__init__(f"unknown variable: {name}")
        self.name = name


class QueryInEvidence(NatalRiskError):
    code = "query_in_evidence"


# --- evaluation -------------------------------------------------------------

class LengthMismatch(NatalRiskError):
    code = "length_mismatch"


class TooFewRecords(NatalRiskError):
    code = "too_few_records"

    def __init__(self, k: int, available: int):
        super().__init__(f"{k} folds requested but only {available} records available")
        self.k = k
        self.available = available


# --- service ----------------------------------------------------------------

class UnknownModel(NatalRiskError):
    code = "unknown_model"

    def __init__(self, model_id: str):
        super().__init__(f"unknown model: {model_id}")
        self.model_id = model_id


class BadEvidence(NatalRiskError):
    code = "bad_evidence"


class BadModelFile(NatalRiskError):
    code = "bad_model_file"
