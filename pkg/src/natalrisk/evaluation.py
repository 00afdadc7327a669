"""Stratified cross-validation and Weka-style classifier metrics.

Per-class rows are one-vs-rest; the weighted row is the support-weighted
mean.  ROC area is computed twice (normalized Mann-Whitney rank statistic
and trapezoidal integration) as mutual checks: both handle ties, the rank
form stays in exact integer arithmetic until one final division.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from . import bayesnet, dtree
from .dataset import DatasetView
from .errors import EmptyInput, LengthMismatch, TooFewRecords
from .smote import SmoteParams, smote


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]  # row = truth, column = predicted

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def correct(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.classes)))


@dataclass(frozen=True)
class MetricsRow:
    label: str  # class value, or "weighted_avg"
    tp_rate: float
    fp_rate: float
    precision: float
    recall: float
    f_measure: float
    mcc: float
    roc_area: float
    prc_area: float
    support: int


@dataclass(frozen=True)
class Protocol:
    folds: int | None = None
    seed: int | None = None
    smote_placement: str = "none"  # none | pre_fold | in_folds


@dataclass(frozen=True)
class EvaluationReport:
    matrix: ConfusionMatrix
    per_class: tuple[MetricsRow, ...]
    weighted: MetricsRow
    accuracy: float
    protocol: Protocol = Protocol()


@dataclass(frozen=True)
class LearnerConfig:
    """Names the learner cross_validate should train per fold."""

    kind: str  # dtree | bayes_net | majority
    tree_params: dtree.TreeParams = field(default_factory=dtree.TreeParams)
    net_params: bayesnet.StructureParams = field(default_factory=bayesnet.StructureParams)

    def __post_init__(self):
        if self.kind not in ("dtree", "bayes_net", "majority"):
            raise ValueError(f"unknown learner kind: {self.kind!r}")


def stratified_folds(view: DatasetView, k: int, seed: int = 0) -> list[int]:
    """Fold id per record; per-class fold sizes differ by at most one."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if len(view) < k:
        raise TooFewRecords(k, len(view))
    rng = random.Random(seed)
    assignment = [0] * len(view)
    targets = view.target_values()
    for value in view.class_values():
        indices = [i for i, t in enumerate(targets) if t == value]
        rng.shuffle(indices)
        for j, i in enumerate(indices):
            assignment[i] = j % k
    return assignment


def _evidence_for(view: DatasetView, record) -> dict:
    return {p: record.get(p) for p in view.predictors if record.get(p) is not None}


def _fold_predictions(train_view: DatasetView, test_records, view: DatasetView,
                      learner: LearnerConfig, positive: str):
    preds = []
    if learner.kind == "dtree":
        model = dtree.induce(train_view, learner.tree_params)
        for r in test_records:
            res = dtree.predict_tree(model, _evidence_for(view, r), view.schema)
            preds.append((res.predicted, res.distribution[positive]))
    elif learner.kind == "bayes_net":
        dag = bayesnet.learn_structure(train_view, learner.net_params)
        model = bayesnet.fit_cpts(dag, train_view, learner.net_params.smoothing_alpha)
        for r in test_records:
            res = bayesnet.predict_bn(model, _evidence_for(view, r))
            preds.append((res.predicted, res.distribution[positive]))
    else:  # majority baseline
        targets = train_view.target_values()
        counts = {v: 0 for v in view.class_values()}
        for t in targets:
            counts[t] += 1
        majority = max(view.class_values(), key=lambda v: (counts[v], -view.class_values().index(v)))
        score = counts[positive] / len(targets)
        preds = [(majority, score) for _ in test_records]
    return preds


def cross_validate(view: DatasetView, learner: LearnerConfig, k: int = 10,
                   seed: int = 0, positive_class: str | None = None,
                   smote_params: SmoteParams | None = None):
    """(truths, predictions, positive-class scores), index-ordered.

    ``smote_params`` oversamples each fold's training split only (the
    leak-free protocol); pre-fold oversampling is the caller applying
    ``smote`` before building the view.
    """
    positive = positive_class or view.class_values()[-1]
    assignment = stratified_folds(view, k, seed)
    truths = [r.get(view.target) for r in view.records]
    predictions: list = [None] * len(view)
    scores: list = [0.0] * len(view)
    for fold in range(k):
        test_idx = [i for i, f in enumerate(assignment) if f == fold]
        if not test_idx:
            continue
        train_records = tuple(r for i, r in enumerate(view.records)
                              if assignment[i] != fold)
        train_view = view.with_records(train_records)
        if smote_params is not None:
            balanced = smote(train_view, smote_params)
            train_view = view.with_records(balanced.records)
        fold_preds = _fold_predictions(train_view, [view.records[i] for i in test_idx],
                                       view, learner, positive)
        for i, (pred, score) in zip(test_idx, fold_preds):
            predictions[i] = pred
            scores[i] = score
    return tuple(truths), tuple(predictions), tuple(scores)


# --- metric computation ------------------------------------------------------

def roc_auc_mann_whitney(truths, scores, positive) -> float:
    """Normalized rank-sum AUC; ties count one half.

    Pair counting stays in integers (2 per concordant pair, 1 per tie) so
    clean cases come out exact after the single closing division.
    """
    pos = [s for t, s in zip(truths, scores) if t == positive]
    neg = [s for t, s in zip(truths, scores) if t != positive]
    if not pos or not neg:
        return 0.5
    twice = 0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                twice += 2
            elif sp == sn:
                twice += 1
    return twice / (2 * len(pos) * len(neg))


def roc_auc_trapezoid(truths, scores, positive) -> float:
    """AUC by trapezoidal integration over threshold steps (handles ties)."""
    pairs = sorted(zip(scores, truths), key=lambda p: -p[0])
    n_pos = sum(1 for t in truths if t == positive)
    n_neg = len(truths) - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    area = 0.0
    tp = fp = 0
    prev_tp = prev_fp = 0
    i = 0
    while i < len(pairs):
        j = i
        while j < len(pairs) and pairs[j][0] == pairs[i][0]:
            if pairs[j][1] == positive:
                tp += 1
            else:
                fp += 1
            j += 1
        area += (fp - prev_fp) / n_neg * (tp + prev_tp) / (2 * n_pos)
        prev_tp, prev_fp = tp, fp
        i = j
    return area


def prc_area(truths, scores, positive) -> float:
    """Area under the precision-recall steps (average-precision form)."""
    pairs = sorted(zip(scores, truths), key=lambda p: -p[0])
    n_pos = sum(1 for t in truths if t == positive)
    if n_pos == 0:
        return 0.0
    area = 0.0
    tp = fp = 0
    prev_recall = 0.0
    i = 0
    while i < len(pairs):
        j = i
        while j < len(pairs) and pairs[j][0] == pairs[i][0]:
            if pairs[j][1] == positive:
                tp += 1
            else:
                fp += 1
            j += 1
        recall = tp / n_pos
        precision = tp / (tp + fp)
        area += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return area


def _mcc(tp: int, fp: int, fn: int, tn: int) -> float:
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / denom ** 0.5


def _ratio(num: int, denom: int) -> float:
    return num / denom if denom else 0.0


def metrics_from_matrix(matrix: ConfusionMatrix, roc_by_class: dict | None = None,
                        prc_by_class: dict | None = None) -> list[MetricsRow]:
    """One-vs-rest rows in matrix class order; areas default to 0.5/0.0."""
    total = matrix.total
    rows = []
    for i, cls in enumerate(matrix.classes):
        tp = matrix.counts[i][i]
        fn = sum(matrix.counts[i]) - tp
        fp = sum(matrix.counts[r][i] for r in range(len(matrix.classes))) - tp
        tn = total - tp - fn - fp
        precision = _ratio(tp, tp + fp)
        recall = _ratio(tp, tp + fn)
        rows.append(MetricsRow(
            label=str(cls),
            tp_rate=recall,
            fp_rate=_ratio(fp, fp + tn),
            precision=precision,
            recall=recall,
            f_measure=(2 * precision * recall / (precision + recall)
                       if precision + recall else 0.0),
            mcc=_mcc(tp, fp, fn, tn),
            roc_area=(roc_by_class or {}).get(cls, 0.5),
            prc_area=(prc_by_class or {}).get(cls, 0.0),
            support=tp + fn,
        ))
    return rows


def _weighted_row(rows: list[MetricsRow]) -> MetricsRow:
    total = sum(r.support for r in rows)

    def mean(attr: str) -> float:
        if total == 0:
            return 0.0
        return sum(getattr(r, attr) * r.support for r in rows) / total

    return MetricsRow(label="weighted_avg", tp_rate=mean("tp_rate"),
                      fp_rate=mean("fp_rate"), precision=mean("precision"),
                      recall=mean("recall"), f_measure=mean("f_measure"),
                      mcc=mean("mcc"), roc_area=mean("roc_area"),
                      prc_area=mean("prc_area"), support=total)


def confusion_and_metrics(truths, predictions, scores=None, classes=None,
                          positive_class=None,
                          protocol: Protocol = Protocol()) -> EvaluationReport:
    """Full report from pooled predictions.

    ``scores`` are probabilities of the positive class (default: the last
    class); the complement is used for the other class, which matches the
    one-vs-rest areas for binary targets.
    """
    truths = list(truths)
    predictions = list(predictions)
    if len(truths) != len(predictions):
        raise LengthMismatch(f"{len(truths)} truths vs {len(predictions)} predictions")
    if scores is not None and len(scores) != len(truths):
        raise LengthMismatch(f"{len(truths)} truths vs {len(scores)} scores")
    if not truths:
        raise EmptyInput("nothing to evaluate")
    if classes is None:
        classes = tuple(sorted(set(truths) | set(predictions)))
    else:
        classes = tuple(classes)
    index = {c: i for i, c in enumerate(classes)}
    counts = [[0] * len(classes) for _ in classes]
    for t, p in zip(truths, predictions):
        counts[index[t]][index[p]] += 1
    matrix = ConfusionMatrix(classes=classes,
                             counts=tuple(tuple(row) for row in counts))

    roc_by_class = {}
    prc_by_class = {}
    if scores is not None:
        positive = positive_class if positive_class is not None else classes[-1]
        for cls in classes:
            cls_scores = [s if cls == positive else 1.0 - s for s in scores]
            roc_by_class[cls] = roc_auc_mann_whitney(truths, cls_scores, cls)
            prc_by_class[cls] = prc_area(truths, cls_scores, cls)
    rows = metrics_from_matrix(matrix, roc_by_class, prc_by_class)
    return EvaluationReport(matrix=matrix, per_class=tuple(rows),
                            weighted=_weighted_row(rows),
                            accuracy=matrix.correct / matrix.total,
                            protocol=protocol)


# --- rendering ---------------------------------------------------------------

def round3(x: float) -> str:
    """Half-up decimal rounding to 3 places of the shortest float repr."""
    return str(Decimal(repr(float(x))).quantize(Decimal("0.001"),
                                                rounding=ROUND_HALF_UP))


def render_report(report: EvaluationReport) -> str:
    headers = ["TP Rate", "FP Rate", "Precision", "Recall", "F-Measure",
               "MCC", "ROC Area", "PRC Area", "Class"]
    body = []
    for row in report.per_class:
        body.append([round3(row.tp_rate), round3(row.fp_rate),
                     round3(row.precision), round3(row.recall),
                     round3(row.f_measure), round3(row.mcc),
                     round3(row.roc_area), round3(row.prc_area), row.label])
    w = report.weighted
    body.append([round3(w.tp_rate), round3(w.fp_rate), round3(w.precision),
                 round3(w.recall), round3(w.f_measure), round3(w.mcc),
                 round3(w.roc_area), round3(w.prc_area), "Weighted Avg."])
    widths = [max(len(h), max(len(r[i]) for r in body)) for i, h in enumerate(headers)]

    lines = ["=== Detailed Accuracy By Class ===", ""]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip())
    for r in body:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(r)).rstrip())
    lines.append("")
    lines.append(f"Accuracy: {round3(report.accuracy)} "
                 f"({report.matrix.correct}/{report.matrix.total})")
    lines.append("")
    lines.append("=== Confusion Matrix ===")
    lines.append("")
    letters = [chr(ord("a") + i) for i in range(len(report.matrix.classes))]
    cell_w = max(len(str(c)) for row in report.matrix.counts for c in row)
    cell_w = max(cell_w, 1)
    lines.append("  ".join(x.rjust(cell_w) for x in letters) + "   <-- classified as")
    for i, row in enumerate(report.matrix.counts):
        cells = "  ".join(str(c).rjust(cell_w) for c in row)
        lines.append(f"{cells} | {letters[i]} = {report.matrix.classes[i]}")
    return "\n".join(lines) + "\n"


def report_to_json(report: EvaluationReport) -> dict:
    def row(r: MetricsRow) -> dict:
        return {"class": r.label, "tp_rate": r.tp_rate, "fp_rate": r.fp_rate,
                "precision": r.precision, "recall": r.recall,
                "f_measure": r.f_measure, "mcc": r.mcc, "roc_area": r.roc_area,
                "prc_area": r.prc_area, "support": r.support}

    return {
        "accuracy": report.accuracy,
        "per_class": [row(r) for r in report.per_class],
        "weighted_avg": row(report.weighted),
        "confusion_matrix": {"classes": list(report.matrix.classes),
                             "counts": [list(r) for r in report.matrix.counts]},
        "protocol": {"folds": report.protocol.folds, "seed": report.protocol.seed,
                     "smote_placement": report.protocol.smote_placement},
    }
