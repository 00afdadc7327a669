"""Operator command line: train, evaluate, smote, generate, export-dot, serve.

Every verb that involves randomness takes ``--seed`` and is fully
deterministic for a fixed seed (identical output bytes).  Failures print a
machine-readable ``{"error": {"code", "detail"}}`` object to stderr and
exit nonzero.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import bayesnet, dtree, service
from .dataset import Dataset, feature_view, parse_dataset, write_dataset
from .errors import BadModelFile, NatalRiskError
from .evaluation import (
    LearnerConfig,
    Protocol,
    confusion_and_metrics,
    cross_validate,
    render_report,
    report_to_json,
)
from .schema import builtin_schema
from .smote import SmoteParams, smote
from .synthetic import demo_cohort_spec, generate_synthetic, spec_from_json


def _read_dataset(path: str) -> Dataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"), builtin_schema())


def _build_view(dataset: Dataset, target: str, with_outcomes):
    schema = dataset.schema
    predictors = [n for n in schema.factor_names if n != target]
    for name in with_outcomes or ():
        if name != target:
            predictors.append(name)
    return feature_view(dataset, target, predictors)


def _learner_config(args) -> LearnerConfig:
    kind = args.learner.replace("-", "_")
    if kind == "dtree":
        return LearnerConfig(kind="dtree", tree_params=_tree_params(args))
    return LearnerConfig(kind="bayes_net", net_params=_net_params(args))


def _tree_params(args) -> dtree.TreeParams:
    return dtree.TreeParams(min_leaf=args.min_leaf, prune=not args.no_prune,
                            confidence=args.confidence, seed=args.seed)


def _net_params(args) -> bayesnet.StructureParams:
    return bayesnet.StructureParams(
        max_parents=args.max_parents, score=args.score,
        equivalent_sample_size=args.equivalent_sample_size,
        restarts=args.restarts, seed=args.seed,
        smoothing_alpha=args.smoothing_alpha)


def _smote_params(args) -> SmoteParams | None:
    if args.smote_percent == 0:
        return None
    return SmoteParams(percent=args.smote_percent, k=args.smote_k, seed=args.seed)


def _prepare_view(args):
    """View for train/evaluate, with pre-fold oversampling applied if asked."""
    dataset = _read_dataset(args.input)
    view = _build_view(dataset, args.target, args.with_outcome)
    if len(set(view.target_values())) < 2:
        print(f"warning: target {args.target!r} has a single class; "
              "the model degenerates to its prior", file=sys.stderr)
    params = _smote_params(args)
    placement = "none"
    fold_smote = None
    if params is not None:
        if args.smote_in_folds:
            placement = "in_folds"
            fold_smote = params
        else:
            placement = "pre_fold"
            view = view.with_records(smote(view, params).records)
    return view, fold_smote, placement


def _evaluate_view(view, args, fold_smote, placement):
    learner = _learner_config(args)
    truths, preds, scores = cross_validate(view, learner, k=args.folds,
                                           seed=args.seed,
                                           smote_params=fold_smote)
    return confusion_and_metrics(
        truths, preds, scores, classes=view.class_values(),
        protocol=Protocol(folds=args.folds, seed=args.seed,
                          smote_placement=placement))


def _train_model(view, args):
    if args.learner == "dtree":
        model = dtree.induce(view, _tree_params(args))
        return model, dtree.tree_to_json(model)
    dag = bayesnet.learn_structure(view, _net_params(args))
    model = bayesnet.fit_cpts(dag, view, args.smoothing_alpha)
    return model, bayesnet.bn_to_json(model)


def cmd_train(args) -> int:
    view, fold_smote, placement = _prepare_view(args)
    report = None
    try:
        report = _evaluate_view(view, args, fold_smote, placement)
    except NatalRiskError as exc:
        print(f"warning: evaluation skipped ({exc.code}): {exc.detail}",
              file=sys.stderr)
    _, text = _train_model(view, args)
    doc = json.loads(text)
    if report is not None:
        doc["meta"] = {"metrics_summary": {
            "accuracy": report.accuracy,
            "per_class_f": {r.label: r.f_measure for r in report.per_class},
        }}
    Path(args.output).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    if report is not None:
        print(render_report(report), end="")
        if args.report:
            Path(args.report).write_text(
                json.dumps(report_to_json(report), indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_evaluate(args) -> int:
    view, fold_smote, placement = _prepare_view(args)
    report = _evaluate_view(view, args, fold_smote, placement)
    if args.json:
        print(json.dumps(report_to_json(report), indent=2))
    else:
        print(render_report(report), end="")
    return 0


def cmd_smote(args) -> int:
    dataset = _read_dataset(args.input)
    view = _build_view(dataset, args.target, args.with_outcome)
    result = smote(view, SmoteParams(percent=args.percent, k=args.k, seed=args.seed))
    Path(args.output).write_text(write_dataset(result), encoding="utf-8")
    return 0


def cmd_generate(args) -> int:
    if args.spec:
        spec = spec_from_json(Path(args.spec).read_text(encoding="utf-8"))
    else:
        spec = demo_cohort_spec()
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    dataset = generate_synthetic(spec, args.count)
    Path(args.output).write_text(write_dataset(dataset), encoding="utf-8")
    return 0


def _load_model_text(path: str):
    text = Path(path).read_text(encoding="utf-8")
    try:
        kind = json.loads(text).get("kind")
    except json.JSONDecodeError as exc:
        raise BadModelFile(f"not valid JSON: {exc}") from exc
    if kind == dtree.KIND:
        return dtree.tree_from_json(text), kind
    if kind == bayesnet.KIND:
        return bayesnet.bn_from_json(text), kind
    raise BadModelFile(f"unknown model kind: {kind!r}")


def cmd_export_dot(args) -> int:
    model, kind = _load_model_text(args.model)
    dot = (dtree.export_tree_dot(model) if kind == dtree.KIND
           else bayesnet.export_bn_dot(model))
    if args.output:
        Path(args.output).write_text(dot, encoding="utf-8")
    else:
        print(dot, end="")
    return 0


def cmd_serve(args) -> int:
    service.run_server(port=args.port, model_dir=args.model_dir, host=args.host)
    return 0


def _add_view_flags(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, help="input CSV path")
    p.add_argument("--target", required=True, help="target column name")
    p.add_argument("--with-outcome", action="append", default=[],
                   metavar="NAME", help="also use this outcome as a predictor")


def _add_learner_flags(p: argparse.ArgumentParser):
    p.add_argument("--learner", choices=["dtree", "bayes-net"], default="dtree")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--min-leaf", type=int, default=2)
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--confidence", type=float, default=0.25)
    p.add_argument("--max-parents", type=int, default=3)
    p.add_argument("--score", choices=["bic", "bdeu"], default="bic")
    p.add_argument("--equivalent-sample-size", type=float, default=10.0)
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--smoothing-alpha", type=float, default=1.0)
    p.add_argument("--smote-percent", type=int, default=0)
    p.add_argument("--smote-k", type=int, default=5)
    p.add_argument("--smote-in-folds", action="store_true",
                   help="oversample inside each training fold instead of up front")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="natalrisk",
                                     description="neonatal risk-factor learning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model, report CV metrics, save it")
    _add_view_flags(p)
    _add_learner_flags(p)
    p.add_argument("--output", required=True, help="model JSON path")
    p.add_argument("--report", help="also write the evaluation report JSON here")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validate without saving a model")
    _add_view_flags(p)
    _add_learner_flags(p)
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("smote", help="oversample the minority class of a CSV")
    _add_view_flags(p)
    p.add_argument("--percent", type=int, required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_smote)

    p = sub.add_parser("generate", help="write a synthetic planted-signal cohort")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--spec", help="generation plan JSON (default: built-in demo plan)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("export-dot", help="render a saved model as DOT")
    p.add_argument("--model", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("serve", help="run the prediction HTTP service")
    p.add_argument("--port", type=int, default=None,
                   help=f"default: ${service.ENV_PORT} or {service.DEFAULT_PORT}")
    p.add_argument("--model-dir", default=None,
                   help=f"default: ${service.ENV_MODEL_DIR} or ./models")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NatalRiskError as exc:
        payload = {"error": {"code": exc.code, "detail": exc.detail}}
    except ValueError as exc:
        payload = {"error": {"code": "invalid_argument", "detail": str(exc)}}
    except OSError as exc:
        payload = {"error": {"code": "io_error", "detail": str(exc)}}
    print(json.dumps(payload), file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
