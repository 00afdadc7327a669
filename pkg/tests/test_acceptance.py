"""End-to-end acceptance checks for the shipped feature set.

Each test covers one contract: metric arithmetic on the reference confusion
matrix, the oversampling count law, equivalence of the exact-inference and
root-split engines against brute-force oracles, planted-signal recovery on a
synthetic cohort, ROC exactness, and the HTTP service contract.  Every test
prints a single PASS/FAIL line with its headline numbers and runtime.
"""

import json
import math
import random
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from natalrisk.bayesnet import bn_to_json, eliminate, fit_cpts, learn_structure
from natalrisk.dataset import feature_view, make_record
from natalrisk.dtree import InternalNode, Leaf, TreeParams, entropy, induce, tree_to_json
from natalrisk.evaluation import (
    LearnerConfig,
    confusion_and_metrics,
    cross_validate,
    roc_auc_mann_whitney,
    roc_auc_trapezoid,
    round3,
)
from natalrisk.schema import builtin_schema
from natalrisk.service import create_app
from natalrisk.smote import SmoteParams, smote
from natalrisk.synthetic import demo_cohort_spec, generate_synthetic

from conftest import enumerate_posterior, random_binary_bn, view_of

TARGET = "apgar1_leq7"


def report(capsys, label, ok, detail):
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, f"{label}: {detail}"


def test_reference_matrix_metrics(capsys):
    started = time.perf_counter()
    truths = ["absent"] * 54 + ["present"] * 232
    preds = (["absent"] * 48 + ["present"] * 6) + (["absent"] * 2 + ["present"] * 230)
    out = confusion_and_metrics(truths, preds, classes=("absent", "present"))
    low, high = out.per_class
    w = out.weighted
    expected = [
        ("accuracy", out.accuracy, 0.972),
        ("precision_0", low.precision, 0.96),
        ("recall_0", low.recall, 0.889),
        ("f_0", low.f_measure, 0.923),
        ("mcc", low.mcc, 0.91),
        ("tp_rate_1", high.tp_rate, 0.991),
        ("weighted_tp_rate", w.tp_rate, 0.97),
        ("weighted_precision", w.precision, 0.97),
        ("weighted_f", w.f_measure, 0.97),
    ]
    misses = [f"{name}={round3(got)} (want {want})"
              for name, got, want in expected
              if abs(float(round3(got)) - want) > 0.005 + 1e-12]
    elapsed = time.perf_counter() - started
    ok = not misses and elapsed < 1.0
    detail = (f"accuracy {round3(out.accuracy)}, mcc {round3(low.mcc)}, "
              f"{elapsed:.3f}s" + (f"; misses: {misses}" if misses else ""))
    report(capsys, "reference-matrix metrics", ok, detail)


def test_oversampling_count_law(capsys):
    started = time.perf_counter()
    schema = builtin_schema()
    rng = random.Random(13)
    rows = []
    for _ in range(18):
        rows.append({
            TARGET: "present",
            "hypertension": rng.choice(("absent", "present")),
            "twins": rng.choice(("absent", "present")),
            "birth_weight": rng.choice(schema.values_of("birth_weight")),
        })
    rows += [{TARGET: "absent"}] * 40
    view = view_of(rows, TARGET, ["hypertension", "twins", "birth_weight"])
    bad = []
    for seed in range(100):
        out = smote(view, SmoteParams(percent=200, seed=seed))
        minority = sum(1 for r in out.records if r.get(TARGET) == "present")
        if minority != 54 or len(out) != 58 + 36:
            bad.append((seed, minority))
    elapsed = time.perf_counter() - started
    ok = not bad and elapsed < 5.0
    report(capsys, "oversampling count law", ok,
           f"18 -> 54 minority at percent=200 across 100 seeds, {elapsed:.2f}s"
           + (f"; failures: {bad[:3]}" if bad else ""))


def test_inference_matches_enumeration(capsys):
    started = time.perf_counter()
    rng = random.Random(2024)
    worst = 0.0
    for _ in range(200):
        model = random_binary_bn(rng, rng.randint(2, 12), max_parents=3)
        names = model.dag.variables
        query = names[rng.randrange(len(names))]
        others = [v for v in names if v != query]
        evidence = {v: rng.choice(("absent", "present"))
                    for v in rng.sample(others, rng.randint(0, len(others)))}
        got = eliminate(model, query, evidence)
        want = enumerate_posterior(model, query, evidence)
        worst = max(worst, max(abs(got[v] - want[v]) for v in got))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-9 and elapsed < 60.0
    report(capsys, "exact inference vs enumeration", ok,
           f"200 random networks, max deviation {worst:.2e}, {elapsed:.1f}s")


def _oracle_root(view):
    """Independent brute-force reimplementation of the root-split rule."""
    records = view.records

    def h(recs):
        counts = Counter(r.get(view.target) for r in recs)
        total = len(recs)
        return -sum(n / total * math.log2(n / total) for n in counts.values())

    if len({r.get(view.target) for r in records}) <= 1 or len(records) < 2:
        return None
    stats = []
    for feature in view.predictors:
        known = [r for r in records if r.get(feature) is not None]
        if len({r.get(feature) for r in known}) < 2:
            continue
        split_h = 0.0
        split_info = 0.0
        for value in view.values_of(feature):
            part = [r for r in known if r.get(feature) == value]
            if part:
                weight = len(part) / len(known)
                split_h += weight * h(part)
                split_info -= weight * math.log2(weight)
        gain = max(0.0, len(known) / len(records) * (h(known) - split_h))
        ratio = gain / split_info if split_info > 0 else 0.0
        stats.append((feature, gain, ratio))
    if not stats:
        return None
    mean_gain = sum(g for _, g, _ in stats) / len(stats)
    best = None
    for feature, gain, ratio in stats:
        if gain >= mean_gain and (best is None or ratio > best[1]):
            best = (feature, ratio, gain)
    if best is None or best[2] <= 0.0:
        return None
    return best[0]


def test_root_split_matches_brute_force(capsys):
    started = time.perf_counter()
    h = entropy([9, 5])
    entropy_ok = abs(h - 0.940286) <= 1e-6
    features = ["hypertension", "preeclampsia", "iugr", "twins"]
    rng = random.Random(41)
    mismatches = []
    for trial in range(500):
        chosen = features[:rng.randint(1, 4)]
        rows = []
        for _ in range(rng.randint(1, 20)):
            row = {TARGET: rng.choice(("absent", "present"))}
            for f in chosen:
                if rng.random() >= 0.15:
                    row[f] = rng.choice(("absent", "present"))
            rows.append(row)
        view = view_of(rows, TARGET, chosen)
        model = induce(view, TreeParams(min_leaf=1, prune=False))
        want = _oracle_root(view)
        if want is None:
            if not isinstance(model.root, Leaf):
                mismatches.append((trial, "leaf", model.root.feature))
        elif not isinstance(model.root, InternalNode) or model.root.feature != want:
            got = model.root.feature if isinstance(model.root, InternalNode) else "leaf"
            mismatches.append((trial, want, got))
    elapsed = time.perf_counter() - started
    ok = entropy_ok and not mismatches and elapsed < 30.0
    report(capsys, "root split vs brute force", ok,
           f"500 trials, entropy(9,5)={h:.6f}, {elapsed:.1f}s"
           + (f"; mismatches: {mismatches[:3]}" if mismatches else ""))


def test_planted_signal_recovery(capsys):
    started = time.perf_counter()
    schema = builtin_schema()
    cohort = generate_synthetic(demo_cohort_spec(), 5000)

    tree_view = feature_view(cohort, TARGET,
                             list(schema.factor_names) + ["ventilated_at_birth"])
    model = induce(tree_view)
    root_feature = (model.root.feature
                    if isinstance(model.root, InternalNode) else "leaf")

    truths, preds, _ = cross_validate(tree_view, LearnerConfig(kind="dtree"),
                                      k=10, seed=0)
    accuracy = sum(1 for t, p in zip(truths, preds) if t == p) / len(truths)

    active = ["ventilated_at_birth", "twins", "eg_lt37", "eg_lt39",
              "hypertension", "bmi_gt25", "age_gt35", "meconium_fluid",
              "urgent_caesarean", "gestational_diabetes", "birth_weight"]
    net_view = feature_view(cohort, TARGET, active)
    dag = learn_structure(net_view)
    adjacent = {frozenset(e) for e in dag.edges}
    has_pair = frozenset(("twins", "eg_lt37")) in adjacent

    elapsed = time.perf_counter() - started
    ok = (root_feature == "ventilated_at_birth" and accuracy >= 0.95
          and has_pair and elapsed < 120.0)
    report(capsys, "planted-signal recovery", ok,
           f"root={root_feature}, cv accuracy={accuracy:.4f}, "
           f"twins/eg_lt37 linked={has_pair}, {elapsed:.1f}s")


def test_roc_exactness(capsys):
    started = time.perf_counter()
    perfect = (["present", "present", "absent", "absent"], [0.9, 0.8, 0.2, 0.1])
    inverted = (["present", "present", "absent", "absent"], [0.1, 0.2, 0.8, 0.9])
    one_swap = (["present", "absent", "present", "absent"], [0.9, 0.6, 0.4, 0.1])
    checks = []
    for auc in (roc_auc_mann_whitney, roc_auc_trapezoid):
        checks.append(auc(*perfect, "present") == 1.0)
        checks.append(auc(*inverted, "present") == 0.0)
        checks.append(auc(*one_swap, "present") == 0.75)
    rng = random.Random(7)
    worst = 0.0
    for _ in range(300):
        n = rng.randint(2, 50)
        truths = [rng.choice(("absent", "present")) for _ in range(n)]
        scores = [rng.randint(0, 5) / 5 for _ in range(n)]
        worst = max(worst, abs(roc_auc_mann_whitney(truths, scores, "present")
                               - roc_auc_trapezoid(truths, scores, "present")))
    elapsed = time.perf_counter() - started
    ok = all(checks) and worst <= 1e-12
    report(capsys, "roc exactness", ok,
           f"endpoints exact={all(checks)}, max rank-vs-trapezoid gap "
           f"{worst:.2e}, {elapsed:.2f}s")


def test_service_contract(capsys, tmp_path):
    started = time.perf_counter()
    schema = builtin_schema()
    cohort = generate_synthetic(demo_cohort_spec(seed=5), 600)
    tree_view = feature_view(cohort, TARGET,
                             list(schema.factor_names) + ["ventilated_at_birth"])
    (tmp_path / "tree.json").write_text(tree_to_json(induce(tree_view)),
                                        encoding="utf-8")
    active = ["ventilated_at_birth", "twins", "eg_lt37", "eg_lt39", "hypertension"]
    net_view = feature_view(cohort, TARGET, active)
    net = fit_cpts(learn_structure(net_view), net_view)
    (tmp_path / "net.json").write_text(bn_to_json(net), encoding="utf-8")

    client = TestClient(create_app(model_dir=tmp_path))
    problems = []

    r = client.get("/api/schema")
    if r.status_code != 200 or r.content != schema.to_json().encode("utf-8"):
        problems.append("schema endpoint")
    r = client.get("/api/models")
    if r.status_code != 200 or [m["id"] for m in r.json()] != ["net", "tree"]:
        problems.append("model listing")
    r = client.get("/api/models/tree")
    if r.status_code != 200 or r.json()["kind"] != "decision_tree":
        problems.append("model detail")
    r = client.get("/api/models/net/graph")
    if r.status_code != 200 or not r.text.startswith("digraph"):
        problems.append("graph endpoint")
    r = client.post("/api/models/net/predict",
                    json={"evidence": {"ventilated_at_birth": "present"}})
    if r.status_code != 200 or r.json()["predicted"] not in ("absent", "present"):
        problems.append("predict endpoint")

    r = client.post("/api/models/tree/predict",
                    json={"evidence": {"mystery_key": "present"}})
    if r.status_code != 400 or "mystery_key" not in r.json()["error"]["detail"]:
        problems.append("invalid evidence handling")

    cases = [{"evidence": {}},
             {"evidence": {"ventilated_at_birth": "present"}},
             {"evidence": {"twins": "present", "eg_lt39": "present"}},
             {"evidence": {"hypertension": "absent"}},
             {"evidence": {"eg_lt37": "present", "hypertension": "present"}}]
    bodies = [cases[i % len(cases)] for i in range(1000)]

    def call(body):
        res = client.post("/api/models/net/predict", json=body)
        return res.status_code, res.json()

    sequential = [call(b) for b in bodies]
    with ThreadPoolExecutor(max_workers=16) as pool:
        concurrent = list(pool.map(call, bodies))
    if concurrent != sequential:
        problems.append("concurrent/sequential divergence")

    elapsed = time.perf_counter() - started
    ok = not problems
    report(capsys, "service contract", ok,
           f"5 endpoints, 1000 concurrent predicts replayed, {elapsed:.1f}s"
           + (f"; problems: {problems}" if problems else ""))
