"""Record live server responses into test/fixtures/fixtures.json.

Trains the same planted demo models the backend test suite uses, boots the
service in-process, and saves every response the console tests replay. Run
from the frontend directory with the natalrisk package installed:

    python3 tools/record_fixtures.py
"""

import json
import pathlib
import tempfile

from fastapi.testclient import TestClient

from natalrisk.bayesnet import bn_to_json, fit_cpts, learn_structure
from natalrisk.dataset import feature_view
from natalrisk.dtree import induce, tree_to_json
from natalrisk.schema import builtin_schema
from natalrisk.service import create_app
from natalrisk.synthetic import demo_cohort_spec, generate_synthetic

OUT = pathlib.Path(__file__).resolve().parent.parent / "test" / "fixtures"

PREDICT_CASES = [
    ("net", {}),
    ("net", {"ventilated_at_birth": "present"}),
    ("net", {"ventilated_at_birth": "absent"}),
    ("net", {"twins": "present"}),
    ("net", {"hypertension": "present"}),
    ("net", {"eg_lt39": "present"}),
    ("net", {"mystery_key": "present"}),
    ("net", {"twins": "sideways"}),
    ("tree", {}),
    ("tree", {"ventilated_at_birth": "present"}),
    ("tree", {"hypertension": "present"}),
]


def main():
    schema = builtin_schema()
    cohort = generate_synthetic(demo_cohort_spec(seed=5), 600)
    with tempfile.TemporaryDirectory() as model_dir:
        root = pathlib.Path(model_dir)
        tree_view = feature_view(cohort, "apgar1_leq7",
                                 list(schema.factor_names) + ["ventilated_at_birth"])
        (root / "tree.json").write_text(tree_to_json(induce(tree_view)),
                                        encoding="utf-8")
        net_view = feature_view(cohort, "apgar1_leq7",
                                ["ventilated_at_birth", "twins", "eg_lt37",
                                 "eg_lt39", "hypertension"])
        net = fit_cpts(learn_structure(net_view), net_view)
        (root / "net.json").write_text(bn_to_json(net), encoding="utf-8")

        client = TestClient(create_app(model_dir=root))
        fixtures = {
            "schema": client.get("/api/schema").json(),
            "models": client.get("/api/models").json(),
            "details": {mid: client.get(f"/api/models/{mid}").json()
                        for mid in ("net", "tree")},
            "graphs": {"net": client.get("/api/models/net/graph").text},
            "missing_model": _as_case(client.get("/api/models/nope")),
            "predicts": [],
        }
        for model, evidence in PREDICT_CASES:
            r = client.post(f"/api/models/{model}/predict",
                            json={"evidence": evidence})
            fixtures["predicts"].append(
                {"model": model, "evidence": evidence} | _as_case(r))

    OUT.mkdir(parents=True, exist_ok=True)
    out_file = OUT / "fixtures.json"
    out_file.write_text(json.dumps(fixtures, indent=2) + "\n", encoding="utf-8")
    baseline = next(p for p in fixtures["predicts"]
                    if p["model"] == "net" and p["evidence"] == {})
    vent = next(p for p in fixtures["predicts"]
                if p["evidence"] == {"ventilated_at_birth": "present"})
    print(f"wrote {out_file} ({out_file.stat().st_size} bytes)")
    print("net baseline P(present):", baseline["body"]["distribution"]["present"])
    print("net ventilated P(present):", vent["body"]["distribution"]["present"])


def _as_case(response):
    return {"status": response.status_code, "body": response.json()}


if __name__ == "__main__":
    main()
