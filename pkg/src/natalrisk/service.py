"""HTTP prediction service.

Models are trained offline by the CLI and loaded read-only at startup;
malformed files are skipped with a warning so one bad artifact cannot take
the service down.  All handlers work on immutable models, so concurrent
requests need no locking and any request order yields identical responses.

Error payloads are always ``{"error": {"code": ..., "detail": ...}}``.
"""

from __future__ import annotations

import datetime
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from . import bayesnet, dtree
from .errors import BadEvidence, NatalRiskError, UnknownModel
from .schema import RiskFactorSchema, builtin_schema

log = logging.getLogger("natalrisk.service")

DEFAULT_PORT = 8000
ENV_PORT = "NATAL_RISK_PORT"
ENV_MODEL_DIR = "NATAL_RISK_MODEL_DIR"

_HTTP_STATUS = {"unknown_model": 404}


@dataclass(frozen=True)
class ModelRegistryEntry:
    model_id: str
    kind: str
    target: str
    model: object  # DecisionTreeModel | BayesNetModel
    created_at: str
    metrics_summary: dict | None

    def summary(self) -> dict:
        return {"id": self.model_id, "kind": self.kind, "target": self.target,
                "created_at": self.created_at,
                "metrics_summary": self.metrics_summary}

    def detail(self) -> dict:
        doc = self.summary()
        if self.kind == dtree.KIND:
            doc["trained_on"] = self.model.trained_on
            doc["variables"] = list(dtree.used_features(self.model))
            doc["node_count"] = dtree.node_count(self.model.root)
        else:
            doc["trained_on"] = self.model.trained_on
            doc["variables"] = list(self.model.dag.variables)
            doc["edge_count"] = len(self.model.dag.edges)
        return doc

    def graph_dot(self) -> str:
        if self.kind == dtree.KIND:
            return dtree.export_tree_dot(self.model)
        return bayesnet.export_bn_dot(self.model)


def _load_model_file(path: Path) -> ModelRegistryEntry | None:
    try:
        text = path.read_text(encoding="utf-8")
        doc = json.loads(text)
        kind = doc.get("kind") if isinstance(doc, dict) else None
        if kind == dtree.KIND:
            model = dtree.tree_from_json(text)
            target = model.target
        elif kind == bayesnet.KIND:
            model = bayesnet.bn_from_json(text)
            target = model.class_var
        else:
            raise ValueError(f"unknown model kind: {kind!r}")
        meta = doc.get("meta") or {}
        created = datetime.datetime.fromtimestamp(
            path.stat().st_mtime, tz=datetime.timezone.utc).isoformat()
        return ModelRegistryEntry(model_id=path.stem, kind=kind, target=target,
                                  model=model, created_at=created,
                                  metrics_summary=meta.get("metrics_summary"))
    except (OSError, ValueError, NatalRiskError) as exc:
        log.warning("skipping malformed model file %s: %s", path, exc)
        return None


def load_registry(model_dir) -> dict:
    """id -> entry for every valid ``*.json`` under ``model_dir``."""
    registry: dict = {}
    root = Path(model_dir)
    if not root.exists():
        return registry
    for path in sorted(root.glob("*.json")):
        entry = _load_model_file(path)
        if entry is not None:
            registry[entry.model_id] = entry
    return registry


def _predict(entry: ModelRegistryEntry, evidence: dict,
             schema: RiskFactorSchema) -> dict:
    if entry.kind == dtree.KIND:
        res = dtree.predict_tree(entry.model, evidence, schema)
        explanation = {"type": "path", "steps": [s.to_json() for s in res.path]}
    else:
        res = bayesnet.predict_bn(entry.model, evidence)
        explanation = {"type": "influence", "variables": list(res.influence)}
    return {
        "model": {"id": entry.model_id, "kind": entry.kind, "target": entry.target},
        "predicted": res.predicted,
        "distribution": res.distribution,
        "explanation": explanation,
        "schema_version": 1,
    }


def create_app(model_dir=None, schema: RiskFactorSchema | None = None) -> FastAPI:
    """Build the service over the given model directory (env fallback)."""
    schema = schema or builtin_schema()
    if model_dir is None:
        model_dir = os.environ.get(ENV_MODEL_DIR, "models")
    registry = load_registry(model_dir)
    app = FastAPI(title="natalrisk", docs_url=None, redoc_url=None)

    @app.exception_handler(NatalRiskError)
    async def _domain_error(request: Request, exc: NatalRiskError):
        status = _HTTP_STATUS.get(exc.code, 400)
        return JSONResponse(status_code=status,
                            content={"error": {"code": exc.code, "detail": exc.detail}})

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": {"code": "bad_request",
                                               "detail": str(exc)}})

    def entry_or_404(model_id: str) -> ModelRegistryEntry:
        entry = registry.get(model_id)
        if entry is None:
            raise UnknownModel(model_id)
        return entry

    @app.get("/api/schema")
    async def get_schema():
        return Response(content=schema.to_json(), media_type="application/json")

    @app.get("/api/models")
    async def list_models():
        return [registry[k].summary() for k in sorted(registry)]

    @app.get("/api/models/{model_id}")
    async def model_detail(model_id: str):
        return entry_or_404(model_id).detail()

    @app.get("/api/models/{model_id}/graph")
    async def model_graph(model_id: str):
        return PlainTextResponse(entry_or_404(model_id).graph_dot(),
                                 media_type="text/vnd.graphviz")

    @app.post("/api/models/{model_id}/predict")
    async def predict(model_id: str, body: dict):
        entry = entry_or_404(model_id)
        evidence = body.get("evidence")
        if not isinstance(evidence, dict):
            raise BadEvidence("request body must carry an object under 'evidence'")
        return _predict(entry, evidence, schema)

    return app


def run_server(port: int | None = None, model_dir=None, host: str = "127.0.0.1"):
    """Blocking uvicorn entry point used by the CLI ``serve`` verb."""
    import uvicorn

    if port is None:
        port = int(os.environ.get(ENV_PORT, DEFAULT_PORT))
    app = create_app(model_dir=model_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
