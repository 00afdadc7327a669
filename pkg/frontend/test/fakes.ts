import type { FetchLike } from "../src/api.js";
import type { Catalog, ModelDetail, ModelSummary, Prediction } from "../src/types.js";
import recorded from "./fixtures/fixtures.json";

export interface ErrorBody {
  error: { code: string; detail: string };
}

export interface PredictFixture {
  model: string;
  evidence: Record<string, string>;
  status: number;
  body: Prediction | ErrorBody;
}

export interface Fixtures {
  schema: Catalog;
  models: ModelSummary[];
  details: Record<string, ModelDetail>;
  graphs: Record<string, string>;
  missing_model: { status: number; body: ErrorBody };
  predicts: PredictFixture[];
}

export const fx = recorded as unknown as Fixtures;

export function recordedPredict(model: string, evidence: Record<string, string>): PredictFixture {
  const match = fx.predicts.find((p) => p.model === model && sameEvidence(p.evidence, evidence));
  if (!match) {
    throw new Error(`no recorded fixture for ${model} ${JSON.stringify(evidence)}`);
  }
  return match;
}

/** Optional per-request barrier, used to hold a response open mid-test. */
export type Gate = (url: string, body: unknown) => Promise<void> | void;

/**
 * fetch stand-in that replays responses recorded from the live service.
 * Honors AbortSignal like the real fetch and fails loudly on any request
 * the recording does not cover.
 */
export function fixtureFetch(gate?: Gate): FetchLike {
  return async (url, init) => {
    const signal = init?.signal ?? undefined;
    const body: unknown = init?.body ? JSON.parse(String(init.body)) : null;
    await waitThrough(gate?.(url, body), signal);

    const path = url.replace(/^https?:\/\/[^/]+/, "");
    if (path === "/api/schema") {
      return jsonResponse(200, fx.schema);
    }
    if (path === "/api/models") {
      return jsonResponse(200, fx.models);
    }
    const predict = path.match(/^\/api\/models\/([^/]+)\/predict$/);
    if (predict) {
      const id = predict[1] ?? "";
      if (!(id in fx.details)) {
        return jsonResponse(fx.missing_model.status, fx.missing_model.body);
      }
      const evidence = (body as { evidence?: Record<string, string> } | null)?.evidence ?? {};
      const match = recordedPredict(id, evidence);
      return jsonResponse(match.status, match.body);
    }
    const detail = path.match(/^\/api\/models\/([^/]+)$/);
    if (detail) {
      const model = fx.details[detail[1] ?? ""];
      return model
        ? jsonResponse(200, model)
        : jsonResponse(fx.missing_model.status, fx.missing_model.body);
    }
    throw new Error(`no route for ${url}`);
  };
}

function sameEvidence(a: Record<string, string>, b: Record<string, string>): boolean {
  const keys = Object.keys(a);
  return keys.length === Object.keys(b).length && keys.every((k) => a[k] === b[k]);
}

function jsonResponse(status: number, payload: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: () => Promise.resolve(structuredClone(payload)),
    text: () => Promise.resolve(JSON.stringify(payload)),
  } as unknown as Response;
}

async function waitThrough(gate: Promise<void> | void, signal?: AbortSignal): Promise<void> {
  if (signal?.aborted) {
    throw abortError();
  }
  if (gate) {
    await new Promise<void>((resolve, reject) => {
      const onAbort = () => reject(abortError());
      signal?.addEventListener("abort", onAbort, { once: true });
      Promise.resolve(gate).then(() => {
        signal?.removeEventListener("abort", onAbort);
        resolve();
      }, reject);
    });
  } else {
    // yield once so a caller can abort between issuing and settling
    await Promise.resolve();
  }
  if (signal?.aborted) {
    throw abortError();
  }
}

function abortError(): DOMException {
  return new DOMException("The operation was aborted.", "AbortError");
}
