import type { ApiError } from "./api.js";
import { positiveClass, probabilityDelta, type ToggleEntry } from "./state.js";
import type { Prediction } from "./types.js";

/** Signed decimal string; the value itself is never reformatted or rounded. */
export function formatSigned(delta: number): string {
  return delta > 0 ? `+${String(delta)}` : String(delta);
}

/**
 * One prediction panel: headline class, a probability bar per class with
 * the served probability printed verbatim, the explanation, and a DOT
 * download link. Bars are styling only; no displayed number is computed
 * here.
 */
export function renderPrediction(p: Prediction, graphHref: string): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "prediction";

  const headline = document.createElement("h3");
  headline.textContent = `Predicted ${p.model.target}: ${p.predicted}`;
  panel.appendChild(headline);

  for (const [cls, prob] of Object.entries(p.distribution)) {
    const row = document.createElement("div");
    row.className = "prob-row";
    row.dataset.class = cls;

    const label = document.createElement("span");
    label.className = "prob-label";
    label.textContent = cls;

    const bar = document.createElement("div");
    bar.className = "prob-bar";
    bar.style.width = `${prob * 100}%`;

    const value = document.createElement("span");
    value.className = "prob-value";
    value.textContent = String(prob);

    row.append(label, bar, value);
    panel.appendChild(row);
  }

  panel.appendChild(renderExplanation(p));

  const graph = document.createElement("a");
  graph.className = "graph-link";
  graph.href = graphHref;
  graph.setAttribute("download", `${p.model.id}.dot`);
  graph.textContent = "Model graph (DOT)";
  panel.appendChild(graph);
  return panel;
}

function renderExplanation(p: Prediction): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "explanation";
  if (p.explanation.type === "path") {
    const crumbs = document.createElement("ol");
    crumbs.className = "breadcrumb";
    for (const step of p.explanation.steps ?? []) {
      const li = document.createElement("li");
      li.textContent = `${step.feature} = ${step.value}` + (step.imputed ? " (imputed)" : "");
      if (step.imputed) {
        li.classList.add("imputed");
      }
      crumbs.appendChild(li);
    }
    const label = document.createElement("span");
    label.textContent = "Decision path:";
    wrap.append(label, crumbs);
  } else {
    const influencing = p.explanation.variables ?? [];
    const label = document.createElement("span");
    label.className = "influence";
    label.textContent =
      influencing.length > 0
        ? `Influencing evidence: ${influencing.join(", ")}`
        : "Influencing evidence: none";
    wrap.appendChild(label);
  }
  return wrap;
}

/**
 * Side-by-side baseline and current probabilities with the signed change
 * of the positive class, plus the most recent what-if toggles.
 */
export function renderWhatIf(
  baseline: Prediction,
  current: Prediction,
  history: ToggleEntry[],
): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "what-if";

  const heading = document.createElement("h3");
  heading.textContent = "What-if vs baseline";
  panel.appendChild(heading);

  const positive = positiveClass(current);
  const table = document.createElement("table");
  table.className = "side-by-side";
  for (const cls of Object.keys(current.distribution)) {
    const row = document.createElement("tr");
    row.dataset.class = cls;
    for (const text of [cls, String(baseline.distribution[cls]), String(current.distribution[cls])]) {
      const cell = document.createElement("td");
      cell.textContent = text;
      row.appendChild(cell);
    }
    table.appendChild(row);
  }
  panel.appendChild(table);

  const delta = document.createElement("p");
  delta.className = "delta";
  delta.dataset.value = String(probabilityDelta(baseline, current));
  delta.textContent = `Change in P(${positive}): ${formatSigned(probabilityDelta(baseline, current))}`;
  panel.appendChild(delta);

  if (history.length > 0) {
    const log = document.createElement("ol");
    log.className = "toggle-history";
    for (const entry of history) {
      const li = document.createElement("li");
      li.textContent =
        `${entry.factor}: ${entry.from ?? "unset"} -> ${entry.to ?? "unset"}` +
        ` (${formatSigned(entry.delta)})`;
      log.appendChild(li);
    }
    panel.appendChild(log);
  }
  return panel;
}

/** Inline error strip showing the server's own code and detail string. */
export function renderError(error: ApiError): HTMLElement {
  const strip = document.createElement("div");
  strip.className = "error";
  strip.setAttribute("role", "alert");
  strip.dataset.code = error.code;
  strip.textContent = `${error.code}: ${error.detail}`;
  return strip;
}

/** Full-width banner with a retry button for failed schema or model loads. */
export function renderRetryBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = document.createElement("div");
  banner.className = "retry-banner";
  banner.setAttribute("role", "alert");
  const text = document.createElement("span");
  text.textContent = message;
  const button = document.createElement("button");
  button.type = "button";
  button.textContent = "Retry";
  button.addEventListener("click", onRetry);
  banner.append(text, button);
  return banner;
}
