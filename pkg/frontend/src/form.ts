import type { ConsoleState } from "./state.js";
import type { FactorInfo } from "./types.js";

export const GROUP_ORDER = ["maternal_antepartum", "fetal_antepartum", "intrapartum"] as const;

export const GROUP_LABELS: Record<string, string> = {
  maternal_antepartum: "Maternal risk factors (antepartum)",
  fetal_antepartum: "Fetal risk factors (antepartum)",
  intrapartum: "Intrapartum risk factors",
  model_extra: "Additional model variables",
};

export interface FormHooks {
  onEvidenceChange(): void;
}

/**
 * The entry form: one collapsible group per catalog section in catalog
 * order, a tri-state control per binary factor, a bin selector for binned
 * factors, plus a trailing group for variables the selected model accepts
 * that are not collected factors (derived factors, outcome covariates).
 */
export function renderFactorForm(state: ConsoleState, hooks: FormHooks): HTMLElement {
  const catalog = state.catalog;
  if (!catalog) {
    throw new Error("catalog not loaded");
  }
  const form = document.createElement("form");
  form.className = "factor-form";
  form.addEventListener("submit", (e) => e.preventDefault());

  for (const group of GROUP_ORDER) {
    const factors = catalog.factors.filter((f) => f.group === group);
    form.appendChild(renderGroup(group, factors, state, hooks));
  }
  const extra = extraModelVariables(state);
  if (extra.length > 0) {
    form.appendChild(renderGroup("model_extra", extra, state, hooks));
  }
  return form;
}

/** Model variables settable as evidence but absent from the factor groups. */
export function extraModelVariables(state: ConsoleState): FactorInfo[] {
  const catalog = state.catalog;
  const model = state.model;
  if (!catalog || !model) {
    return [];
  }
  const inForm = new Set(catalog.factors.map((f) => f.name));
  const known = new Map(
    [...catalog.derived_factors, ...catalog.outcomes].map((f) => [f.name, f]),
  );
  return model.variables
    .filter((name) => !inForm.has(name) && name !== model.target)
    .map(
      (name) =>
        known.get(name) ?? {
          name,
          group: "model_extra",
          kind: "binary" as const,
          display_label: name,
        },
    );
}

function renderGroup(
  group: string,
  factors: FactorInfo[],
  state: ConsoleState,
  hooks: FormHooks,
): HTMLElement {
  const details = document.createElement("details");
  details.className = "factor-group";
  details.dataset.group = group;
  details.open = true;
  const summary = document.createElement("summary");
  summary.textContent = GROUP_LABELS[group] ?? group;
  details.appendChild(summary);
  for (const factor of factors) {
    details.appendChild(
      factor.kind === "ordinal-binned"
        ? binControl(factor, state, hooks)
        : triStateControl(factor, state, hooks),
    );
  }
  return details;
}

function triStateControl(factor: FactorInfo, state: ConsoleState, hooks: FormHooks): HTMLElement {
  const row = document.createElement("label");
  row.className = "factor-control";
  row.dataset.factor = factor.name;

  const button = document.createElement("button");
  button.type = "button";
  button.className = "tristate";
  button.dataset.state = state.triState(factor.name);
  button.textContent = stateGlyph(state.triState(factor.name));
  button.addEventListener("click", () => {
    const next = state.cycle(factor.name);
    button.dataset.state = next;
    button.textContent = stateGlyph(next);
    hooks.onEvidenceChange();
  });

  const text = document.createElement("span");
  text.textContent = factor.display_label;
  row.append(button, text);
  return row;
}

function binControl(factor: FactorInfo, state: ConsoleState, hooks: FormHooks): HTMLElement {
  const row = document.createElement("label");
  row.className = "factor-control";
  row.dataset.factor = factor.name;

  const select = document.createElement("select");
  select.className = "bin-select";
  const unset = document.createElement("option");
  unset.value = "";
  unset.textContent = "(unset)";
  select.appendChild(unset);
  for (const bin of factor.bins ?? []) {
    const option = document.createElement("option");
    option.value = bin;
    option.textContent = bin;
    select.appendChild(option);
  }
  select.value = state.value(factor.name) ?? "";
  select.addEventListener("change", () => {
    state.set(factor.name, select.value === "" ? null : select.value);
    hooks.onEvidenceChange();
  });

  const text = document.createElement("span");
  text.textContent = factor.display_label;
  row.append(select, text);
  return row;
}

function stateGlyph(state: string): string {
  if (state === "present") return "present";
  if (state === "absent") return "absent";
  return "unset";
}
