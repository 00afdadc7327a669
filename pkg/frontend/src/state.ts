import type { Catalog, Evidence, ModelDetail, Prediction } from "./types.js";

export type TriState = "unset" | "present" | "absent";

export interface ToggleEntry {
  factor: string;
  /** Evidence value before the toggle; null means the factor was unset. */
  from: string | null;
  to: string | null;
  /** Change of the positive-class probability against the baseline. */
  delta: number;
}

export const HISTORY_LIMIT = 10;

/**
 * Everything the console knows: the fetched catalog, the selected model,
 * the tri-state evidence map, the latest response, the what-if baseline,
 * and the toggle history. Evidence holds explicitly set factors only, so
 * an unset control never appears in a request body.
 */
export class ConsoleState {
  catalog: Catalog | null = null;
  model: ModelDetail | null = null;
  evidence = new Map<string, string>();
  latest: Prediction | null = null;
  baseline: Prediction | null = null;
  history: ToggleEntry[] = [];

  /** Comparisons never span models, so switching clears the baseline. */
  selectModel(model: ModelDetail | null): void {
    this.model = model;
    this.baseline = null;
    this.latest = null;
    this.history = [];
  }

  value(name: string): string | null {
    return this.evidence.get(name) ?? null;
  }

  triState(name: string): TriState {
    const v = this.value(name);
    return v === "present" || v === "absent" ? v : "unset";
  }

  set(name: string, value: string | null): void {
    if (value === null) {
      this.evidence.delete(name);
    } else {
      this.evidence.set(name, value);
    }
  }

  /** One click on a binary control: unset -> present -> absent -> unset. */
  cycle(name: string): TriState {
    const next: Record<TriState, TriState> = {
      unset: "present",
      present: "absent",
      absent: "unset",
    };
    const state = next[this.triState(name)];
    this.set(name, state === "unset" ? null : state);
    return state;
  }

  body(): { evidence: Evidence } {
    return { evidence: Object.fromEntries(this.evidence) };
  }

  /**
   * Where a what-if toggle moves the factor. A second toggle of a factor
   * still sitting where the first one put it reverts that first toggle,
   * so toggle-and-revert restores the exact pre-toggle evidence.
   */
  toggleTarget(name: string): string | null {
    const current = this.value(name);
    const last = [...this.history].reverse().find((t) => t.factor === name);
    if (last && last.to === current) {
      return last.from;
    }
    return current === "present" ? "absent" : "present";
  }

  recordToggle(entry: ToggleEntry): void {
    this.history.push(entry);
    if (this.history.length > HISTORY_LIMIT) {
      this.history.shift();
    }
  }
}

/** Last class in the served domain order, e.g. "present" for binary outcomes. */
export function positiveClass(p: Prediction): string {
  const keys = Object.keys(p.distribution);
  const last = keys[keys.length - 1];
  if (last === undefined) {
    throw new Error("empty distribution");
  }
  return last;
}

export function positiveProbability(p: Prediction): number {
  return p.distribution[positiveClass(p)] ?? 0;
}

/** The only arithmetic in the console: a difference of two served numbers. */
export function probabilityDelta(baseline: Prediction, after: Prediction): number {
  return positiveProbability(after) - positiveProbability(baseline);
}
