/** Payload types for the natalrisk service API, one interface per response shape. */

export interface FactorInfo {
  name: string;
  group: string;
  kind: "binary" | "ordinal-binned";
  display_label: string;
  bins?: string[];
  derived?: boolean;
}

export interface Catalog {
  format_version: number;
  factors: FactorInfo[];
  derived_factors: FactorInfo[];
  outcomes: FactorInfo[];
}

export interface MetricsSummary {
  accuracy?: number;
  per_class_f?: Record<string, number>;
}

export interface ModelSummary {
  id: string;
  kind: "decision_tree" | "bayes_net";
  target: string;
  created_at: string;
  metrics_summary: MetricsSummary | null;
}

export interface ModelDetail extends ModelSummary {
  trained_on: number;
  variables: string[];
  node_count?: number;
  edge_count?: number;
}

export interface PathStep {
  feature: string;
  value: string;
  imputed: boolean;
}

export interface Explanation {
  type: "path" | "influence";
  steps?: PathStep[];
  variables?: string[];
}

export interface Prediction {
  model: { id: string; kind: string; target: string };
  predicted: string;
  distribution: Record<string, number>;
  explanation: Explanation;
  schema_version: number;
}

/** Explicitly set factors only; unset factors are omitted, never defaulted. */
export type Evidence = Record<string, string>;
