// Wire types mirroring the HTTP API payloads (field-for-field).

export type MethodName = "waavp" | "gamma" | "binomial" | "asymptotic" | "bnb";
export type GroupName = "reduced" | "inconclusive" | "borderline" | "adequate";
export type SeriesName = GroupName | "degenerate";

export interface DesignBody {
  target: number;
  margin: number;
  alpha: number;
}

export interface OptionsBody {
  prior_alpha?: number;
  prior_beta?: number;
  binomial_99?: boolean;
  waavp_literal_variance?: boolean;
  k_scaling?: "divide" | "multiply";
}

export interface AnalyzeRequest {
  pre: number[] | number[][];
  post: number[] | number[][];
  paired: boolean;
  design: DesignBody;
  options?: OptionsBody;
  methods?: MethodName[];
}

export interface Typology {
  group: GroupName;
  group_code: number;
  fine: string | null;
}

export interface MethodOutcome {
  method: MethodName;
  r_hat: number;
  lcl: number | null;
  ucl: number | null;
  p_inferiority: number | null;
  p_noninferiority: number | null;
  classification: Typology;
  degenerate: string | null;
}

export interface AnalyzeReport {
  design: DesignBody & {
    threshold_inferiority: number;
    threshold_adequacy: number;
    confidence_level: number;
  };
  options: Record<string, unknown>;
  data: { m_pre: number; m_post: number };
  summary: Record<string, number | boolean | null>;
  outcomes: MethodOutcome[];
}

export interface ScenarioRequest {
  n: number;
  mu1: number;
  k1: number;
  k2: number;
  rho: number;
  r_grid: number[];
  replicates: number;
  seed: number;
  design: DesignBody;
  options?: OptionsBody;
  methods?: MethodName[];
}

export interface ScanCell {
  method: MethodName;
  r: number;
  replicates: number;
  counts: Record<string, number>;
  reject_inferiority_rate: number;
  reject_noninferiority_rate: number;
  freq: Record<SeriesName, number>;
}

export interface Curves {
  r: number[];
  thresholds: { adequacy: number; inferiority: number };
  methods: Record<string, Record<SeriesName, number[]>>;
}

export interface ScanResultPayload {
  scenario: ScenarioRequest & { methods: MethodName[] };
  cells: ScanCell[];
  curves: Curves | null;
}

export interface PlanRequest {
  scenario: ScenarioRequest;
  n_candidates: number[];
  max_inconclusive?: number;
  max_misleading?: number;
}

export interface PlanCandidate {
  n: number;
  passes: boolean;
  max_inconclusive: Record<string, number>;
  max_misleading: Record<string, number>;
  scan: ScanResultPayload;
}

export interface PlanReportPayload {
  criteria: Record<string, unknown>;
  recommended_n: number | null;
  candidates: PlanCandidate[];
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface Job {
  id: string;
  kind: "scan" | "plan";
  state: JobState;
  progress: number;
  result: ScanResultPayload | PlanReportPayload | null;
  error: string | null;
  created: number;
  updated: number;
}

export interface SpeciesPreset {
  name: string;
  target_efficacy: number;
  default_margin: number;
  mu1: number;
  k1: number;
  k2: number;
  correlation: number;
}

export interface PresetCatalog {
  presets: SpeciesPreset[];
}

export interface FieldError {
  field: string;
  message: string;
}
