// API payload shapes, mirroring the run-store artifact schemas.

export interface RunSummary {
  run_id: string;
  phase: string;
  profile: string;
}

export interface RunInfo {
  run_id: string;
  phase: string;
  profile: string;
  evaluation_date: string;
  selection: string[] | null;
  artifacts: Record<string, string>;
  failure: string | null;
}

export interface CategoryRow {
  key: string;
  cpc_prefix: string;
  maturity_band: string;
  growth_band: string;
  members: string[];
  mean_l_rem: number;
  mean_s_trend: number;
  mean_v_tam: number;
  mean_cagr_tech: number;
  v_tam_scaled: number | null;
  score: number;
  size: number;
}

export interface FeatureBreakdown {
  patent_id: string;
  values: Record<string, number>;
  missing: string[];
}

export interface RankingResponse {
  profile: string;
  selection: string[] | null;
  ranking: [string, number][];
  features: Record<string, FeatureBreakdown>;
  phase?: string;
  what_if?: boolean;
}

export interface MatchRow {
  patent_id: string;
  need_id: string;
  s_relevance: number;
  s_authority: number;
  s_demand_norm: number;
  s_needseed: number;
  fit_score: number;
}

export interface SourceQuote {
  doc: string;
  source_type: string;
  date: string;
  text: string;
}

export interface Report {
  cluster_id: string;
  seed_asset: { patent_ids: string[]; titles: Record<string, string>; summary: string };
  target_match: {
    entity: string;
    need_id: string;
    need_description: string;
    source_quote: SourceQuote;
  };
  scoring: Record<string, number | string>;
  opportunity_size: { tam_usd: number; revenue_usd: number | string; cpc_prefix: string } | string;
  risk_profile: string[];
  strategic_actions: string[];
  text: string;
}

export type VerdictKind = "Keep" | "Drop" | "Regrade";

export interface Verdict {
  item_id: string;
  verdict: VerdictKind;
  grade?: number | null;
  note?: string;
}

export interface GatePayloadItem {
  item_id: string;
  [key: string]: unknown;
}

export interface GateState {
  gate_id: string;
  version: number;
  state: "Open" | "Approved" | "Rejected" | "Amended";
  payload: GatePayloadItem[];
  payload_ref: string;
  reviewer: string;
  decisions: Verdict[];
}

export interface CreateRunRequest {
  run_id?: string;
  patents: string;
  evaluation_date: string;
  aliases?: string | null;
  gni?: string | null;
  market?: string | null;
  needs_corpus?: string | null;
  patterns?: string | null;
  broad_terms?: string | null;
  params_config?: string | null;
  profiles_config?: string | null;
  model?: string | null;
  profile?: string;
  seed?: number;
}

export const GATE_ORDER = ["PostRanking", "PostMatch", "FinalOntology"] as const;
export type GateId = (typeof GATE_ORDER)[number];

export const GATE_FOR_PHASE: Record<string, GateId> = {
  GatePostRanking: "PostRanking",
  GatePostMatch: "PostMatch",
  GateFinal: "FinalOntology",
};
