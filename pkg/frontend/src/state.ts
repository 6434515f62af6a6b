// Console view state and its pure update functions.
//
// Verdict drafts live only here until the reviewer submits a gate; nothing
// in this module talks to the network, so any view is reconstructable from
// the API responses alone (reload-safe).

import type {
  CategoryRow,
  GateState,
  MatchRow,
  RankingResponse,
  Report,
  RunInfo,
  Verdict,
  VerdictKind,
} from "./types.js";

export interface ViewState {
  runId: string | null;
  run: RunInfo | null;
  profile: string;
  categories: CategoryRow[];
  selectedCategories: string[];
  ranking: RankingResponse | null;
  whatIfRanking: RankingResponse | null;
  matches: MatchRow[];
  reports: Report[];
  gate: GateState | null;
  drafts: Record<string, Verdict>;
  reviewer: string;
  error: string | null;
}

export function initialState(): ViewState {
  return {
    runId: null,
    run: null,
    profile: "QuickMonetization",
    categories: [],
    selectedCategories: [],
    ranking: null,
    whatIfRanking: null,
    matches: [],
    reports: [],
    gate: null,
    drafts: {},
    reviewer: "",
    error: null,
  };
}

export function withRun(state: ViewState, run: RunInfo): ViewState {
  return {
    ...state,
    runId: run.run_id,
    run,
    profile: run.profile || state.profile,
    error: null,
  };
}

export function withCategories(state: ViewState, rows: CategoryRow[]): ViewState {
  const known = new Set(rows.map((r) => r.key));
  return {
    ...state,
    categories: rows,
    selectedCategories: state.selectedCategories.filter((k) => known.has(k)),
  };
}

export function toggleCategory(state: ViewState, key: string): ViewState {
  const selected = state.selectedCategories.includes(key)
    ? state.selectedCategories.filter((k) => k !== key)
    : [...state.selectedCategories, key];
  return { ...state, selectedCategories: selected };
}

export function canContinueSelection(state: ViewState): boolean {
  return state.selectedCategories.length > 0;
}

export function withRanking(state: ViewState, ranking: RankingResponse): ViewState {
  return ranking.what_if
    ? { ...state, whatIfRanking: ranking }
    : { ...state, ranking, whatIfRanking: null };
}

export function clearWhatIf(state: ViewState): ViewState {
  return { ...state, whatIfRanking: null };
}

export function withGate(state: ViewState, gate: GateState): ViewState {
  // a fresh gate snapshot invalidates any drafts written against another one
  const sameGate =
    state.gate && state.gate.gate_id === gate.gate_id && state.gate.version === gate.version;
  return { ...state, gate, drafts: sameGate ? state.drafts : {} };
}

export function draftVerdict(
  state: ViewState,
  itemId: string,
  verdict: VerdictKind,
  grade?: number,
  note?: string,
): ViewState {
  if (state.gate === null || !state.gate.payload.some((p) => p.item_id === itemId)) {
    return { ...state, error: `unknown item ${itemId}` };
  }
  if (verdict === "Regrade" && (grade === undefined || grade < 0 || grade > 4)) {
    return { ...state, error: "regrade requires a grade between 0 and 4" };
  }
  const draft: Verdict = { item_id: itemId, verdict };
  if (verdict === "Regrade") draft.grade = grade;
  if (note) draft.note = note;
  return { ...state, drafts: { ...state.drafts, [itemId]: draft }, error: null };
}

export function clearDraft(state: ViewState, itemId: string): ViewState {
  const drafts = { ...state.drafts };
  delete drafts[itemId];
  return { ...state, drafts };
}

export function pendingVerdicts(state: ViewState): Verdict[] {
  return Object.values(state.drafts).sort((a, b) =>
    a.item_id < b.item_id ? -1 : a.item_id > b.item_id ? 1 : 0,
  );
}

export function withMatches(state: ViewState, matches: MatchRow[]): ViewState {
  return { ...state, matches };
}

export function withReports(state: ViewState, reports: Report[]): ViewState {
  return { ...state, reports };
}

export function withError(state: ViewState, message: string): ViewState {
  return { ...state, error: message };
}
