// Session controller: the only layer that talks to the API client.
//
// The DOM layer calls these methods; the walkthrough test drives them the
// same way a browser session would.  Reads refresh the view state, the
// three mutations (create, selection, gate review) each map to exactly one
// documented POST.

import { ApiClient, ApiError } from "./api.js";
import {
  ViewState,
  canContinueSelection,
  clearWhatIf,
  initialState,
  pendingVerdicts,
  withCategories,
  withError,
  withGate,
  withMatches,
  withRanking,
  withReports,
  withRun,
} from "./state.js";
import { CreateRunRequest, GATE_FOR_PHASE, GateId } from "./types.js";

export class ConsoleSession {
  state: ViewState = initialState();

  constructor(
    private api: ApiClient,
    private onChange: (state: ViewState) => void = () => {},
  ) {}

  private commit(state: ViewState): ViewState {
    this.state = state;
    this.onChange(state);
    return state;
  }

  private fail(err: unknown): never {
    const message = err instanceof ApiError ? err.message : String(err);
    this.commit(withError(this.state, message));
    throw err;
  }

  async createRun(request: CreateRunRequest): Promise<void> {
    try {
      const run = await this.api.createRun(request);
      this.commit(withRun(this.state, run));
      await this.refresh();
    } catch (err) {
      this.fail(err);
    }
  }

  async openRun(runId: string): Promise<void> {
    try {
      const run = await this.api.getRun(runId);
      this.commit(withRun(this.state, run));
      await this.refresh();
    } catch (err) {
      this.fail(err);
    }
  }

  /** Pull everything the current phase can show; pure reads. */
  async refresh(): Promise<void> {
    const runId = this.requireRun();
    try {
      const run = await this.api.getRun(runId);
      let state = withRun(this.state, run);
      if (run.artifacts["categories"]) {
        state = withCategories(state, await this.api.getCategories(runId, state.profile));
      }
      if (run.artifacts["ranking"]) {
        state = withRanking(state, await this.api.getRanking(runId));
      }
      if (run.artifacts["matches"]) {
        state = withMatches(state, await this.api.getMatches(runId));
      }
      if (run.artifacts["reports"]) {
        state = withReports(state, await this.api.getReports(runId));
      }
      const gateId = GATE_FOR_PHASE[run.phase];
      if (gateId) {
        state = withGate(state, await this.api.getGate(runId, gateId));
      }
      this.commit(state);
    } catch (err) {
      this.fail(err);
    }
  }

  /** Re-sort the dashboard under another profile; read-only what-if. */
  async whatIfCategories(profile: string): Promise<void> {
    const runId = this.requireRun();
    try {
      const rows = await this.api.getCategories(runId, profile);
      this.commit(withCategories({ ...this.state, profile }, rows));
    } catch (err) {
      this.fail(err);
    }
  }

  /** Re-rank preview under another profile; never mutates the run. */
  async whatIfRanking(profile: string): Promise<void> {
    const runId = this.requireRun();
    try {
      const ranking = await this.api.getRanking(runId, profile);
      this.commit(withRanking(this.state, ranking));
    } catch (err) {
      this.fail(err);
    }
  }

  dismissWhatIf(): void {
    this.commit(clearWhatIf(this.state));
  }

  /** The user's category pick; advances the run to the ranking gate. */
  async submitSelection(): Promise<void> {
    const runId = this.requireRun();
    if (!canContinueSelection(this.state)) {
      throw new Error("select at least one category before continuing");
    }
    try {
      await this.api.postSelection(runId, this.state.selectedCategories, this.state.profile);
      await this.refresh();
    } catch (err) {
      this.fail(err);
    }
  }

  /** Resolve the gate the run is waiting on, with any drafted verdicts. */
  async submitGate(action: "Approved" | "Rejected" | "Amended"): Promise<void> {
    const runId = this.requireRun();
    const gate = this.state.gate;
    if (!gate || gate.state !== "Open") {
      throw new Error("no open gate to review");
    }
    const verdicts = action === "Amended" ? pendingVerdicts(this.state) : [];
    try {
      await this.api.postGateReview(
        runId,
        gate.gate_id as GateId,
        action,
        verdicts,
        this.state.reviewer || "console",
        gate.version,
      );
      await this.refresh();
    } catch (err) {
      this.fail(err);
    }
  }

  private requireRun(): string {
    if (!this.state.runId) throw new Error("no active run");
    return this.state.runId;
  }
}
