// DOM rendering: one panel per pipeline phase, driven purely by ViewState.

import { ConsoleSession } from "./controller.js";
import { canContinueSelection, draftVerdict, ViewState } from "./state.js";
import { GateState, MatchRow, Report, VerdictKind } from "./types.js";

const PROFILES = ["QuickMonetization", "AggressiveGrowth", "DefensiveMoat"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

function profilePicker(current: string, onPick: (profile: string) => void): HTMLElement {
  const select = el("select", { class: "profile-picker" });
  for (const name of PROFILES) {
    const opt = el("option", { value: name }, name);
    if (name === current) opt.selected = true;
    select.append(opt);
  }
  select.addEventListener("change", () => onPick(select.value));
  return select;
}

function header(state: ViewState): HTMLElement {
  const run = state.run;
  return el(
    "header",
    {},
    el("h1", {}, "Portfolio Pruning Console"),
    el(
      "div",
      { class: "run-banner" },
      run ? `run ${run.run_id} — phase ${run.phase}` : "no run open",
    ),
    state.error ? el("div", { class: "error" }, state.error) : "",
  );
}

function categoriesPanel(state: ViewState, session: ConsoleSession): HTMLElement {
  const panel = el("section", { class: "panel" }, el("h2", {}, "Strategic categories"));
  panel.append(
    el("label", {}, "Weighting profile: "),
    profilePicker(state.profile, (p) => void session.whatIfCategories(p)),
  );
  const table = el("table", { class: "data" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, ""),
      el("th", {}, "category"),
      el("th", {}, "patents"),
      el("th", {}, "score"),
      el("th", {}, "life"),
      el("th", {}, "trend"),
    ),
  );
  for (const row of state.categories) {
    const checkbox = el("input", { type: "checkbox" }) as HTMLInputElement;
    checkbox.checked = state.selectedCategories.includes(row.key);
    checkbox.addEventListener("change", () => {
      session.state = {
        ...session.state,
        selectedCategories: checkbox.checked
          ? [...session.state.selectedCategories, row.key]
          : session.state.selectedCategories.filter((k) => k !== row.key),
      };
      render(session);
    });
    table.append(
      el(
        "tr",
        {},
        el("td", {}, checkbox),
        el("td", {}, row.key),
        el("td", {}, String(row.size)),
        el("td", {}, row.score.toFixed(4)),
        el("td", {}, row.mean_l_rem.toFixed(1)),
        el("td", {}, row.mean_s_trend.toFixed(3)),
      ),
    );
  }
  panel.append(table);
  const go = el("button", {}, "Continue with selection") as HTMLButtonElement;
  go.disabled = !canContinueSelection(state);
  go.addEventListener("click", () => void session.submitSelection());
  panel.append(go);
  return panel;
}

function verdictControls(
  session: ConsoleSession,
  itemId: string,
  withRegrade: boolean,
): HTMLElement {
  const wrap = el("span", { class: "verdicts" });
  const current = session.state.drafts[itemId];
  const options: VerdictKind[] = withRegrade ? ["Keep", "Drop", "Regrade"] : ["Keep", "Drop"];
  for (const kind of options) {
    const btn = el(
      "button",
      { class: current?.verdict === kind ? "verdict active" : "verdict" },
      kind,
    );
    btn.addEventListener("click", () => {
      if (kind === "Regrade") {
        const grade = Number(prompt("New grade (0-4):", "0"));
        session.state = draftVerdict(session.state, itemId, kind, grade);
      } else {
        session.state = draftVerdict(session.state, itemId, kind);
      }
      render(session);
    });
    wrap.append(btn);
  }
  return wrap;
}

function gateButtons(session: ConsoleSession, gate: GateState): HTMLElement {
  const wrap = el("div", { class: "gate-actions" });
  const reviewer = el("input", {
    type: "text",
    placeholder: "reviewer name",
    value: session.state.reviewer,
  }) as HTMLInputElement;
  reviewer.addEventListener("input", () => {
    session.state = { ...session.state, reviewer: reviewer.value };
  });
  const approve = el("button", { class: "approve" }, "Approve");
  approve.addEventListener("click", () => void session.submitGate("Approved"));
  const amend = el("button", { class: "amend" }, "Submit amendments") as HTMLButtonElement;
  amend.disabled = Object.keys(session.state.drafts).length === 0;
  amend.addEventListener("click", () => void session.submitGate("Amended"));
  const reject = el("button", { class: "reject" }, "Reject");
  reject.addEventListener("click", () => void session.submitGate("Rejected"));
  wrap.append(
    el("span", {}, `gate ${gate.gate_id} v${gate.version}`),
    reviewer,
    approve,
    amend,
    reject,
  );
  return wrap;
}

function rankingPanel(state: ViewState, session: ConsoleSession): HTMLElement {
  const panel = el("section", { class: "panel" }, el("h2", {}, "Ranking review"));
  panel.append(
    el("label", {}, "What-if profile: "),
    profilePicker(state.whatIfRanking?.profile ?? state.profile, (p) =>
      void session.whatIfRanking(p),
    ),
  );
  const view = state.whatIfRanking ?? state.ranking;
  if (state.whatIfRanking) {
    const badge = el("span", { class: "badge" }, "what-if preview (not saved)");
    const back = el("button", {}, "back to gate ranking");
    back.addEventListener("click", () => {
      session.dismissWhatIf();
      render(session);
    });
    panel.append(badge, back);
  }
  if (!view || !state.gate) return panel;
  const inGate = new Set(state.gate.payload.map((p) => p.item_id));
  const table = el("table", { class: "data" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "#"),
      el("th", {}, "patent"),
      el("th", {}, "score"),
      el("th", {}, "features"),
      el("th", {}, "verdict"),
    ),
  );
  view.ranking.slice(0, state.gate.payload.length).forEach(([pid, score], i) => {
    const features = view.features[pid];
    const detail = features
      ? Object.entries(features.values)
          .filter(([, v]) => v !== 0)
          .slice(0, 6)
          .map(([k, v]) => `${k}=${Number(v).toPrecision(3)}`)
          .join(" ")
      : "";
    table.append(
      el(
        "tr",
        {},
        el("td", {}, String(i + 1)),
        el("td", {}, pid),
        el("td", {}, score.toFixed(4)),
        el("td", { class: "features" }, detail),
        el(
          "td",
          {},
          !state.whatIfRanking && inGate.has(pid)
            ? verdictControls(session, pid, true)
            : "",
        ),
      ),
    );
  });
  panel.append(table);
  if (!state.whatIfRanking) panel.append(gateButtons(session, state.gate));
  return panel;
}

function matchCard(session: ConsoleSession, match: MatchRow, reviewable: boolean): HTMLElement {
  const itemId = `${match.patent_id}::${match.need_id}`;
  return el(
    "div",
    { class: "card" },
    el("h3", {}, `${match.patent_id} -> ${match.need_id} (fit ${match.fit_score}/100)`),
    el(
      "p",
      { class: "fit-breakdown" },
      `relevance ${match.s_relevance.toFixed(3)} · authority ${match.s_authority.toFixed(3)}` +
        ` · demand ${match.s_demand_norm.toFixed(3)}`,
    ),
    reviewable ? verdictControls(session, itemId, false) : "",
  );
}

function matchesPanel(state: ViewState, session: ConsoleSession): HTMLElement {
  const panel = el("section", { class: "panel" }, el("h2", {}, "Need-seed matches"));
  const reviewable = state.gate?.gate_id === "PostMatch" && state.gate.state === "Open";
  for (const match of state.matches) panel.append(matchCard(session, match, !!reviewable));
  if (reviewable && state.gate) panel.append(gateButtons(session, state.gate));
  return panel;
}

function reportCard(session: ConsoleSession, report: Report, reviewable: boolean): HTMLElement {
  const opp =
    typeof report.opportunity_size === "string"
      ? report.opportunity_size
      : `$${(report.opportunity_size.tam_usd / 1e9).toFixed(1)}B TAM (${report.opportunity_size.cpc_prefix})`;
  return el(
    "div",
    { class: "card report" },
    el("h3", {}, `${report.cluster_id}: ${report.target_match.entity}`),
    el("p", {}, el("b", {}, "Need: "), report.target_match.need_description),
    el(
      "p",
      {},
      el("b", {}, "Quote: "),
      `"${report.target_match.source_quote.text}" — ${report.target_match.source_quote.source_type}`,
    ),
    el("p", {}, el("b", {}, "Assets: "), report.seed_asset.patent_ids.join(", ")),
    el("p", {}, el("b", {}, "Fit: "), `${report.scoring["fit_score"]}/100`),
    el("p", {}, el("b", {}, "Opportunity: "), opp),
    el("details", {}, el("summary", {}, "Risks"), el("ul", {},
      ...report.risk_profile.map((r) => el("li", {}, r)))),
    el("details", {}, el("summary", {}, "Strategic actions"), el("ol", {},
      ...report.strategic_actions.map((a) => el("li", {}, a)))),
    el("details", {}, el("summary", {}, "Full report text"), el("pre", {}, report.text)),
    reviewable ? verdictControls(session, report.cluster_id, false) : "",
  );
}

function reportsPanel(state: ViewState, session: ConsoleSession): HTMLElement {
  const panel = el("section", { class: "panel" }, el("h2", {}, "Ontology reports"));
  const reviewable = state.gate?.gate_id === "FinalOntology" && state.gate.state === "Open";
  for (const report of state.reports) panel.append(reportCard(session, report, !!reviewable));
  if (reviewable && state.gate) panel.append(gateButtons(session, state.gate));
  return panel;
}

function completePanel(state: ViewState): HTMLElement {
  const ids = new Set<string>();
  for (const r of state.reports) r.seed_asset.patent_ids.forEach((p) => ids.add(p));
  return el(
    "section",
    { class: "panel done" },
    el("h2", {}, "Run complete"),
    el("p", {}, `Final pruned list (${ids.size} assets):`),
    el("pre", {}, [...ids].sort().join("\n")),
  );
}

export function render(session: ConsoleSession): void {
  const state = session.state;
  const root = document.getElementById("app");
  if (!root) return;
  root.replaceChildren(header(state));
  if (!state.run) return;
  switch (state.run.phase) {
    case "Categorized":
      root.append(categoriesPanel(state, session));
      break;
    case "GatePostRanking":
      root.append(rankingPanel(state, session));
      break;
    case "GatePostMatch":
      root.append(matchesPanel(state, session));
      break;
    case "GateFinal":
      root.append(reportsPanel(state, session));
      break;
    case "Complete":
      root.append(completePanel(state));
      break;
    case "Failed":
      root.append(
        el("section", { class: "panel failed" }, el("h2", {}, "Run failed"),
           el("p", {}, state.run.failure ?? "rejected")),
      );
      break;
    default:
      root.append(el("section", { class: "panel" }, `phase ${state.run.phase}`));
  }
}
