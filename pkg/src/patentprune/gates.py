"""Human review gates: an explicit, append-only state machine per run.

Three gates in fixed order (PostRanking, PostMatch, FinalOntology).  A gate
opens with an immutable payload snapshot, halts the pipeline, and resolves
to Approved (payload flows unchanged), Amended (Keep/Drop/Regrade verdicts
applied), or Rejected (run stops).  Resolving never mutates history:
reopening a resolved gate creates a new version file next to the old one,
and the downstream input is always reconstructable by replaying the
persisted decisions over the persisted payload.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .jsonio import read_json, write_json

GATE_ORDER = ("PostRanking", "PostMatch", "FinalOntology")
VERDICTS = ("Keep", "Drop", "Regrade")
MAX_GRADE = 4


class GatesError(ValueError):
    pass


class GateOrderViolation(GatesError):
    pass


class GateAlreadyResolved(GatesError):
    pass


class UnknownItem(GatesError):
    pass


@dataclass(frozen=True)
class Decision:
    item_id: str
    verdict: str
    grade: int | None = None
    note: str = ""

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise GatesError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "Regrade":
            if self.grade is None or not 0 <= self.grade <= MAX_GRADE:
                raise GatesError(f"Regrade needs a grade in [0, {MAX_GRADE}]")
        elif self.grade is not None:
            raise GatesError(f"{self.verdict} verdicts carry no grade")

    def to_dict(self) -> dict[str, Any]:
        return {
            "item_id": self.item_id,
            "verdict": self.verdict,
            "grade": self.grade,
            "note": self.note,
        }

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "Decision":
        return Decision(
            item_id=d["item_id"],
            verdict=d["verdict"],
            grade=d.get("grade"),
            note=d.get("note", ""),
        )


@dataclass(frozen=True)
class ReviewGate:
    gate_id: str
    version: int
    state: str  # Open | Approved | Rejected | Amended
    payload: tuple[Mapping[str, Any], ...]
    payload_ref: str = ""
    reviewer: str = ""
    decisions: tuple[Decision, ...] = ()

    @property
    def resolved(self) -> bool:
        return self.state != "Open"

    def to_dict(self) -> dict[str, Any]:
        return {
            "gate_id": self.gate_id,
            "version": self.version,
            "state": self.state,
            "payload": [dict(item) for item in self.payload],
            "payload_ref": self.payload_ref,
            "reviewer": self.reviewer,
            "decisions": [d.to_dict() for d in self.decisions],
        }

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "ReviewGate":
        return ReviewGate(
            gate_id=d["gate_id"],
            version=d["version"],
            state=d["state"],
            payload=tuple(d["payload"]),
            payload_ref=d.get("payload_ref", ""),
            reviewer=d.get("reviewer", ""),
            decisions=tuple(Decision.from_dict(x) for x in d.get("decisions", [])),
        )


def apply_decisions(
    payload: Sequence[Mapping[str, Any]], decisions: Sequence[Decision]
) -> list[dict[str, Any]]:
    """Deterministic amendment: drops remove items, regrades set `grade`,
    keeps are explicit no-ops; item order is preserved.  This is the single
    definition of "downstream input" -- the audit replay uses it too.
    """
    verdict_by_item: dict[str, Decision] = {}
    for d in decisions:
        verdict_by_item[d.item_id] = d  # later decisions override earlier
    out = []
    for item in payload:
        decision = verdict_by_item.get(item["item_id"])
        if decision is None or decision.verdict == "Keep":
            out.append(dict(item))
        elif decision.verdict == "Drop":
            continue
        else:  # Regrade
            amended = dict(item)
            amended["grade"] = decision.grade
            out.append(amended)
    return out


def downstream_payload(gate: ReviewGate) -> list[dict[str, Any]]:
    """What flows out of a resolved gate."""
    if gate.state == "Approved":
        return [dict(item) for item in gate.payload]
    if gate.state == "Amended":
        return apply_decisions(gate.payload, gate.decisions)
    raise GatesError(f"gate {gate.gate_id} v{gate.version} is {gate.state}, not passable")


_GATE_FILE_RE = re.compile(r"^(?P<gate>[A-Za-z]+)_v(?P<ver>\d{3})\.json$")


class GateStore:
    """Versioned gate files under `<run_dir>/gates/`; single writer per run."""

    def __init__(self, run_dir: str | Path, max_payload: int = 50):
        self.dir = Path(run_dir) / "gates"
        self.max_payload = max_payload

    def _path(self, gate_id: str, version: int) -> Path:
        return self.dir / f"{gate_id}_v{version:03d}.json"

    def versions(self, gate_id: str) -> list[int]:
        if not self.dir.is_dir():
            return []
        out = []
        for p in self.dir.iterdir():
            m = _GATE_FILE_RE.match(p.name)
            if m and m.group("gate") == gate_id:
                out.append(int(m.group("ver")))
        return sorted(out)

    def latest(self, gate_id: str) -> ReviewGate | None:
        versions = self.versions(gate_id)
        if not versions:
            return None
        return ReviewGate.from_dict(read_json(self._path(gate_id, versions[-1])))

    def history(self, gate_id: str) -> list[ReviewGate]:
        return [
            ReviewGate.from_dict(read_json(self._path(gate_id, v)))
            for v in self.versions(gate_id)
        ]

    def open_gate(
        self,
        gate_id: str,
        payload: Sequence[Mapping[str, Any]],
        payload_ref: str = "",
    ) -> ReviewGate:
        """Open (or reopen, as a new version) a gate with a payload snapshot."""
        if gate_id not in GATE_ORDER:
            raise GatesError(f"unknown gate {gate_id!r}")
        for item in payload:
            if "item_id" not in item:
                raise GatesError("every payload item needs an item_id")
        if not 1 <= len(payload) <= self.max_payload:
            raise GatesError(
                f"payload size {len(payload)} outside [1, {self.max_payload}]"
            )
        for prior in GATE_ORDER[: GATE_ORDER.index(gate_id)]:
            latest = self.latest(prior)
            if latest is None or latest.state not in ("Approved", "Amended"):
                raise GateOrderViolation(
                    f"cannot open {gate_id}: {prior} is not approved/amended"
                )
        current = self.latest(gate_id)
        if current is not None and not current.resolved:
            raise GateOrderViolation(f"{gate_id} v{current.version} is still open")
        gate = ReviewGate(
            gate_id=gate_id,
            version=(current.version + 1) if current else 1,
            state="Open",
            payload=tuple(dict(item) for item in payload),
            payload_ref=payload_ref,
        )
        write_json(self._path(gate_id, gate.version), gate.to_dict())
        return gate

    def submit_review(
        self,
        gate_id: str,
        action: str,
        verdicts: Sequence[Decision] = (),
        reviewer: str = "",
    ) -> ReviewGate:
        """Resolve the open version of a gate.

        Approve passes the payload unchanged (verdicts must be empty),
        Amend applies >= 1 verdicts, Reject stops the run.  Every decision
        is persisted in the gate's version file.
        """
        gate = self.latest(gate_id)
        if gate is None:
            raise GatesError(f"{gate_id} was never opened")
        if gate.resolved:
            raise GateAlreadyResolved(f"{gate_id} v{gate.version} is {gate.state}")
        if action not in ("Approved", "Rejected", "Amended"):
            raise GatesError(f"unknown gate action {action!r}")
        if action == "Approved" and verdicts:
            raise GatesError("approve passes the payload unchanged; use Amended")
        if action == "Amended" and not verdicts:
            raise GatesError("amendment requires at least one decision")
        known = {item["item_id"] for item in gate.payload}
        for d in verdicts:
            if d.item_id not in known:
                raise UnknownItem(f"{d.item_id} is not in the {gate_id} payload")
        resolved = ReviewGate(
            gate_id=gate.gate_id,
            version=gate.version,
            state=action,
            payload=gate.payload,
            payload_ref=gate.payload_ref,
            reviewer=reviewer,
            decisions=tuple(verdicts),
        )
        write_json(self._path(gate_id, gate.version), resolved.to_dict())
        return resolved

    def all_resolved(self) -> bool:
        return all(
            (g := self.latest(gate_id)) is not None and g.state in ("Approved", "Amended")
            for gate_id in GATE_ORDER
        )


def export_feedback_labels(store: GateStore) -> list[dict[str, Any]]:
    """Turn ranking-gate corrections into training labels.

    Every Regrade keeps its grade; every Drop becomes grade 0.  Labels are
    keyed by the payload items' query_id (the patent's category).  Later
    gate versions override earlier ones for the same patent.
    """
    labels: dict[str, dict[str, Any]] = {}
    for gate in store.history("PostRanking"):
        if gate.state not in ("Amended", "Approved", "Rejected"):
            continue
        query_of = {item["item_id"]: item.get("query_id", "") for item in gate.payload}
        for d in gate.decisions:
            if d.verdict == "Regrade":
                grade = d.grade
            elif d.verdict == "Drop":
                grade = 0
            else:
                continue
            labels[d.item_id] = {
                "query_id": query_of.get(d.item_id, ""),
                "patent_id": d.item_id,
                "grade": grade,
            }
    return [labels[k] for k in sorted(labels)]
