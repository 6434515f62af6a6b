import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patentprune.gates import (
    Decision,
    GateAlreadyResolved,
    GateOrderViolation,
    GateStore,
    GatesError,
    ReviewGate,
    UnknownItem,
    apply_decisions,
    downstream_payload,
    export_feedback_labels,
)
from patentprune.jsonio import canonical_dumps, read_json


def ranking_payload(n=5):
    return [
        {"item_id": f"P{i}", "query_id": "G11C|GT15|High", "score": 1.0 - i * 0.1,
         "rank": i + 1, "grade": None}
        for i in range(n)
    ]


class TestOpenGate:
    def test_open_post_match_before_post_ranking(self, tmp_path):
        store = GateStore(tmp_path)
        with pytest.raises(GateOrderViolation):
            store.open_gate("PostMatch", ranking_payload())

    def test_open_with_payload(self, tmp_path):
        store = GateStore(tmp_path)
        gate = store.open_gate("PostRanking", ranking_payload(30))
        assert gate.state == "Open"
        assert len(gate.payload) == 30
        assert gate.version == 1

    def test_reopen_resolved_creates_new_version(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        store.submit_review("PostRanking", "Approved", reviewer="r1")
        gate2 = store.open_gate("PostRanking", ranking_payload(3))
        assert gate2.version == 2
        history = store.history("PostRanking")
        assert [g.version for g in history] == [1, 2]
        assert history[0].state == "Approved"  # old version retained

    def test_reopen_while_open_is_a_violation(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        with pytest.raises(GateOrderViolation):
            store.open_gate("PostRanking", ranking_payload())

    def test_payload_size_bounds(self, tmp_path):
        store = GateStore(tmp_path, max_payload=10)
        with pytest.raises(GatesError):
            store.open_gate("PostRanking", ranking_payload(11))
        with pytest.raises(GatesError):
            store.open_gate("PostRanking", [])


class TestSubmitReview:
    def test_approve_all_passes_payload_unchanged(self, tmp_path):
        store = GateStore(tmp_path)
        payload = ranking_payload()
        store.open_gate("PostRanking", payload)
        gate = store.submit_review("PostRanking", "Approved", reviewer="r")
        assert downstream_payload(gate) == payload

    def test_drop_two_of_thirty(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload(30))
        gate = store.submit_review(
            "PostRanking",
            "Amended",
            [Decision("P3", "Drop"), Decision("P17", "Drop", note="stale art")],
        )
        out = downstream_payload(gate)
        assert len(out) == 28
        assert {item["item_id"] for item in out} == {
            f"P{i}" for i in range(30) if i not in (3, 17)
        }

    def test_regrade_recorded_and_applied(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        gate = store.submit_review(
            "PostRanking", "Amended", [Decision("P2", "Regrade", grade=4)]
        )
        out = downstream_payload(gate)
        assert next(i for i in out if i["item_id"] == "P2")["grade"] == 4

    def test_already_resolved(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        store.submit_review("PostRanking", "Approved")
        with pytest.raises(GateAlreadyResolved):
            store.submit_review("PostRanking", "Approved")

    def test_unknown_item(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        with pytest.raises(UnknownItem):
            store.submit_review("PostRanking", "Amended", [Decision("NOPE", "Drop")])

    def test_amend_requires_decisions(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        with pytest.raises(GatesError):
            store.submit_review("PostRanking", "Amended", [])

    def test_approve_refuses_verdicts(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        with pytest.raises(GatesError):
            store.submit_review("PostRanking", "Approved", [Decision("P1", "Drop")])

    def test_rejected_payload_not_passable(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        gate = store.submit_review("PostRanking", "Rejected", reviewer="r")
        with pytest.raises(GatesError):
            downstream_payload(gate)

    def test_gate_order_enforced_through_chain(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        store.submit_review("PostRanking", "Approved")
        store.open_gate("PostMatch", [{"item_id": "P1::N1"}])
        with pytest.raises(GateOrderViolation):
            store.open_gate("FinalOntology", [{"item_id": "c1"}])
        store.submit_review("PostMatch", "Approved")
        store.open_gate("FinalOntology", [{"item_id": "c1"}])


class TestDecisionValidation:
    def test_regrade_needs_grade(self):
        with pytest.raises(GatesError):
            Decision("P1", "Regrade")

    def test_grade_bounds(self):
        with pytest.raises(GatesError):
            Decision("P1", "Regrade", grade=9)

    def test_keep_carries_no_grade(self):
        with pytest.raises(GatesError):
            Decision("P1", "Keep", grade=2)


class TestExportFeedback:
    def test_no_amendments_empty(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        store.submit_review("PostRanking", "Approved")
        assert export_feedback_labels(store) == []

    def test_one_regrade_one_label(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        store.submit_review(
            "PostRanking", "Amended", [Decision("P1", "Regrade", grade=4)]
        )
        labels = export_feedback_labels(store)
        assert labels == [
            {"query_id": "G11C|GT15|High", "patent_id": "P1", "grade": 4}
        ]

    def test_drop_becomes_grade_zero(self, tmp_path):
        store = GateStore(tmp_path)
        store.open_gate("PostRanking", ranking_payload())
        store.submit_review("PostRanking", "Amended", [Decision("P2", "Drop")])
        labels = export_feedback_labels(store)
        assert labels == [
            {"query_id": "G11C|GT15|High", "patent_id": "P2", "grade": 0}
        ]


verdict_strategy = st.one_of(
    st.tuples(st.just("Keep"), st.none()),
    st.tuples(st.just("Drop"), st.none()),
    st.tuples(st.just("Regrade"), st.integers(min_value=0, max_value=4)),
)


class TestAuditReplay:
    @settings(max_examples=40)
    @given(st.lists(st.tuples(st.integers(min_value=0, max_value=9), verdict_strategy),
                    max_size=8))
    def test_replay_reproduces_downstream_bytes(self, tmp_path_factory, raw_verdicts):
        """Replaying the persisted decision log over the persisted payload
        reproduces the downstream input byte-for-byte."""
        run_dir = tmp_path_factory.mktemp("run")
        store = GateStore(run_dir)
        payload = ranking_payload(10)
        store.open_gate("PostRanking", payload)
        verdicts = [
            Decision(f"P{idx}", verdict, grade=grade)
            for idx, (verdict, grade) in raw_verdicts
        ]
        if verdicts:
            gate = store.submit_review("PostRanking", "Amended", verdicts)
        else:
            gate = store.submit_review("PostRanking", "Approved")
        live_bytes = canonical_dumps(downstream_payload(gate))

        # replay purely from the persisted version file
        persisted = ReviewGate.from_dict(
            read_json(store._path("PostRanking", gate.version))
        )
        replay = (
            apply_decisions(persisted.payload, persisted.decisions)
            if persisted.state == "Amended"
            else [dict(i) for i in persisted.payload]
        )
        assert canonical_dumps(replay) == live_bytes
