import json
from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from patentprune.corpus import (
    DuplicateId,
    EmptyPortfolio,
    EntityAliasTable,
    MalformedRecord,
    base_normalize,
    ingest_portfolio,
    load_alias_table,
    normalize_entities,
    normalize_name,
    verify_legal_status,
)
from patentprune.jsonio import canonical_dumps

from conftest import EVAL_DATE, make_portfolio, make_record


def _valid_line(pid: str, status: str = "Granted") -> str:
    return json.dumps(
        {
            "patent_id": pid,
            "title": "t",
            "abstract": "a",
            "claims": [{"number": 1, "text": "A device comprising: a part."}],
            "filing_date": "2015-01-01",
            "grant_date": "2017-01-01" if status != "Pending" else None,
            "expiry_date": "2035-01-01",
            "legal_status": status,
            "assignee_raw": "ACME Inc.",
            "cpc_codes": ["G06F 3/01"],
        }
    )


def _write(tmp_path, lines):
    path = tmp_path / "patents.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestIngest:
    def test_three_valid_records(self, tmp_path):
        path = _write(tmp_path, [_valid_line(f"P{i}") for i in range(3)])
        portfolio = ingest_portfolio(path, EVAL_DATE)
        assert len(portfolio.records) == 3
        assert [r.patent_id for r in portfolio.records] == ["P0", "P1", "P2"]

    def test_duplicate_ids_name_both_lines(self, tmp_path):
        lines = [_valid_line("A"), _valid_line("B"), _valid_line("C"),
                 _valid_line("X"), _valid_line("B")]
        path = _write(tmp_path, lines)
        with pytest.raises(DuplicateId) as err:
            ingest_portfolio(path, EVAL_DATE)
        assert err.value.duplicates == [("B", 2, 5)]

    def test_malformed_lines_collected_with_reasons(self, tmp_path):
        lines = [_valid_line("A"), "{not json", json.dumps({"patent_id": "B"})]
        path = _write(tmp_path, lines)
        with pytest.raises(MalformedRecord) as err:
            ingest_portfolio(path, EVAL_DATE)
        linenos = [ln for ln, _ in err.value.rejects]
        assert linenos == [2, 3]
        assert "missing required field" in err.value.rejects[1][1]

    def test_empty_file(self, tmp_path):
        path = _write(tmp_path, [""])
        with pytest.raises(EmptyPortfolio):
            ingest_portfolio(path, EVAL_DATE)

    def test_date_order_enforced(self, tmp_path):
        bad = json.loads(_valid_line("A"))
        bad["grant_date"] = "2014-01-01"  # before filing
        path = _write(tmp_path, [json.dumps(bad)])
        with pytest.raises(MalformedRecord):
            ingest_portfolio(path, EVAL_DATE)

    def test_pending_may_omit_grant_date(self, tmp_path):
        path = _write(tmp_path, [_valid_line("A", status="Pending")])
        portfolio = ingest_portfolio(path, EVAL_DATE)
        assert portfolio.records[0].grant_date is None

    def test_reingest_is_byte_identical(self, tmp_path):
        path = _write(tmp_path, [_valid_line("A"), _valid_line("B")])
        one = canonical_dumps(ingest_portfolio(path, EVAL_DATE).to_dict())
        two = canonical_dumps(ingest_portfolio(path, EVAL_DATE).to_dict())
        assert one == two


class TestLegalFilter:
    def test_all_granted_keeps_everything(self):
        p = make_portfolio(make_record("A"), make_record("B"))
        kept, dropped = verify_legal_status(p)
        assert [r.patent_id for r in kept.records] == ["A", "B"]
        assert dropped == []

    def test_expired_among_three(self):
        p = make_portfolio(
            make_record("A"),
            make_record("B", legal_status="Expired"),
            make_record("C"),
        )
        kept, dropped = verify_legal_status(p)
        assert [r.patent_id for r in kept.records] == ["A", "C"]
        assert dropped == [("B", "Expired")]

    @given(
        st.lists(
            st.sampled_from(
                ["Granted", "Pending", "Expired", "Abandoned", "Lapsed", "Invalidated"]
            ),
            max_size=12,
        )
    )
    def test_filter_is_a_pure_partition(self, statuses):
        records = [make_record(f"P{i}", legal_status=s) for i, s in enumerate(statuses)]
        p = make_portfolio(*records)
        kept, dropped = verify_legal_status(p)
        kept_ids = {r.patent_id for r in kept.records}
        dropped_ids = {pid for pid, _ in dropped}
        assert kept_ids | dropped_ids == {r.patent_id for r in records}
        assert kept_ids & dropped_ids == set()
        assert all(r.legal_status in ("Granted", "Pending") for r in kept.records)


class TestNormalization:
    def test_ibm_alias(self, tmp_path):
        csv_path = tmp_path / "aliases.csv"
        csv_path.write_text(
            "pattern,canonical\nIBM,INTERNATIONAL BUSINESS MACHINES\n", encoding="utf-8"
        )
        table = load_alias_table(csv_path)
        assert normalize_name("IBM Corp.", table) == "INTERNATIONAL BUSINESS MACHINES"

    def test_canonical_unchanged_with_empty_table(self):
        table = EntityAliasTable()
        name = "INTERNATIONAL BUSINESS MACHINES"
        assert normalize_name(name, table) == name

    def test_sandisk_variants_converge(self):
        # hand-applied chain: uppercase, punctuation out, strip LLC suffix
        table = EntityAliasTable()
        assert normalize_name("SanDisk, LLC", table) == "SANDISK"
        assert normalize_name("SANDISK", table) == "SANDISK"

    def test_suffixes_strip_repeatedly(self):
        assert base_normalize("Foo Co Ltd") == "FOO"
        # a name that IS a suffix word is not erased to nothing
        assert base_normalize("Co") == "CO"

    @given(st.text(min_size=1, max_size=40))
    def test_idempotent(self, raw):
        table = EntityAliasTable()
        once = normalize_name(raw, table)
        assert normalize_name(once, table) == once

    def test_normalize_entities_sets_canonical(self):
        p = make_portfolio(make_record("A", assignee_raw="Acme, Inc."))
        out = normalize_entities(p, EntityAliasTable())
        assert out.records[0].assignee_canonical == "ACME"

    def test_alias_chain_resolved_at_load(self, tmp_path):
        csv_path = tmp_path / "aliases.csv"
        csv_path.write_text(
            "pattern,canonical\nSNDK,SANDISK\nSANDISK,WESTERN DIGITAL\n",
            encoding="utf-8",
        )
        table = load_alias_table(csv_path)
        assert normalize_name("SNDK Corp", table) == "WESTERN DIGITAL"
        # idempotence holds even through the chain
        assert normalize_name("WESTERN DIGITAL", table) == "WESTERN DIGITAL"
