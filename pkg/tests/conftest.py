"""Shared builders for tests: minimal records, portfolios, contexts."""

from __future__ import annotations

from datetime import date

import pytest

from patentprune.config import ParamConfig
from patentprune.corpus import ClaimText, PatentRecord, Portfolio, RejectionCounts
from patentprune.params import ValuationContext

EVAL_DATE = date(2026, 1, 15)


def make_record(patent_id: str = "US-0000001-B2", **overrides) -> PatentRecord:
    base = dict(
        patent_id=patent_id,
        title="Adaptive widget",
        abstract="A need exists for better widgets. This invention adapts widgets.",
        claims=(
            ClaimText(1, "A device comprising: a housing; a fastening means attached to the housing."),
        ),
        filing_date=date(2015, 3, 2),
        grant_date=date(2017, 6, 20),
        expiry_date=date(2035, 3, 2),
        legal_status="Granted",
        assignee_raw="Widget Corp.",
        cpc_codes=("G06F 3/01",),
        rejection_events=RejectionCounts(0, 0, 0),
        direct_metrics={},
    )
    base.update(overrides)
    return PatentRecord(**base)


def make_portfolio(*records: PatentRecord, eval_date: date = EVAL_DATE) -> Portfolio:
    return Portfolio(records=tuple(records), evaluation_date=eval_date, provenance="test")


@pytest.fixture
def ctx() -> ValuationContext:
    return ValuationContext(
        eval_date=EVAL_DATE,
        gni_table={"USA": 80000.0, "DEU": 56000.0, "KOR": 40000.0},
        market={},
        cfg=ParamConfig(),
    )
