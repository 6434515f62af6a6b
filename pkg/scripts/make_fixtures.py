#!/usr/bin/env python3
"""Generate the ~1/100-scale synthetic portfolio fixture and its sidecars.

Everything here is computed with plain stdlib arithmetic, independent of the
engine package, so the sidecar files (vectors.jsonl, categories.json,
needs_sidecar.json, category ranking) act as an external oracle for the
engine's outputs.  The portfolio plants a 12-patent high-value memory
cluster plus a high-demand, high-authority need (the Koryo Electronics
storyline) that the planted cluster alone should match.

Run from the repository root:  python scripts/make_fixtures.py
"""

from __future__ import annotations

import csv
import json
import math
import random
from datetime import date, timedelta
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"
EVAL_DATE = date(2026, 1, 15)
SEED = 20260115

DAYS_PER_YEAR = 365.25
DAYS_PER_MONTH = DAYS_PER_YEAR / 12.0

PARAM_NAMES = [
    "L_rem", "S_claim", "N_fam", "V_cite", "N_reassign", "S_litigation",
    "S_trend", "T_pend", "N_bcite", "N_ecite", "S_inv", "S_rej", "S_CIP",
    "TRL", "MRL", "V_TAM", "V_rev", "CAGR_tech", "S_juris", "S_sc",
    "P_cost", "T_market", "N_app", "N_comp", "S_mfg", "S_demand",
    "S_partner", "S_invest", "N_launch", "S_MA", "S_owner", "S_forecast",
    "S_NeedSeed",
]

GNI = {
    "USA": 80300.0, "DEU": 54030.0, "JPN": 39960.0, "KOR": 36190.0,
    "CHN": 13400.0, "FRA": 45070.0, "GBR": 49240.0, "TWN": 33780.0,
}

MARKET = {
    "G11C": dict(tam_usd=48e9, revenue_usd=21e9, market_start=30.0, market_end=75.0,
                 horizon_years=5.0, filings_start=400.0, filings_end=980.0,
                 signal_power=8.0, noise_power=1.0, deals_value_usd=12e9,
                 deals_count=14, partnership_counts={"JointVenture": 2, "Licensing": 4, "MoU": 3}),
    "G06F": dict(tam_usd=30e9, revenue_usd=17e9, market_start=40.0, market_end=62.0,
                 horizon_years=5.0, filings_start=900.0, filings_end=1250.0,
                 signal_power=3.0, noise_power=1.0, deals_value_usd=6e9,
                 deals_count=9, partnership_counts={"JointVenture": 1, "Licensing": 3, "MoU": 2}),
    "H01L": dict(tam_usd=22e9, revenue_usd=12e9, market_start=25.0, market_end=34.0,
                 horizon_years=5.0, filings_start=700.0, filings_end=840.0,
                 signal_power=2.5, noise_power=1.0, deals_value_usd=4e9,
                 deals_count=6, partnership_counts={"JointVenture": 1, "Licensing": 2, "MoU": 1}),
    "B60L": dict(tam_usd=18e9, revenue_usd=7e9, market_start=12.0, market_end=23.0,
                 horizon_years=5.0, filings_start=300.0, filings_end=520.0,
                 signal_power=4.0, noise_power=1.0, deals_value_usd=3e9,
                 deals_count=7, partnership_counts={"JointVenture": 1, "Licensing": 1, "MoU": 2}),
    "F04D": dict(tam_usd=6e9, revenue_usd=4e9, market_start=9.0, market_end=10.5,
                 horizon_years=5.0, filings_start=220.0, filings_end=235.0,
                 signal_power=1.2, noise_power=1.0, deals_value_usd=0.8e9,
                 deals_count=2, partnership_counts={"JointVenture": 0, "Licensing": 1, "MoU": 1}),
    "C09J": dict(tam_usd=4e9, revenue_usd=2.5e9, market_start=7.0, market_end=8.2,
                 horizon_years=5.0, filings_start=150.0, filings_end=168.0,
                 signal_power=1.1, noise_power=1.0, deals_value_usd=0.5e9,
                 deals_count=1, partnership_counts={"JointVenture": 0, "Licensing": 1, "MoU": 0}),
    "A61K": dict(tam_usd=26e9, revenue_usd=15e9, market_start=35.0, market_end=47.0,
                 horizon_years=5.0, filings_start=600.0, filings_end=690.0,
                 signal_power=2.0, noise_power=1.0, deals_value_usd=5e9,
                 deals_count=4, partnership_counts={"JointVenture": 1, "Licensing": 2, "MoU": 1}),
}

REJ_W = (1.0, 0.6, 0.2)
LIT_W = {"PlaintiffWin": 1.0, "Settlement": 0.5, "DefendantWin": 0.0}
SC_W = (0.4, 0.4, 0.2)
PARTNER_W = {"JointVenture": 1.0, "Licensing": 0.7, "MoU": 0.3}
CLAIM_SCORE = {"Product": 1.0, "Process": 0.7, "Composition": 0.5}
JURIS_F = {"granted": 1.0, "pending": 0.7}
CITE_WINDOW_YEARS = 3.0
VELOCITY_FLOOR = 0.25

# -- planted cluster text ----------------------------------------------------
# The cornerstone's claims/abstract and the need phrases draw from one token
# bag so the seed-profile/need cosine stays very high.

# Planted claims, abstract, and need phrases deliberately share one token
# bag so the seed-profile/need cosine stays very high for the cornerstone.
PLANTED_ASSIGNEE = "SanDimax Memory, Inc."
PLANTED_LIMITATIONS = [
    "performing binary neural network operations within vertically stacked memory arrays",
    "executing binary neural network operations within stacked memory arrays",
    "performing binary neural network operations within stacked memory arrays at production scale",
]
PLANTED_EXTRA = [
    "executing binary neural network operations within vertically stacked memory arrays",
    "performing binary neural network operations within stacked memory arrays",
    "executing binary neural network operations within stacked memory arrays at production scale",
]
PLANTED_ABSTRACT = (
    "Performing binary neural network operations within vertically stacked "
    "memory arrays. The memory device is executing binary neural network "
    "operations within stacked memory arrays at production scale."
)

NEED_PHRASES = [
    "performing binary neural network operations within vertically stacked memory arrays",
    "performing binary neural network operations within stacked memory device arrays",
    "executing binary neural network operations within vertically stacked memory arrays",
]

ORGANIC_TEMPLATES = {
    "G11C": dict(
        noun="storage controller", kind="Product",
        limitations=[
            "a wear leveling engine tracking erase cycles across flash blocks",
            "a cache tier prioritizing hot data segments",
            "a scheduler coalescing write bursts into sequential flash commits",
        ],
        abstract=("A drawback of conventional flash management is uneven cell wear. "
                  "The controller spreads erase cycles and coalesces writes across blocks."),
        title="Flash wear management controller",
    ),
    "G06F": dict(
        noun="method", kind="Process",
        limitations=[
            "partitioning a workload graph into latency classes",
            "assigning compute kernels to heterogeneous cores",
            "rebalancing queues when thermal headroom drops",
        ],
        abstract=("The problem of stalled pipelines in heterogeneous processors is addressed "
                  "by latency-aware kernel scheduling."),
        title="Heterogeneous workload scheduling",
    ),
    "H01L": dict(
        noun="semiconductor package", kind="Product",
        limitations=[
            "a redistribution layer fanning out fine pitch interconnects",
            "a molded interposer carrying through vias",
            "a stress buffer ring surrounding the die edge",
        ],
        abstract=("A disadvantage of fan-out packaging is warpage under reflow. "
                  "The package adds a stress buffer ring and balanced interposer."),
        title="Fan-out package with stress buffer",
    ),
    "B60L": dict(
        noun="charging system", kind="Product",
        limitations=[
            "a liquid cooled cable bundle rated for fast charging current",
            "a handshake module negotiating charging profiles with the vehicle",
            "a fault isolator disconnecting on insulation drift",
        ],
        abstract=("A need exists for dissipating heat in fast charging cables. "
                  "The harness circulates coolant through the cable bundle."),
        title="Liquid cooled fast charging harness",
    ),
    "F04D": dict(
        noun="method", kind="Process",
        limitations=[
            "shaping impeller vanes with a backswept leading edge",
            "venting the volute tongue region",
            "trimming blade tips against cavitation margins",
        ],
        abstract=("The drawback of cavitation erosion in impeller pumps is reduced "
                  "by backswept vanes and tongue venting."),
        title="Cavitation resistant impeller design",
    ),
    "C09J": dict(
        noun="composition", kind="Composition",
        limitations=[
            "an epoxy resin bearing flexible siloxane segments",
            "a latent curing agent activated above 90 degrees",
            "a silica filler fraction between 20 and 30 percent",
        ],
        abstract=("A disadvantage of rigid epoxies is joint cracking. "
                  "The composition adds siloxane segments for peel strength."),
        title="Flexible epoxy adhesive composition",
    ),
    "A61K": dict(
        noun="composition", kind="Composition",
        limitations=[
            "a sustained release matrix of hypromellose",
            "an active agent dispersed as amorphous solid solution",
            "an enteric coating resisting gastric media",
        ],
        abstract=("The problem of burst release in oral dosage forms is addressed "
                  "by an amorphous solid solution in a sustained release matrix."),
        title="Sustained release oral composition",
    ),
}

ORGANIC_ASSIGNEES = [
    "Veltor Systems, Inc.", "Bolt Industries LLC", "Nimbus Compute Corp",
    "Helio Semiconductor Co", "Quanta Drive GmbH", "Ferrostatic Ltd",
    "Axion Materials, Inc.", "Pillar Bio Labs", "Crestline Motors Co",
]

ORGANIC_NEED_DOCS = [
    ("ND-201", "News", "2025-09-20",
     "Veltor Systems is struggling with brittle adhesive joints in cold climates. "
     "Analysts expect sealant demand to rise."),
    ("ND-202", "MarketReport", "2025-08-14",
     "Crestline Motors seeks quieter cabin blower assemblies for its compact line."),
    ("ND-203", "Blog", "2025-07-02",
     "Pillar Bio Labs needs tamper evident packaging for trial kits."),
    ("ND-204", "News", "2025-10-11",
     "Ferrostatic lacks corrosion tolerant fasteners for offshore towers."),
    ("ND-205", "EarningsCall", "2025-11-21",
     "Nimbus Compute is investing in liquid immersion cooling for dense racks."),
    ("ND-206", "EarningsCall", "2025-09-03",
     "Crestline Motors is struggling with reducing battery degradation at high "
     "charge rates. The program timeline was reaffirmed."),
]

PLANTED_NEED_DOCS = [
    ("ND-101", "RegulatoryFiling", "2025-12-01",
     f"Koryo Electronics is constrained by {NEED_PHRASES[0]} at production scale. "
     "The annual report lists memory roadmap risk as material."),
    ("ND-102", "EarningsCall", "2025-11-10",
     f"Koryo Electronics is struggling with {NEED_PHRASES[1]}. "
     "Executives flagged urgent qualification deadlines."),
    ("ND-103", "EarningsCall", "2025-10-05",
     f"Koryo Electronics seeks {NEED_PHRASES[2]}. "
     "The division repeated the request from the prior quarter."),
]


def iso(d: date) -> str:
    return d.isoformat()


def claim_obj(number: int, text: str) -> dict:
    return {"number": number, "text": text}


def build_claims(noun: str, limitations: list[str], n_dependent: int, rng) -> list[dict]:
    article = "An" if noun[0].lower() in "aeiou" else "A"
    body = "; ".join(limitations)
    claims = [claim_obj(1, f"{article} {noun} comprising: {body}.")]
    wherein = [
        "the first element is replaceable",
        "operation continues during maintenance",
        "a housing encloses the assembly",
        "a sensor logs duty cycles",
    ]
    head = noun.split()[-1]
    for k in range(n_dependent):
        claims.append(
            claim_obj(k + 2, f"The {head} of claim 1, wherein {wherein[k % len(wherein)]}.")
        )
    return claims


class RecordBuilder:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.records: list[dict] = []
        self.meta: dict[str, dict] = {}  # patent_id -> oracle bookkeeping

    def add(self, *, patent_id, prefix, cpc, title, abstract, claims, claim_kind,
            assignee, tier, legal_status="Granted", pending=False,
            filing=None, grant=None, expiry=None, jurisdictions=None,
            fc_recent=0, fc_old=0, n_fam=0, n_reassign=0, n_bcite=0, n_ecite=0,
            litigation=None, rejections=None, cip=None, metrics=None,
            omit_fields=()):
        rng = self.rng
        filing = filing or date(2015, 1, 1) + timedelta(days=rng.randint(0, 2500))
        if pending:
            grant = None
        else:
            grant = grant or filing + timedelta(days=rng.randint(500, 1400))
        expiry = expiry or filing + timedelta(days=int(20 * 365.25))

        fc = []
        for i in range(fc_recent):
            when = EVAL_DATE - timedelta(days=rng.randint(5, int(CITE_WINDOW_YEARS * 365) - 30))
            fc.append([f"CIT-{patent_id}-{i}", iso(when)])
        for i in range(fc_old):
            when = EVAL_DATE - timedelta(days=rng.randint(1200, 3000))
            fc.append([f"OLD-{patent_id}-{i}", iso(when)])

        reassignments = [
            [iso(filing + timedelta(days=200 + 150 * i)), f"ORIG-{i}", f"NEXT-{i}"]
            for i in range(n_reassign)
        ]
        record = {
            "patent_id": patent_id,
            "title": title,
            "abstract": abstract,
            "claims": claims,
            "filing_date": iso(filing),
            "grant_date": iso(grant) if grant else None,
            "expiry_date": iso(expiry),
            "legal_status": legal_status,
            "assignee_raw": assignee,
            "inventors": [f"Inventor {patent_id}-{i}" for i in range(rng.randint(1, 3))],
            "cpc_codes": [cpc],
            "family_members": [f"FAM-{patent_id}-{i}" for i in range(n_fam)],
            "jurisdictions": jurisdictions or [],
            "forward_citations": fc,
            "backward_citations": [f"B-{patent_id}-{i}" for i in range(n_bcite)],
            "examiner_citations": [f"E-{patent_id}-{i}" for i in range(n_ecite)],
            "reassignments": reassignments,
            "litigation_events": litigation or [],
            "rejection_events": rejections if rejections is not None else {"n102": 0, "n103": 0, "n112": 0},
            "cip_flag": bool(cip) if cip is not None else False,
            "direct_metrics": metrics or {},
        }
        for field in omit_fields:
            record.pop(field, None)
        self.records.append(record)
        self.meta[patent_id] = {
            "prefix": prefix,
            "claim_kind": claim_kind,
            "tier": tier,
            "in_force": legal_status in ("Granted", "Pending"),
            "omitted": set(omit_fields),
        }
        return record


def planted_records(builder: RecordBuilder, rng: random.Random) -> list[str]:
    ids = []
    for i in range(12):
        pid = f"US-1117{i + 1:04d}-B2"
        ids.append(pid)
        lims = list(PLANTED_LIMITATIONS) + [PLANTED_EXTRA[i % len(PLANTED_EXTRA)]]
        claims = [claim_obj(1, "A memory device comprising: " + "; ".join(lims) + ".")]
        filing = date(2019, 1, 10) + timedelta(days=30 * i)
        builder.add(
            patent_id=pid,
            prefix="G11C",
            cpc="G11C 11/54",
            title=f"In-memory binary neural network engine {i + 1}",
            abstract=PLANTED_ABSTRACT,
            claims=claims,
            claim_kind="Product",
            assignee=PLANTED_ASSIGNEE if i % 3 else "SANDIMAX MEMORY",
            tier=4,
            filing=filing,
            grant=filing + timedelta(days=800 + 11 * i),
            expiry=filing + timedelta(days=int(22.6 * 365.25)),  # L_rem > 15
            jurisdictions=[["USA", "granted"], ["KOR", "granted"],
                           ["JPN", "granted"], ["DEU", "granted"]],
            fc_recent=22 + rng.randint(0, 8),
            fc_old=rng.randint(2, 6),
            n_fam=9 + rng.randint(0, 5),
            n_reassign=1,
            n_bcite=24 + rng.randint(0, 10),
            n_ecite=5 + rng.randint(0, 4),
            litigation=[["PlaintiffWin", float(rng.randint(2, 9)) * 1e6]],
            rejections={"n102": 0, "n103": rng.randint(0, 1), "n112": 0},
            cip=(i % 4 == 0),
            metrics={
                "TRL": 8 + (i % 2), "MRL": 8 + (i % 3),
                "P_cost": 18.0 + i, "T_market": 1.5,
                "N_app": 6 + (i % 4), "N_comp": 5 + (i % 3),
                "S_mfg": 4 + (i % 2), "S_invest": 8.0 + (i % 3),
                "S_owner": 7.5, "S_forecast": 8.5, "N_launch": 3 + (i % 3),
                "r_mat": 0.9, "r_mfg": 0.85 + 0.01 * (i % 3), "r_work": 0.9,
                "inv_h_index": 18.0 + i, "inv_collab": 6.0 + (i % 5),
                "inv_lit_success": 0.8,
            },
        )
    return ids


def organic_records(builder: RecordBuilder, rng: random.Random) -> None:
    plan = [("G11C", 30), ("G06F", 35), ("H01L", 30), ("B60L", 25),
            ("F04D", 20), ("C09J", 20), ("A61K", 18)]
    # exactly 19 of these 178 are out of force (10% of the 190 total)
    dead_statuses = ["Expired"] * 7 + ["Lapsed"] * 7 + ["Abandoned"] * 5
    total = sum(n for _, n in plan)
    dead_slots = set(rng.sample(range(total), len(dead_statuses)))
    pending_slots = set(rng.sample(sorted(set(range(total)) - dead_slots), 8))

    slot = 0
    serial = 100
    for prefix, count in plan:
        template = ORGANIC_TEMPLATES[prefix]
        for j in range(count):
            tier = rng.choices([0, 1, 2, 3], weights=[20, 35, 30, 15])[0]
            status = "Granted"
            pending = False
            if slot in dead_slots:
                status = dead_statuses[len([s for s in dead_slots if s < slot])]
            elif slot in pending_slots:
                status = "Pending"
                pending = True

            # long-life organics in G11C share the planted category
            if prefix == "G11C" and j < 10:
                filing = date(2019, 6, 1) + timedelta(days=40 * j)
                expiry = filing + timedelta(days=int(22.3 * 365.25))
            else:
                filing = date(2008, 1, 1) + timedelta(days=rng.randint(0, 4800))
                expiry = filing + timedelta(days=int(20 * 365.25))
                if expiry <= EVAL_DATE + timedelta(days=200) and status in ("Granted", "Pending"):
                    filing = EVAL_DATE - timedelta(days=rng.randint(1200, 4000))
                    expiry = filing + timedelta(days=int(20 * 365.25))

            jurisdictions = [["USA", "granted"]]
            for extra in rng.sample(["DEU", "JPN", "KOR", "CHN", "FRA", "GBR"], k=min(tier, 3)):
                jurisdictions.append([extra, rng.choice(["granted", "pending"])])

            # organic ranges stay strictly below the planted cluster's floors
            # so grade-4 feature patterns are globally separable
            metrics = {}
            if rng.random() < 0.9:
                metrics["TRL"] = min(7, 2 + tier + rng.randint(0, 1))
                metrics["MRL"] = min(7, 2 + tier + rng.randint(0, 1))
            if rng.random() < 0.8:
                metrics["N_app"] = tier + rng.randint(0, 3)
                metrics["N_comp"] = 8 + rng.randint(0, 20)
            if rng.random() < 0.7:
                metrics["S_mfg"] = min(4, 1 + tier)
                metrics["S_invest"] = round(tier * 1.5 + rng.random() * 1.5, 2)
                metrics["S_owner"] = round(1 + tier * 1.2 + rng.random(), 2)
                metrics["S_forecast"] = round(1 + tier * 1.2 + rng.random(), 2)
            if rng.random() < 0.6:
                metrics["P_cost"] = round(4 + 3 * tier + rng.random() * 2, 2)
                metrics["T_market"] = round(6 - tier - rng.random(), 2)
                metrics["N_launch"] = tier + rng.randint(0, 1)
            if rng.random() < 0.65:
                metrics["r_mat"] = round(0.2 + 0.12 * tier + rng.random() * 0.06, 3)
                metrics["r_mfg"] = round(0.2 + 0.12 * tier + rng.random() * 0.06, 3)
                metrics["r_work"] = round(0.25 + 0.11 * tier + rng.random() * 0.06, 3)
            if rng.random() < 0.5:
                metrics["inv_h_index"] = round(2 + 3 * tier + rng.random() * 2, 1)
                metrics["inv_collab"] = float(1 + rng.randint(0, 3 + tier))
                metrics["inv_lit_success"] = round(min(1.0, 0.2 + 0.15 * tier + rng.random() * 0.2), 2)

            litigation = []
            if tier >= 2 and rng.random() < 0.25:
                outcome = rng.choice(["PlaintiffWin", "Settlement", "DefendantWin"])
                litigation.append([outcome, float(rng.randint(1, 40)) * 1e5])

            omit = []
            if rng.random() < 0.25:
                omit.append("rejection_events")
            if rng.random() < 0.2:
                omit.append("cip_flag")

            rejections = {
                "n102": max(0, rng.randint(-1, 3 - tier)),
                "n103": max(0, rng.randint(0, 4 - tier)),
                "n112": rng.randint(0, 1),
            }

            serial += 1
            pid = f"US-{serial:07d}-B2"
            builder.add(
                patent_id=pid,
                prefix=prefix,
                cpc=f"{prefix} {rng.randint(1, 29)}/{rng.randint(10, 99)}",
                title=f"{template['title']} {serial}",
                abstract=template["abstract"],
                claims=build_claims(template["noun"], template["limitations"], rng.randint(1, 3), rng),
                claim_kind=template["kind"],
                assignee=rng.choice(ORGANIC_ASSIGNEES),
                tier=tier,
                legal_status=status,
                pending=pending,
                filing=filing,
                expiry=expiry,
                jurisdictions=jurisdictions,
                fc_recent=tier * 2 + rng.randint(0, 2),
                fc_old=rng.randint(0, 4),
                n_fam=tier * 2 + rng.randint(0, 2),
                n_reassign=rng.randint(0, 2),
                n_bcite=4 + tier * 3 + rng.randint(0, 6),
                n_ecite=rng.randint(0, 4),
                litigation=litigation,
                rejections=rejections,
                cip=(rng.random() < 0.15),
                metrics=metrics,
                omit_fields=omit,
            )
            slot += 1


# -- independent oracle ------------------------------------------------------

def oracle_vector(record: dict, meta: dict) -> dict:
    """Spreadsheet-style recomputation of the 33 slots for one record."""
    values = {}
    missing = []

    def put(name, value):
        values[name] = float(value)

    def absent(name):
        values[name] = 0.0
        missing.append(name)

    expiry = date.fromisoformat(record["expiry_date"])
    put("L_rem", (expiry - EVAL_DATE).days / DAYS_PER_YEAR)
    put("S_claim", CLAIM_SCORE[meta["claim_kind"]])

    for name, key in (("N_fam", "family_members"), ("N_reassign", "reassignments"),
                      ("N_bcite", "backward_citations"), ("N_ecite", "examiner_citations")):
        seq = record.get(key) or []
        if seq:
            put(name, len(seq))
        else:
            absent(name)

    grant = record["grant_date"]
    if grant is None:
        absent("V_cite")
        absent("T_pend")
    else:
        grant_d = date.fromisoformat(grant)
        fc = record.get("forward_citations") or []
        if fc:
            window_start_days = CITE_WINDOW_YEARS * DAYS_PER_YEAR
            recent = sum(
                1 for _, when in fc
                if 0 <= (EVAL_DATE - date.fromisoformat(when)).days <= window_start_days
            )
            years = (EVAL_DATE - grant_d).days / DAYS_PER_YEAR
            put("V_cite", recent / max(years, VELOCITY_FLOOR))
        else:
            absent("V_cite")
        put("T_pend", (grant_d - date.fromisoformat(record["filing_date"])).days / DAYS_PER_MONTH)

    lit = record.get("litigation_events") or []
    if lit:
        put("S_litigation", sum(LIT_W[o] * v for o, v in lit))
    else:
        absent("S_litigation")

    entry = MARKET.get(meta["prefix"])
    dm = record.get("direct_metrics") or {}

    def market_or_dm(dm_key, entry_key):
        if dm_key in dm:
            return dm[dm_key]
        if entry is not None:
            return entry.get(entry_key)
        return None

    f0, f1 = market_or_dm("filings_start", "filings_start"), market_or_dm("filings_end", "filings_end")
    horizon = market_or_dm("horizon_years", "horizon_years")
    if f0 is not None and f1 is not None and horizon is not None:
        put("S_trend", (f1 / f0) ** (1.0 / horizon) - 1.0)
    else:
        absent("S_trend")

    m0, m1 = market_or_dm("market_start", "market_start"), market_or_dm("market_end", "market_end")
    if m0 is not None and m1 is not None and horizon is not None:
        put("CAGR_tech", (m1 / m0) ** (1.0 / horizon) - 1.0)
    else:
        absent("CAGR_tech")

    if all(k in dm for k in ("inv_h_index", "inv_collab", "inv_lit_success")):
        put("S_inv", 0.5 * dm["inv_h_index"] + 0.3 * math.log(dm["inv_collab"])
            + 0.2 * dm["inv_lit_success"])
    else:
        absent("S_inv")

    if "rejection_events" in meta["omitted"]:
        absent("S_rej")
    else:
        rej = record["rejection_events"]
        put("S_rej", REJ_W[0] * rej["n102"] + REJ_W[1] * rej["n103"] + REJ_W[2] * rej["n112"])

    if "cip_flag" in meta["omitted"]:
        absent("S_CIP")
    else:
        put("S_CIP", 1.0 if record["cip_flag"] else 0.0)

    jur = record.get("jurisdictions") or []
    if jur:
        put("S_juris", sum((GNI[c] / GNI["USA"]) * JURIS_F[s] for c, s in jur))
    else:
        absent("S_juris")

    if all(k in dm for k in ("r_mat", "r_mfg", "r_work")):
        put("S_sc", SC_W[0] * dm["r_mat"] + SC_W[1] * dm["r_mfg"] + SC_W[2] * dm["r_work"])
    else:
        absent("S_sc")

    sig, noi = market_or_dm("signal_power", "signal_power"), market_or_dm("noise_power", "noise_power")
    if sig is not None and noi is not None:
        put("S_demand", max(10.0 * math.log10(sig / noi), -60.0))
    else:
        absent("S_demand")

    if entry is not None and entry.get("partnership_counts") is not None:
        put("S_partner", sum(PARTNER_W[k] * v for k, v in entry["partnership_counts"].items()))
    else:
        absent("S_partner")

    dv, dc = market_or_dm("deals_value_usd", "deals_value_usd"), market_or_dm("deals_count", "deals_count")
    if dv is not None and dc is not None:
        put("S_MA", math.log1p(dv) + 0.1 * dc)
    else:
        absent("S_MA")

    for name, entry_key in (("V_TAM", "tam_usd"), ("V_rev", "revenue_usd")):
        v = market_or_dm(name, entry_key)
        if v is None:
            absent(name)
        else:
            put(name, v)

    for name in ("TRL", "MRL", "P_cost", "T_market", "N_app", "N_comp", "S_mfg",
                 "S_invest", "S_owner", "S_forecast", "N_launch"):
        if name in dm:
            put(name, dm[name])
        else:
            absent(name)

    absent("S_NeedSeed")

    return {
        "patent_id": record["patent_id"],
        "values": {n: values[n] for n in PARAM_NAMES},
        "missing": sorted(missing),
    }


def oracle_categories(records: list[dict], vectors: dict[str, dict]) -> list[dict]:
    """Independent grouping: CPC prefix (4 chars), life band, trend tertiles."""
    kept = [r for r in records if r["legal_status"] in ("Granted", "Pending")]

    def band(l_rem):
        if l_rem > 15:
            return "GT15"
        if l_rem >= 10:
            return "Y10to15"
        if l_rem >= 5:
            return "Y5to10"
        return "LT5"

    trends = sorted(vectors[r["patent_id"]]["values"]["S_trend"] for r in kept)
    n = len(trends)
    t_low = trends[min(n // 3, n - 1)]
    t_high = trends[min((2 * n) // 3, n - 1)]

    def growth(trend):
        if trend >= t_high:
            return "High"
        if trend >= t_low:
            return "Medium"
        return "Low"

    groups: dict[tuple, list[str]] = {}
    for r in kept:
        vec = vectors[r["patent_id"]]["values"]
        prefix = r["cpc_codes"][0].replace(" ", "")[:4]
        key = (prefix, band(vec["L_rem"]), growth(vec["S_trend"]))
        groups.setdefault(key, []).append(r["patent_id"])

    maturity_order = ["GT15", "Y10to15", "Y5to10", "LT5"]
    growth_order = ["High", "Medium", "Low"]
    cats = []
    for (prefix, mat, gro), members in groups.items():
        def mean(name):
            return sum(vectors[m]["values"][name] for m in members) / len(members)
        cats.append({
            "key": f"{prefix}|{mat}|{gro}",
            "cpc_prefix": prefix,
            "maturity_band": mat,
            "growth_band": gro,
            "members": members,
            "mean_l_rem": mean("L_rem"),
            "mean_s_trend": mean("S_trend"),
            "mean_v_tam": mean("V_TAM"),
            "mean_cagr_tech": mean("CAGR_tech"),
        })
    cats.sort(key=lambda c: (c["cpc_prefix"], maturity_order.index(c["maturity_band"]),
                             growth_order.index(c["growth_band"])))
    lo = min(c["mean_v_tam"] for c in cats)
    hi = max(c["mean_v_tam"] for c in cats)
    span = hi - lo
    for c in cats:
        c["v_tam_scaled"] = (c["mean_v_tam"] - lo) / span if span > 0 else 0.0
    return cats


def oracle_need_nodes() -> list[dict]:
    """Independent clustering of the fixture need corpus (entity + 0.6 Jaccard)."""
    triples = []
    trigger_map = [
        ("is struggling with", "StrugglesWith"),
        ("is investing in", "InvestingIn"),
        ("is constrained by", "ConstrainedBy"),
        ("lacks", "ConstrainedBy"),
        ("seeks", "Seeks"),
        ("needs", "Needs"),
    ]
    for doc_id, source_type, when, text in PLANTED_NEED_DOCS + ORGANIC_NEED_DOCS:
        for sentence in text.split("."):
            sentence = sentence.strip()
            for trigger, relation in trigger_map:
                marker = f" {trigger} "
                if marker in " " + sentence + " ":
                    left, _, right = sentence.partition(trigger)
                    entity_tokens = []
                    for token in reversed(left.strip().split()):
                        if token[:1].isupper():
                            entity_tokens.insert(0, token)
                        else:
                            break
                    if not entity_tokens or not right.strip():
                        continue
                    triples.append({
                        "entity": " ".join(entity_tokens).upper(),
                        "relation": relation,
                        "phrase": right.strip().strip(","),
                        "doc": doc_id,
                        "source_type": source_type,
                        "date": when,
                    })
                    break

    authority = {"RegulatoryFiling": 1.0, "EarningsCall": 0.9, "MarketReport": 0.7,
                 "News": 0.5, "Blog": 0.4}
    window_start = EVAL_DATE - timedelta(days=365)

    def tokens(text):
        import re as _re
        return set(_re.findall(r"[a-z0-9]+", text.lower()))

    clusters = []
    for t in triples:
        toks = tokens(t["phrase"])
        home = None
        for c in clusters:
            if c["entity"] != t["entity"]:
                continue
            inter = len(toks & c["seed_tokens"])
            union = len(toks | c["seed_tokens"])
            if union and inter / union >= 0.6:
                home = c
                break
        if home is None:
            clusters.append({"entity": t["entity"], "seed_tokens": toks, "triples": [t]})
        else:
            home["triples"].append(t)

    nodes = []
    for i, c in enumerate(clusters, start=1):
        supports = c["triples"]
        in_window = sum(
            1 for t in supports
            if window_start <= date.fromisoformat(t["date"]) <= EVAL_DATE
        )
        demand = 10.0 * math.log10(in_window) if in_window > 0 else -60.0
        nodes.append({
            "need_id": f"N{i:04d}",
            "entity": c["entity"],
            "description": supports[0]["phrase"],
            "n_supports": len(supports),
            "authority": max(authority[t["source_type"]] for t in supports),
            "demand_db": demand,
            "first_seen": min(t["date"] for t in supports),
            "last_seen": max(t["date"] for t in supports),
        })
    return nodes


def write_support_files() -> None:
    with open(OUT / "gni.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iso3", "gni_usd"])
        for iso3, gni in GNI.items():
            w.writerow([iso3, gni])

    with open(OUT / "aliases.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["pattern", "canonical"])
        w.writerow(["SDM", "SANDIMAX MEMORY"])
        w.writerow(["SanDimax", "SANDIMAX MEMORY"])
        w.writerow(["Koryo", "KORYO ELECTRONICS"])

    (OUT / "market.json").write_text(
        json.dumps(MARKET, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    (OUT / "patterns.txt").write_text(
        "\n".join([
            "<ENT> is struggling with <PHRASE> => StrugglesWith",
            "<ENT> struggles with <PHRASE> => StrugglesWith",
            "<ENT> is investing in <PHRASE> => InvestingIn",
            "<ENT> is constrained by <PHRASE> => ConstrainedBy",
            "<ENT> lacks <PHRASE> => ConstrainedBy",
            "<ENT> seeks <PHRASE> => Seeks",
            "<ENT> needs <PHRASE> => Needs",
        ]) + "\n",
        encoding="utf-8",
    )

    (OUT / "broad_terms.txt").write_text(
        "means\nmember\nelement\nmechanism\nassembly\nportion\nplurality\n",
        encoding="utf-8",
    )

    (OUT / "params.toml").write_text(
        "\n".join([
            "# engine defaults, spelled out so runs freeze their config",
            "[rejection]",
            "w_102 = 1.0", "w_103 = 0.6", "w_112 = 0.2",
            "", "[claim_type]",
            "product = 1.0", "process = 0.7", "composition = 0.5", "unknown = 0.5",
            "", "[litigation]",
            "plaintiff_win = 1.0", "settlement = 0.5", "defendant_win = 0.0",
            "", "[inventor]",
            "alpha = 0.5", "beta = 0.3", "gamma = 0.2",
            "", "[supply_chain]",
            "w_mat = 0.4", "w_mfg = 0.4", "w_work = 0.2",
            "", "[ma]",
            "alpha = 1.0", "beta = 0.1",
            "", "[jurisdiction]",
            "granted = 1.0", "pending = 0.7",
            "", "[citation]",
            "window_years = 3.0", "velocity_floor_years = 0.25",
            "", "[match]",
            "relevance_weight = 0.7", "authority_weight = 0.3",
            "candidate_threshold = 0.5", "needs_per_seed = 10",
            "", "[gates]",
            "ranking_top_n = 25", "ranking_top_n_max = 50",
        ]) + "\n",
        encoding="utf-8",
    )

    (OUT / "profiles.toml").write_text(
        "\n".join([
            "[profiles.AggressiveGrowth]",
            "category_weights = [0.15, 0.35, 0.15, 0.35]",
            "[profiles.AggressiveGrowth.feature_multipliers]",
            "V_cite = 2.0", "CAGR_tech = 2.0", "S_trend = 2.0",
            "",
            "[profiles.DefensiveMoat]",
            "category_weights = [0.4, 0.2, 0.2, 0.2]",
            "[profiles.DefensiveMoat.feature_multipliers]",
            "S_claim = 2.0", "N_bcite = 2.0", "S_litigation = 2.0",
            "",
            "[profiles.QuickMonetization]",
            "category_weights = [0.1, 0.2, 0.5, 0.2]",
            "[profiles.QuickMonetization.feature_multipliers]",
            "TRL = 2.0", "MRL = 2.0", "S_sc = 2.0", "S_demand = 2.0",
        ]) + "\n",
        encoding="utf-8",
    )

    needs_rows = [
        {"doc_id": doc_id, "source_type": st_, "date": when, "text": text}
        for doc_id, st_, when, text in PLANTED_NEED_DOCS + ORGANIC_NEED_DOCS
    ]
    (OUT / "needs_corpus.jsonl").write_text(
        "".join(json.dumps(r, sort_keys=True) + "\n" for r in needs_rows),
        encoding="utf-8",
    )


def main() -> None:
    rng = random.Random(SEED)
    OUT.mkdir(parents=True, exist_ok=True)

    builder = RecordBuilder(rng)
    planted_ids = planted_records(builder, rng)
    organic_records(builder, rng)
    records = builder.records
    assert len(records) == 190, len(records)

    (OUT / "sandisk_mini.jsonl").write_text(
        "".join(json.dumps(r, sort_keys=True) + "\n" for r in records),
        encoding="utf-8",
    )

    kept = [r for r in records if r["legal_status"] in ("Granted", "Pending")]
    dropped = [r for r in records if r["legal_status"] not in ("Granted", "Pending")]

    vectors = {
        r["patent_id"]: oracle_vector(r, builder.meta[r["patent_id"]]) for r in kept
    }
    (OUT / "vectors.jsonl").write_text(
        "".join(json.dumps(vectors[r["patent_id"]], sort_keys=True) + "\n" for r in kept),
        encoding="utf-8",
    )

    categories = oracle_categories(records, vectors)
    (OUT / "categories.json").write_text(
        json.dumps(categories, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    # category ranking under the AggressiveGrowth weights, brute-force
    aggressive = (0.15, 0.35, 0.15, 0.35)
    scored = [
        (
            aggressive[0] * c["mean_l_rem"] + aggressive[1] * c["mean_s_trend"]
            + aggressive[2] * c["v_tam_scaled"] + aggressive[3] * c["mean_cagr_tech"],
            c["key"],
        )
        for c in categories
    ]
    scored.sort(key=lambda sc: (-sc[0], sc[1]))
    (OUT / "categories_rank_aggressive.json").write_text(
        json.dumps([key for _, key in scored], indent=2) + "\n", encoding="utf-8"
    )

    nodes = oracle_need_nodes()
    (OUT / "needs_sidecar.json").write_text(
        json.dumps(nodes, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    # expert grade labels: tier is the grade, query is the oracle category key
    category_of = {}
    for c in categories:
        for pid in c["members"]:
            category_of[pid] = c["key"]
    labels = [
        {"query_id": category_of[r["patent_id"]], "patent_id": r["patent_id"],
         "grade": builder.meta[r["patent_id"]]["tier"]}
        for r in kept
    ]
    # cross-portfolio calibration group: per-category groups alone leave
    # ranker scores uncomparable across categories (group gradients are
    # zero-sum), so the expert panel also grades one portfolio-wide list
    labels += [
        {"query_id": "PORTFOLIO|ALL", "patent_id": r["patent_id"],
         "grade": builder.meta[r["patent_id"]]["tier"]}
        for r in kept
    ]
    (OUT / "labels.jsonl").write_text(
        "".join(json.dumps(l, sort_keys=True) + "\n" for l in labels),
        encoding="utf-8",
    )

    planted_node = next(n for n in nodes if n["entity"] == "KORYO ELECTRONICS")
    expected = {
        "total_records": len(records),
        "dropped_count": len(dropped),
        "kept_count": len(kept),
        "planted_ids": planted_ids,
        "planted_category": category_of[planted_ids[0]],
        "planted_need_entity": "KORYO ELECTRONICS",
        "planted_need_supports": planted_node["n_supports"],
        "evaluation_date": iso(EVAL_DATE),
        "pending_count": sum(1 for r in kept if r["legal_status"] == "Pending"),
    }
    (OUT / "expected.json").write_text(
        json.dumps(expected, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    write_support_files()
    print(f"wrote {len(records)} records ({len(dropped)} out of force), "
          f"{len(categories)} categories, {len(nodes)} need nodes -> {OUT}")
    assert all(category_of[p] == expected["planted_category"] for p in planted_ids), \
        "planted cluster split across categories"
    assert expected["planted_need_supports"] == 3


if __name__ == "__main__":
    main()
