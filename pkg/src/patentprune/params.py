"""The 32 valuation parameters and feature-vector assembly.

Each formula is a pure function; `build_feature_vector` wires them to a
PatentRecord plus market context and produces the fixed-order 33-slot
vector (32 parameters + the need-seed slot, filled later by the matching
stage).  Slots without data are imputed 0 with their missing-mask bit set;
the ranker sees the mask bits as companion indicator features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Any, Mapping, Sequence

from . import claims as claims_mod
from .config import MarketEntry, ParamConfig
from .corpus import ClaimText, PatentRecord

DAYS_PER_YEAR = 365.25
DAYS_PER_MONTH = DAYS_PER_YEAR / 12.0  # 30.4375

PARAM_NAMES: tuple[str, ...] = (
    "L_rem", "S_claim", "N_fam", "V_cite", "N_reassign", "S_litigation",
    "S_trend", "T_pend", "N_bcite", "N_ecite", "S_inv", "S_rej", "S_CIP",
    "TRL", "MRL", "V_TAM", "V_rev", "CAGR_tech", "S_juris", "S_sc",
    "P_cost", "T_market", "N_app", "N_comp", "S_mfg", "S_demand",
    "S_partner", "S_invest", "N_launch", "S_MA", "S_owner", "S_forecast",
    "S_NeedSeed",
)
NEED_SEED_SLOT = PARAM_NAMES.index("S_NeedSeed")
_PARAM_INDEX = {name: i for i, name in enumerate(PARAM_NAMES)}

# direct_metrics keys read verbatim into their slots
_DIRECT_READS = (
    "TRL", "MRL", "V_TAM", "V_rev", "P_cost", "T_market", "N_app",
    "N_comp", "S_mfg", "S_invest", "S_owner", "S_forecast", "N_launch",
)


class ParamError(ValueError):
    pass


class ExpiredAtEvaluation(ParamError):
    pass


class NoClaims(ParamError):
    pass


class NegativeCaseValue(ParamError):
    pass


class NonPositiveStart(ParamError):
    pass


class NonPositiveHorizon(ParamError):
    pass


class MissingGrantDate(ParamError):
    pass


class CollabBelowOne(ParamError):
    pass


class UnknownCountry(ParamError):
    pass


class WeightsNotNormalized(ParamError):
    pass


class ZeroNoiseFloor(ParamError):
    pass


class UnknownPartnershipType(ParamError):
    pass


class RangeViolation(ParamError):
    pass


def remaining_life(record: PatentRecord, eval_date: date) -> float:
    """Years of statutory term left at the evaluation date."""
    years = (record.expiry_date - eval_date).days / DAYS_PER_YEAR
    if years < 0:
        raise ExpiredAtEvaluation(
            f"{record.patent_id} expired {record.expiry_date}, evaluated {eval_date}"
        )
    return years


def claim_type_score(claim_texts: Sequence[ClaimText], cfg: ParamConfig) -> float:
    """Best claim-kind score over independent claims (product > process > composition)."""
    scores = {
        "Product": cfg.claim_type.product,
        "Process": cfg.claim_type.process,
        "Composition": cfg.claim_type.composition,
        "Unknown": cfg.claim_type.unknown,
    }
    independents = [
        parsed
        for c in claim_texts
        if c.text.strip()
        for parsed in [claims_mod.parse_claim(c.text, c.number)]
        if parsed.is_independent
    ]
    if not independents:
        raise NoClaims("no independent claims parsed")
    return max(scores[c.claim_kind] for c in independents)


def citation_velocity(record: PatentRecord, eval_date: date, cfg: ParamConfig) -> float:
    """Forward citations inside the recent window per year since publication.

    The denominator is floored so freshly granted patents do not blow up.
    """
    if record.grant_date is None:
        raise MissingGrantDate(f"{record.patent_id} has no grant date")
    window_start = eval_date - timedelta(days=cfg.citation.window_years * DAYS_PER_YEAR)
    recent = sum(1 for _, d in record.forward_citations if window_start <= d <= eval_date)
    years = (eval_date - record.grant_date).days / DAYS_PER_YEAR
    return recent / max(years, cfg.citation.velocity_floor_years)


def litigation_score(events: Sequence[tuple[str, float]], cfg: ParamConfig) -> float:
    weights = {
        "PlaintiffWin": cfg.litigation.plaintiff_win,
        "Settlement": cfg.litigation.settlement,
        "DefendantWin": cfg.litigation.defendant_win,
    }
    total = 0.0
    for outcome, value in events:
        if value < 0:
            raise NegativeCaseValue(f"case value {value} < 0")
        total += weights[outcome] * value
    return total


def cagr(start: float, end: float, n_years: float) -> float:
    """Compound annual growth rate (end/start)^(1/n) - 1."""
    if start <= 0:
        raise NonPositiveStart(f"start must be > 0, got {start}")
    if n_years <= 0:
        raise NonPositiveHorizon(f"horizon must be > 0, got {n_years}")
    if end < 0:
        raise ParamError(f"end must be >= 0, got {end}")
    return (end / start) ** (1.0 / n_years) - 1.0


def pendency_months(record: PatentRecord) -> float:
    if record.grant_date is None:
        raise MissingGrantDate(f"{record.patent_id} has no grant date")
    return (record.grant_date - record.filing_date).days / DAYS_PER_MONTH


def inventor_score(
    h_index: float, collab: float, lit_success: float, cfg: ParamConfig
) -> float:
    if collab < 1:
        raise CollabBelowOne(f"collaboration count must be >= 1, got {collab}")
    if not 0.0 <= lit_success <= 1.0:
        raise ParamError(f"litigation success rate must be in [0, 1], got {lit_success}")
    c = cfg.inventor
    return c.alpha * h_index + c.beta * math.log(collab) + c.gamma * lit_success


def rejection_score(n102: int, n103: int, n112: int, cfg: ParamConfig) -> float:
    if min(n102, n103, n112) < 0:
        raise ParamError("rejection counts must be >= 0")
    w = cfg.rejection
    return w.w_102 * n102 + w.w_103 * n103 + w.w_112 * n112


def jurisdiction_score(
    jurisdictions: Sequence[tuple[str, str]],
    gni_table: Mapping[str, float],
    cfg: ParamConfig,
) -> float:
    """GNI-weighted footprint score benchmarked against the USA."""
    gni_usa = gni_table["USA"]
    factors = {"granted": cfg.jurisdiction.granted, "pending": cfg.jurisdiction.pending}
    total = 0.0
    for country, status in jurisdictions:
        if country not in gni_table:
            raise UnknownCountry(f"no GNI entry for {country}")
        total += (gni_table[country] / gni_usa) * factors[status]
    return total


def supply_chain_score(
    r_mat: float, r_mfg: float, r_work: float, cfg: ParamConfig
) -> float:
    for label, r in (("materials", r_mat), ("manufacturing", r_mfg), ("workforce", r_work)):
        if not 0.0 <= r <= 1.0:
            raise RangeViolation(f"{label} readiness must be in [0, 1], got {r}")
    w = cfg.supply_chain
    total = w.w_mat + w.w_mfg + w.w_work
    if abs(total - 1.0) > 1e-9:
        raise WeightsNotNormalized(f"supply-chain weights sum to {total}")
    return w.w_mat * r_mat + w.w_mfg * r_mfg + w.w_work * r_work


def demand_snr(p_signal: float, p_noise: float, floor_db: float = -60.0) -> float:
    """Demand signal-to-noise ratio in dB, capped below at the floor."""
    if p_noise <= 0:
        raise ZeroNoiseFloor(f"noise power must be > 0, got {p_noise}")
    if p_signal < 0:
        raise ParamError(f"signal power must be >= 0, got {p_signal}")
    if p_signal == 0:
        return floor_db
    return max(10.0 * math.log10(p_signal / p_noise), floor_db)


def partnership_score(counts_by_type: Mapping[str, float], cfg: ParamConfig) -> float:
    weights = {
        "JointVenture": cfg.partnership.joint_venture,
        "Licensing": cfg.partnership.licensing,
        "MoU": cfg.partnership.mou,
    }
    total = 0.0
    for kind, count in counts_by_type.items():
        if kind not in weights:
            raise UnknownPartnershipType(f"unknown partnership type {kind!r}")
        total += weights[kind] * count
    return total


def ma_score(total_value: float, n_deals: float, cfg: ParamConfig) -> float:
    """Sector deal activity: log1p keeps quiet sectors (value 0) defined."""
    if total_value < 0:
        raise ParamError(f"deal value must be >= 0, got {total_value}")
    return cfg.ma.alpha * math.log1p(total_value) + cfg.ma.beta * n_deals


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-order 33-slot valuation vector for one patent."""

    patent_id: str
    values: tuple[float, ...]
    missing: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(PARAM_NAMES) or len(self.missing) != len(PARAM_NAMES):
            raise ParamError("feature vector must have exactly 33 slots")

    def get(self, name: str) -> float:
        return self.values[_PARAM_INDEX[name]]

    def is_missing(self, name: str) -> bool:
        return self.missing[_PARAM_INDEX[name]]

    def with_need_seed(self, score: float) -> "FeatureVector":
        values = list(self.values)
        missing = list(self.missing)
        values[NEED_SEED_SLOT] = score
        missing[NEED_SEED_SLOT] = False
        return FeatureVector(self.patent_id, tuple(values), tuple(missing))

    def model_row(self) -> list[float]:
        """Values followed by 0/1 missing indicators (66 model features)."""
        return list(self.values) + [1.0 if m else 0.0 for m in self.missing]

    def to_dict(self) -> dict[str, Any]:
        return {
            "patent_id": self.patent_id,
            "values": {n: v for n, v in zip(PARAM_NAMES, self.values)},
            "missing": [n for n, m in zip(PARAM_NAMES, self.missing) if m],
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "FeatureVector":
        missing_names = set(data["missing"])
        return FeatureVector(
            patent_id=data["patent_id"],
            values=tuple(float(data["values"][n]) for n in PARAM_NAMES),
            missing=tuple(n in missing_names for n in PARAM_NAMES),
        )


MODEL_FEATURE_NAMES: tuple[str, ...] = PARAM_NAMES + tuple(
    f"{n}_missing" for n in PARAM_NAMES
)


@dataclass(frozen=True)
class ValuationContext:
    """Everything beyond the record needed to evaluate the parameters."""

    eval_date: date
    gni_table: Mapping[str, float]
    market: Mapping[str, MarketEntry] = field(default_factory=dict)
    cfg: ParamConfig = field(default_factory=ParamConfig)
    cpc_prefix_depth: int = 4

    def market_for(self, record: PatentRecord) -> MarketEntry | None:
        prefix = record.primary_cpc_prefix(self.cpc_prefix_depth)
        if prefix is None:
            return None
        return self.market.get(prefix)


def extract_direct_parameters(record: PatentRecord) -> dict[str, tuple[float, bool]]:
    """Copy direct counts and analyst-supplied reads into their slots.

    Returns name -> (value, missing).  Absent metrics are imputed 0 with the
    missing flag set; out-of-range ordinal reads raise RangeViolation.
    """
    dm = record.direct_metrics
    out: dict[str, tuple[float, bool]] = {}

    count_fields = {
        "N_fam": record.family_members,
        "N_reassign": record.reassignments,
        "N_bcite": record.backward_citations,
        "N_ecite": record.examiner_citations,
    }
    for name, seq in count_fields.items():
        out[name] = (float(len(seq)), len(seq) == 0)

    for name in _DIRECT_READS:
        if name in dm:
            value = float(dm[name])
            if name == "TRL" and not 1 <= value <= 9:
                raise RangeViolation(f"TRL must be in [1, 9], got {value}")
            if name == "MRL" and not 1 <= value <= 10:
                raise RangeViolation(f"MRL must be in [1, 10], got {value}")
            out[name] = (value, False)
        else:
            out[name] = (0.0, True)

    if "cip_flag" in record.fields_missing:
        out["S_CIP"] = (0.0, True)
    else:
        out["S_CIP"] = (1.0 if record.cip_flag else 0.0, False)
    return out


def _metric(dm: Mapping[str, float], entry: MarketEntry | None, record_key: str, entry_key: str):
    if record_key in dm:
        return dm[record_key]
    if entry is not None:
        return getattr(entry, entry_key)
    return None


def build_feature_vector(record: PatentRecord, ctx: ValuationContext) -> FeatureVector:
    """Evaluate all 32 parameters for one record; need-seed slot stays masked.

    Component errors are re-raised with the parameter name attached.
    """
    slots: dict[str, tuple[float, bool]] = {}

    def put(name: str, value: float) -> None:
        slots[name] = (float(value), False)

    def absent(name: str) -> None:
        slots[name] = (0.0, True)

    def run(name: str, fn, *args, **kwargs):
        try:
            put(name, fn(*args, **kwargs))
        except ParamError as exc:
            raise type(exc)(f"{name}: {exc}") from exc

    dm = record.direct_metrics
    entry = ctx.market_for(record)
    cfg = ctx.cfg

    for name, (value, missing) in extract_direct_parameters(record).items():
        slots[name] = (value, missing)

    run("L_rem", remaining_life, record, ctx.eval_date)
    run("S_claim", claim_type_score, record.claims, cfg)

    if record.grant_date is None:
        absent("V_cite")
        absent("T_pend")
    else:
        if record.forward_citations:
            run("V_cite", citation_velocity, record, ctx.eval_date, cfg)
        else:
            absent("V_cite")
        run("T_pend", pendency_months, record)

    if record.litigation_events:
        run("S_litigation", litigation_score, record.litigation_events, cfg)
    else:
        absent("S_litigation")

    f_start = _metric(dm, entry, "filings_start", "filings_start")
    f_end = _metric(dm, entry, "filings_end", "filings_end")
    horizon = _metric(dm, entry, "horizon_years", "horizon_years")
    if f_start is not None and f_end is not None and horizon is not None:
        run("S_trend", cagr, f_start, f_end, horizon)
    else:
        absent("S_trend")

    inv_keys = ("inv_h_index", "inv_collab", "inv_lit_success")
    if all(k in dm for k in inv_keys):
        run("S_inv", inventor_score, dm["inv_h_index"], dm["inv_collab"], dm["inv_lit_success"], cfg)
    else:
        absent("S_inv")

    rj = record.rejection_events
    if "rejection_events" in record.fields_missing:
        absent("S_rej")
    else:
        run("S_rej", rejection_score, rj.n102, rj.n103, rj.n112, cfg)

    m_start = _metric(dm, entry, "market_start", "market_start")
    m_end = _metric(dm, entry, "market_end", "market_end")
    if m_start is not None and m_end is not None and horizon is not None:
        run("CAGR_tech", cagr, m_start, m_end, horizon)
    else:
        absent("CAGR_tech")

    if record.jurisdictions:
        run("S_juris", jurisdiction_score, record.jurisdictions, ctx.gni_table, cfg)
    else:
        absent("S_juris")

    sc_keys = ("r_mat", "r_mfg", "r_work")
    if all(k in dm for k in sc_keys):
        run("S_sc", supply_chain_score, dm["r_mat"], dm["r_mfg"], dm["r_work"], cfg)
    else:
        absent("S_sc")

    signal = _metric(dm, entry, "signal_power", "signal_power")
    noise = _metric(dm, entry, "noise_power", "noise_power")
    if signal is not None and noise is not None:
        run("S_demand", demand_snr, signal, noise, cfg.demand.floor_db)
    else:
        absent("S_demand")

    if entry is not None and entry.partnership_counts is not None:
        run("S_partner", partnership_score, entry.partnership_counts, cfg)
    else:
        absent("S_partner")

    deals_value = _metric(dm, entry, "deals_value_usd", "deals_value_usd")
    deals_count = _metric(dm, entry, "deals_count", "deals_count")
    if deals_value is not None and deals_count is not None:
        run("S_MA", ma_score, deals_value, deals_count, cfg)
    else:
        absent("S_MA")

    for name, entry_key in (("V_TAM", "tam_usd"), ("V_rev", "revenue_usd")):
        v = _metric(dm, entry, name, entry_key)
        if v is None:
            absent(name)
        else:
            put(name, v)

    slots["S_NeedSeed"] = (0.0, True)

    return FeatureVector(
        patent_id=record.patent_id,
        values=tuple(slots[n][0] for n in PARAM_NAMES),
        missing=tuple(slots[n][1] for n in PARAM_NAMES),
    )
