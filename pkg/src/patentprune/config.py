"""Configuration dataclasses and loaders for the scoring engine.

Every tunable weight lives here with its default, and any of them can be
overridden from a TOML file so a run never depends on code edits.  Defaults
marked as anchored are fixed constants of the scoring scheme (rejection
weights 1.0/0.6/0.2, claim-type 1.0/0.7, pending factor 0.7, source
authority 1.0/0.4); the rest are engine choices surfaced in reports.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Raised when a config file violates its schema or an invariant."""


@dataclass(frozen=True)
class RejectionWeights:
    w_102: float = 1.0
    w_103: float = 0.6
    w_112: float = 0.2


@dataclass(frozen=True)
class ClaimTypeScores:
    product: float = 1.0
    process: float = 0.7
    composition: float = 0.5
    # no transitional/head-noun evidence at all; scored at the composition floor
    unknown: float = 0.5


@dataclass(frozen=True)
class LitigationWeights:
    plaintiff_win: float = 1.0
    settlement: float = 0.5
    defendant_win: float = 0.0


@dataclass(frozen=True)
class InventorCoefficients:
    alpha: float = 0.5
    beta: float = 0.3
    gamma: float = 0.2


@dataclass(frozen=True)
class SupplyChainWeights:
    w_mat: float = 0.4
    w_mfg: float = 0.4
    w_work: float = 0.2

    def __post_init__(self) -> None:
        total = self.w_mat + self.w_mfg + self.w_work
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"supply-chain weights must sum to 1, got {total}")


@dataclass(frozen=True)
class MaCoefficients:
    alpha: float = 1.0
    beta: float = 0.1


@dataclass(frozen=True)
class PartnershipWeights:
    joint_venture: float = 1.0
    licensing: float = 0.7
    mou: float = 0.3


@dataclass(frozen=True)
class JurisdictionFactors:
    granted: float = 1.0
    pending: float = 0.7

    def __post_init__(self) -> None:
        for name in ("granted", "pending"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"status factor {name} must be in (0, 1], got {v}")


@dataclass(frozen=True)
class CitationConfig:
    window_years: float = 3.0
    velocity_floor_years: float = 0.25


@dataclass(frozen=True)
class DemandConfig:
    floor_db: float = -60.0


@dataclass(frozen=True)
class ParamConfig:
    """All weights feeding the 32 valuation parameters."""

    rejection: RejectionWeights = field(default_factory=RejectionWeights)
    claim_type: ClaimTypeScores = field(default_factory=ClaimTypeScores)
    litigation: LitigationWeights = field(default_factory=LitigationWeights)
    inventor: InventorCoefficients = field(default_factory=InventorCoefficients)
    supply_chain: SupplyChainWeights = field(default_factory=SupplyChainWeights)
    ma: MaCoefficients = field(default_factory=MaCoefficients)
    partnership: PartnershipWeights = field(default_factory=PartnershipWeights)
    jurisdiction: JurisdictionFactors = field(default_factory=JurisdictionFactors)
    citation: CitationConfig = field(default_factory=CitationConfig)
    demand: DemandConfig = field(default_factory=DemandConfig)


@dataclass(frozen=True)
class NeedGraphConfig:
    merge_jaccard: float = 0.6
    window_days: int = 365
    baseline_rate: float = 1.0
    authority: Mapping[str, float] = field(
        default_factory=lambda: {
            "RegulatoryFiling": 1.0,
            "EarningsCall": 0.9,
            "MarketReport": 0.7,
            "News": 0.5,
            "Blog": 0.4,
        }
    )


@dataclass(frozen=True)
class MatchConfig:
    relevance_weight: float = 0.7  # alpha
    authority_weight: float = 0.3  # beta
    candidate_threshold: float = 0.5
    needs_per_seed: int = 10

    def __post_init__(self) -> None:
        total = self.relevance_weight + self.authority_weight
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"match weights must sum to 1, got {total}")


@dataclass(frozen=True)
class TrainConfig:
    n_trees: int = 50
    learning_rate: float = 0.1
    max_leaves: int = 15
    min_samples_leaf: int = 5
    ndcg_k: int = 10
    sigma: float = 1.0
    ridge: float = 1e-2
    seed: int = 7


@dataclass(frozen=True)
class GateConfig:
    ranking_top_n: int = 25
    ranking_top_n_max: int = 50


@dataclass(frozen=True)
class RiskThresholds:
    narrow_breadth_below: float = 0.3
    design_around_above: float = 0.7
    short_life_below_years: float = 5.0
    crowded_competitors_above: int = 20


@dataclass(frozen=True)
class StrataConfig:
    cpc_prefix_depth: int = 4


@dataclass(frozen=True)
class EngineConfig:
    """Aggregate engine configuration, loadable from a single TOML file."""

    params: ParamConfig = field(default_factory=ParamConfig)
    need_graph: NeedGraphConfig = field(default_factory=NeedGraphConfig)
    match: MatchConfig = field(default_factory=MatchConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    gates: GateConfig = field(default_factory=GateConfig)
    risk: RiskThresholds = field(default_factory=RiskThresholds)
    strata: StrataConfig = field(default_factory=StrataConfig)


_SECTION_TYPES = {
    "rejection": RejectionWeights,
    "claim_type": ClaimTypeScores,
    "litigation": LitigationWeights,
    "inventor": InventorCoefficients,
    "supply_chain": SupplyChainWeights,
    "ma": MaCoefficients,
    "partnership": PartnershipWeights,
    "jurisdiction": JurisdictionFactors,
    "citation": CitationConfig,
    "demand": DemandConfig,
}
_TOP_SECTIONS = {
    "need_graph": NeedGraphConfig,
    "match": MatchConfig,
    "train": TrainConfig,
    "gates": GateConfig,
    "risk": RiskThresholds,
    "strata": StrataConfig,
}


def _build(cls: type, data: Mapping[str, Any]) -> Any:
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys for {cls.__name__}: {sorted(unknown)}")
    return cls(**data)


def load_engine_config(path: str | Path | None = None) -> EngineConfig:
    """Load EngineConfig from a TOML file; missing sections keep defaults."""
    if path is None:
        return EngineConfig()
    raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    param_kwargs: dict[str, Any] = {}
    for key, cls in _SECTION_TYPES.items():
        if key in raw:
            param_kwargs[key] = _build(cls, raw.pop(key))
    top_kwargs: dict[str, Any] = {}
    for key, cls in _TOP_SECTIONS.items():
        if key in raw:
            top_kwargs[key] = _build(cls, raw.pop(key))
    if raw:
        raise ConfigError(f"unknown config sections: {sorted(raw)}")
    return EngineConfig(params=ParamConfig(**param_kwargs), **top_kwargs)


def load_gni_table(path: str | Path) -> dict[str, float]:
    """Load `gni.csv` (columns iso3,gni_usd); the USA row is mandatory."""
    table: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"iso3", "gni_usd"}:
            raise ConfigError(f"gni table {path} must have columns iso3,gni_usd")
        for row in reader:
            table[row["iso3"].strip().upper()] = float(row["gni_usd"])
    if "USA" not in table:
        raise ConfigError(f"gni table {path} is missing the USA benchmark row")
    if table["USA"] <= 0:
        raise ConfigError("GNI of USA must be positive")
    return table


@dataclass(frozen=True)
class MarketEntry:
    """Market context for one CPC prefix (all currency figures in USD)."""

    tam_usd: float | None = None
    revenue_usd: float | None = None
    market_start: float | None = None
    market_end: float | None = None
    horizon_years: float | None = None
    filings_start: float | None = None
    filings_end: float | None = None
    signal_power: float | None = None
    noise_power: float | None = None
    deals_value_usd: float | None = None
    deals_count: int | None = None
    partnership_counts: Mapping[str, int] | None = None


def load_market_data(path: str | Path) -> dict[str, MarketEntry]:
    """Load `market.json`: a map of CPC prefix -> market context."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ConfigError(f"market data {path} must be a JSON object")
    out: dict[str, MarketEntry] = {}
    for prefix, entry in raw.items():
        out[prefix] = _build(MarketEntry, entry)
    return out


def file_digest(path: str | Path) -> str:
    """Hex sha256 of a file, used to freeze config provenance into a run."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def with_overrides(cfg: EngineConfig, **kwargs: Any) -> EngineConfig:
    return replace(cfg, **kwargs)
