"""Hierarchical portfolio categorization and strategic weighting profiles.

Categories partition the filtered portfolio by (CPC prefix, remaining-life
band, filing-trend band).  Trend bands are portfolio-relative tertiles so
the dashboard stays meaningful for any portfolio.  The category score is a
weighted blend of per-category aggregate parameters; total-market values
are min-max scaled across categories first because the blend mixes units.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .corpus import EmptyPortfolio, Portfolio
from .params import PARAM_NAMES, FeatureVector

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MATURITY_BANDS = ("GT15", "Y10to15", "Y5to10", "LT5")
GROWTH_BANDS = ("High", "Medium", "Low")


class StrataError(ValueError):
    pass


class UnknownProfile(StrataError):
    pass


class UnscaledInput(StrataError):
    pass


@dataclass(frozen=True)
class WeightingProfile:
    """Named strategic intent: category weights plus feature multipliers."""

    name: str
    category_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    feature_multipliers: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        w = self.category_weights
        if len(w) != 4 or any(x < 0 for x in w):
            raise StrataError("category weights must be 4 nonnegative numbers")
        if abs(sum(w) - 1.0) > 1e-9:
            raise StrataError(f"category weights must sum to 1, got {sum(w)}")
        for name, m in self.feature_multipliers.items():
            if name not in PARAM_NAMES:
                raise StrataError(f"unknown feature {name!r} in profile {self.name}")
            if m < 0:
                raise StrataError(f"multiplier for {name} must be >= 0")

    def multiplier(self, feature: str) -> float:
        return self.feature_multipliers.get(feature, 1.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "category_weights": list(self.category_weights),
            "feature_multipliers": dict(self.feature_multipliers),
        }


BUILTIN_PROFILES: dict[str, WeightingProfile] = {
    "AggressiveGrowth": WeightingProfile(
        name="AggressiveGrowth",
        category_weights=(0.15, 0.35, 0.15, 0.35),
        feature_multipliers={"V_cite": 2.0, "CAGR_tech": 2.0, "S_trend": 2.0},
    ),
    "DefensiveMoat": WeightingProfile(
        name="DefensiveMoat",
        category_weights=(0.4, 0.2, 0.2, 0.2),
        feature_multipliers={"S_claim": 2.0, "N_bcite": 2.0, "S_litigation": 2.0},
    ),
    "QuickMonetization": WeightingProfile(
        name="QuickMonetization",
        category_weights=(0.1, 0.2, 0.5, 0.2),
        feature_multipliers={"TRL": 2.0, "MRL": 2.0, "S_sc": 2.0, "S_demand": 2.0},
    ),
}


def load_profiles(path: str | Path | None) -> dict[str, WeightingProfile]:
    """Built-ins plus any [profiles.<name>] entries from a TOML file."""
    profiles = dict(BUILTIN_PROFILES)
    if path is None:
        return profiles
    raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    for name, spec in (raw.get("profiles") or {}).items():
        profiles[name] = WeightingProfile(
            name=name,
            category_weights=tuple(spec.get("category_weights", (0.25, 0.25, 0.25, 0.25))),
            feature_multipliers=dict(spec.get("feature_multipliers", {})),
        )
    return profiles


def resolve_profile(
    name_or_spec: str | Mapping[str, Any],
    profiles: Mapping[str, WeightingProfile] | None = None,
) -> WeightingProfile:
    """Look up a named profile, or build a Custom one from a spec mapping."""
    table = profiles if profiles is not None else BUILTIN_PROFILES
    if isinstance(name_or_spec, str):
        if name_or_spec not in table:
            raise UnknownProfile(f"unknown profile {name_or_spec!r}")
        return table[name_or_spec]
    spec = dict(name_or_spec)
    return WeightingProfile(
        name=str(spec.get("name", "Custom")),
        category_weights=tuple(spec.get("category_weights", (0.25, 0.25, 0.25, 0.25))),
        feature_multipliers=dict(spec.get("feature_multipliers", {})),
    )


def apply_profile(vector: FeatureVector, profile: WeightingProfile) -> FeatureVector:
    """Componentwise multiply feature values; missing masks are untouched."""
    values = tuple(
        v * profile.multiplier(name) for name, v in zip(PARAM_NAMES, vector.values)
    )
    return FeatureVector(patent_id=vector.patent_id, values=values, missing=vector.missing)


@dataclass(frozen=True)
class Category:
    cpc_prefix: str
    maturity_band: str
    growth_band: str
    members: tuple[str, ...]
    mean_l_rem: float
    mean_s_trend: float
    mean_v_tam: float
    mean_cagr_tech: float
    v_tam_scaled: float | None = None

    @property
    def key(self) -> str:
        return f"{self.cpc_prefix}|{self.maturity_band}|{self.growth_band}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "cpc_prefix": self.cpc_prefix,
            "maturity_band": self.maturity_band,
            "growth_band": self.growth_band,
            "members": list(self.members),
            "mean_l_rem": self.mean_l_rem,
            "mean_s_trend": self.mean_s_trend,
            "mean_v_tam": self.mean_v_tam,
            "mean_cagr_tech": self.mean_cagr_tech,
            "v_tam_scaled": self.v_tam_scaled,
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "Category":
        return Category(
            cpc_prefix=data["cpc_prefix"],
            maturity_band=data["maturity_band"],
            growth_band=data["growth_band"],
            members=tuple(data["members"]),
            mean_l_rem=data["mean_l_rem"],
            mean_s_trend=data["mean_s_trend"],
            mean_v_tam=data["mean_v_tam"],
            mean_cagr_tech=data["mean_cagr_tech"],
            v_tam_scaled=data.get("v_tam_scaled"),
        )


def maturity_band(l_rem: float) -> str:
    if l_rem > 15:
        return "GT15"
    if l_rem >= 10:
        return "Y10to15"
    if l_rem >= 5:
        return "Y5to10"
    return "LT5"


def growth_tertiles(trend_values: Sequence[float]) -> tuple[float, float]:
    """Thresholds (t_low, t_high); band = High when trend >= t_high."""
    ordered = sorted(trend_values)
    n = len(ordered)
    t_low = ordered[min(n // 3, n - 1)]
    t_high = ordered[min((2 * n) // 3, n - 1)]
    return t_low, t_high


def growth_band(trend: float, tertiles: tuple[float, float]) -> str:
    t_low, t_high = tertiles
    if trend >= t_high:
        return "High"
    if trend >= t_low:
        return "Medium"
    return "Low"


def categorize(
    portfolio: Portfolio,
    vectors: Mapping[str, FeatureVector],
    cpc_prefix_depth: int = 4,
) -> list[Category]:
    """Partition the portfolio; every record lands in exactly one category.

    The output is ordered by key (CPC prefix, then maturity and growth band
    in their declared orders) and carries the cross-category min-max scaled
    market-size aggregate needed by the category score.
    """
    if not portfolio.records:
        raise EmptyPortfolio("cannot categorize an empty portfolio")
    tertiles = growth_tertiles(
        [vectors[r.patent_id].get("S_trend") for r in portfolio.records]
    )
    buckets: dict[tuple[str, str, str], list[str]] = {}
    for record in portfolio.records:
        vec = vectors[record.patent_id]
        key = (
            record.primary_cpc_prefix(cpc_prefix_depth) or "NONE",
            maturity_band(vec.get("L_rem")),
            growth_band(vec.get("S_trend"), tertiles),
        )
        buckets.setdefault(key, []).append(record.patent_id)

    def mean(ids: Iterable[str], name: str) -> float:
        ids = list(ids)
        return sum(vectors[i].get(name) for i in ids) / len(ids)

    categories = [
        Category(
            cpc_prefix=cpc,
            maturity_band=mat,
            growth_band=gro,
            members=tuple(ids),
            mean_l_rem=mean(ids, "L_rem"),
            mean_s_trend=mean(ids, "S_trend"),
            mean_v_tam=mean(ids, "V_TAM"),
            mean_cagr_tech=mean(ids, "CAGR_tech"),
        )
        for (cpc, mat, gro), ids in buckets.items()
    ]
    categories.sort(
        key=lambda c: (
            c.cpc_prefix,
            MATURITY_BANDS.index(c.maturity_band),
            GROWTH_BANDS.index(c.growth_band),
        )
    )
    return scale_category_tam(categories)


def scale_category_tam(categories: Sequence[Category]) -> list[Category]:
    """Min-max scale mean market size across categories into [0, 1]."""
    if not categories:
        return []
    lo = min(c.mean_v_tam for c in categories)
    hi = max(c.mean_v_tam for c in categories)
    span = hi - lo
    return [
        replace(c, v_tam_scaled=((c.mean_v_tam - lo) / span) if span > 0 else 0.0)
        for c in categories
    ]


def category_score(category: Category, profile: WeightingProfile) -> float:
    """Weighted blend of the category's aggregates under the profile."""
    if category.v_tam_scaled is None:
        raise UnscaledInput(f"category {category.key} lacks scaled market size")
    w1, w2, w3, w4 = profile.category_weights
    return (
        w1 * category.mean_l_rem
        + w2 * category.mean_s_trend
        + w3 * category.v_tam_scaled
        + w4 * category.mean_cagr_tech
    )
