import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from patentprune.corpus import EmptyPortfolio
from patentprune.params import PARAM_NAMES, FeatureVector
from patentprune.strata import (
    UnknownProfile,
    UnscaledInput,
    WeightingProfile,
    apply_profile,
    categorize,
    category_score,
    load_profiles,
    maturity_band,
    resolve_profile,
    scale_category_tam,
)

from conftest import make_portfolio, make_record


def make_vector(pid: str, **named_values) -> FeatureVector:
    values = [0.0] * len(PARAM_NAMES)
    for name, v in named_values.items():
        values[PARAM_NAMES.index(name)] = v
    return FeatureVector(
        patent_id=pid, values=tuple(values), missing=tuple([False] * len(PARAM_NAMES))
    )


class TestCategorize:
    def test_single_patent_single_category(self):
        p = make_portfolio(make_record("A"))
        vecs = {"A": make_vector("A", L_rem=12.0, S_trend=0.1)}
        cats = categorize(p, vecs)
        assert len(cats) == 1
        assert cats[0].members == ("A",)
        assert cats[0].maturity_band == "Y10to15"

    def test_band_boundaries_gt15_vs_lt5(self):
        p = make_portfolio(make_record("A"), make_record("B"))
        vecs = {
            "A": make_vector("A", L_rem=16.0, S_trend=0.1),
            "B": make_vector("B", L_rem=3.0, S_trend=0.1),
        }
        cats = categorize(p, vecs)
        assert {c.maturity_band for c in cats} == {"GT15", "LT5"}
        assert len(cats) == 2

    def test_partition_cover_and_disjoint(self):
        rng = random.Random(42)
        records = [make_record(f"P{i}", cpc_codes=(rng.choice(["G06F 1/00", "G11C 5/00", "H01L 2/00"]),))
                   for i in range(40)]
        p = make_portfolio(*records)
        vecs = {
            r.patent_id: make_vector(
                r.patent_id, L_rem=rng.uniform(0, 20), S_trend=rng.uniform(-0.2, 0.5)
            )
            for r in records
        }
        cats = categorize(p, vecs)
        seen = [pid for c in cats for pid in c.members]
        assert sorted(seen) == sorted(r.patent_id for r in records)
        assert len(seen) == len(set(seen))

    def test_deterministic_order_and_idempotence(self):
        rng = random.Random(1)
        records = [make_record(f"P{i}") for i in range(15)]
        p = make_portfolio(*records)
        vecs = {
            r.patent_id: make_vector(
                r.patent_id, L_rem=rng.uniform(0, 20), S_trend=rng.uniform(-0.2, 0.5)
            )
            for r in records
        }
        once = categorize(p, vecs)
        twice = categorize(p, vecs)
        assert once == twice
        keys = [c.key for c in once]
        assert keys == sorted(keys, key=lambda k: k.split("|")[0])

    def test_empty_portfolio(self):
        with pytest.raises(EmptyPortfolio):
            categorize(make_portfolio(), {})

    def test_maturity_bands(self):
        assert maturity_band(16.0) == "GT15"
        assert maturity_band(15.0) == "Y10to15"
        assert maturity_band(10.0) == "Y10to15"
        assert maturity_band(9.99) == "Y5to10"
        assert maturity_band(4.99) == "LT5"


class TestCategoryScore:
    def _cats(self):
        p = make_portfolio(make_record("A"), make_record("B", cpc_codes=("G11C 5/00",)))
        vecs = {
            "A": make_vector("A", L_rem=8.0, S_trend=0.2, V_TAM=1e9, CAGR_tech=0.1),
            "B": make_vector("B", L_rem=12.0, S_trend=0.4, V_TAM=3e9, CAGR_tech=0.3),
        }
        return categorize(p, vecs)

    def test_weight_on_l_rem_only(self):
        cats = self._cats()
        prof = WeightingProfile(name="t", category_weights=(1.0, 0.0, 0.0, 0.0))
        for c in cats:
            assert category_score(c, prof) == c.mean_l_rem

    def test_single_category_convex_combination(self):
        p = make_portfolio(make_record("A"))
        vecs = {"A": make_vector("A", L_rem=8.0, S_trend=0.2, V_TAM=1e9, CAGR_tech=0.1)}
        (cat,) = categorize(p, vecs)
        prof = WeightingProfile(name="t", category_weights=(0.25, 0.25, 0.25, 0.25))
        # degenerate min-max span scales the market term to 0
        assert math.isclose(category_score(cat, prof), 0.25 * (8.0 + 0.2 + 0.0 + 0.1))

    def test_scaling_required(self):
        cats = self._cats()
        from dataclasses import replace

        unscaled = replace(cats[0], v_tam_scaled=None)
        with pytest.raises(UnscaledInput):
            category_score(unscaled, WeightingProfile(name="t"))

    def test_linear_in_weights(self):
        (cat, *_) = self._cats()
        p1 = WeightingProfile(name="a", category_weights=(1.0, 0.0, 0.0, 0.0))
        p2 = WeightingProfile(name="b", category_weights=(0.0, 1.0, 0.0, 0.0))
        mixed = WeightingProfile(name="m", category_weights=(0.5, 0.5, 0.0, 0.0))
        assert math.isclose(
            category_score(cat, mixed),
            0.5 * category_score(cat, p1) + 0.5 * category_score(cat, p2),
        )

    def test_min_max_scaling_across_categories(self):
        cats = self._cats()
        scaled = {c.cpc_prefix: c.v_tam_scaled for c in cats}
        assert set(scaled.values()) == {0.0, 1.0}


class TestProfiles:
    def test_aggressive_growth_boosts_exactly_three(self):
        prof = resolve_profile("AggressiveGrowth")
        boosted = {k for k, v in prof.feature_multipliers.items() if v != 1.0}
        assert boosted == {"V_cite", "CAGR_tech", "S_trend"}

    def test_quick_monetization_includes_supply_chain(self):
        prof = resolve_profile("QuickMonetization")
        assert prof.feature_multipliers["S_sc"] == 2.0

    def test_defensive_moat_boosts(self):
        prof = resolve_profile("DefensiveMoat")
        assert set(prof.feature_multipliers) == {"S_claim", "N_bcite", "S_litigation"}

    def test_custom_empty_map_is_identity(self):
        prof = resolve_profile({"name": "Custom"})
        assert all(prof.multiplier(n) == 1.0 for n in PARAM_NAMES)

    def test_unknown_profile(self):
        with pytest.raises(UnknownProfile):
            resolve_profile("Nonexistent")

    def test_load_profiles_from_toml(self, tmp_path):
        f = tmp_path / "profiles.toml"
        f.write_text(
            "[profiles.HouseView]\n"
            "category_weights = [0.4, 0.3, 0.2, 0.1]\n"
            "[profiles.HouseView.feature_multipliers]\n"
            'N_fam = 3.0\n',
            encoding="utf-8",
        )
        table = load_profiles(f)
        assert "AggressiveGrowth" in table
        assert table["HouseView"].multiplier("N_fam") == 3.0

    def test_weights_must_normalize(self):
        with pytest.raises(ValueError):
            WeightingProfile(name="bad", category_weights=(1.0, 1.0, 0.0, 0.0))


class TestApplyProfile:
    def test_all_ones_identity(self):
        v = make_vector("A", L_rem=5.0, V_cite=2.0)
        prof = WeightingProfile(name="id")
        assert apply_profile(v, prof) == v

    def test_doubling_one_slot_touches_only_it(self):
        v = make_vector("A", L_rem=5.0, V_cite=2.0)
        prof = WeightingProfile(name="x", feature_multipliers={"V_cite": 2.0})
        out = apply_profile(v, prof)
        assert out.get("V_cite") == 4.0
        for name in PARAM_NAMES:
            if name != "V_cite":
                assert out.get(name) == v.get(name)
        assert out.missing == v.missing

    @given(
        st.lists(st.floats(min_value=-100, max_value=100), min_size=2, max_size=8),
        st.floats(min_value=0.01, max_value=50),
    )
    def test_single_feature_argmax_invariance(self, feature_values, multiplier):
        vectors = [make_vector(f"P{i}", V_cite=x) for i, x in enumerate(feature_values)]
        prof = WeightingProfile(name="x", feature_multipliers={"V_cite": multiplier})
        before = max(range(len(vectors)), key=lambda i: (vectors[i].get("V_cite"), -i))
        scaled = [apply_profile(v, prof) for v in vectors]
        after = max(range(len(scaled)), key=lambda i: (scaled[i].get("V_cite"), -i))
        assert before == after


def test_scale_empty_category_list():
    assert scale_category_tam([]) == []
