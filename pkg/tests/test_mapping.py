"""Feature-component mapping suggestion, confirmation and evaluation tests."""

from __future__ import annotations

import random

import pytest

from patentforge.claims import ClaimFeature, enrich_feature_text
from patentforge.drawings import ComponentPair
from patentforge.errors import EmptyGold, UnknownComponent, UnknownFeature
from patentforge.mapping import (
    confirm_mapping,
    DEFAULT_THRESHOLD,
    DEFAULT_TOP_K,
    load_gold,
    MappingEntry,
    MappingSet,
    parse_component_key,
    parse_feature_key,
    precision_at_k,
    suggest_mappings,
)


def make_feature(claim: int, index: int, text: str) -> ClaimFeature:
    return ClaimFeature(
        claim_number=claim,
        index=index,
        text=text,
        enriched_text=enrich_feature_text(claim, index, text),
    )


FEATURES = [
    make_feature(1, 0, "storing records in a memory"),
    make_feature(1, 1, "transmitting packets over a network interface"),
]

COMPONENTS = [
    ComponentPair(name="processor", number="102", figure=1),
    ComponentPair(name="memory", number="104", figure=1),
    ComponentPair(name="network interface", number="106", figure=1),
]


def test_defaults_match_config():
    assert DEFAULT_THRESHOLD == 0.1
    assert DEFAULT_TOP_K == 5


def test_suggest_keeps_only_qualifying_components():
    mappings = suggest_mappings(FEATURES, COMPONENTS)
    first = mappings.entries_for((1, 0))
    assert [e.component_ref for e in first] == [(1, "104")]
    assert first[0].origin == "suggested"
    assert first[0].score.combined >= DEFAULT_THRESHOLD


def test_suggest_orders_by_combined_score():
    features = [make_feature(1, 0, "a memory coupled to a network interface")]
    mappings = suggest_mappings(features, COMPONENTS)
    entries = mappings.entries_for((1, 0))
    assert len(entries) == 2
    scores = [e.score.combined for e in entries]
    assert scores == sorted(scores, reverse=True)


def test_suggest_tie_breaks_on_numeral_then_figure():
    features = [make_feature(1, 0, "a left widget and a right widget")]
    components = [
        ComponentPair(name="right widget", number="206", figure=2),
        ComponentPair(name="left widget", number="104", figure=1),
    ]
    # Both score identically against the symmetric feature text.
    mappings = suggest_mappings(features, components, threshold=0.0)
    entries = mappings.entries_for((1, 0))
    assert [e.component_ref for e in entries] == [(1, "104"), (2, "206")]


def test_suggest_caps_at_k():
    features = [make_feature(1, 0, "widget")]
    components = [
        ComponentPair(name="widget", number=str(100 + 2 * i), figure=1) for i in range(8)
    ]
    mappings = suggest_mappings(features, components, threshold=0.0, k=5)
    assert len(mappings.entries_for((1, 0))) == 5


def test_suggest_rejects_bad_k():
    with pytest.raises(ValueError):
        suggest_mappings(FEATURES, COMPONENTS, k=0)


def test_suggest_threshold_cut_is_inclusive():
    features = [make_feature(1, 0, "memory")]
    components = [ComponentPair(name="memory", number="104", figure=1)]
    full = suggest_mappings(features, components, threshold=0.0)
    score = full.entries[0].score.combined
    at = suggest_mappings(features, components, threshold=score)
    above = suggest_mappings(features, components, threshold=score + 1e-9)
    assert len(at.entries) == 1
    assert len(above.entries) == 0


def test_raising_threshold_never_adds_entries():
    rng = random.Random(3)
    nouns = ["memory", "bus", "cache", "sensor", "antenna", "filter"]
    for _ in range(50):
        features = [
            make_feature(1, i, " ".join(rng.choice(nouns) for _ in range(rng.randint(1, 6))))
            for i in range(rng.randint(1, 4))
        ]
        components = [
            ComponentPair(name=rng.choice(nouns), number=str(100 + 2 * j), figure=1)
            for j in range(rng.randint(1, 6))
        ]
        low = suggest_mappings(features, components, threshold=0.05)
        high = suggest_mappings(features, components, threshold=0.3)
        low_keys = {(e.feature_id, e.component_ref) for e in low.entries}
        high_keys = {(e.feature_id, e.component_ref) for e in high.entries}
        assert high_keys <= low_keys


def test_confirm_adds_user_entry_below_threshold():
    mappings = suggest_mappings(FEATURES, COMPONENTS)
    entry = confirm_mapping(mappings, (1, 0), (1, "102"), FEATURES, COMPONENTS)
    assert entry.origin == "user"
    assert entry.score.combined < DEFAULT_THRESHOLD
    assert mappings.find((1, 0), (1, "102")) is entry


def test_confirm_promotes_suggested_entry_in_place():
    mappings = suggest_mappings(FEATURES, COMPONENTS)
    before = list(mappings.entries)
    target = mappings.find((1, 0), (1, "104"))
    position = mappings.entries.index(target)
    entry = confirm_mapping(mappings, (1, 0), (1, "104"), FEATURES, COMPONENTS)
    assert entry.origin == "user"
    assert mappings.entries.index(entry) == position
    assert len(mappings.entries) == len(before)


def test_confirm_is_idempotent():
    mappings = MappingSet()
    confirm_mapping(mappings, (1, 0), (1, "104"), FEATURES, COMPONENTS)
    confirm_mapping(mappings, (1, 0), (1, "104"), FEATURES, COMPONENTS)
    assert len(mappings.entries) == 1


def test_confirm_unknown_refs_raise():
    mappings = MappingSet()
    with pytest.raises(UnknownFeature):
        confirm_mapping(mappings, (9, 9), (1, "104"), FEATURES, COMPONENTS)
    with pytest.raises(UnknownComponent):
        confirm_mapping(mappings, (1, 0), (1, "999"), FEATURES, COMPONENTS)


def test_remove_mapping_strict():
    from patentforge.mapping import remove_mapping

    mappings = MappingSet()
    confirm_mapping(mappings, (1, 0), (1, "104"), FEATURES, COMPONENTS)
    removed = remove_mapping(mappings, (1, 0), (1, "104"))
    assert removed.component_ref == (1, "104")
    assert mappings.entries == []
    with pytest.raises(UnknownComponent):
        remove_mapping(mappings, (1, 0), (1, "104"))


def test_key_parsers():
    assert parse_feature_key("2.1") == (2, 1)
    assert parse_component_key("1:104a") == (1, "104a")


def test_load_gold():
    gold = load_gold({"1.0": ["1:104", "1:106"], "2.0": []})
    assert gold[(1, 0)] == {(1, "104"), (1, "106")}
    assert gold[(2, 0)] == set()


def _entry(feature, ref):
    return MappingEntry(feature_id=feature, component_ref=ref, score=None, origin="user")


def test_precision_perfect():
    mappings = MappingSet(entries=[_entry((1, 0), (1, "104"))])
    gold = {(1, 0): {(1, "104")}}
    assert precision_at_k(mappings, gold, 5) == 1.0


def test_precision_no_predictions_scores_zero():
    gold = {(1, 0): {(1, "104")}}
    assert precision_at_k(MappingSet(), gold, 5) == 0.0


def test_precision_denominator_is_min_of_k_and_predictions():
    # 3 of 3 correct for one feature, 1 of 3 for the other: (1.0 + 1/3) / 2
    entries = [
        _entry((1, 0), (1, "102")),
        _entry((1, 0), (1, "104")),
        _entry((1, 0), (1, "106")),
        _entry((2, 0), (1, "102")),
        _entry((2, 0), (1, "104")),
        _entry((2, 0), (1, "106")),
    ]
    gold = {
        (1, 0): {(1, "102"), (1, "104"), (1, "106")},
        (2, 0): {(1, "102")},
    }
    value = precision_at_k(MappingSet(entries=entries), gold, 3)
    assert value == pytest.approx(0.6667, abs=5e-5)


def test_precision_ignores_features_outside_gold():
    entries = [_entry((1, 0), (1, "104")), _entry((9, 9), (1, "106"))]
    gold = {(1, 0): {(1, "104")}}
    assert precision_at_k(MappingSet(entries=entries), gold, 5) == 1.0


def test_precision_counts_only_top_k():
    entries = [
        _entry((1, 0), (1, "102")),
        _entry((1, 0), (1, "104")),
    ]
    gold = {(1, 0): {(1, "104")}}
    # k=1 sees only the first entry, which is wrong
    assert precision_at_k(MappingSet(entries=entries), gold, 1) == 0.0


def test_precision_empty_gold_raises():
    with pytest.raises(EmptyGold):
        precision_at_k(MappingSet(), {}, 5)


def test_mapping_set_round_trips_through_dict():
    mappings = suggest_mappings(FEATURES, COMPONENTS)
    confirm_mapping(mappings, (1, 0), (1, "102"), FEATURES, COMPONENTS)
    rebuilt = MappingSet.from_dict(mappings.to_dict())
    assert rebuilt == mappings
    assert rebuilt.entries[0].to_dict()["origin"] in {"suggested", "user"}


def test_suggest_is_deterministic():
    a = suggest_mappings(FEATURES, COMPONENTS).to_dict()
    b = suggest_mappings(FEATURES, COMPONENTS).to_dict()
    assert a == b
