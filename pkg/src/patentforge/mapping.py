"""Suggest and manage claim-feature to drawing-component mappings.

A mapping links one claim feature to one component pair. Suggested entries
come from the combined similarity score with a qualification threshold and
a per-feature cap; user entries are explicit confirmations that bypass the
threshold. Evaluation against a gold standard uses macro-averaged
precision at k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .claims import ClaimFeature
from .drawings import ComponentPair, numeral_sort_key
from .errors import EmptyGold, UnknownComponent, UnknownFeature
from .similarity import SimilarityScore, score_pair

DEFAULT_THRESHOLD = 0.1
DEFAULT_TOP_K = 5

FeatureId = tuple[int, int]
ComponentRef = tuple[int, str]


@dataclass
class MappingEntry:
    """One feature-component link, either suggested or user-confirmed."""

    feature_id: FeatureId
    component_ref: ComponentRef
    score: SimilarityScore | None
    origin: str  # "suggested" | "user"
    stale: bool = False

    def to_dict(self) -> dict:
        return {
            "feature_id": list(self.feature_id),
            "component_ref": [self.component_ref[0], self.component_ref[1]],
            "score": self.score.to_dict() if self.score is not None else None,
            "origin": self.origin,
            "stale": self.stale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> MappingEntry:
        raw_score = data.get("score")
        return cls(
            feature_id=(data["feature_id"][0], data["feature_id"][1]),
            component_ref=(data["component_ref"][0], data["component_ref"][1]),
            score=SimilarityScore.from_dict(raw_score) if raw_score else None,
            origin=data["origin"],
            stale=data.get("stale", False),
        )


@dataclass
class MappingSet:
    """All entries for a project, ordered best-first within each feature."""

    entries: list[MappingEntry] = field(default_factory=list)

    def entries_for(self, feature_id: FeatureId) -> list[MappingEntry]:
        return [e for e in self.entries if e.feature_id == feature_id]

    def find(self, feature_id: FeatureId, component_ref: ComponentRef) -> MappingEntry | None:
        for entry in self.entries:
            if entry.feature_id == feature_id and entry.component_ref == component_ref:
                return entry
        return None

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: dict) -> MappingSet:
        return cls(entries=[MappingEntry.from_dict(e) for e in data.get("entries", [])])


def _suggestion_order(pair: tuple[SimilarityScore, ComponentPair]):
    score, component = pair
    return (-score.combined, numeral_sort_key(component.number), component.figure)


def suggest_mappings(
    features: list[ClaimFeature],
    components: list[ComponentPair],
    threshold: float = DEFAULT_THRESHOLD,
    k: int = DEFAULT_TOP_K,
) -> MappingSet:
    """Score every feature against every component and keep the qualifiers.

    A component qualifies when its combined score is at or above the
    threshold; per feature at most k survive, ordered by descending combined
    score with ties broken by ascending numeral then figure number.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    entries: list[MappingEntry] = []
    for feature in features:
        scored = [(score_pair(feature.text, c), c) for c in components]
        qualifying = [p for p in scored if p[0].combined >= threshold]
        qualifying.sort(key=_suggestion_order)
        for score, component in qualifying[:k]:
            entries.append(
                MappingEntry(
                    feature_id=feature.feature_id,
                    component_ref=component.ref,
                    score=score,
                    origin="suggested",
                )
            )
    return MappingSet(entries=entries)


def confirm_mapping(
    mappings: MappingSet,
    feature_id: FeatureId,
    component_ref: ComponentRef,
    features: list[ClaimFeature],
    components: list[ComponentPair],
) -> MappingEntry:
    """Record a user confirmation, bypassing the suggestion threshold.

    The feature and component must exist; confirming an already-suggested
    pair promotes that entry to a user entry in place. The entry keeps the
    computed score for display even when it falls below the threshold.
    """
    feature = next((f for f in features if f.feature_id == feature_id), None)
    if feature is None:
        raise UnknownFeature(f"no such feature: {feature_id[0]}.{feature_id[1]}")
    component = next((c for c in components if c.ref == component_ref), None)
    if component is None:
        raise UnknownComponent(
            f"no such component: {component_ref[0]}:{component_ref[1]}"
        )
    existing = mappings.find(feature_id, component_ref)
    score = score_pair(feature.text, component)
    if existing is not None:
        existing.origin = "user"
        existing.score = score
        existing.stale = False
        return existing
    entry = MappingEntry(
        feature_id=feature_id, component_ref=component_ref, score=score, origin="user"
    )
    mappings.entries.append(entry)
    return entry


def remove_mapping(
    mappings: MappingSet, feature_id: FeatureId, component_ref: ComponentRef
) -> MappingEntry:
    """Delete one entry regardless of origin; absent entries are an error."""
    entry = mappings.find(feature_id, component_ref)
    if entry is None:
        raise UnknownComponent(
            f"no mapping for {feature_id[0]}.{feature_id[1]} -> "
            f"{component_ref[0]}:{component_ref[1]}"
        )
    mappings.entries.remove(entry)
    return entry


def parse_feature_key(key: str) -> FeatureId:
    """"2.1" -> (2, 1)."""
    claim_part, _, index_part = key.partition(".")
    return (int(claim_part), int(index_part))


def parse_component_key(key: str) -> ComponentRef:
    """"1:104" -> (1, "104")."""
    figure_part, _, number_part = key.partition(":")
    return (int(figure_part), number_part)


def load_gold(data: dict) -> dict[FeatureId, set[ComponentRef]]:
    """Decode a gold mapping: {"c.i": ["f:num", ...], ...}."""
    gold: dict[FeatureId, set[ComponentRef]] = {}
    for feature_key, component_keys in data.items():
        gold[parse_feature_key(feature_key)] = {
            parse_component_key(k) for k in component_keys
        }
    return gold


def precision_at_k(
    mappings: MappingSet, gold: dict[FeatureId, set[ComponentRef]], k: int
) -> float:
    """Macro-averaged precision at k over the gold features.

    Per gold feature: |top-k predictions that are gold| / min(k, predictions
    made), 0.0 when nothing was predicted. Features absent from the gold are
    ignored. An empty gold cannot be averaged over and raises EmptyGold.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not gold:
        raise EmptyGold("gold mapping has no features")
    per_feature = []
    for feature_id, gold_refs in gold.items():
        predictions = mappings.entries_for(feature_id)[:k]
        if not predictions:
            per_feature.append(0.0)
            continue
        hits = sum(1 for e in predictions if e.component_ref in gold_refs)
        per_feature.append(hits / min(k, len(predictions)))
    return sum(per_feature) / len(per_feature)
