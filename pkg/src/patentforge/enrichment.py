"""Assemble the serialized model-input tuple and clean generated output.

The special-token vocabulary is fixed here and documented in
docs/token-grammar.md: <claim n>, <feature n>, <fig n>, <com>, <num>,
<desc n> and their closers. The serialized tuple is the exact wire payload
sent to generation backends. Cleaning is total: it always returns text,
recording a CleanupWarning for any token outside the vocabulary instead of
failing.
"""

from __future__ import annotations

import re
import warnings as _warnings
from dataclasses import dataclass, field

from .claims import ClaimFeature, enrich_feature_text
from .drawings import ComponentPair, DrawingFigure, enrich_description, render_component_group
from .errors import CleanupWarning, UnmappedFeature

FeatureId = tuple[int, int]

_FIG_TOKEN_RE = re.compile(r"<fig\s+(\d+)>")
_VOCAB_TOKEN_RE = re.compile(
    r"<(?:claim|feature|desc)\s+\d+>"
    r"|<(?:com|num)>"
    r"|</(?:claim|feature|fig|com|num|desc)>"
)
_RESIDUAL_TAG_RE = re.compile(r"</?[A-Za-z][^<>]*>")
_PARAGRAPH_SPLIT_RE = re.compile(r"\n\s*\n")


@dataclass
class EnrichedTuple:
    """Serialized model input for one mapped claim feature."""

    feature_id: FeatureId
    serialized: str
    claim_part: str
    component_part: str
    description_part: str

    @property
    def parts(self) -> dict:
        return {
            "claim_part": self.claim_part,
            "component_part": self.component_part,
            "description_part": self.description_part,
        }

    def to_dict(self) -> dict:
        return {
            "feature_id": list(self.feature_id),
            "serialized": self.serialized,
            "parts": self.parts,
        }


@dataclass
class GeneratedSpecification:
    """Raw model output with its cleaned, presentation-ready form.

    Failed or timed-out generations are kept as records too, with empty
    cleaned text and the diagnostic preserved.
    """

    feature_id: FeatureId | None
    raw: str
    cleaned: str
    paragraphs: list[str]
    warnings: list[str] = field(default_factory=list)
    status: str = "ok"
    diagnostic: str = ""

    def to_dict(self) -> dict:
        return {
            "feature_id": list(self.feature_id) if self.feature_id else None,
            "raw": self.raw,
            "cleaned": self.cleaned,
            "paragraphs": list(self.paragraphs),
            "warnings": list(self.warnings),
            "status": self.status,
            "diagnostic": self.diagnostic,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratedSpecification":
        fid = data.get("feature_id")
        return cls(
            feature_id=tuple(fid) if fid else None,
            raw=data.get("raw", ""),
            cleaned=data.get("cleaned", ""),
            paragraphs=list(data.get("paragraphs", [])),
            warnings=list(data.get("warnings", [])),
            status=data.get("status", "ok"),
            diagnostic=data.get("diagnostic", ""),
        )


def build_tuple(
    feature: ClaimFeature,
    mapped: list[ComponentPair],
    figures: list[DrawingFigure],
    strict: bool = False,
) -> EnrichedTuple:
    """Build the serialized input tuple for one feature and its mapped components.

    The component part groups mapped components by figure in ascending
    order; the description part carries one brief-description element per
    involved figure (empty element when the figure has no brief). With
    strict on, a feature with no mapped components raises UnmappedFeature.
    """
    if not mapped and strict:
        raise UnmappedFeature(f"feature {feature.feature_id} has no mapped components")

    figures_by_number = {f.figure_number: f for f in figures}
    for pair in mapped:
        if pair.figure not in figures_by_number:
            raise ValueError(f"mapped component {pair.number} references unknown figure {pair.figure}")

    claim_part = feature.enriched_text or enrich_feature_text(
        feature.claim_number, feature.index, feature.text
    )

    involved = sorted({pair.figure for pair in mapped})
    component_part = " ".join(
        render_component_group(n, [p for p in mapped if p.figure == n]) for n in involved
    )
    description_part = " ".join(
        enrich_description(n, figures_by_number[n].brief_description) for n in involved
    )
    serialized = " ".join(part for part in (claim_part, component_part, description_part) if part)
    return EnrichedTuple(
        feature_id=feature.feature_id,
        serialized=serialized,
        claim_part=claim_part,
        component_part=component_part,
        description_part=description_part,
    )


def clean_specification(raw: str, feature_id: FeatureId | None = None) -> GeneratedSpecification:
    """Strip the special-token markup from generated text.

    Figure tokens render as "FIG. N"; component markup collapses to
    "name number"; all other vocabulary tokens are removed. Any residual
    angle-bracket token is stripped with a CleanupWarning. Whitespace is
    normalized and blank lines regroup the text into paragraphs.
    """
    notes: list[str] = []
    text = _FIG_TOKEN_RE.sub(lambda m: f"FIG. {m.group(1)}", raw)
    text = _VOCAB_TOKEN_RE.sub(" ", text)

    residual = _RESIDUAL_TAG_RE.findall(text)
    if residual:
        for token in residual:
            notes.append(f"removed unrecognized token {token!r}")
            _warnings.warn(f"removed unrecognized token {token!r}", CleanupWarning, stacklevel=2)
        text = _RESIDUAL_TAG_RE.sub(" ", text)

    paragraphs = [" ".join(p.split()) for p in _PARAGRAPH_SPLIT_RE.split(text)]
    paragraphs = [p for p in paragraphs if p]
    cleaned = "\n\n".join(paragraphs)
    return GeneratedSpecification(
        feature_id=feature_id,
        raw=raw,
        cleaned=cleaned,
        paragraphs=paragraphs,
        warnings=notes,
    )


def render_specification(results: list[GeneratedSpecification], numbered: bool = False) -> str:
    """Join cleaned per-feature outputs into one document.

    With numbered on, paragraphs carry "[0001]"-style prefixes (a
    jurisdiction formatting option, off by default).
    """
    paragraphs = [p for result in results for p in result.paragraphs]
    if numbered:
        paragraphs = [f"[{i:04d}] {p}" for i, p in enumerate(paragraphs, start=1)]
    return "\n\n".join(paragraphs)
