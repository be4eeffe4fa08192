"""Parse raw claim text into structured claims with features and dependencies.

A line matching ``^\\s*\\d+\\.\\s`` opens a new claim block (standard USPTO
claim formatting). Dependency is detected from the phrase "of claim N";
"of any of claims N ..." marks the claim multi-dependent and records the
first referenced number. Features are the semicolon-delimited elements of
the claim body, with "wherein" opening a new feature, per conventional
claim drafting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import DanglingDependency, EmptyClaimBody, EmptyInput, MalformedNumbering

INDEPENDENT = "independent"
DEPENDENT = "dependent"

_CLAIM_OPEN_RE = re.compile(r"^[ \t]*(\d+)\.\s", re.MULTILINE)
_CLAIM_MARKER_RE = re.compile(r"^\s*(\d+)\.\s*")
_SINGLE_DEP_RE = re.compile(r"\bof\s+claim\s+(\d+)", re.IGNORECASE)
_MULTI_DEP_RE = re.compile(r"\bof\s+any\s+(?:one\s+)?of\s+claims\s+(\d+)", re.IGNORECASE)
_PREAMBLE_DELIM_RE = re.compile(r"\bcomprising\b\s*:?|\bincluding\s*:", re.IGNORECASE)
_WHEREIN_RE = re.compile(r"\bwherein\b", re.IGNORECASE)


def _normalize(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim."""
    return " ".join(text.split())


@dataclass
class ClaimFeature:
    """One element/limitation of a claim, identified by (claim_number, index)."""

    claim_number: int
    index: int
    text: str
    enriched_text: str = ""

    @property
    def feature_id(self) -> tuple[int, int]:
        return (self.claim_number, self.index)

    def to_dict(self) -> dict:
        return {
            "claim_number": self.claim_number,
            "index": self.index,
            "text": self.text,
            "enriched_text": self.enriched_text,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClaimFeature":
        return cls(
            claim_number=data["claim_number"],
            index=data["index"],
            text=data["text"],
            enriched_text=data.get("enriched_text", ""),
        )


@dataclass
class Claim:
    """A numbered claim with preamble, ordered features and dependency link."""

    number: int
    kind: str
    depends_on: int | None
    preamble: str
    features: list[ClaimFeature] = field(default_factory=list)
    raw_text: str = ""
    multi_dependent: bool = False

    @property
    def body(self) -> str:
        """Claim text with the leading number marker removed."""
        m = _CLAIM_MARKER_RE.match(self.raw_text)
        return self.raw_text[m.end():] if m else self.raw_text

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "kind": self.kind,
            "depends_on": self.depends_on,
            "preamble": self.preamble,
            "features": [f.to_dict() for f in self.features],
            "raw_text": self.raw_text,
            "multi_dependent": self.multi_dependent,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Claim":
        return cls(
            number=data["number"],
            kind=data["kind"],
            depends_on=data.get("depends_on"),
            preamble=data["preamble"],
            features=[ClaimFeature.from_dict(f) for f in data.get("features", [])],
            raw_text=data.get("raw_text", ""),
            multi_dependent=data.get("multi_dependent", False),
        )


def enrich_feature_text(claim_number: int, index: int, text: str) -> str:
    """Wrap a feature text in the claim/feature markup, whitespace-normalized."""
    return f"<claim {claim_number}><feature {index}> {_normalize(text)} </feature></claim>"


def _split_preamble(body: str) -> tuple[str, str]:
    """Split a claim body into (preamble, rest).

    The preamble runs up to and including the first "comprising" (with or
    without a colon) or "including:"; if neither occurs, up to the first
    colon; otherwise it is empty and the whole body is the rest.
    """
    m = _PREAMBLE_DELIM_RE.search(body)
    if m:
        matched = m.group(0)
        word_end = m.start() + len(matched.rstrip(": \t\n"))
        return body[:word_end], body[m.end():]
    colon = body.find(":")
    if colon >= 0:
        return body[:colon], body[colon + 1:]
    return "", body


def _split_features(rest: str) -> list[str]:
    """Split the post-preamble body on semicolons and "wherein" boundaries."""
    segments: list[str] = []
    for part in rest.split(";"):
        cuts = [m.start() for m in _WHEREIN_RE.finditer(part)]
        bounds = [0] + [c for c in cuts if c > 0] + [len(part)]
        for start, end in zip(bounds, bounds[1:]):
            seg = _normalize(part[start:end])
            if seg:
                segments.append(seg)
    return segments


def _segment_body(body: str, claim_number: int) -> tuple[str, list[ClaimFeature]]:
    preamble, rest = _split_preamble(body)
    texts = _split_features(rest)
    if not texts:
        # Degenerate input: no delimiter at all, the whole body is one feature.
        whole = _normalize(body)
        texts = [whole] if whole else []
        preamble = ""
    features = [
        ClaimFeature(
            claim_number=claim_number,
            index=i,
            text=text,
            enriched_text=enrich_feature_text(claim_number, i, text),
        )
        for i, text in enumerate(texts)
    ]
    return _normalize(preamble), features


def segment_features(claim: Claim) -> list[ClaimFeature]:
    """Segment a parsed claim's body into its ordered features."""
    _, features = _segment_body(claim.body, claim.number)
    return features


def enrich_claim_feature(feature: ClaimFeature, claim: Claim) -> str:
    """Enriched markup for a feature of the given claim."""
    if feature.claim_number != claim.number:
        raise ValueError(
            f"feature belongs to claim {feature.claim_number}, not {claim.number}"
        )
    return enrich_feature_text(claim.number, feature.index, feature.text)


def parse_claims(claim_text: str) -> list[Claim]:
    """Parse a claim document into an ordered list of structured claims.

    Raises EmptyInput when no numbered block is found, MalformedNumbering on
    duplicate or non-increasing claim numbers, DanglingDependency when a
    dependency references a number not yet seen, and EmptyClaimBody when a
    numbered block has no body text.
    """
    matches = list(_CLAIM_OPEN_RE.finditer(claim_text))
    if not matches:
        raise EmptyInput("no numbered claim block found")

    claims: list[Claim] = []
    seen: set[int] = set()
    for i, m in enumerate(matches):
        number = int(m.group(1))
        end = matches[i + 1].start() if i + 1 < len(matches) else len(claim_text)
        line = claim_text.count("\n", 0, m.start()) + 1
        body = claim_text[m.end():end]
        raw_text = claim_text[m.start():end].strip()

        if claims and number <= claims[-1].number:
            kind = "duplicate" if number in seen else "non-increasing"
            raise MalformedNumbering(f"claim {number}: {kind} claim number", line=line)
        if not body.strip():
            raise EmptyClaimBody(f"claim {number} has an empty body", line=line)

        depends_on: int | None = None
        multi = False
        multi_m = _MULTI_DEP_RE.search(body)
        if multi_m:
            depends_on = int(multi_m.group(1))
            multi = True
        else:
            dep_m = _SINGLE_DEP_RE.search(body)
            if dep_m:
                depends_on = int(dep_m.group(1))
        if depends_on is not None and depends_on not in seen:
            raise DanglingDependency(
                f"claim {number} depends on claim {depends_on}, which was not seen before it",
                line=line,
            )

        preamble, features = _segment_body(body, number)
        claims.append(
            Claim(
                number=number,
                kind=DEPENDENT if depends_on is not None else INDEPENDENT,
                depends_on=depends_on,
                preamble=preamble,
                features=features,
                raw_text=raw_text,
                multi_dependent=multi,
            )
        )
        seen.add(number)
    return claims


def all_features(claims: list[Claim]) -> list[ClaimFeature]:
    """All features of a claim list in document order."""
    return [f for c in claims for f in c.features]
