"""Extract figure numbers, component name/numeral pairs and brief descriptions
from drawing text exported from drawing tools.

Input is text (one exported page per figure), never image files. Reference
numerals require 2-4 digits plus an optional letter suffix; one-digit tokens
collide with claim and step numbers and are ignored. Component names are the
run of up to five alphabetic words immediately before a numeral, with
stopwords acting as hard boundaries.
"""

from __future__ import annotations

import re
import string
import warnings as _warnings
from dataclasses import dataclass, field

from .errors import ConflictWarning, DuplicateFigureNumber

_FIGURE_LABEL_RE = re.compile(r"\bfig(?:ure)?\.?\s+(\d+)", re.IGNORECASE)
_EXTRACT_NUMERAL_RE = re.compile(r"^(\d{2,4})([a-zA-Z]?)$")
_COMPONENT_NUMBER_RE = re.compile(r"^\d{1,4}[a-z]?$")
_NUMERAL_KEY_RE = re.compile(r"^(\d+)([a-z]?)$")

STOPWORDS = frozenset({"a", "an", "the", "of", "in", "to", "and", "or"})

MAX_NAME_WORDS = 5


@dataclass(frozen=True)
class ComponentPair:
    """A component name with its reference numeral on one figure."""

    name: str
    number: str
    figure: int

    def __post_init__(self):
        if not self.name or any(ch.isdigit() for ch in self.name):
            raise ValueError(f"component name must be non-empty and digit-free: {self.name!r}")
        if not _COMPONENT_NUMBER_RE.match(self.number):
            raise ValueError(f"reference numeral must match 1-4 digits plus optional letter: {self.number!r}")

    @property
    def ref(self) -> tuple[int, str]:
        return (self.figure, self.number)

    def to_dict(self) -> dict:
        return {"name": self.name, "number": self.number, "figure": self.figure}

    @classmethod
    def from_dict(cls, data: dict) -> "ComponentPair":
        return cls(name=data["name"], number=data["number"], figure=data["figure"])


@dataclass
class DrawingFigure:
    """One drawing page: figure number, extracted components, brief description."""

    figure_number: int
    source_label: str
    raw_text: str
    components: list[ComponentPair] = field(default_factory=list)
    brief_description: str = ""
    enriched_description: str = ""
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "figure_number": self.figure_number,
            "source_label": self.source_label,
            "raw_text": self.raw_text,
            "components": [c.to_dict() for c in self.components],
            "brief_description": self.brief_description,
            "enriched_description": self.enriched_description,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DrawingFigure":
        return cls(
            figure_number=data["figure_number"],
            source_label=data.get("source_label", ""),
            raw_text=data.get("raw_text", ""),
            components=[ComponentPair.from_dict(c) for c in data.get("components", [])],
            brief_description=data.get("brief_description", ""),
            enriched_description=data.get("enriched_description", ""),
            warnings=list(data.get("warnings", [])),
        )


def numeral_sort_key(number: str) -> tuple[int, str]:
    """Sort key ordering reference numerals numerically, then by suffix."""
    m = _NUMERAL_KEY_RE.match(number)
    if not m:
        return (0, number)
    return (int(m.group(1)), m.group(2))


def parse_figure_label(text: str) -> int | None:
    """First figure number labeled as "FIG. N", "FIG N", "Figure N" or "Fig. N"."""
    m = _FIGURE_LABEL_RE.search(text)
    return int(m.group(1)) if m else None


def _clean_token(token: str) -> str:
    return token.strip(string.punctuation)


def extract_components(raw_text: str, figure: int) -> list[ComponentPair]:
    """Scan text for component-name runs followed by a reference numeral.

    Walking back from each numeral collects up to five purely-alphabetic
    words, stopping at the first stopword or non-alphabetic token. The pair
    is emitted with the name lowercased. Duplicates collapse; a numeral seen
    with a second, different name keeps its first name and a ConflictWarning
    is issued.
    """
    tokens = [_clean_token(t) for t in raw_text.split()]
    name_by_number: dict[str, str] = {}
    pairs: list[ComponentPair] = []
    for i, token in enumerate(tokens):
        m = _EXTRACT_NUMERAL_RE.match(token)
        if not m:
            continue
        number = m.group(1) + m.group(2).lower()
        words: list[str] = []
        j = i - 1
        while j >= 0 and len(words) < MAX_NAME_WORDS:
            word = tokens[j]
            if not word.isalpha() or word.lower() in STOPWORDS:
                break
            words.append(word.lower())
            j -= 1
        if not words:
            continue
        name = " ".join(reversed(words))
        if number in name_by_number:
            if name_by_number[number] != name:
                _warnings.warn(
                    f"figure {figure}: numeral {number} seen as {name!r} "
                    f"after {name_by_number[number]!r}; keeping the first",
                    ConflictWarning,
                    stacklevel=2,
                )
            continue
        name_by_number[number] = name
        pairs.append(ComponentPair(name=name, number=number, figure=figure))
    return pairs


def enrich_description(figure_number: int, brief_description: str) -> str:
    """Brief-description markup fragment for one figure; empty brief yields an empty element."""
    brief = " ".join(brief_description.split())
    if not brief:
        return f"<desc {figure_number}></desc>"
    return f"<desc {figure_number}> {brief} </desc>"


def render_component_group(figure_number: int, components: list[ComponentPair]) -> str:
    """Component markup for one figure, components in ascending numeral order."""
    ordered = sorted(components, key=lambda c: numeral_sort_key(c.number))
    inner = "".join(f"<com> {c.name} <num> {c.number} </num></com>" for c in ordered)
    return f"<fig {figure_number}>{inner}</fig>"


def enrich_components(figure: DrawingFigure) -> str:
    """Component markup for a whole figure."""
    return render_component_group(figure.figure_number, figure.components)


def ingest_drawing_text(pages: list[tuple[str, str]]) -> list[DrawingFigure]:
    """Turn (source_label, raw_text) pages into DrawingFigure records.

    The figure number comes from the page's own label when present, else the
    page's 1-based position. Raises DuplicateFigureNumber when two pages
    resolve to the same number. A numeral already named on an earlier page
    keeps that name project-wide (ConflictWarning recorded on the later
    figure).
    """
    if not pages:
        raise ValueError("at least one page is required")
    figures: list[DrawingFigure] = []
    seen_numbers: dict[int, str] = {}
    name_by_number: dict[str, str] = {}
    for position, (source_label, raw_text) in enumerate(pages, start=1):
        figure_number = parse_figure_label(raw_text)
        if figure_number is None:
            figure_number = position
        if figure_number in seen_numbers:
            raise DuplicateFigureNumber(
                f"pages {seen_numbers[figure_number]!r} and {source_label!r} "
                f"both resolve to figure {figure_number}"
            )
        with _warnings.catch_warnings(record=True) as caught:
            _warnings.simplefilter("always")
            pairs = extract_components(raw_text, figure_number)
        notes = [str(w.message) for w in caught if issubclass(w.category, ConflictWarning)]

        resolved: list[ComponentPair] = []
        for pair in pairs:
            canonical = name_by_number.setdefault(pair.number, pair.name)
            if canonical != pair.name:
                notes.append(
                    f"numeral {pair.number} already named {canonical!r} on an earlier "
                    f"figure; renaming {pair.name!r}"
                )
                pair = ComponentPair(name=canonical, number=pair.number, figure=figure_number)
            if pair not in resolved:
                resolved.append(pair)

        figures.append(
            DrawingFigure(
                figure_number=figure_number,
                source_label=source_label,
                raw_text=raw_text,
                components=resolved,
                brief_description="",
                enriched_description=enrich_description(figure_number, ""),
                warnings=notes,
            )
        )
        seen_numbers[figure_number] = source_label
    return figures


def all_components(figures: list[DrawingFigure]) -> list[ComponentPair]:
    """All components across figures in figure order."""
    return [c for f in figures for c in f.components]
