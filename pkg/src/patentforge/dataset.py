"""Build (input, target) training tuples from bulk patent full-text documents.

Input documents are USPTO full-text grant XML (the simplified JSON form of
PatentDocument is also accepted, for fixtures). Per document the pipeline
parses claims, extracts component pairs from the brief-description and
description text, suggests feature-component mappings, serializes the
enriched input tuple per feature, aligns each feature to its supporting
description paragraphs for the target side, wraps the target's plain
figure/component mentions in the enrichment vocabulary, and truncates both
sides to the token budget.

Token counting is a whitespace proxy in which each special token counts as
one, so the budget is model-agnostic; the default budget is 512 tokens.
Output is JSONL, one tuple per line, written atomically and byte-identical
across re-runs and parallelism levels.
"""

from __future__ import annotations

import json
import os
import re
import time
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .claims import ClaimFeature, all_features, parse_claims
from .drawings import (
    ComponentPair,
    DrawingFigure,
    _FIGURE_LABEL_RE,
    all_components,
    enrich_description,
    extract_components,
)
from .enrichment import build_tuple
from .errors import MalformedXml, MissingSection
from .mapping import suggest_mappings
from .similarity import cosine, tokenize

DEFAULT_MAX_TOKENS = 512
DEFAULT_THRESHOLD = 0.1
DEFAULT_TOP_K = 5
DEFAULT_CPC_FILTER = "G06F"
ALIGNMENT_CAP = 3

_PROXY_TOKEN_RE = re.compile(
    r"<(?:claim|feature|fig|desc)\s+\d+>|</?(?:claim|feature|fig|com|num|desc)>|\S+"
)
_BRIEF_HEADING_RE = re.compile(r"BRIEF\s+DESCRIPTION", re.IGNORECASE)
_FIG_MENTION_SUB_RE = re.compile(r"\bFIG(?:URE)?\.?\s+(\d+)\b", re.IGNORECASE)


@dataclass
class PatentDocument:
    """One parsed patent: claims text, description paragraphs and metadata."""

    doc_id: str
    title: str
    claims_text: str
    description_paragraphs: list[str]
    brief_description_section: str = ""
    cpc_codes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "title": self.title,
            "claims_text": self.claims_text,
            "description_paragraphs": list(self.description_paragraphs),
            "brief_description_section": self.brief_description_section,
            "cpc_codes": list(self.cpc_codes),
        }


@dataclass
class TrainingTuple:
    doc_id: str
    feature_id: tuple[int, int]
    input_text: str
    target_text: str
    token_counts: dict

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "feature_id": list(self.feature_id),
            "input_text": self.input_text,
            "target_text": self.target_text,
            "token_counts": dict(self.token_counts),
        }


@dataclass
class DatasetConfig:
    """Builder knobs; threshold drives both mapping suggestion and alignment."""

    max_tokens: int = DEFAULT_MAX_TOKENS
    threshold: float = DEFAULT_THRESHOLD
    top_k: int = DEFAULT_TOP_K
    cpc_filter: str = DEFAULT_CPC_FILTER


def _element_text(element: ET.Element | None) -> str:
    if element is None:
        return ""
    return " ".join("".join(element.itertext()).split())


def parse_patent_xml(document: bytes) -> PatentDocument:
    """Parse one USPTO full-text grant document.

    Rejects documents lacking a claims block or description paragraphs
    (MissingSection naming the section); unparseable bytes raise
    MalformedXml. The brief-description-of-the-drawings paragraphs are
    returned separately and excluded from description_paragraphs.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise MalformedXml(f"not parseable as XML: {exc}") from exc

    doc_number = root.find(".//publication-reference//doc-number")
    doc_id = _element_text(doc_number) or root.get("file", "") or "unknown"
    title = _element_text(root.find(".//invention-title"))

    claims_el = root.find(".//claims")
    if claims_el is None:
        raise MissingSection("claims")
    claim_lines = []
    for position, claim in enumerate(claims_el.findall("claim"), start=1):
        text = _element_text(claim)
        if not text:
            continue
        if not re.match(r"\d+\.", text):
            num = claim.get("num", "").lstrip("0") or str(position)
            text = f"{num}. {text}"
        claim_lines.append(text)
    if not claim_lines:
        raise MissingSection("claims")
    claims_text = "\n".join(claim_lines)

    description_el = root.find(".//description")
    if description_el is None:
        raise MissingSection("description")
    paragraphs: list[str] = []
    brief_paragraphs: list[str] = []
    in_brief = False
    for child in description_el:
        if child.tag == "heading":
            in_brief = bool(_BRIEF_HEADING_RE.search(_element_text(child)))
            continue
        if child.tag in ("p", "description-of-drawings"):
            if child.tag == "description-of-drawings":
                brief_paragraphs.extend(
                    t for p in child.findall(".//p") if (t := _element_text(p))
                )
                continue
            text = _element_text(child)
            if not text:
                continue
            (brief_paragraphs if in_brief else paragraphs).append(text)
    if not paragraphs:
        raise MissingSection("description")

    cpc_codes: list[str] = []
    for cpc in root.iter("classification-cpc"):
        parts = [
            _element_text(cpc.find(tag))
            for tag in ("section", "class", "subclass", "main-group", "subgroup")
        ]
        if all(parts[:3]):
            code = "".join(parts[:3])
            if parts[3]:
                code += parts[3]
                if parts[4]:
                    code += "/" + parts[4]
            cpc_codes.append(code)
    for cpc_text in root.iter("classification-cpc-text"):
        code = _element_text(cpc_text).replace(" ", "")
        if code:
            cpc_codes.append(code)

    return PatentDocument(
        doc_id=doc_id,
        title=title,
        claims_text=claims_text,
        description_paragraphs=paragraphs,
        brief_description_section="\n".join(brief_paragraphs),
        cpc_codes=cpc_codes,
    )


def load_patent_json(data: dict) -> PatentDocument:
    """Accept the simplified PatentDocument JSON used by fixtures."""
    return PatentDocument(
        doc_id=data["doc_id"],
        title=data.get("title", ""),
        claims_text=data["claims_text"],
        description_paragraphs=list(data["description_paragraphs"]),
        brief_description_section=data.get("brief_description_section", ""),
        cpc_codes=list(data.get("cpc_codes", [])),
    )


def align_claim_to_paragraphs(
    feature: ClaimFeature, paragraphs: list[str], threshold: float
) -> list[int]:
    """Indices of the paragraphs supporting a feature, best first, capped at 3.

    Paragraphs are ranked by term-frequency cosine against the feature text;
    only scores at or above the threshold qualify. Ties break toward the
    lower index.
    """
    if not paragraphs:
        raise ValueError("paragraphs must be non-empty")
    feature_tokens = tokenize(feature.text)
    scored = [
        (cosine(feature_tokens, tokenize(paragraph)), index)
        for index, paragraph in enumerate(paragraphs)
    ]
    qualifying = [(score, index) for score, index in scored if score >= threshold]
    qualifying.sort(key=lambda pair: (-pair[0], pair[1]))
    return [index for _, index in qualifying[:ALIGNMENT_CAP]]


def proxy_token_count(text: str) -> int:
    """Whitespace token count with each special token counting as one."""
    return len(_PROXY_TOKEN_RE.findall(text))


def truncate_tokens(text: str, max_tokens: int) -> str:
    """Keep the first max_tokens proxy tokens, re-joined with single spaces.

    Parameterized tags like "<fig 1>" are atomic; a cut falling inside a
    "<num> value </num>" group backs off to before "<num>".
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    tokens = _PROXY_TOKEN_RE.findall(text)
    if len(tokens) <= max_tokens:
        return " ".join(tokens)
    cut = max_tokens
    for i in range(cut - 1, -1, -1):
        if tokens[i] == "</num>":
            break
        if tokens[i] == "<num>":
            try:
                close = tokens.index("</num>", i + 1)
            except ValueError:
                break
            if close >= cut:
                cut = i
            break
    return " ".join(tokens[:cut])


def _wrap_target_markup(text: str, components: list[ComponentPair]) -> str:
    """Wrap plain figure and component mentions in the enrichment vocabulary."""
    wrapped = _FIG_MENTION_SUB_RE.sub(lambda m: f"<fig {m.group(1)}>", text)
    for pair in sorted(components, key=lambda c: -len(c.name)):
        pattern = re.compile(
            r"\b" + r"\s+".join(re.escape(w) for w in pair.name.split()) +
            r"\s+" + re.escape(pair.number) + r"\b",
            re.IGNORECASE,
        )
        wrapped = pattern.sub(
            lambda m, n=pair.number: (
                f"<com> {m.group(0)[: -len(n)].strip()} <num> {n} </num></com>"
            ),
            wrapped,
        )
    return wrapped


def _extract_figures_and_components(
    brief_section: str, description_paragraphs: list[str]
) -> list[DrawingFigure]:
    """Reconstruct per-figure component sets from patent text.

    Components are assigned to the most recently mentioned figure label in
    the combined brief + description text (figure 1 when none precedes).
    Each figure's brief description is the first brief-section line that
    mentions it.
    """
    combined = brief_section + "\n" + "\n".join(description_paragraphs)
    chunks = _FIGURE_LABEL_RE.split(combined)
    # re.split with one capture group yields [text, fig, text, fig, text, ...]
    current = 1
    pairs_by_figure: dict[int, list[ComponentPair]] = {}
    name_by_number: dict[str, str] = {}
    figure_order: list[int] = []

    labeled = [int(chunks[i]) for i in range(1, len(chunks), 2)]
    if labeled:
        current = labeled[0]

    def _collect(text: str, figure: int) -> None:
        if figure not in pairs_by_figure:
            pairs_by_figure[figure] = []
            figure_order.append(figure)
        for pair in extract_components(text, figure):
            canonical = name_by_number.setdefault(pair.number, pair.name)
            if canonical != pair.name:
                pair = ComponentPair(name=canonical, number=pair.number, figure=figure)
            if pair not in pairs_by_figure[figure]:
                pairs_by_figure[figure].append(pair)

    _collect(chunks[0], current)
    for i in range(1, len(chunks), 2):
        current = int(chunks[i])
        _collect(chunks[i + 1], current)

    brief_lines = [line.strip() for line in brief_section.splitlines() if line.strip()]
    figures = []
    for number in sorted(figure_order):
        brief = next(
            (line for line in brief_lines
             if any(int(m) == number for m in _FIGURE_LABEL_RE.findall(line))),
            "",
        )
        figures.append(
            DrawingFigure(
                figure_number=number,
                source_label="description-text",
                raw_text="",
                components=pairs_by_figure[number],
                brief_description=brief,
                enriched_description=enrich_description(number, brief),
            )
        )
    return figures


def build_training_tuples(
    patent: PatentDocument, config: DatasetConfig | None = None
) -> tuple[list[TrainingTuple], dict]:
    """Run the full per-document pipeline; returns tuples and statistics.

    Features whose alignment finds no supporting paragraph are dropped and
    counted, so tuples_emitted + features_dropped equals the document's
    feature total.
    """
    config = config or DatasetConfig()
    claims = parse_claims(patent.claims_text)
    features = all_features(claims)
    figures = _extract_figures_and_components(
        patent.brief_description_section, patent.description_paragraphs
    )
    components = all_components(figures)
    mappings = suggest_mappings(
        features, components, threshold=config.threshold, k=config.top_k
    )
    components_by_ref = {c.ref: c for c in components}

    tuples: list[TrainingTuple] = []
    dropped = 0
    for feature in features:
        indices = align_claim_to_paragraphs(
            feature, patent.description_paragraphs, config.threshold
        )
        if not indices:
            dropped += 1
            continue
        mapped = [
            components_by_ref[e.component_ref]
            for e in mappings.entries_for(feature.feature_id)
        ]
        enriched = build_tuple(feature, mapped, figures, strict=False)
        target_plain = " ".join(patent.description_paragraphs[i] for i in indices)
        target = _wrap_target_markup(target_plain, mapped)
        input_text = truncate_tokens(enriched.serialized, config.max_tokens)
        target_text = truncate_tokens(target, config.max_tokens)
        tuples.append(
            TrainingTuple(
                doc_id=patent.doc_id,
                feature_id=feature.feature_id,
                input_text=input_text,
                target_text=target_text,
                token_counts={
                    "input": proxy_token_count(input_text),
                    "target": proxy_token_count(target_text),
                },
            )
        )
    stats = {
        "doc_id": patent.doc_id,
        "claims": len(claims),
        "features_total": len(features),
        "tuples_emitted": len(tuples),
        "features_dropped": dropped,
        "figures_found": len(figures),
        "components_found": len(components),
    }
    return tuples, stats


def _accepts_cpc(patent: PatentDocument, cpc_filter: str) -> bool:
    if not cpc_filter:
        return True
    return any(code.replace(" ", "").startswith(cpc_filter) for code in patent.cpc_codes)


def _load_document(path: Path) -> PatentDocument:
    if path.suffix.lower() == ".json":
        return load_patent_json(json.loads(path.read_text(encoding="utf-8")))
    return parse_patent_xml(path.read_bytes())


def _process_file(path: Path, config: DatasetConfig) -> dict:
    try:
        patent = _load_document(path)
    except (MalformedXml, MissingSection, json.JSONDecodeError, KeyError) as exc:
        return {"file": path.name, "rejected": f"{type(exc).__name__}: {exc}", "lines": []}
    if not _accepts_cpc(patent, config.cpc_filter):
        return {"file": path.name, "rejected": "cpc filter", "lines": []}
    tuples, stats = build_training_tuples(patent, config)
    lines = [
        json.dumps(t.to_dict(), ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        for t in tuples
    ]
    return {"file": path.name, "rejected": None, "lines": lines, "stats": stats}


def build_corpus(
    input_dir: str | Path,
    out_path: str | Path,
    config: DatasetConfig | None = None,
    parallelism: int = 1,
) -> dict:
    """Build a JSONL tuple corpus from a directory of patent files.

    Files (.xml and .json, sorted by name) are independent work units and
    may be processed in parallel; output lines merge in input order, so the
    JSONL bytes are identical for any parallelism. The output file is
    written atomically; a stats dict is returned for the sidecar.
    """
    config = config or DatasetConfig()
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    input_dir = Path(input_dir)
    out_path = Path(out_path)
    files = sorted(
        p for p in input_dir.iterdir() if p.suffix.lower() in (".xml", ".json")
    )
    started = time.perf_counter()
    if parallelism == 1 or len(files) <= 1:
        outcomes = [_process_file(path, config) for path in files]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(lambda p: _process_file(p, config), files))
    elapsed = time.perf_counter() - started

    accepted = [o for o in outcomes if o["rejected"] is None]
    rejected = {o["file"]: o["rejected"] for o in outcomes if o["rejected"] is not None}
    total_tuples = sum(len(o["lines"]) for o in accepted)
    total_features = sum(o["stats"]["features_total"] for o in accepted)
    total_dropped = sum(o["stats"]["features_dropped"] for o in accepted)

    tmp_path = out_path.with_name(out_path.name + ".tmp")
    with open(tmp_path, "w", encoding="utf-8") as handle:
        for outcome in outcomes:
            for line in outcome["lines"]:
                handle.write(line + "\n")
    os.replace(tmp_path, out_path)

    return {
        "documents_seen": len(files),
        "documents_accepted": len(accepted),
        "documents_rejected": len(rejected),
        "rejections": rejected,
        "features_total": total_features,
        "tuples_emitted": total_tuples,
        "features_dropped": total_dropped,
        "elapsed_seconds": elapsed,
        "documents_per_second": len(files) / elapsed if elapsed > 0 else 0.0,
        "tuples_per_document": total_tuples / len(accepted) if accepted else 0.0,
        "per_document": [o["stats"] for o in accepted],
    }
