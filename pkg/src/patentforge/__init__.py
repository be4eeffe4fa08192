"""Patent drafting pipeline: claims in, mapped components, enriched tuples,
generated specification text out.

The stages compose as plain functions over dataclasses:

    parse_claims -> segment/enrich features
    ingest_drawing_text -> component pairs per figure
    suggest_mappings -> scored feature/component links
    build_tuple -> serialized model input
    generate_project -> raw outputs -> clean_specification

dataset.build_corpus runs the whole pipeline over bulk patent files, and
service.create_app exposes the interactive path over HTTP.
"""

from .claims import (
    Claim,
    ClaimFeature,
    all_features,
    enrich_claim_feature,
    enrich_feature_text,
    parse_claims,
    segment_features,
)
from .config import ServiceConfig, load_config
from .dataset import (
    DatasetConfig,
    PatentDocument,
    TrainingTuple,
    align_claim_to_paragraphs,
    build_corpus,
    build_training_tuples,
    parse_patent_xml,
    proxy_token_count,
    truncate_tokens,
)
from .drawings import (
    ComponentPair,
    DrawingFigure,
    all_components,
    enrich_components,
    enrich_description,
    extract_components,
    ingest_drawing_text,
    numeral_sort_key,
    parse_figure_label,
)
from .enrichment import (
    EnrichedTuple,
    GeneratedSpecification,
    build_tuple,
    clean_specification,
    render_specification,
)
from .errors import (
    ClaimParseError,
    CleanupWarning,
    ConflictWarning,
    DanglingDependency,
    DuplicateFigureNumber,
    DuplicateId,
    EmptyClaimBody,
    EmptyGold,
    EmptyInput,
    MalformedNumbering,
    MalformedXml,
    MissingSection,
    PatentforgeError,
    RevisionConflict,
    UnknownBackend,
    UnknownComponent,
    UnknownFeature,
    UnknownProject,
    UnmappedFeature,
    ValidationError,
)
from .generation import (
    Backend,
    GenerationRequest,
    GenerationResult,
    MockBackend,
    RemoteBackend,
    TimingSummary,
    default_backends,
    generate,
    generate_project,
    mock_generate,
)
from .mapping import (
    MappingEntry,
    MappingSet,
    confirm_mapping,
    load_gold,
    precision_at_k,
    remove_mapping,
    suggest_mappings,
)
from .similarity import SimilarityScore, bleu_n, cosine, score_pair, tokenize
from .store import Project, ProjectStore

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "Claim",
    "ClaimFeature",
    "ClaimParseError",
    "CleanupWarning",
    "ComponentPair",
    "ConflictWarning",
    "DanglingDependency",
    "DatasetConfig",
    "DrawingFigure",
    "DuplicateFigureNumber",
    "DuplicateId",
    "EmptyClaimBody",
    "EmptyGold",
    "EmptyInput",
    "EnrichedTuple",
    "GeneratedSpecification",
    "GenerationRequest",
    "GenerationResult",
    "MalformedNumbering",
    "MalformedXml",
    "MappingEntry",
    "MappingSet",
    "MissingSection",
    "MockBackend",
    "PatentDocument",
    "PatentforgeError",
    "Project",
    "ProjectStore",
    "RemoteBackend",
    "RevisionConflict",
    "ServiceConfig",
    "SimilarityScore",
    "TimingSummary",
    "TrainingTuple",
    "UnknownBackend",
    "UnknownComponent",
    "UnknownFeature",
    "UnknownProject",
    "UnmappedFeature",
    "ValidationError",
    "align_claim_to_paragraphs",
    "all_components",
    "all_features",
    "bleu_n",
    "build_corpus",
    "build_training_tuples",
    "build_tuple",
    "clean_specification",
    "confirm_mapping",
    "cosine",
    "default_backends",
    "enrich_claim_feature",
    "enrich_components",
    "enrich_description",
    "enrich_feature_text",
    "extract_components",
    "generate",
    "generate_project",
    "ingest_drawing_text",
    "load_config",
    "load_gold",
    "mock_generate",
    "numeral_sort_key",
    "parse_claims",
    "parse_figure_label",
    "parse_patent_xml",
    "precision_at_k",
    "proxy_token_count",
    "remove_mapping",
    "render_specification",
    "score_pair",
    "segment_features",
    "suggest_mappings",
    "tokenize",
    "truncate_tokens",
]
