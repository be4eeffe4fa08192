"""Pluggable text-generation backends with per-call timing capture.

Two backends ship: a deterministic mock that templates output from the
enriched-tuple markup (the test stand-in for the fine-tuned model) and a
remote HTTP client posting {input_text, max_output_tokens} as JSON and
reading {output_text}. Backend failures are data, not exceptions: a failed
or timed-out call produces a result with the matching status.
"""

from __future__ import annotations

import re
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import requests

from .enrichment import EnrichedTuple, FeatureId
from .errors import UnknownBackend

DEFAULT_DEADLINE_SECONDS = 600.0
DEFAULT_MAX_OUTPUT_TOKENS = 512

_CLAIM_ID_RE = re.compile(r"<claim\s+(\d+)>")
_FEATURE_TEXT_RE = re.compile(r"<feature\s+\d+>\s*(.*?)\s*</feature>", re.DOTALL)
_FIG_ID_RE = re.compile(r"<fig\s+(\d+)>")
_COM_RE = re.compile(r"<com>\s*(.*?)\s*<num>\s*(\S+)\s*</num>\s*</com>", re.DOTALL)

FALLBACK_SENTENCE = (
    "In an embodiment, the disclosed subject matter is implemented as described herein."
)


@dataclass(frozen=True)
class GenerationRequest:
    """One backend invocation: serialized tuple in, raw text out."""

    feature_id: FeatureId
    input_text: str
    max_output_tokens: int
    backend_id: str

    def __post_init__(self):
        if not self.input_text:
            raise ValueError("input_text must be non-empty")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


@dataclass
class GenerationResult:
    feature_id: FeatureId
    raw_output: str
    elapsed_seconds: float
    backend_id: str
    status: str  # ok | failed | timeout
    diagnostic: str = ""

    def to_dict(self) -> dict:
        return {
            "feature_id": list(self.feature_id),
            "raw_output": self.raw_output,
            "elapsed_seconds": self.elapsed_seconds,
            "backend_id": self.backend_id,
            "status": self.status,
            "diagnostic": self.diagnostic,
        }


class Backend:
    """Interface for generation backends; must be safe for concurrent calls."""

    backend_id: str = "backend"

    def run(self, input_text: str, max_output_tokens: int) -> str:
        raise NotImplementedError


def mock_generate(input_text: str) -> str:
    """Deterministic template output for an enriched tuple.

    Emits one "<fig N> illustrates ..." sentence per figure token, then one
    embodiment sentence per component carrying the "name <num> number </num>"
    markup and the feature text; inputs without claim/feature markup echo a
    fixed fallback sentence.
    """
    claim_m = _CLAIM_ID_RE.search(input_text)
    feature_m = _FEATURE_TEXT_RE.search(input_text)
    if not claim_m or not feature_m:
        return FALLBACK_SENTENCE
    claim_number = claim_m.group(1)
    fragment = feature_m.group(1).rstrip(" .;,")

    sentences = [
        f"<fig {n}> illustrates aspects of an embodiment of claim {claim_number}."
        for n in _FIG_ID_RE.findall(input_text)
    ]
    components = _COM_RE.findall(input_text)
    if components:
        for name, number in components:
            sentences.append(
                f"In an embodiment, the {name} <num> {number} </num> performs {fragment}."
            )
    else:
        sentences.append(FALLBACK_SENTENCE)
    return " ".join(sentences)


class MockBackend(Backend):
    """Pure, deterministic backend used by tests and CI."""

    backend_id = "mock"

    def run(self, input_text: str, max_output_tokens: int) -> str:
        return mock_generate(input_text)


class RemoteBackend(Backend):
    """HTTP client for a hosted model serving the JSON wire format."""

    def __init__(self, endpoint: str, backend_id: str = "remote",
                 deadline_seconds: float = DEFAULT_DEADLINE_SECONDS):
        self.endpoint = endpoint
        self.backend_id = backend_id
        self.deadline_seconds = deadline_seconds

    def run(self, input_text: str, max_output_tokens: int) -> str:
        try:
            response = requests.post(
                self.endpoint,
                json={"input_text": input_text, "max_output_tokens": max_output_tokens},
                timeout=self.deadline_seconds,
            )
            response.raise_for_status()
        except requests.exceptions.Timeout as exc:
            raise TimeoutError(f"deadline of {self.deadline_seconds}s exceeded") from exc
        return response.json()["output_text"]


def default_backends(remote_endpoint: str | None = None,
                     deadline_seconds: float = DEFAULT_DEADLINE_SECONDS) -> dict[str, Backend]:
    """Registry with the mock backend plus a remote one when configured."""
    backends: dict[str, Backend] = {"mock": MockBackend()}
    if remote_endpoint:
        backends["remote"] = RemoteBackend(remote_endpoint, deadline_seconds=deadline_seconds)
    return backends


def generate(request: GenerationRequest, backends: Mapping[str, Backend]) -> GenerationResult:
    """Dispatch one request to its backend, recording wall-clock time.

    Backend failures never raise: a timeout maps to status "timeout", any
    other failure (including empty output) to status "failed" with a
    diagnostic. Only an unregistered backend id raises UnknownBackend.
    """
    backend = backends.get(request.backend_id)
    if backend is None:
        raise UnknownBackend(f"no backend registered under {request.backend_id!r}")
    start = time.perf_counter()
    try:
        output = backend.run(request.input_text, request.max_output_tokens)
        status, diagnostic = "ok", ""
    except TimeoutError as exc:
        output, status, diagnostic = "", "timeout", str(exc)
    except Exception as exc:  # noqa: BLE001 - failures are data at this level
        output, status, diagnostic = "", "failed", str(exc)
    elapsed = time.perf_counter() - start
    if status == "ok" and not output:
        status, diagnostic = "failed", "backend returned empty output"
    return GenerationResult(
        feature_id=request.feature_id,
        raw_output=output,
        elapsed_seconds=elapsed,
        backend_id=request.backend_id,
        status=status,
        diagnostic=diagnostic,
    )


@dataclass
class TimingSummary:
    """Per-project timing over successful requests; total is batch wall-clock."""

    count: int
    mean_seconds: float
    stddev_seconds: float
    total_seconds: float

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean_seconds": self.mean_seconds,
            "stddev_seconds": self.stddev_seconds,
            "total_seconds": self.total_seconds,
        }


def generate_project(
    tuples: list[EnrichedTuple],
    backend: Backend,
    parallelism: int = 1,
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS,
) -> tuple[list[GenerationResult], TimingSummary]:
    """Generate one result per tuple, preserving input order.

    Requests may run concurrently up to the given parallelism; per-tuple
    failures are embedded in the results. The summary covers only ok
    durations (population stddev) plus the batch wall-clock total.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    registry = {backend.backend_id: backend}
    requests_ = [
        GenerationRequest(
            feature_id=t.feature_id,
            input_text=t.serialized,
            max_output_tokens=max_output_tokens,
            backend_id=backend.backend_id,
        )
        for t in tuples
    ]
    start = time.perf_counter()
    if parallelism == 1 or len(requests_) <= 1:
        results = [generate(r, registry) for r in requests_]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(lambda r: generate(r, registry), requests_))
    total = time.perf_counter() - start

    durations = [r.elapsed_seconds for r in results if r.status == "ok"]
    summary = TimingSummary(
        count=len(durations),
        mean_seconds=statistics.fmean(durations) if durations else 0.0,
        stddev_seconds=statistics.pstdev(durations) if durations else 0.0,
        total_seconds=total,
    )
    return results, summary
