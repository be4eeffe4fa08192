"""HTTP API over the drafting pipeline.

State is file-backed through ProjectStore; every mutating request carries
the revision the client last saw and conflicts return 409. Suggestions are
recomputed and persisted whenever claims, drawings or components change;
user-confirmed mappings survive refreshes (re-scored, flagged stale when
their score moved). Generation runs as a background job polled by id, and
its per-feature failures are recorded as results rather than failing the
job.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from fastapi import APIRouter, Depends, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .claims import ClaimFeature, all_features, parse_claims
from .config import ServiceConfig
from .drawings import ComponentPair, all_components, enrich_description, ingest_drawing_text
from .enrichment import EnrichedTuple, GeneratedSpecification, build_tuple, clean_specification, render_specification
from .errors import (
    ClaimParseError,
    DuplicateFigureNumber,
    DuplicateId,
    EmptyGold,
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
from .generation import Backend, default_backends, generate_project
from .mapping import MappingSet, confirm_mapping, parse_component_key, parse_feature_key, remove_mapping, suggest_mappings
from .similarity import score_pair
from .store import Project, ProjectStore

_ERROR_STATUS: list[tuple[type, int]] = [
    (RevisionConflict, 409),
    (DuplicateId, 409),
    (UnknownProject, 404),
    (UnknownFeature, 404),
    (UnknownComponent, 404),
    (ClaimParseError, 422),
    (DuplicateFigureNumber, 422),
    (UnknownBackend, 422),
    (EmptyGold, 422),
    (MalformedXml, 422),
    (MissingSection, 422),
    (UnmappedFeature, 422),
    (ValidationError, 422),
    (PatentforgeError, 400),
]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class CreateProjectBody(BaseModel):
    name: str
    project_id: str | None = None


class ClaimsBody(BaseModel):
    claims_text: str
    revision: int


class DrawingsBody(BaseModel):
    pages: list
    revision: int


class FigurePatchBody(BaseModel):
    brief_description: str
    revision: int


class ComponentPatchBody(BaseModel):
    name: str | None = None
    number: str | None = None
    revision: int


class MappingBody(BaseModel):
    feature_id: list
    component_ref: list
    revision: int


class GenerateBody(BaseModel):
    revision: int
    backend: str = "mock"
    feature_ids: list[list] | None = None
    max_output_tokens: int | None = None
    parallelism: int = 1


class ImportBody(BaseModel):
    project: dict


def _as_feature_id(value) -> tuple[int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"feature_id must be [claim, index], got {value!r}")
    try:
        return (int(value[0]), int(value[1]))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"feature_id must be [claim, index], got {value!r}") from exc


def _as_component_ref(value) -> tuple[int, str]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"component_ref must be [figure, number], got {value!r}")
    try:
        return (int(value[0]), str(value[1]))
    except (TypeError, ValueError) as exc:
        raise ValidationError(
            f"component_ref must be [figure, number], got {value!r}"
        ) from exc


def _as_pages(raw: list) -> list[tuple[str, str]]:
    """Accept pages as {source_label, raw_text} objects or bare strings."""
    pages: list[tuple[str, str]] = []
    for position, item in enumerate(raw, start=1):
        if isinstance(item, str):
            pages.append((f"page-{position}", item))
        elif isinstance(item, dict) and "raw_text" in item:
            label = str(item.get("source_label") or f"page-{position}")
            pages.append((label, str(item["raw_text"])))
        else:
            raise ValidationError(
                "each page must be a string or an object with raw_text "
                "(and optional source_label)"
            )
    return pages


@dataclass
class JobRecord:
    job_id: str
    project_id: str
    backend_id: str
    requested: int
    status: str = "pending"  # pending | running | done | failed
    created_at: str = field(default_factory=_now)
    started_at: str | None = None
    finished_at: str | None = None
    error: str | None = None
    summary: dict | None = None
    result_statuses: dict | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "project_id": self.project_id,
            "backend": self.backend_id,
            "requested": self.requested,
            "status": self.status,
            "created_at": self.created_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "error": self.error,
            "summary": self.summary,
            "result_statuses": self.result_statuses,
        }


class JobManager:
    """In-memory registry of generation jobs, keyed per project."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[tuple[str, str], JobRecord] = {}

    def create(self, project_id: str, backend_id: str, requested: int) -> JobRecord:
        job = JobRecord(
            job_id=uuid.uuid4().hex[:12],
            project_id=project_id,
            backend_id=backend_id,
            requested=requested,
        )
        with self._lock:
            self._jobs[(project_id, job.job_id)] = job
        return job

    def get(self, project_id: str, job_id: str) -> JobRecord:
        with self._lock:
            job = self._jobs.get((project_id, job_id))
        if job is None:
            raise HTTPException(status_code=404, detail=f"no such job: {job_id}")
        return job

    def mark_running(self, job: JobRecord) -> None:
        with self._lock:
            job.status = "running"
            job.started_at = _now()

    def mark_done(self, job: JobRecord, summary: dict, statuses: dict) -> None:
        with self._lock:
            job.status = "done"
            job.finished_at = _now()
            job.summary = summary
            job.result_statuses = statuses

    def mark_failed(self, job: JobRecord, error: str) -> None:
        with self._lock:
            job.status = "failed"
            job.finished_at = _now()
            job.error = error


def refresh_mappings(project: Project, threshold: float, k: int) -> None:
    """Recompute suggested entries; carry user entries over, re-scored.

    A user entry whose score changed since confirmation is flagged stale so
    the client can prompt for review. Entries pointing at vanished features
    or components are left for the store's reconcile pass to drop.
    """
    features = all_features(project.claims)
    components = all_components(project.figures)
    fresh = suggest_mappings(features, components, threshold=threshold, k=k)
    features_by_id = {f.feature_id: f for f in features}
    components_by_ref = {c.ref: c for c in components}
    user_entries = [e for e in project.mappings.entries if e.origin == "user"]
    for entry in user_entries:
        feature = features_by_id.get(entry.feature_id)
        component = components_by_ref.get(entry.component_ref)
        if feature is None or component is None:
            continue
        new_score = score_pair(feature.text, component)
        if entry.score is not None and entry.score != new_score:
            entry.stale = True
        entry.score = new_score
    user_pairs = {(e.feature_id, e.component_ref) for e in user_entries}
    suggested = [
        e for e in fresh.entries if (e.feature_id, e.component_ref) not in user_pairs
    ]
    project.mappings.entries = suggested + user_entries


def _suggestions_payload(
    project: Project, mappings: MappingSet, threshold: float, k: int, ephemeral: bool
) -> dict:
    components_by_ref = {c.ref: c for c in all_components(project.figures)}
    features_out = []
    for feature in all_features(project.claims):
        entries_out = []
        for entry in mappings.entries_for(feature.feature_id):
            item = entry.to_dict()
            component = components_by_ref.get(entry.component_ref)
            item["component_name"] = component.name if component else None
            entries_out.append(item)
        features_out.append(
            {
                "feature_id": list(feature.feature_id),
                "text": feature.text,
                "entries": entries_out,
            }
        )
    return {
        "project_id": project.project_id,
        "revision": project.revision,
        "threshold": threshold,
        "k": k,
        "ephemeral": ephemeral,
        "features": features_out,
    }


def _tuples_for(
    project: Project, features: list[ClaimFeature]
) -> list[EnrichedTuple]:
    components_by_ref = {c.ref: c for c in all_components(project.figures)}
    tuples = []
    for feature in features:
        mapped = [
            components_by_ref[e.component_ref]
            for e in project.mappings.entries_for(feature.feature_id)
            if e.component_ref in components_by_ref
        ]
        tuples.append(build_tuple(feature, mapped, project.figures, strict=False))
    return tuples


def create_app(
    config: ServiceConfig | None = None,
    backends: Mapping[str, Backend] | None = None,
) -> FastAPI:
    """Build the application; backends can be injected for testing."""
    config = config or ServiceConfig()
    store = ProjectStore(config.data_dir)
    if backends is None:
        backends = default_backends(config.remote_endpoint, config.deadline_seconds)
    jobs = JobManager()

    app = FastAPI(title="patentforge", version="0.1.0")
    app.state.store = store
    app.state.config = config
    app.state.backends = backends
    app.state.jobs = jobs

    def require_token(request: Request) -> None:
        if config.auth_token is None:
            return
        supplied = request.headers.get("authorization", "")
        if supplied != f"Bearer {config.auth_token}":
            raise HTTPException(status_code=401, detail="missing or invalid token")

    api = APIRouter(dependencies=[Depends(require_token)])

    @app.exception_handler(PatentforgeError)
    async def _domain_error(request: Request, exc: PatentforgeError):
        status = next(s for t, s in _ERROR_STATUS if isinstance(exc, t))
        body = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ClaimParseError) and exc.line is not None:
            body["line"] = exc.line
        if isinstance(exc, MissingSection):
            body["section"] = exc.section
        return JSONResponse(status_code=status, content=body)

    @api.get("/health")
    def health() -> dict:
        return {"status": "ok", "backends": sorted(backends)}

    @api.post("/projects", status_code=201)
    def create_project(body: CreateProjectBody) -> dict:
        return store.create(body.name, project_id=body.project_id).summary()

    @api.get("/projects")
    def list_projects() -> dict:
        return {"projects": store.list_projects()}

    @api.post("/projects/import", status_code=201)
    def import_project(body: ImportBody) -> dict:
        return store.import_project(body.project).summary()

    @api.get("/projects/{project_id}")
    def get_project(project_id: str) -> dict:
        return store.load(project_id).to_dict()

    @api.delete("/projects/{project_id}", status_code=204)
    def delete_project(project_id: str) -> None:
        store.delete(project_id)

    @api.get("/projects/{project_id}/export")
    def export_project(project_id: str) -> dict:
        return store.export_project(project_id)

    @api.post("/projects/{project_id}/claims")
    def upload_claims(project_id: str, body: ClaimsBody) -> dict:
        claims = parse_claims(body.claims_text)

        def mutate(project: Project) -> None:
            project.claims_text = body.claims_text
            project.claims = claims
            project.results = []
            refresh_mappings(project, config.threshold, config.top_k)

        return store.update(project_id, body.revision, mutate).to_dict()

    @api.post("/projects/{project_id}/drawings")
    def upload_drawings(project_id: str, body: DrawingsBody) -> dict:
        if not body.pages:
            raise ValidationError("pages must be non-empty")
        figures = ingest_drawing_text(_as_pages(body.pages))

        def mutate(project: Project) -> None:
            project.figures = figures
            project.results = []
            refresh_mappings(project, config.threshold, config.top_k)

        return store.update(project_id, body.revision, mutate).to_dict()

    @api.patch("/projects/{project_id}/figures/{figure_number}")
    def patch_figure(project_id: str, figure_number: int, body: FigurePatchBody) -> dict:
        def mutate(project: Project) -> None:
            figure = next(
                (f for f in project.figures if f.figure_number == figure_number), None
            )
            if figure is None:
                raise HTTPException(
                    status_code=404, detail=f"no such figure: {figure_number}"
                )
            figure.brief_description = " ".join(body.brief_description.split())
            figure.enriched_description = enrich_description(
                figure_number, figure.brief_description
            )

        return store.update(project_id, body.revision, mutate).to_dict()

    @api.patch("/projects/{project_id}/figures/{figure_number}/components/{number}")
    def patch_component(
        project_id: str, figure_number: int, number: str, body: ComponentPatchBody
    ) -> dict:
        if body.name is None and body.number is None:
            raise ValidationError("nothing to change: supply name and/or number")

        def mutate(project: Project) -> None:
            figure = next(
                (f for f in project.figures if f.figure_number == figure_number), None
            )
            if figure is None:
                raise HTTPException(
                    status_code=404, detail=f"no such figure: {figure_number}"
                )
            index = next(
                (i for i, c in enumerate(figure.components) if c.number == number), None
            )
            if index is None:
                raise UnknownComponent(
                    f"no such component: {figure_number}:{number}"
                )
            current = figure.components[index]
            new_number = body.number if body.number is not None else current.number
            if new_number != current.number and any(
                c.number == new_number for c in figure.components
            ):
                raise ValidationError(
                    f"figure {figure_number} already has component {new_number}"
                )
            try:
                replacement = ComponentPair(
                    name=" ".join(body.name.split()).lower() if body.name is not None else current.name,
                    number=new_number,
                    figure=figure_number,
                )
            except ValueError as exc:
                raise ValidationError(str(exc)) from exc
            figure.components[index] = replacement
            refresh_mappings(project, config.threshold, config.top_k)

        return store.update(project_id, body.revision, mutate).to_dict()

    @api.get("/projects/{project_id}/suggestions")
    def get_suggestions(
        project_id: str,
        threshold: float | None = Query(default=None, ge=0.0, le=1.0),
        k: int | None = Query(default=None, ge=1),
    ) -> dict:
        project = store.load(project_id)
        if threshold is None and k is None:
            return _suggestions_payload(
                project, project.mappings, config.threshold, config.top_k, False
            )
        effective_threshold = config.threshold if threshold is None else threshold
        effective_k = config.top_k if k is None else k
        ephemeral = suggest_mappings(
            all_features(project.claims),
            all_components(project.figures),
            threshold=effective_threshold,
            k=effective_k,
        )
        return _suggestions_payload(
            project, ephemeral, effective_threshold, effective_k, True
        )

    @api.put("/projects/{project_id}/mappings")
    def put_mapping(project_id: str, body: MappingBody) -> dict:
        feature_id = _as_feature_id(body.feature_id)
        component_ref = _as_component_ref(body.component_ref)
        confirmed: dict = {}

        def mutate(project: Project) -> None:
            entry = confirm_mapping(
                project.mappings,
                feature_id,
                component_ref,
                all_features(project.claims),
                all_components(project.figures),
            )
            confirmed.update(entry.to_dict())

        project = store.update(project_id, body.revision, mutate)
        return {"entry": confirmed, "revision": project.revision}

    @api.delete("/projects/{project_id}/mappings")
    def delete_mapping(
        project_id: str,
        feature: str = Query(description='feature id as "claim.index"'),
        component: str = Query(description='component ref as "figure:number"'),
        revision: int = Query(),
    ) -> dict:
        try:
            feature_id = parse_feature_key(feature)
            component_ref = parse_component_key(component)
        except ValueError as exc:
            raise ValidationError(f"bad mapping key: {exc}") from exc

        current = store.load(project_id)
        if current.revision != revision:
            raise RevisionConflict(
                f"revision {revision} is stale; current is {current.revision}"
            )
        if current.mappings.find(feature_id, component_ref) is None:
            # Deleting an absent mapping is a no-op, not an error.
            return {"removed": False, "revision": current.revision}

        def mutate(project: Project) -> None:
            if project.mappings.find(feature_id, component_ref) is not None:
                remove_mapping(project.mappings, feature_id, component_ref)

        project = store.update(project_id, revision, mutate)
        return {"removed": True, "revision": project.revision}

    @api.post("/projects/{project_id}/generate", status_code=202)
    def start_generation(project_id: str, body: GenerateBody) -> dict:
        if body.parallelism < 1:
            raise ValidationError("parallelism must be >= 1")
        project = store.load(project_id)
        if project.revision != body.revision:
            raise RevisionConflict(
                f"revision {body.revision} is stale; current is {project.revision}"
            )
        features = all_features(project.claims)
        if body.feature_ids is not None:
            wanted = {_as_feature_id(f) for f in body.feature_ids}
            unknown = wanted - {f.feature_id for f in features}
            if unknown:
                missing = sorted(unknown)
                raise UnknownFeature(
                    "no such feature: "
                    + ", ".join(f"{c}.{i}" for c, i in missing)
                )
            features = [f for f in features if f.feature_id in wanted]
        if not features:
            raise ValidationError("project has no claim features to generate from")

        tuples = _tuples_for(project, features)
        max_tokens = body.max_output_tokens or config.max_output_tokens
        job = jobs.create(project_id, body.backend, len(tuples))

        def run() -> None:
            jobs.mark_running(job)
            try:
                # An unknown backend fails the job rather than the request.
                backend = backends.get(body.backend)
                if backend is None:
                    raise UnknownBackend(
                        f"no such backend: {body.backend!r} (have {sorted(backends)})"
                    )
                results, timing = generate_project(
                    tuples, backend,
                    parallelism=body.parallelism, max_output_tokens=max_tokens,
                )
                specs = []
                for result in results:
                    if result.status == "ok":
                        spec = clean_specification(
                            result.raw_output, result.feature_id
                        )
                        spec.status = "ok"
                    else:
                        spec = GeneratedSpecification(
                            feature_id=result.feature_id,
                            raw=result.raw_output,
                            cleaned="",
                            paragraphs=[],
                            status=result.status,
                            diagnostic=result.diagnostic,
                        )
                    specs.append(spec)

                def mutate(project: Project) -> None:
                    order = [f.feature_id for f in all_features(project.claims)]
                    merged = {
                        tuple(r.feature_id): r
                        for r in project.results
                        if r.feature_id is not None
                    }
                    for spec in specs:
                        merged[tuple(spec.feature_id)] = spec
                    project.results = [
                        merged[fid] for fid in order if fid in merged
                    ]

                store.system_update(project_id, mutate)
                statuses = {"ok": 0, "failed": 0, "timeout": 0}
                for result in results:
                    statuses[result.status] = statuses.get(result.status, 0) + 1
                jobs.mark_done(job, timing.to_dict(), statuses)
            except Exception as exc:  # a job must never die silently
                jobs.mark_failed(job, f"{type(exc).__name__}: {exc}")

        threading.Thread(target=run, name=f"generate-{job.job_id}", daemon=True).start()
        return {"job_id": job.job_id, "status": job.status}

    @api.get("/projects/{project_id}/jobs/{job_id}")
    def get_job(project_id: str, job_id: str) -> dict:
        store.load(project_id)  # 404 for unknown projects
        return jobs.get(project_id, job_id).to_dict()

    @api.get("/projects/{project_id}/specification")
    @api.get("/projects/{project_id}/specification.json")
    def get_specification(project_id: str) -> dict:
        project = store.load(project_id)
        ok_results = [r for r in project.results if r.status == "ok"]
        return {
            "project_id": project.project_id,
            "revision": project.revision,
            "results": [r.to_dict() for r in project.results],
            "document": render_specification(ok_results),
            "warnings": [w for r in project.results for w in r.warnings],
        }

    @api.get("/projects/{project_id}/specification.txt")
    def get_specification_txt(project_id: str) -> PlainTextResponse:
        project = store.load(project_id)
        ok_results = [r for r in project.results if r.status == "ok"]
        return PlainTextResponse(
            render_specification(ok_results, numbered=True) + "\n"
        )

    app.include_router(api)

    if config.frontend_dir and Path(config.frontend_dir).is_dir():
        app.mount(
            "/ui",
            StaticFiles(directory=config.frontend_dir, html=True),
            name="ui",
        )

    return app
