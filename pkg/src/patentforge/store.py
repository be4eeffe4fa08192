"""File-backed project persistence with optimistic concurrency.

Each project is one JSON file under the data directory, written atomically
(temp file + rename). Writers take a per-project lock and must present the
revision they read; a mismatch raises RevisionConflict so stale clients
cannot clobber newer state. Every write reconciles referential integrity:
mapping entries and generation results whose feature or component no longer
exists are dropped (user-confirmed mappings leave a warning behind).
"""

from __future__ import annotations

import json
import os
import re
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .claims import Claim, all_features
from .drawings import DrawingFigure, all_components
from .enrichment import GeneratedSpecification
from .errors import DuplicateId, RevisionConflict, UnknownProject, ValidationError
from .mapping import MappingSet

_PROJECT_ID_RE = re.compile(r"^[a-z0-9][a-z0-9-]{0,63}$")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class Project:
    project_id: str
    name: str
    revision: int = 0
    created_at: str = ""
    updated_at: str = ""
    claims_text: str = ""
    claims: list[Claim] = field(default_factory=list)
    figures: list[DrawingFigure] = field(default_factory=list)
    mappings: MappingSet = field(default_factory=MappingSet)
    results: list[GeneratedSpecification] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "project_id": self.project_id,
            "name": self.name,
            "revision": self.revision,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "claims_text": self.claims_text,
            "claims": [c.to_dict() for c in self.claims],
            "figures": [f.to_dict() for f in self.figures],
            "mappings": self.mappings.to_dict(),
            "results": [r.to_dict() for r in self.results],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> Project:
        return cls(
            project_id=data["project_id"],
            name=data["name"],
            revision=data["revision"],
            created_at=data.get("created_at", ""),
            updated_at=data.get("updated_at", ""),
            claims_text=data.get("claims_text", ""),
            claims=[Claim.from_dict(c) for c in data.get("claims", [])],
            figures=[DrawingFigure.from_dict(f) for f in data.get("figures", [])],
            mappings=MappingSet.from_dict(data.get("mappings", {})),
            results=[
                GeneratedSpecification.from_dict(r) for r in data.get("results", [])
            ],
            warnings=list(data.get("warnings", [])),
        )

    def summary(self) -> dict:
        return {
            "project_id": self.project_id,
            "name": self.name,
            "revision": self.revision,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "claim_count": len(self.claims),
            "figure_count": len(self.figures),
            "mapping_count": len(self.mappings.entries),
            "result_count": len(self.results),
        }


def reconcile(project: Project) -> None:
    """Drop mapping entries and results whose references no longer exist."""
    feature_ids = {f.feature_id for f in all_features(project.claims)}
    component_refs = {c.ref for c in all_components(project.figures)}
    kept = []
    for entry in project.mappings.entries:
        if entry.feature_id in feature_ids and entry.component_ref in component_refs:
            kept.append(entry)
        elif entry.origin == "user":
            project.warnings.append(
                "dropped user mapping "
                f"{entry.feature_id[0]}.{entry.feature_id[1]} -> "
                f"{entry.component_ref[0]}:{entry.component_ref[1]}: "
                "referenced feature or component no longer exists"
            )
    project.mappings.entries = kept
    project.results = [
        r for r in project.results if tuple(r.feature_id) in feature_ids
    ]


class ProjectStore:
    """One JSON file per project under data_dir, with per-project write locks."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._registry_lock = threading.Lock()
        self._locks: dict[str, threading.RLock] = {}

    def _lock_for(self, project_id: str) -> threading.RLock:
        with self._registry_lock:
            return self._locks.setdefault(project_id, threading.RLock())

    def _path(self, project_id: str) -> Path:
        if not _PROJECT_ID_RE.match(project_id):
            raise UnknownProject(f"no such project: {project_id!r}")
        return self.data_dir / f"{project_id}.json"

    def _write(self, project: Project) -> None:
        path = self._path(project.project_id)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(
            json.dumps(project.to_dict(), ensure_ascii=False, sort_keys=True, indent=2)
            + "\n",
            encoding="utf-8",
        )
        os.replace(tmp, path)

    def create(self, name: str, project_id: str | None = None) -> Project:
        if not name or not name.strip():
            raise ValidationError("project name must be non-empty")
        project_id = project_id or uuid.uuid4().hex[:12]
        if not _PROJECT_ID_RE.match(project_id):
            raise ValidationError(f"bad project id: {project_id!r}")
        with self._lock_for(project_id):
            if self._path(project_id).exists():
                raise DuplicateId(f"project already exists: {project_id}")
            stamp = _now()
            project = Project(
                project_id=project_id, name=name.strip(),
                revision=1, created_at=stamp, updated_at=stamp,
            )
            self._write(project)
        return project

    def load(self, project_id: str) -> Project:
        path = self._path(project_id)
        with self._lock_for(project_id):
            if not path.exists():
                raise UnknownProject(f"no such project: {project_id}")
            return Project.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def list_projects(self) -> list[dict]:
        summaries = []
        for path in sorted(self.data_dir.glob("*.json")):
            if path.name.endswith(".tmp"):
                continue
            project_id = path.stem
            if not _PROJECT_ID_RE.match(project_id):
                continue
            try:
                summaries.append(self.load(project_id).summary())
            except (UnknownProject, json.JSONDecodeError, KeyError):
                continue
        return summaries

    def update(
        self,
        project_id: str,
        expected_revision: int,
        mutator: Callable[[Project], None],
    ) -> Project:
        """Apply a client mutation; the presented revision must be current."""
        with self._lock_for(project_id):
            project = self.load(project_id)
            if project.revision != expected_revision:
                raise RevisionConflict(
                    f"revision {expected_revision} is stale; "
                    f"current is {project.revision}"
                )
            mutator(project)
            reconcile(project)
            project.revision += 1
            project.updated_at = _now()
            self._write(project)
            return project

    def system_update(
        self, project_id: str, mutator: Callable[[Project], None]
    ) -> Project:
        """Apply an internal mutation (job completion) without a revision check."""
        with self._lock_for(project_id):
            project = self.load(project_id)
            mutator(project)
            reconcile(project)
            project.revision += 1
            project.updated_at = _now()
            self._write(project)
            return project

    def delete(self, project_id: str) -> None:
        path = self._path(project_id)
        with self._lock_for(project_id):
            if not path.exists():
                raise UnknownProject(f"no such project: {project_id}")
            path.unlink()

    def export_project(self, project_id: str) -> dict:
        return self.load(project_id).to_dict()

    def import_project(self, data: dict) -> Project:
        """Recreate a project from an export; the id must be free.

        The revision carries over unchanged so an export/import round-trip
        is field-identical apart from updated_at.
        """
        try:
            project = Project.from_dict(data)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"not a project export: {exc}") from exc
        if not _PROJECT_ID_RE.match(project.project_id):
            raise ValidationError(f"bad project id: {project.project_id!r}")
        with self._lock_for(project.project_id):
            if self._path(project.project_id).exists():
                raise DuplicateId(f"project already exists: {project.project_id}")
            reconcile(project)
            project.updated_at = _now()
            self._write(project)
            return project
