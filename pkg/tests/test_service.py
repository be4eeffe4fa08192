"""HTTP API contract tests using the in-process test client."""

from __future__ import annotations

import time

import pytest
from fastapi.testclient import TestClient

from patentforge.config import ServiceConfig
from patentforge.service import create_app

CLAIMS_TEXT = """1. A system comprising:
a processor configured to parse records;
a memory storing the records; and
a network interface transmitting the records.
2. The system of claim 1, wherein the memory deduplicates the records.
"""

DRAWING_PAGE = """FIG. 1
processor 102
memory 104
network interface 106
"""


@pytest.fixture()
def client(tmp_path):
    app = create_app(ServiceConfig(data_dir=str(tmp_path / "data")))
    with TestClient(app) as c:
        yield c


def make_project(client, name="Test Project"):
    response = client.post("/projects", json={"name": name})
    assert response.status_code == 201
    return response.json()


def upload_fixture(client, project_id, revision):
    response = client.post(
        f"/projects/{project_id}/claims",
        json={"claims_text": CLAIMS_TEXT, "revision": revision},
    )
    assert response.status_code == 200
    revision = response.json()["revision"]
    response = client.post(
        f"/projects/{project_id}/drawings",
        json={"pages": [DRAWING_PAGE], "revision": revision},
    )
    assert response.status_code == 200
    return response.json()


def wait_for_job(client, project_id, job_id, deadline=10.0):
    end = time.time() + deadline
    while time.time() < end:
        response = client.get(f"/projects/{project_id}/jobs/{job_id}")
        assert response.status_code == 200
        job = response.json()
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.02)
    raise AssertionError("job did not settle in time")


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_project_lifecycle(client):
    project = make_project(client)
    assert project["revision"] == 1

    listing = client.get("/projects").json()
    assert [p["project_id"] for p in listing["projects"]] == [project["project_id"]]

    fetched = client.get(f"/projects/{project['project_id']}").json()
    assert fetched["name"] == "Test Project"

    assert client.delete(f"/projects/{project['project_id']}").status_code == 204
    assert client.get(f"/projects/{project['project_id']}").status_code == 404


def test_create_with_duplicate_id_conflicts(client):
    client.post("/projects", json={"name": "a", "project_id": "fixed-id"})
    response = client.post("/projects", json={"name": "b", "project_id": "fixed-id"})
    assert response.status_code == 409
    assert response.json()["error"] == "DuplicateId"


def test_claims_upload_parses_and_bumps_revision(client):
    project = make_project(client)
    response = client.post(
        f"/projects/{project['project_id']}/claims",
        json={"claims_text": CLAIMS_TEXT, "revision": 1},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["revision"] == 2
    assert len(body["claims"]) == 2
    assert body["claims"][0]["features"][0]["enriched_text"].startswith("<claim 1><feature 0>")


def test_claims_parse_error_is_422_and_atomic(client):
    project = make_project(client)
    before = client.get(f"/projects/{project['project_id']}/export").json()
    response = client.post(
        f"/projects/{project['project_id']}/claims",
        json={"claims_text": "1. A method comprising: a.\n1. A method comprising: b.\n", "revision": 1},
    )
    assert response.status_code == 422
    body = response.json()
    assert body["error"] == "MalformedNumbering"
    assert body["line"] == 2
    after = client.get(f"/projects/{project['project_id']}/export").json()
    assert after == before


def test_claims_stale_revision_conflicts(client):
    project = make_project(client)
    upload_fixture(client, project["project_id"], 1)
    response = client.post(
        f"/projects/{project['project_id']}/claims",
        json={"claims_text": CLAIMS_TEXT, "revision": 1},
    )
    assert response.status_code == 409
    assert response.json()["error"] == "RevisionConflict"


def test_drawings_upload_extracts_components(client):
    project = make_project(client)
    state = upload_fixture(client, project["project_id"], 1)
    figure = state["figures"][0]
    assert figure["figure_number"] == 1
    assert [c["number"] for c in figure["components"]] == ["102", "104", "106"]
    # suggestions were refreshed on upload and persisted with the project
    assert state["mappings"]["entries"]


def test_drawings_accept_labeled_page_objects(client):
    project = make_project(client)
    response = client.post(
        f"/projects/{project['project_id']}/drawings",
        json={
            "pages": [{"source_label": "sheet-A", "raw_text": "FIG. 3 antenna 304"}],
            "revision": 1,
        },
    )
    assert response.status_code == 200
    assert response.json()["figures"][0]["source_label"] == "sheet-A"


def test_drawings_duplicate_figure_number_is_422(client):
    project = make_project(client)
    response = client.post(
        f"/projects/{project['project_id']}/drawings",
        json={"pages": ["FIG. 1 memory 104", "FIG. 1 bus 208"], "revision": 1},
    )
    assert response.status_code == 422
    assert response.json()["error"] == "DuplicateFigureNumber"


def test_drawings_reject_malformed_page_entries(client):
    project = make_project(client)
    response = client.post(
        f"/projects/{project['project_id']}/drawings",
        json={"pages": [{"wrong": "shape"}], "revision": 1},
    )
    assert response.status_code == 422
    assert response.json()["error"] == "ValidationError"


def test_suggestions_persisted_and_ephemeral(client):
    project = make_project(client)
    project_id = project["project_id"]
    upload_fixture(client, project_id, 1)

    persisted = client.get(f"/projects/{project_id}/suggestions").json()
    assert persisted["ephemeral"] is False
    assert persisted["threshold"] == 0.1
    assert persisted["k"] == 5
    memory_feature = next(
        f for f in persisted["features"] if f["feature_id"] == [1, 1]
    )
    assert any(
        e["component_ref"] == [1, "104"] and e["component_name"] == "memory"
        for e in memory_feature["entries"]
    )

    overridden = client.get(
        f"/projects/{project_id}/suggestions", params={"threshold": 0.0, "k": 1}
    ).json()
    assert overridden["ephemeral"] is True
    assert all(len(f["entries"]) <= 1 for f in overridden["features"])

    # the override did not persist anything
    after = client.get(f"/projects/{project_id}/suggestions").json()
    assert after == persisted


def test_put_mapping_confirms_user_entry(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    response = client.put(
        f"/projects/{project_id}/mappings",
        json={"feature_id": [1, 0], "component_ref": [1, "104"], "revision": state["revision"]},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["entry"]["origin"] == "user"
    assert body["revision"] == state["revision"] + 1


def test_put_mapping_unknown_refs_404(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    response = client.put(
        f"/projects/{project_id}/mappings",
        json={"feature_id": [9, 9], "component_ref": [1, "104"], "revision": state["revision"]},
    )
    assert response.status_code == 404
    assert response.json()["error"] == "UnknownFeature"


def test_put_mapping_stale_revision_conflicts(client):
    project = make_project(client)
    project_id = project["project_id"]
    upload_fixture(client, project_id, 1)
    response = client.put(
        f"/projects/{project_id}/mappings",
        json={"feature_id": [1, 0], "component_ref": [1, "104"], "revision": 1},
    )
    assert response.status_code == 409


def test_delete_mapping_then_noop(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    revision = state["revision"]
    put = client.put(
        f"/projects/{project_id}/mappings",
        json={"feature_id": [1, 0], "component_ref": [1, "102"], "revision": revision},
    )
    revision = put.json()["revision"]

    removed = client.delete(
        f"/projects/{project_id}/mappings",
        params={"feature": "1.0", "component": "1:102", "revision": revision},
    )
    assert removed.status_code == 200
    assert removed.json()["removed"] is True
    revision = removed.json()["revision"]

    again = client.delete(
        f"/projects/{project_id}/mappings",
        params={"feature": "1.0", "component": "1:102", "revision": revision},
    )
    assert again.status_code == 200
    assert again.json() == {"removed": False, "revision": revision}


def test_delete_mapping_stale_revision_conflicts(client):
    project = make_project(client)
    project_id = project["project_id"]
    upload_fixture(client, project_id, 1)
    response = client.delete(
        f"/projects/{project_id}/mappings",
        params={"feature": "1.0", "component": "1:104", "revision": 999},
    )
    assert response.status_code == 409


def test_patch_figure_brief_description(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    response = client.patch(
        f"/projects/{project_id}/figures/1",
        json={"brief_description": "a block diagram", "revision": state["revision"]},
    )
    assert response.status_code == 200
    figure = response.json()["figures"][0]
    assert figure["brief_description"] == "a block diagram"
    assert figure["enriched_description"] == "<desc 1> a block diagram </desc>"


def test_patch_unknown_figure_404(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    response = client.patch(
        f"/projects/{project_id}/figures/9",
        json={"brief_description": "x", "revision": state["revision"]},
    )
    assert response.status_code == 404


def test_patch_component_rename_marks_user_entry_stale(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    put = client.put(
        f"/projects/{project_id}/mappings",
        json={"feature_id": [1, 1], "component_ref": [1, "104"], "revision": state["revision"]},
    )
    revision = put.json()["revision"]

    response = client.patch(
        f"/projects/{project_id}/figures/1/components/104",
        json={"name": "primary buffer", "revision": revision},
    )
    assert response.status_code == 200
    body = response.json()
    renamed = next(
        c for c in body["figures"][0]["components"] if c["number"] == "104"
    )
    assert renamed["name"] == "primary buffer"
    entry = next(
        e
        for e in body["mappings"]["entries"]
        if e["origin"] == "user" and e["component_ref"] == [1, "104"]
    )
    assert entry["stale"] is True


def test_patch_component_renumber_conflict_is_422(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    response = client.patch(
        f"/projects/{project_id}/figures/1/components/104",
        json={"number": "102", "revision": state["revision"]},
    )
    assert response.status_code == 422


def test_generation_round_trip(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    revision = state["revision"]
    for feature_id, ref in [([1, 0], [1, "102"]), ([1, 1], [1, "104"])]:
        response = client.put(
            f"/projects/{project_id}/mappings",
            json={"feature_id": feature_id, "component_ref": ref, "revision": revision},
        )
        revision = response.json()["revision"]

    accepted = client.post(
        f"/projects/{project_id}/generate", json={"revision": revision}
    )
    assert accepted.status_code == 202
    job = wait_for_job(client, project_id, accepted.json()["job_id"])
    assert job["status"] == "done"
    assert job["result_statuses"]["ok"] == 5
    assert job["summary"]["count"] == 5

    spec = client.get(f"/projects/{project_id}/specification").json()
    assert len(spec["results"]) == 5
    assert "memory 104" in spec["document"]
    assert "FIG. 1" in spec["document"]

    text = client.get(f"/projects/{project_id}/specification.txt").text
    assert text.startswith("[0001]")
    assert text.endswith("\n")

    as_json = client.get(f"/projects/{project_id}/specification.json").json()
    assert as_json == spec


def test_generation_subset_and_revision_checks(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)

    stale = client.post(f"/projects/{project_id}/generate", json={"revision": 1})
    assert stale.status_code == 409

    missing = client.post(
        f"/projects/{project_id}/generate",
        json={"revision": state["revision"], "feature_ids": [[9, 9]]},
    )
    assert missing.status_code == 404

    subset = client.post(
        f"/projects/{project_id}/generate",
        json={"revision": state["revision"], "feature_ids": [[1, 0]]},
    )
    assert subset.status_code == 202
    job = wait_for_job(client, project_id, subset.json()["job_id"])
    assert job["status"] == "done"
    assert job["requested"] == 1
    results = client.get(f"/projects/{project_id}/specification").json()["results"]
    assert [r["feature_id"] for r in results] == [[1, 0]]


def test_generation_unknown_backend_fails_the_job(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    accepted = client.post(
        f"/projects/{project_id}/generate",
        json={"revision": state["revision"], "backend": "nope"},
    )
    assert accepted.status_code == 202
    job = wait_for_job(client, project_id, accepted.json()["job_id"])
    assert job["status"] == "failed"
    assert "UnknownBackend" in job["error"]


def test_generation_empty_project_is_422(client):
    project = make_project(client)
    response = client.post(
        f"/projects/{project['project_id']}/generate", json={"revision": 1}
    )
    assert response.status_code == 422


def test_unknown_job_404(client):
    project = make_project(client)
    response = client.get(f"/projects/{project['project_id']}/jobs/nope")
    assert response.status_code == 404
    assert client.get("/projects/ghost/jobs/nope").status_code == 404


def test_reupload_clears_results(client):
    project = make_project(client)
    project_id = project["project_id"]
    state = upload_fixture(client, project_id, 1)
    accepted = client.post(
        f"/projects/{project_id}/generate", json={"revision": state["revision"]}
    )
    wait_for_job(client, project_id, accepted.json()["job_id"])
    current = client.get(f"/projects/{project_id}").json()
    assert current["results"]

    response = client.post(
        f"/projects/{project_id}/claims",
        json={"claims_text": CLAIMS_TEXT, "revision": current["revision"]},
    )
    assert response.json()["results"] == []


def test_export_import_round_trip(client):
    project = make_project(client)
    project_id = project["project_id"]
    upload_fixture(client, project_id, 1)
    exported = client.get(f"/projects/{project_id}/export").json()

    assert client.delete(f"/projects/{project_id}").status_code == 204
    imported = client.post("/projects/import", json={"project": exported})
    assert imported.status_code == 201
    assert imported.json()["revision"] == exported["revision"]

    round_tripped = client.get(f"/projects/{project_id}/export").json()
    drop = lambda d: {k: v for k, v in d.items() if k != "updated_at"}  # noqa: E731
    assert drop(round_tripped) == drop(exported)


def test_auth_token_gate(tmp_path):
    app = create_app(
        ServiceConfig(data_dir=str(tmp_path / "data"), auth_token="hunter2")
    )
    with TestClient(app) as client:
        assert client.get("/projects").status_code == 401
        assert client.get(
            "/projects", headers={"Authorization": "Bearer wrong"}
        ).status_code == 401
        assert client.get(
            "/projects", headers={"Authorization": "Bearer hunter2"}
        ).status_code == 200


def test_static_ui_mount(tmp_path):
    ui_dir = tmp_path / "ui"
    ui_dir.mkdir()
    (ui_dir / "index.html").write_text("<h1>mapping console</h1>")
    app = create_app(
        ServiceConfig(data_dir=str(tmp_path / "data"), frontend_dir=str(ui_dir))
    )
    with TestClient(app) as client:
        response = client.get("/ui/")
        assert response.status_code == 200
        assert "mapping console" in response.text
