"""Walk the HTTP API end to end with an in-process client.

The same flow works against `patentforge serve` with any HTTP client; the
in-process test client just keeps the demo self-contained.

Run with: python3 demos/06_drive_the_service.py
"""

import tempfile
import time

from fastapi.testclient import TestClient

from patentforge.config import ServiceConfig
from patentforge.service import create_app

CLAIMS = """1. A data capture system comprising:
a processor executing capture logic;
a memory holding captured frames.
2. The system of claim 1, wherein a network interface streams the frames.
"""

with tempfile.TemporaryDirectory() as workdir:
    app = create_app(ServiceConfig(data_dir=workdir))
    client = TestClient(app)

    project = client.post("/projects", json={"name": "capture system"}).json()
    pid = project["project_id"]
    print(f"created project {pid} at revision {project['revision']}")

    # Every write carries the current revision; the service bumps it.
    state = client.post(
        f"/projects/{pid}/claims",
        json={"claims_text": CLAIMS, "revision": project["revision"]},
    ).json()
    state = client.post(
        f"/projects/{pid}/drawings",
        json={
            "pages": ["FIG. 1\nprocessor 102\nmemory 104\nnetwork interface 106"],
            "revision": state["revision"],
        },
    ).json()
    print(f"after uploads: revision {state['revision']}, "
          f"{len(state['mappings']['entries'])} suggested mapping(s)")

    # A stale revision is rejected with 409 and changes nothing.
    conflict = client.post(
        f"/projects/{pid}/claims", json={"claims_text": CLAIMS, "revision": 1}
    )
    print(f"stale write -> {conflict.status_code} {conflict.json()['error']}")

    # Confirm one mapping by hand, then kick off generation.
    put = client.put(
        f"/projects/{pid}/mappings",
        json={"feature_id": [2, 1], "component_ref": [1, "106"],
              "revision": state["revision"]},
    ).json()
    job = client.post(
        f"/projects/{pid}/generate",
        json={"revision": put["revision"], "backend": "mock"},
    ).json()
    print(f"job {job['job_id']} accepted")

    while True:
        job = client.get(f"/projects/{pid}/jobs/{job['job_id']}").json()
        if job["status"] in ("done", "failed"):
            break
        time.sleep(0.05)
    print(f"job finished: {job['status']} {job['result_statuses']}")

    document = client.get(f"/projects/{pid}/specification.txt").text
    print()
    print(document)
