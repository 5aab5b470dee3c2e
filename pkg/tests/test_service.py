import json
import time

from fastapi.testclient import TestClient

from gridgen import CRS
from syngrid import model
from syngrid.service import create_app


def boundary_geojson(ring):
    closed = list(ring) + [ring[0]]
    return {"type": "Polygon", "coordinates": [[list(p) for p in closed]]}


def village_request(small_village):
    xml, boundary = small_village
    return {
        "params": {"crs_code": CRS, "radius_m": 400.0, "seed": 3},
        "boundary": boundary_geojson(boundary),
        "osm_xml": xml,
    }


def wait_done(client, job_id, timeout=90.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(f"/jobs/{job_id}").json()
        if doc["status"] in ("done", "failed"):
            return doc
        time.sleep(0.1)
    raise TimeoutError("job did not finish")


def test_job_lifecycle_end_to_end(tmp_path, small_village):
    app = create_app(job_dir=tmp_path / "jobs", workers=1)
    client = TestClient(app)

    assert client.get("/healthz").json() == {"ok": True}

    resp = client.post("/jobs", json=village_request(small_village))
    assert resp.status_code == 202
    job_id = resp.json()["job_id"]

    doc = wait_done(client, job_id)
    assert doc["status"] == "done", doc
    assert doc["report"]["lv_grid_count"] >= 1

    grid_resp = client.get(f"/jobs/{job_id}/grid")
    assert grid_resp.status_code == 200
    assert grid_resp.headers["content-type"].startswith("application/json")
    grid = model.load(grid_resp.content)  # schema-valid by construction

    geo_resp = client.get(f"/jobs/{job_id}/geojson")
    assert geo_resp.status_code == 200
    assert geo_resp.headers["content-type"].startswith("application/geo+json")
    features = json.loads(geo_resp.content)["features"]
    assert len(features) == (len(grid.buses) + len(grid.lines)
                             + len(grid.transformers))

    analysis = client.get(f"/jobs/{job_id}/analysis").json()
    assert analysis["power_flow"]["converged"] is True
    assert analysis["metrics"]["lv_grid_count"] == doc["report"]["lv_grid_count"]
    assert analysis["short_circuit"]["rows"]


def test_schema_violation_cites_field(tmp_path, small_village):
    app = create_app(job_dir=tmp_path / "jobs", workers=0)
    client = TestClient(app)
    body = village_request(small_village)
    body["params"]["pv_penetration"] = 1.5
    resp = client.post("/jobs", json=body)
    assert resp.status_code == 400
    assert "pv_penetration" in resp.json()["field"]


def test_duplicate_submission_gets_new_job(tmp_path, small_village):
    app = create_app(job_dir=tmp_path / "jobs", workers=0)
    client = TestClient(app)
    body = village_request(small_village)
    a = client.post("/jobs", json=body).json()["job_id"]
    b = client.post("/jobs", json=body).json()["job_id"]
    assert a != b


def test_queue_full_gives_429(tmp_path, small_village):
    app = create_app(job_dir=tmp_path / "jobs", workers=0, queue_limit=1)
    client = TestClient(app)
    body = village_request(small_village)
    assert client.post("/jobs", json=body).status_code == 202
    resp = client.post("/jobs", json=body)
    assert resp.status_code == 429


def test_unknown_job_404(tmp_path):
    app = create_app(job_dir=tmp_path / "jobs", workers=0)
    client = TestClient(app)
    assert client.get("/jobs/nope").status_code == 404
    assert client.get("/jobs/nope/grid").status_code == 404


def test_artifacts_before_done_409(tmp_path, small_village):
    app = create_app(job_dir=tmp_path / "jobs", workers=0)
    client = TestClient(app)
    job_id = client.post("/jobs", json=village_request(small_village)).json()["job_id"]
    resp = client.get(f"/jobs/{job_id}/grid")
    assert resp.status_code == 409


def test_failed_job_analysis_409_with_stage_error(tmp_path, small_village):
    app = create_app(job_dir=tmp_path / "jobs", workers=1)
    client = TestClient(app)
    body = village_request(small_village)
    body["osm_xml"] = "<osm version='0.6'></osm>"  # no buildings anywhere
    job_id = client.post("/jobs", json=body).json()["job_id"]
    doc = wait_done(client, job_id)
    assert doc["status"] == "failed"
    assert "no polytope contains buildings" in doc["error"]
    resp = client.get(f"/jobs/{job_id}/analysis")
    assert resp.status_code == 409
    assert "no polytope contains buildings" in resp.json()["detail"]


def test_restart_reconciles_running_to_failed(tmp_path):
    jobs = tmp_path / "jobs"
    stale = jobs / "11111111-1111-1111-1111-111111111111"
    stale.mkdir(parents=True)
    (stale / "params.json").write_text("{}")
    (stale / "status.json").write_text(json.dumps({"status": "running"}))
    (stale / "worker.lock").write_text("")

    app = create_app(job_dir=jobs, workers=0)
    client = TestClient(app)
    doc = client.get(f"/jobs/{stale.name}").json()
    assert doc["status"] == "failed"
    assert "restart" in doc["error"]


def test_done_jobs_survive_restart(tmp_path, small_village):
    jobs = tmp_path / "jobs"
    app = create_app(job_dir=jobs, workers=1)
    client = TestClient(app)
    job_id = client.post("/jobs", json=village_request(small_village)).json()["job_id"]
    assert wait_done(client, job_id)["status"] == "done"

    app2 = create_app(job_dir=jobs, workers=0)  # simulated restart
    client2 = TestClient(app2)
    assert client2.get(f"/jobs/{job_id}").json()["status"] == "done"
    assert client2.get(f"/jobs/{job_id}/grid").status_code == 200


def test_deleted_job_dir_gives_404(tmp_path, small_village):
    import shutil

    jobs = tmp_path / "jobs"
    app = create_app(job_dir=jobs, workers=1)
    client = TestClient(app)
    job_id = client.post("/jobs", json=village_request(small_village)).json()["job_id"]
    wait_done(client, job_id)
    shutil.rmtree(jobs / job_id)
    assert client.get(f"/jobs/{job_id}/grid").status_code == 404
