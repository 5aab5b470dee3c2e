"""HTTP job service: submit generation jobs, poll status, fetch artifacts.

Jobs persist as plain directories (``jobs/<id>/``) holding the request,
a status file and, once done, the grid / GeoJSON / analysis artifacts.
No database: a restart rescans the directories, re-queues queued jobs and
marks jobs that were mid-flight as failed with a restart note. A lock
file per job keeps processing at-most-once across workers.

Environment: ``SYNGRID_BIND`` (host:port), ``SYNGRID_JOB_DIR``,
``SYNGRID_OVERPASS_URL``, ``SYNGRID_WORKERS``.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import threading
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from .geodata import fetch_overpass, parse_osm
from .metrics import metrics_report
from .model import save, to_geojson
from .pipeline import (GenerationError, GenerationParams, ParamsError,
                       cf_table_for, generate)
from .profiles import table_to_json
from .solver import (fault_report_to_dict, power_flow, short_circuit,
                     solve_report_to_dict)

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 2
DEFAULT_QUEUE_LIMIT = 64


class BoundaryPolygon(BaseModel):
    type: str
    coordinates: list[list[list[float]]]

    @field_validator("type")
    @classmethod
    def _must_be_polygon(cls, v: str) -> str:
        if v != "Polygon":
            raise ValueError("boundary must be a GeoJSON Polygon")
        return v

    @field_validator("coordinates")
    @classmethod
    def _ring_shape(cls, v):
        if not v or len(v[0]) < 4:
            raise ValueError("polygon ring needs at least 4 positions")
        return v

    def ring(self) -> list[tuple[float, float]]:
        return [(float(lon), float(lat)) for lon, lat in self.coordinates[0]]


class JobParams(BaseModel):
    crs_code: int
    radius_m: float = Field(default=400.0, gt=0)
    lv_kv: float = Field(default=0.4, gt=0)
    mv_kv: float = Field(default=16.0, gt=0)
    hv_kv: float = Field(default=110.0, gt=0)
    m2_per_customer: float = Field(default=50.0, gt=0)
    pv_penetration: float = Field(default=0.10, ge=0.0, le=1.0)
    s_r_kva: float = Field(default=5.0, gt=0)
    cod: float = Field(default=1.25, ge=1.0)
    typical_drop_pct_per_km: float = Field(default=5.0, gt=0)
    seed: int = 0
    cf_seed: int = 24061
    cf_pool_size: int = Field(default=256, ge=64)
    cf_repetitions: int = Field(default=200, ge=1)
    mv_offset_m: tuple[float, float] = (25.0, 25.0)


class JobRequest(BaseModel):
    params: JobParams
    boundary: BoundaryPolygon
    osm_xml: Optional[str] = None


class JobStore:
    """Directory-per-job persistence with atomic status updates."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def job_dir(self, job_id: str) -> Path:
        return self.root / job_id

    def exists(self, job_id: str) -> bool:
        return (self.job_dir(job_id) / "status.json").exists()

    def create(self, job_id: str, request_doc: dict) -> None:
        d = self.job_dir(job_id)
        d.mkdir(parents=True)
        (d / "params.json").write_text(json.dumps(request_doc, indent=1))
        self.set_status(job_id, {"status": "queued"})

    def set_status(self, job_id: str, doc: dict) -> None:
        path = self.job_dir(job_id) / "status.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, indent=1))
        tmp.replace(path)

    def status(self, job_id: str) -> dict | None:
        path = self.job_dir(job_id) / "status.json"
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def request_doc(self, job_id: str) -> dict:
        return json.loads((self.job_dir(job_id) / "params.json").read_text())

    def write_artifact(self, job_id: str, name: str, data: bytes) -> None:
        (self.job_dir(job_id) / name).write_bytes(data)

    def artifact(self, job_id: str, name: str) -> Path:
        return self.job_dir(job_id) / name

    def try_lock(self, job_id: str) -> bool:
        try:
            fd = os.open(self.job_dir(job_id) / "worker.lock",
                         os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            return False
        os.close(fd)
        return True

    def unlock(self, job_id: str) -> None:
        try:
            os.unlink(self.job_dir(job_id) / "worker.lock")
        except FileNotFoundError:
            pass

    def reconcile(self) -> list[str]:
        """Post-restart sweep: interrupted jobs fail, queued jobs re-queue."""
        requeue = []
        for d in sorted(self.root.iterdir()) if self.root.exists() else []:
            status_file = d / "status.json"
            if not d.is_dir() or not status_file.exists():
                continue
            doc = json.loads(status_file.read_text())
            if doc.get("status") == "running":
                self.unlock(d.name)
                self.set_status(d.name, {
                    "status": "failed",
                    "error": "interrupted by service restart",
                })
            elif doc.get("status") == "queued":
                self.unlock(d.name)
                requeue.append(d.name)
        return requeue


class JobRunner:
    def __init__(self, store: JobStore, overpass_url: str | None,
                 workers: int = DEFAULT_WORKERS,
                 queue_limit: int = DEFAULT_QUEUE_LIMIT):
        self.store = store
        self.overpass_url = overpass_url
        self.queue: queue.Queue[str] = queue.Queue(maxsize=queue_limit)
        self.threads = [threading.Thread(target=self._worker, daemon=True,
                                         name=f"syngrid-worker-{i}")
                        for i in range(workers)]
        for t in self.threads:
            t.start()

    def submit(self, job_id: str) -> bool:
        try:
            self.queue.put_nowait(job_id)
            return True
        except queue.Full:
            return False

    def _worker(self) -> None:
        while True:
            job_id = self.queue.get()
            try:
                if self.store.try_lock(job_id):
                    try:
                        self._run(job_id)
                    finally:
                        self.store.unlock(job_id)
            except Exception:
                logger.exception("job %s crashed", job_id)
                self.store.set_status(job_id, {"status": "failed",
                                               "error": "internal error"})
            finally:
                self.queue.task_done()

    def _run(self, job_id: str) -> None:
        store = self.store
        store.set_status(job_id, {"status": "running"})
        doc = store.request_doc(job_id)
        try:
            params_doc = dict(doc["params"])
            params_doc["boundary"] = doc["boundary_ring"]
            params = GenerationParams.from_dict(params_doc)
            osm_xml = doc.get("osm_xml")
            if osm_xml is None:
                raw = fetch_overpass(params.boundary,
                                     endpoint=self.overpass_url
                                     or "https://overpass-api.de/api/interpreter",
                                     cache_dir=store.root / "overpass-cache")
            else:
                raw = osm_xml.encode("utf-8")
            dataset = parse_osm(raw, params.boundary, params.crs_code)
            grid, report = generate(params, dataset)

            flow = power_flow(grid)
            fault = short_circuit(grid)
            analysis = {
                "power_flow": solve_report_to_dict(flow),
                "short_circuit": fault_report_to_dict(fault),
                "metrics": metrics_report(grid),
            }
            store.write_artifact(job_id, "grid.json", save(grid))
            store.write_artifact(job_id, "grid.geojson", to_geojson(grid))
            store.write_artifact(job_id, "cf_table.json",
                                 table_to_json(cf_table_for(params)).encode())
            store.write_artifact(job_id, "analysis.json",
                                 json.dumps(analysis, indent=1).encode())
            store.write_artifact(job_id, "report.json",
                                 json.dumps(report.to_dict(), indent=1).encode())
            store.set_status(job_id, {"status": "done",
                                      "report": report.to_dict()})
        except (ParamsError, GenerationError, ValueError) as exc:
            store.set_status(job_id, {"status": "failed", "error": str(exc)})


def create_app(job_dir: str | Path = "jobs",
               overpass_url: str | None = None,
               workers: int = DEFAULT_WORKERS,
               queue_limit: int = DEFAULT_QUEUE_LIMIT) -> FastAPI:
    store = JobStore(job_dir)
    app = FastAPI(title="syngrid", version="0.1.0")
    app.state.store = store

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )

    runner = JobRunner(store, overpass_url, workers, queue_limit)
    app.state.runner = runner
    for job_id in store.reconcile():
        runner.submit(job_id)

    @app.exception_handler(RequestValidationError)
    async def schema_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        field = ".".join(str(p) for p in first["loc"] if p != "body")
        return JSONResponse(status_code=400, content={
            "error": first["msg"], "field": field,
        })

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/jobs", status_code=202)
    def submit_job(job: JobRequest):
        job_id = str(uuid.uuid4())
        doc = {
            "params": job.params.model_dump(),
            "boundary": job.boundary.model_dump(),
            "boundary_ring": job.boundary.ring(),
        }
        if job.osm_xml is not None:
            doc["osm_xml"] = job.osm_xml
        store.create(job_id, doc)
        if not runner.submit(job_id):
            store.set_status(job_id, {"status": "failed",
                                      "error": "queue full"})
            return JSONResponse(status_code=429,
                                content={"error": "job queue is full"})
        return {"job_id": job_id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        doc = store.status(job_id)
        if doc is None:
            return JSONResponse(status_code=404,
                                content={"error": f"unknown job {job_id}"})
        return doc

    def _artifact_response(job_id: str, name: str, media_type: str):
        doc = store.status(job_id)
        if doc is None:
            logger.warning("artifact request for missing job %s", job_id)
            return JSONResponse(status_code=404,
                                content={"error": f"unknown job {job_id}"})
        if doc["status"] != "done":
            return JSONResponse(status_code=409, content={
                "error": f"job is {doc['status']}, artifacts not available",
                "detail": doc.get("error"),
            })
        path = store.artifact(job_id, name)
        if not path.exists():
            logger.warning("artifact %s missing on disk for job %s", name, job_id)
            return JSONResponse(status_code=404,
                                content={"error": f"artifact {name} missing"})
        return Response(content=path.read_bytes(), media_type=media_type)

    @app.get("/jobs/{job_id}/grid")
    def job_grid(job_id: str):
        return _artifact_response(job_id, "grid.json", "application/json")

    @app.get("/jobs/{job_id}/geojson")
    def job_geojson(job_id: str):
        return _artifact_response(job_id, "grid.geojson", "application/geo+json")

    @app.get("/jobs/{job_id}/analysis")
    def job_analysis(job_id: str):
        return _artifact_response(job_id, "analysis.json", "application/json")

    return app


def main() -> None:
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    bind = os.environ.get("SYNGRID_BIND", "127.0.0.1:8000")
    host, _, port = bind.partition(":")
    app = create_app(
        job_dir=os.environ.get("SYNGRID_JOB_DIR", "jobs"),
        overpass_url=os.environ.get("SYNGRID_OVERPASS_URL"),
        workers=int(os.environ.get("SYNGRID_WORKERS", DEFAULT_WORKERS)),
    )
    uvicorn.run(app, host=host, port=int(port or 8000))


if __name__ == "__main__":
    main()
