"""Read-only JSON API over exported artifacts.

The server owns no model state: every route answers from the JSON files
the export phase wrote, so responses are pure functions of the artifacts
and a rebuild that swaps the files atomically never mixes versions. The
tree route returns the exported bytes verbatim, which is what makes the
export/serve parity check meaningful.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException


class ApiError(Exception):
    """Error payload with a machine-readable reason."""

    def __init__(self, code: int, reason: str, message: str):
        super().__init__(message)
        self.code = code
        self.reason = reason
        self.message = message

    def payload(self) -> dict:
        return {"code": self.code, "reason": self.reason, "message": self.message}


class ArtifactStore:
    """Loads exported JSON documents from the artifacts directory."""

    def __init__(self, artifacts_dir: str | Path):
        self.dir = Path(artifacts_dir)

    def _load(self, name: str) -> dict:
        path = self.dir / name
        if not path.exists():
            raise ApiError(503, "artifacts_missing",
                           f"artifact {name} not found; run export first")
        with open(path) as fh:
            return json.load(fh)

    def tree_bytes(self) -> bytes:
        path = self.dir / "tree.json"
        if not path.exists():
            raise ApiError(503, "artifacts_missing",
                           "artifact tree.json not found; run export first")
        return path.read_bytes()

    def majors(self) -> dict:
        return self._load("majors.json")

    def major_graph(self, code: str) -> dict:
        path = self.dir / f"major_{code}.json"
        if not path.exists():
            known = {m["code"] for m in self.majors().get("majors", [])}
            if code in known:
                raise ApiError(404, "major_not_modeled",
                               f"major {code} exists but has no course graph "
                               "(too few graduates)")
            raise ApiError(404, "major_not_found", f"unknown major {code}")
        with open(path) as fh:
            return json.load(fh)

    def similarity(self) -> dict:
        return self._load("similarity.json")


def filter_graph_dict(doc: dict, threshold: float | None,
                      cores: int | None) -> dict:
    """Server-side re-filtering of an exported node-link scene.

    Drops edges below the threshold and re-flags the core set for the
    requested k; node geometry is untouched so the client's own filtering
    of the full export must agree exactly.
    """
    floor = doc.get("edge_floor", 0.0)
    if threshold is None:
        threshold = floor
    if threshold < floor:
        raise ApiError(400, "threshold_below_floor",
                       f"threshold {threshold} is below the exported floor {floor}")
    k = doc.get("core_count", 6) if cores is None else cores
    if k < 1:
        raise ApiError(400, "invalid_core_count", "cores must be at least 1")
    out = dict(doc)
    out["core_count"] = k
    out["threshold"] = threshold
    out["edges"] = [e for e in doc["edges"] if e["c_value"] >= threshold]
    out["courses"] = [{**c, "core": c["core_rank"] <= k} for c in doc["courses"]]
    return out


def create_app(artifacts_dir: str | Path) -> FastAPI:
    store = ArtifactStore(artifacts_dir)
    app = FastAPI(title="campusflow", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def _api_error(request, exc: ApiError):
        return JSONResponse(status_code=exc.code, content=exc.payload())

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request, exc: StarletteHTTPException):
        reason = "route_not_found" if exc.status_code == 404 else "http_error"
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.status_code, "reason": reason,
                                     "message": str(exc.detail)})

    @app.get("/api/majors")
    def majors():
        return store.majors()

    @app.get("/api/tree")
    def tree():
        return Response(content=store.tree_bytes(),
                        media_type="application/json")

    @app.get("/api/major/{code}/graph")
    def major_graph(code: str, threshold: float | None = None,
                    cores: int | None = None):
        doc = store.major_graph(code)
        return filter_graph_dict(doc, threshold, cores)

    @app.get("/api/major/{code}/course/{course_id}")
    def course_detail(code: str, course_id: str):
        doc = store.major_graph(code)
        for course in doc["courses"]:
            if course["id"] == course_id:
                return {
                    "major": code,
                    "course": course_id,
                    "enrollment": course["enrollment"],
                    "failure_rate": course["failure_rate"],
                    "gender": course["gender"],
                    "histogram": course["histogram"],
                }
        raise ApiError(404, "course_not_found",
                       f"course {course_id} not in {code}'s graph")

    @app.get("/api/similarity/{code}")
    def similarity(code: str):
        doc = store.similarity()
        majors_list = doc.get("majors", [])
        if code not in majors_list:
            raise ApiError(404, "major_not_found", f"unknown major {code}")
        i = majors_list.index(code)
        return {
            "schema_version": doc.get("schema_version", 1),
            "major": code,
            "majors": majors_list,
            "values": doc["aggregate"][i],
            "stages": {str(s["stage"]): s["values"][i] for s in doc["stages"]},
        }

    return app


def serve(artifacts_dir: str | Path, port: int = 8000, host: str = "127.0.0.1",
          static_dir: str | Path | None = None) -> None:
    """Run the API with uvicorn; optionally serve a static UI at /."""
    import uvicorn

    app = create_app(artifacts_dir)
    if static_dir is not None:
        from starlette.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="static")
    uvicorn.run(app, host=host, port=port)
