"""HTTP service for the annotation workflow.

Endpoints
---------
GET    /layouts        all built-in skeleton layouts, full definitions
POST   /lift           lift one annotated 2D pose; body is validated by hand
                       so malformed input gets a 400 with a stable error code
GET    /seeds          ids of stored seed files
POST   /seeds          store a seed file; the raw bytes are kept verbatim and
                       the id is the first 12 hex chars of their sha256
GET    /seeds/{id}     the stored bytes, unchanged
DELETE /seeds/{id}

The /lift response body is produced by the same canonical serializer the CLI
uses, so a given annotation yields identical bytes through either interface.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .errors import MissingSign, NoRealSolution, PoseSynthError
from .layouts import builtin_layout_ids, get_layout
from .poseio import atomic_write, lift_result_bytes
from .seedlift import AnnotatedPose2D, HeadTriangleSpec, lift

_ID_RE = re.compile(r"^[0-9a-f]{12}$")


def _error(status: int, code: str, message: str, **details) -> JSONResponse:
    body = {"error": {"code": code, "message": message}}
    if details:
        body["error"].update(details)
    return JSONResponse(status_code=status, content=body)


class SeedStore:
    """Byte-exact storage of posted seed files, file-backed or in-memory."""

    def __init__(self, directory=None):
        self.directory = directory
        self._mem: dict[str, bytes] = {}
        self._lock = threading.Lock()
        if directory is not None:
            os.makedirs(directory, exist_ok=True)

    @staticmethod
    def key_for(data: bytes) -> str:
        return hashlib.sha256(data).hexdigest()[:12]

    def _path(self, key: str) -> str:
        return os.path.join(self.directory, key + ".json")

    def put(self, data: bytes) -> str:
        key = self.key_for(data)
        with self._lock:
            if self.directory is None:
                self._mem[key] = data
            else:
                atomic_write(self._path(key), data)
        return key

    def get(self, key: str):
        with self._lock:
            if self.directory is None:
                return self._mem.get(key)
            path = self._path(key)
            if not os.path.exists(path):
                return None
            with open(path, "rb") as fh:
                return fh.read()

    def delete(self, key: str) -> bool:
        with self._lock:
            if self.directory is None:
                return self._mem.pop(key, None) is not None
            path = self._path(key)
            if not os.path.exists(path):
                return False
            os.remove(path)
            return True

    def keys(self):
        with self._lock:
            if self.directory is None:
                return sorted(self._mem)
            return sorted(name[:-5] for name in os.listdir(self.directory)
                          if name.endswith(".json") and _ID_RE.match(name[:-5]))


def _as_float_matrix(value, rows_name):
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{rows_name} must be a list of [x, y] pairs")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{rows_name} contains non-finite values")
    return arr


def _parse_lift_body(body: dict):
    if not isinstance(body, dict):
        raise ValueError("body must be a JSON object")
    unknown = set(body) - {"keypoints_px", "signs", "layout_id", "head_spec",
                           "image_ref"}
    if unknown:
        raise ValueError(f"unknown fields: {sorted(unknown)}")
    if "keypoints_px" not in body or "signs" not in body:
        raise ValueError("keypoints_px and signs are required")
    keypoints = _as_float_matrix(body["keypoints_px"], "keypoints_px")
    signs = body["signs"]
    if (not isinstance(signs, list)
            or not all(isinstance(s, int) and not isinstance(s, bool) for s in signs)):
        raise ValueError("signs must be a list of integers")
    layout_id = body.get("layout_id", "h36m17")
    if not isinstance(layout_id, str):
        raise ValueError("layout_id must be a string")
    head = body.get("head_spec", {})
    if not isinstance(head, dict):
        raise ValueError("head_spec must be an object")
    if set(head) - {"alpha", "beta", "ab_meters"}:
        raise ValueError("head_spec accepts only alpha, beta, ab_meters")
    for name in ("alpha", "beta", "ab_meters"):
        v = head.get(name)
        if v is not None and (not isinstance(v, (int, float)) or isinstance(v, bool)
                              or v <= 0):
            raise ValueError(f"head_spec.{name} must be a positive number")
    pose = AnnotatedPose2D(keypoints_px=keypoints,
                           signs=np.asarray(signs, dtype=np.int64),
                           image_ref=str(body.get("image_ref", "")),
                           layout_id=layout_id)
    return pose, layout_id, head


def create_app(seed_store=None, ui_dir=None) -> FastAPI:
    app = FastAPI(title="posesynth", docs_url=None, redoc_url=None)
    store = SeedStore(seed_store)
    app.state.seed_store = store

    @app.get("/layouts")
    def layouts():
        return {"layouts": [get_layout(i).to_dict() for i in builtin_layout_ids()]}

    @app.post("/lift")
    async def lift_pose(request: Request):
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError) as err:
            return _error(400, "bad_json", f"request body is not valid JSON: {err}")
        try:
            pose, layout_id, head = _parse_lift_body(body)
        except (ValueError, TypeError) as err:
            return _error(400, "bad_request", str(err))
        try:
            layout = get_layout(layout_id)
        except PoseSynthError:
            return _error(400, "unknown_layout", f"no built-in layout {layout_id!r}")
        spec = HeadTriangleSpec.for_layout(layout,
                                           alpha=float(head.get("alpha", 1.0)),
                                           beta=float(head.get("beta", 5.0 / 3.0)))
        if head.get("ab_meters") is not None:
            spec = HeadTriangleSpec(a=spec.a, b=spec.b, c=spec.c, alpha=spec.alpha,
                                    beta=spec.beta, ab_meters=float(head["ab_meters"]))
        try:
            result = lift(pose, layout, spec)
        except MissingSign as err:
            return _error(400, "missing_sign", str(err), joint=err.joint)
        except NoRealSolution as err:
            return _error(422, "no_real_solution", str(err),
                          residuals=err.residuals)
        except PoseSynthError as err:
            return _error(422, "lift_failed", str(err))
        return Response(content=lift_result_bytes(result),
                        media_type="application/json")

    @app.get("/seeds")
    def list_seeds():
        return {"seeds": store.keys()}

    @app.post("/seeds")
    async def post_seeds(request: Request):
        raw = await request.body()
        try:
            parsed = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as err:
            return _error(400, "bad_json", f"seed file is not valid JSON: {err}")
        if not isinstance(parsed, list) or not parsed:
            return _error(400, "bad_seed_file", "expected a non-empty JSON array")
        for i, entry in enumerate(parsed):
            if (not isinstance(entry, dict) or "keypoints_px" not in entry
                    or "signs" not in entry):
                return _error(400, "bad_seed_file",
                              f"entry {i} lacks keypoints_px/signs")
        key = store.put(raw)
        return JSONResponse(status_code=201,
                            content={"id": key, "count": len(parsed)})

    @app.get("/seeds/{seed_id}")
    def get_seeds(seed_id: str):
        if not _ID_RE.match(seed_id):
            return _error(400, "bad_id", "seed ids are 12 lowercase hex chars")
        data = store.get(seed_id)
        if data is None:
            return _error(404, "not_found", f"no seed file {seed_id}")
        return Response(content=data, media_type="application/json")

    @app.delete("/seeds/{seed_id}")
    def delete_seeds(seed_id: str):
        if not _ID_RE.match(seed_id):
            return _error(400, "bad_id", "seed ids are 12 lowercase hex chars")
        if not store.delete(seed_id):
            return _error(404, "not_found", f"no seed file {seed_id}")
        return {"deleted": seed_id}

    if ui_dir and os.path.isdir(ui_dir):
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
