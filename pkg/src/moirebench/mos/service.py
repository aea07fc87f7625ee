"""HTTP service for running a blinded opinion study.

Judges only ever see opaque image tokens: no method name, file name, or
placement hint crosses the wire except through the operator-keyed export
endpoint. The rating log is append-only JSONL guarded by a process-wide
lock, so a restarted server resumes exactly where the study stopped.

Routes:

    GET  /api/study                study shape (counts only)
    GET  /api/judge/{id}/next      next unanswered query for a judge
    GET  /api/image/{token}        one blinded PNG
    POST /api/judge/{id}/rating    record {"qid": ..., "score": 1..5}
    GET  /api/progress             answered / total per judge
    GET  /api/export               full results, operator key required
    /                              static rating UI, when built
"""

from __future__ import annotations

import hashlib
import hmac
import os
import threading

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import (
    AlreadyRatedError,
    ScoreRangeError,
    StudyError,
    UnknownQueryError,
)
from .study import MosStudy, RatingStore, export_results, load_study

__all__ = ["create_app", "serve", "default_ratings_path", "image_token"]

_STATIC_DIR = os.path.join(os.path.dirname(__file__), "static")


def image_token(seed: int, qid: str, side: str) -> str:
    """Opaque per-query, per-side image handle.

    Derived from the study seed so tokens are stable across restarts but
    carry no recoverable method or image identity.
    """
    return hashlib.sha256(f"{seed}:{qid}:{side}".encode()).hexdigest()[:32]


def default_ratings_path(study_path) -> str:
    stem, _ = os.path.splitext(study_path)
    return stem + ".ratings.jsonl"


class _RatingIn(BaseModel):
    qid: str
    score: int


def _build_token_map(study: MosStudy) -> dict:
    tokens = {}
    for q in study.queries:
        restored = study.image_path(q.method, q.image)
        truth = study.gt_path(q.image)
        left, right = (restored, truth) if q.flip else (truth, restored)
        tokens[image_token(study.seed, q.qid, "left")] = left
        tokens[image_token(study.seed, q.qid, "right")] = right
    return tokens


def create_app(study, ratings_path=None, static_dir=None) -> FastAPI:
    """Assemble the service around a study (object or file path)."""
    if isinstance(study, (str, os.PathLike)):
        if ratings_path is None:
            ratings_path = default_ratings_path(study)
        study = load_study(study)
    if ratings_path is None:
        raise StudyError("ratings_path is required when passing a study object")

    missing = sorted(
        {p for p in _build_token_map(study).values() if not os.path.isfile(p)}
    )
    if missing:
        listing = ", ".join(missing[:5]) + ("..." if len(missing) > 5 else "")
        raise StudyError(f"{len(missing)} study image(s) missing: {listing}")

    tokens = _build_token_map(study)
    store = RatingStore(ratings_path)
    write_lock = threading.Lock()
    app = FastAPI(title="moirebench opinion study", docs_url=None, redoc_url=None)
    app.state.study = study
    app.state.store = store

    def _judge_or_404(judge_id: int):
        if not 0 <= judge_id < study.judges:
            raise HTTPException(404, f"no judge {judge_id}")
        return judge_id

    @app.get("/api/study")
    def study_info():
        return {
            "judges": study.judges,
            "queries_per_judge": len(study.methods) * len(study.images),
            "methods": len(study.methods),
            "images": len(study.images),
        }

    @app.get("/api/judge/{judge_id}/next")
    def next_query(judge_id: int):
        _judge_or_404(judge_id)
        queries = study.judge_queries(judge_id)
        for q in queries:
            if q.qid not in store:
                return {
                    "qid": q.qid,
                    "seq": q.seq,
                    "total": len(queries),
                    "answered": sum(1 for x in queries if x.qid in store),
                    "left": f"/api/image/{image_token(study.seed, q.qid, 'left')}",
                    "right": f"/api/image/{image_token(study.seed, q.qid, 'right')}",
                }
        return {"done": True, "total": len(queries)}

    @app.get("/api/image/{token}")
    def blinded_image(token: str):
        path = tokens.get(token)
        if path is None:
            raise HTTPException(404, "unknown image token")
        return FileResponse(
            path, media_type="image/png", headers={"Cache-Control": "no-store"}
        )

    @app.post("/api/judge/{judge_id}/rating")
    def record_rating(judge_id: int, body: _RatingIn):
        _judge_or_404(judge_id)
        try:
            query = study.query(body.qid)
        except UnknownQueryError as exc:
            raise HTTPException(404, str(exc)) from exc
        if query.judge != judge_id:
            raise HTTPException(404, f"query {body.qid} belongs to another judge")
        with write_lock:
            try:
                store.record(study, body.qid, body.score)
            except AlreadyRatedError as exc:
                raise HTTPException(409, str(exc)) from exc
            except ScoreRangeError as exc:
                raise HTTPException(422, str(exc)) from exc
            remaining = sum(
                1 for q in study.judge_queries(judge_id) if q.qid not in store
            )
        return {"recorded": True, "remaining": remaining}

    @app.get("/api/progress")
    def progress():
        per_judge = []
        for judge in range(study.judges):
            queries = study.judge_queries(judge)
            answered = sum(1 for q in queries if q.qid in store)
            per_judge.append(
                {"judge": judge, "total": len(queries), "answered": answered}
            )
        total = len(study.queries)
        return {
            "total": total,
            "answered": len(store),
            "complete": len(store) == total,
            "judges": per_judge,
        }

    @app.get("/api/export")
    def export(request: Request):
        key = request.headers.get("x-operator-key") or request.query_params.get("key")
        if not key or not hmac.compare_digest(key, study.operator_key):
            return JSONResponse({"detail": "operator key required"}, status_code=403)
        with write_lock:
            return export_results(study, store)

    static = static_dir if static_dir is not None else _STATIC_DIR
    if os.path.isdir(static) and os.path.isfile(os.path.join(static, "index.html")):
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")
    return app


def serve(study_path, port: int = 8765, host: str = "127.0.0.1", ratings_path=None):
    import uvicorn

    app = create_app(study_path, ratings_path=ratings_path)
    uvicorn.run(app, host=host, port=port, log_level="warning")
