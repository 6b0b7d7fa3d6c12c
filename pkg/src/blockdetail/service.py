"""HTTP service: job submission, polling, results, and SSE progress.

POST /api/jobs                  GenerationRequest doc -> {"id": ...}
GET  /api/jobs/{id}             -> job state document
GET  /api/jobs/{id}/result      -> motion payload (canonical JSON bytes)
GET  /api/jobs/{id}/events      -> server-sent events progress stream
POST /api/jobs/{id}/cancel      -> cancel a queued job
GET  /api/skeleton              -> skeleton description
Payloads use the motion/blocking file formats from motion_io verbatim.
"""
from __future__ import annotations

import json
import queue

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response, StreamingResponse

from .jobs import Job, JobManager, RequestValidationError
from .motion_io import skeleton_to_doc

SSE_POLL_SECONDS = 0.25


def job_doc(job: Job) -> dict:
    return {
        "id": job.id,
        "state": job.state,
        "progress": {"t": job.progress_t, "fraction": job.fraction,
                     "refinement_events": job.events_emitted},
        "error": job.error,
    }


def create_app(manager: JobManager) -> FastAPI:
    app = FastAPI(title="blockdetail service")
    app.state.manager = manager

    @app.get("/api/skeleton")
    def get_skeleton() -> dict:
        return {"format_version": 1, **skeleton_to_doc(manager.skeleton)}

    @app.post("/api/jobs")
    async def submit_job(request: Request) -> JSONResponse:
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail=f"invalid JSON: {exc}")
        try:
            job = manager.submit(doc)
        except RequestValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return JSONResponse({"id": job.id}, status_code=201)

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str) -> dict:
        try:
            return job_doc(manager.get(job_id))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")

    @app.post("/api/jobs/{job_id}/cancel")
    def cancel_job(job_id: str) -> dict:
        try:
            return job_doc(manager.cancel(job_id))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")

    @app.get("/api/jobs/{job_id}/result")
    def job_result(job_id: str) -> Response:
        try:
            payload = manager.result_bytes(job_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return Response(content=payload, media_type="application/json")

    @app.get("/api/jobs/{job_id}/events")
    def job_events(job_id: str) -> StreamingResponse:
        try:
            history, live = manager.subscribe(job_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")

        def stream():
            terminal = False
            for event in history:
                yield f"data: {json.dumps(event, sort_keys=True)}\n\n"
                terminal = terminal or _is_terminal(event)
            while not terminal:
                try:
                    event = live.get(timeout=SSE_POLL_SECONDS)
                except queue.Empty:
                    continue
                yield f"data: {json.dumps(event, sort_keys=True)}\n\n"
                terminal = _is_terminal(event)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/")
    def index() -> PlainTextResponse:
        return PlainTextResponse("blockdetail service; see /api/skeleton and /api/jobs")

    return app


def _is_terminal(event: dict) -> bool:
    return event.get("type") == "state" and event.get("state") in ("done", "failed")
