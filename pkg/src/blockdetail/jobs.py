"""Asynchronous generation jobs with progress fan-out.

A bounded worker pool executes generation requests; each job owns its
single-threaded sampler state and an RNG stream derived from (master seed,
job index), so concurrent jobs never interleave randomness. Results are
persisted under a content-addressed directory and are byte-identical to
the CLI run with the same seed and config.
"""
from __future__ import annotations

import hashlib
import os
import queue
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .detailing import RefinementConfig, RefinementTrace, detail_motion, trace_to_doc
from .motion import BlockingSet, Motion
from .motion_io import (blocking_from_doc, dumps_canonical, motion_to_doc)
from .skeleton import DEFAULT_SKELETON, SkeletonSpec
from .strategies import StrategyDescriptor, run_strategy

PROGRESS_EVERY_STEPS = 50
DATA_DIR_ENV = "BLOCKDETAIL_DATA_DIR"


class RequestValidationError(ValueError):
    """Raised with the offending field paths for malformed requests."""


@dataclass
class GenerationRequest:
    blocking: BlockingSet
    strategy: StrategyDescriptor
    seed: int
    refinement: RefinementConfig
    model_ids: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_doc(cls, doc: Any) -> "GenerationRequest":
        if not isinstance(doc, dict):
            raise RequestValidationError("request body must be an object")
        problems: list[str] = []
        blocking = None
        if "blocking" not in doc:
            problems.append("blocking")
        else:
            try:
                blocking = blocking_from_doc(doc["blocking"])
            except ValueError as exc:
                problems.append(f"blocking: {exc}")
        strat_doc = doc.get("strategy", {"name": "detailing"})
        strategy = None
        try:
            strategy = StrategyDescriptor(strat_doc.get("name", "detailing"),
                                          dict(strat_doc.get("params", {})))
        except (AttributeError, ValueError) as exc:
            problems.append(f"strategy: {exc}")
        seed = doc.get("seed", 0)
        if not isinstance(seed, int):
            problems.append("seed: must be an integer")
        ref_doc = doc.get("refinement", {})
        refinement = None
        try:
            refinement = RefinementConfig(
                cadence=int(ref_doc.get("cadence", RefinementConfig.cadence)),
                search_radius=int(ref_doc.get("search_radius", RefinementConfig.search_radius)),
                apply_ground_fix=bool(ref_doc.get("apply_ground_fix", RefinementConfig.apply_ground_fix)),
                default_tolerance=float(ref_doc.get("default_tolerance", RefinementConfig.default_tolerance)),
            )
        except (TypeError, ValueError) as exc:
            problems.append(f"refinement: {exc}")
        if problems:
            raise RequestValidationError("invalid request fields: " + "; ".join(problems))
        assert blocking is not None and strategy is not None and refinement is not None
        return cls(blocking=blocking, strategy=strategy, seed=int(seed),
                   refinement=refinement, model_ids=dict(doc.get("models", {})))

    def config_doc(self) -> dict:
        return {
            "strategy": {"name": self.strategy.name,
                         "params": dict(sorted(self.strategy.params.items()))},
            "seed": self.seed,
            "refinement": {
                "cadence": self.refinement.cadence,
                "search_radius": self.refinement.search_radius,
                "apply_ground_fix": self.refinement.apply_ground_fix,
                "default_tolerance": self.refinement.default_tolerance,
            },
        }


@dataclass
class Job:
    id: str
    state: str = "queued"            # queued -> running -> done | failed
    progress_t: int | None = None
    fraction: float = 0.0
    events_emitted: int = 0
    error: str | None = None
    result_path: str | None = None


class JobManager:
    """Owns the worker pool, job table, and per-job event fan-out."""

    def __init__(self, denoiser_r, denoiser_u,
                 skeleton: SkeletonSpec = DEFAULT_SKELETON,
                 data_dir: str | Path | None = None,
                 workers: int = 2,
                 model_ids: dict[str, str] | None = None):
        self.denoiser_r = denoiser_r
        self.denoiser_u = denoiser_u
        self.skeleton = skeleton
        root = data_dir or os.environ.get(DATA_DIR_ENV) or (Path.cwd() / "blockdetail-data")
        self.data_dir = Path(root)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.model_ids = model_ids or {}
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._lock = threading.Lock()
        self._jobs: dict[str, Job] = {}
        self._requests: dict[str, GenerationRequest] = {}
        self._cancelled: set[str] = set()
        self._history: dict[str, list[dict]] = {}
        self._subscribers: dict[str, list[queue.SimpleQueue]] = {}

    # ---- lifecycle -----------------------------------------------------

    def submit(self, doc: Any) -> Job:
        request = GenerationRequest.from_doc(doc)
        for side, want in request.model_ids.items():
            have = self.model_ids.get(side)
            if have is not None and want != have:
                raise RequestValidationError(
                    f"models.{side}: server has {have!r}, request wants {want!r}")
        job_id = uuid.uuid4().hex[:12]
        job = Job(id=job_id)
        with self._lock:
            self._jobs[job_id] = job
            self._requests[job_id] = request
            self._history[job_id] = []
            self._subscribers[job_id] = []
        self._emit(job_id, {"type": "state", "state": "queued"})
        self._pool.submit(self._run, job_id)
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise KeyError(f"unknown job {job_id}")
        return job

    def cancel(self, job_id: str) -> Job:
        job = self.get(job_id)
        with self._lock:
            if job.state == "queued":
                self._cancelled.add(job_id)
        return job

    def subscribe(self, job_id: str) -> tuple[list[dict], queue.SimpleQueue]:
        """Returns (event history so far, live queue for subsequent events)."""
        self.get(job_id)
        q: queue.SimpleQueue = queue.SimpleQueue()
        with self._lock:
            history = list(self._history[job_id])
            self._subscribers[job_id].append(q)
        return history, q

    def result_bytes(self, job_id: str) -> bytes:
        job = self.get(job_id)
        if job.state != "done" or job.result_path is None:
            raise ValueError(f"job {job_id} has no result (state={job.state})")
        return Path(job.result_path).read_bytes()

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)

    # ---- internals -----------------------------------------------------

    def _emit(self, job_id: str, event: dict) -> None:
        with self._lock:
            self._history[job_id].append(event)
            subscribers = list(self._subscribers[job_id])
        for q in subscribers:
            q.put(event)

    def _set_state(self, job_id: str, state: str, error: str | None = None) -> None:
        with self._lock:
            job = self._jobs[job_id]
            job.state = state
            job.error = error
        self._emit(job_id, {"type": "state", "state": state,
                            **({"error": error} if error else {})})

    def _run(self, job_id: str) -> None:
        with self._lock:
            cancelled = job_id in self._cancelled
            request = self._requests[job_id]
        if cancelled:
            self._set_state(job_id, "failed", error="cancelled")
            return
        self._set_state(job_id, "running")
        try:
            motion, trace = execute_request(request, self.denoiser_r, self.denoiser_u,
                                            self.skeleton,
                                            progress=lambda ev: self._on_progress(job_id, ev))
            result_doc = motion_to_doc(motion, self.skeleton)
            payload = dumps_canonical(result_doc).encode()
            digest = hashlib.sha256(
                dumps_canonical(request.config_doc()).encode() + payload).hexdigest()[:16]
            out = self.data_dir / f"result-{digest}.json"
            out.write_bytes(payload)
            (self.data_dir / f"trace-{digest}.json").write_text(
                dumps_canonical(trace_to_doc(trace)))
            with self._lock:
                self._jobs[job_id].result_path = str(out)
                self._jobs[job_id].fraction = 1.0
            self._set_state(job_id, "done")
        except Exception as exc:
            self._set_state(job_id, "failed", error=str(exc))

    def _on_progress(self, job_id: str, event: dict) -> None:
        with self._lock:
            job = self._jobs[job_id]
            if event["type"] == "refinement":
                job.events_emitted += 1
            job.progress_t = event.get("t", job.progress_t)
            job.fraction = event.get("fraction", job.fraction)
        self._emit(job_id, event)


class _ProgressProxy:
    """Wraps a denoiser to report per-step progress; evaluation itself is
    untouched, so results stay byte-identical."""

    def __init__(self, inner, total: int, progress):
        self._inner = inner
        self._total = total
        self._progress = progress
        self.schedule = inner.schedule

    def _tick(self, t: int) -> None:
        if t % PROGRESS_EVERY_STEPS == 0:
            self._progress({"type": "progress", "t": t,
                            "fraction": (self._total - t + 1) / self._total})

    def evaluate(self, *args):
        # t is the second argument for both flavors:
        # R-flavored (condition, t, y_t) and U-flavored (y_t, t).
        self._tick(int(args[1]))
        return self._inner.evaluate(*args)


def execute_request(request: GenerationRequest, denoiser_r, denoiser_u,
                    skeleton: SkeletonSpec = DEFAULT_SKELETON,
                    progress=None) -> tuple[Motion, RefinementTrace]:
    """Run one generation request; shared by the service and the CLI so
    both produce identical results for identical (seed, config)."""
    total = denoiser_r.schedule.num_steps
    r = denoiser_r
    u = denoiser_u
    if progress is not None:
        if request.strategy.name in ("u-guidance", "hard-impute"):
            u = _ProgressProxy(denoiser_u, total, progress)
        else:
            r = _ProgressProxy(denoiser_r, total, progress)

    if request.strategy.name == "detailing":
        blocking = request.blocking
        c = request.strategy.params.get("c")
        if c is not None:
            blocking = blocking.with_uniform_tolerance(float(c))

        def on_event(event) -> None:
            if progress is None:
                return
            progress({
                "type": "refinement",
                "t": event.t,
                "fraction": (total - event.t + 1) / total,
                "matched_frames": list(event.matched_frames),
                "key_frames": [p.frame_index for p in request.blocking.poses],
                "refined_keys": event.post_blend.tolist(),
            })

        return detail_motion(blocking, r, u, request.refinement,
                             request.seed, skeleton=skeleton, on_event=on_event)

    motion = run_strategy(request.strategy, r, u,
                          request.blocking, request.seed, skeleton=skeleton)
    return motion, RefinementTrace()
