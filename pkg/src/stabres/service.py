"""HTTP service exposing the analysis pipeline.

Sessions live in an in-memory store. Long computations (stabilize,
crosscheck) run as jobs: the POST returns 202 with a job id to poll at
GET /jobs/{id}. Job ids are derived from the request content, so
re-posting an identical request returns the same job instead of
recomputing; fast derived objects (windows, fits, trajectories,
stationary points) are cached by request content the same way. A second,
*different* request for a step that is still running on the same session
is refused with 409.

All JSON bodies are rendered by the same deterministic serializer as the
CLI, so equal objects are byte-equal on the wire.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Any, Literal

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from pydantic import BaseModel, Field

from . import pipeline, session as sess
from .config import DEFAULT, Config
from .continuation import NotFoundResult, find_stationary
from .errors import CrossingGuardError, StabresError, ValidationError
from .stabilization import StabilizationData, detect_windows


class GridSpec(BaseModel):
    start: float
    stop: float
    count: int = Field(ge=2)

    def to_array(self) -> np.ndarray:
        if self.stop <= self.start:
            raise ValidationError("grid stop must exceed start")
        return np.linspace(self.start, self.stop, self.count)


class SessionCreate(BaseModel):
    id: str | None = None
    source: str = "computed"
    units: str = "hartree"
    metadata: dict[str, str] = Field(default_factory=dict)


class InlineCurves(BaseModel):
    alpha_grid: list[float]
    curves: list[list[float]]
    metadata: list[str] = Field(default_factory=list)


class StabilizeBody(BaseModel):
    model: str | None = None
    basis: str | None = None
    grid: GridSpec | None = None
    data: InlineCurves | None = None
    threads: int = Field(default=1, ge=1, le=64)


class WindowsBody(BaseModel):
    flatness_tol: float | None = None
    min_points: int | None = None
    gap_tol: float | None = None
    guard_steps: int | None = None


class FitBody(BaseModel):
    window_id: str
    point_indices: list[int] | None = None
    point_range: tuple[int, int] | None = None
    order: int | None = None
    force: bool = False


class TrajectoryBody(BaseModel):
    fit_id: str
    kind: Literal["theta", "alpha"]
    fixed: float
    grid: GridSpec


class RegionSpec(BaseModel):
    alpha: tuple[float, float]
    theta: tuple[float, float]


class StationaryBody(BaseModel):
    fit_id: str
    region: RegionSpec | None = None
    strategy: Literal["newton", "alternating"] = "newton"


class CrosscheckBody(BaseModel):
    stationary_id: str
    model: str | None = None
    basis: str | None = None


@dataclass
class Job:
    id: str
    session_id: str
    step: str
    status: str = "pending"  # pending | running | done | error
    result: Any = None
    error: str | None = None
    error_type: str | None = None


@dataclass
class Store:
    sessions: dict[str, sess.Session] = dc_field(default_factory=dict)
    jobs: dict[str, Job] = dc_field(default_factory=dict)
    cache: dict[tuple, Any] = dc_field(default_factory=dict)
    lock: threading.Lock = dc_field(default_factory=threading.Lock)


def _json_response(payload, status: int = 200) -> Response:
    return Response(
        content=sess.to_json(payload), media_type="application/json", status_code=status
    )


def _error_response(status: int, kind: str, message: str, **extra) -> Response:
    return _json_response({"error": kind, "message": message, **extra}, status=status)


def create_app(config: Config = DEFAULT) -> FastAPI:
    app = FastAPI(title="stabres", version="1.0")
    store = Store()
    app.state.store = store
    app.state.config = config
    executor = ThreadPoolExecutor(max_workers=2)

    @app.exception_handler(RequestValidationError)
    async def body_validation_handler(request: Request, exc: RequestValidationError):
        fields = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return _json_response(
            {"error": "validation", "message": "invalid request body", "fields": fields},
            status=400,
        )

    @app.exception_handler(StabresError)
    async def stabres_error_handler(request: Request, exc: StabresError):
        if isinstance(exc, CrossingGuardError):
            crossing = sess.crossing_to_dict(exc.crossing) if exc.crossing is not None else None
            return _json_response(
                {
                    "error": "crossing_guard",
                    "message": str(exc),
                    "crossing": crossing,
                    "hint": "re-submit with force=true to fit across the crossing",
                },
                status=422,
            )
        if isinstance(exc, ValidationError):
            return _error_response(400, "validation", str(exc))
        return _error_response(500, type(exc).__name__, str(exc))

    def get_session_or_404(session_id: str) -> sess.Session | Response:
        s = store.sessions.get(session_id)
        if s is None:
            return _error_response(404, "not_found", f"no session '{session_id}'")
        return s

    def submit_job(session_id: str, step: str, body_key: str, work) -> Response:
        job_id = sess.deterministic_id("job", session_id, step, body_key)
        with store.lock:
            existing = store.jobs.get(job_id)
            if existing is not None:
                return _json_response(
                    {"job_id": existing.id, "status": existing.status}, status=202
                )
            for j in store.jobs.values():
                if (
                    j.session_id == session_id
                    and j.step == step
                    and j.status in ("pending", "running")
                ):
                    return _error_response(
                        409,
                        "conflict",
                        f"a different '{step}' job ({j.id}) is already "
                        f"running on session '{session_id}'",
                        job_id=j.id,
                    )
            job = Job(id=job_id, session_id=session_id, step=step)
            store.jobs[job_id] = job

        def run():
            job.status = "running"
            try:
                job.result = work()
                job.status = "done"
            except StabresError as exc:
                job.status = "error"
                job.error = str(exc)
                job.error_type = type(exc).__name__
            except Exception as exc:  # noqa: BLE001 - job must record any failure
                job.status = "error"
                job.error = repr(exc)
                job.error_type = type(exc).__name__

        executor.submit(run)
        return _json_response({"job_id": job.id, "status": job.status}, status=202)

    def cached(session_id: str, step: str, body_key: str, compute) -> Response:
        key = (session_id, step, body_key)
        with store.lock:
            if key in store.cache:
                return _json_response(store.cache[key])
        payload = compute()
        with store.lock:
            store.cache[key] = payload
        return _json_response(payload)

    def invalidate_session_cache(session_id: str) -> None:
        """Derived objects are cleared when the sweep or windows change."""
        with store.lock:
            store.cache = {k: v for k, v in store.cache.items() if k[0] != session_id}

    @app.post("/sessions")
    async def create_session(body: SessionCreate):
        sid = body.id or sess.deterministic_id(
            "sess", body.source, body.units, len(store.sessions)
        )
        if sid in store.sessions:
            return _error_response(409, "conflict", f"session '{sid}' already exists")
        s = sess.Session(id=sid, source=body.source, units=body.units, metadata=dict(body.metadata))
        store.sessions[sid] = s
        return _json_response({"id": sid, "source": s.source, "units": s.units}, status=201)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        s = get_session_or_404(session_id)
        if isinstance(s, Response):
            return s
        return _json_response(sess.session_to_dict(s))

    @app.post("/sessions/{session_id}/stabilize")
    async def stabilize(session_id: str, body: StabilizeBody):
        s = get_session_or_404(session_id)
        if isinstance(s, Response):
            return s
        cfg: Config = app.state.config
        key = body.model_dump_json()

        def work():
            if body.data is not None:
                data = StabilizationData(
                    alpha_grid=np.asarray(body.data.alpha_grid, dtype=float),
                    curves=np.asarray(body.data.curves, dtype=float),
                    tracking_quality=np.ones(max(len(body.data.alpha_grid) - 1, 0)),
                    source="imported",
                    metadata=tuple(body.data.metadata),
                )
            else:
                if not (body.model and body.basis and body.grid):
                    raise ValidationError("stabilize needs model/basis/grid or inline data")
                model = pipeline.parse_model(body.model)
                basis_spec = pipeline.parse_basis(body.basis)
                data, _, _, _ = pipeline.run_stabilization(
                    model, basis_spec, body.grid.to_array(), threads=body.threads, config=cfg
                )
                s.metadata["model"] = body.model
                s.metadata["basis"] = body.basis
                g = body.grid
                s.metadata["grid"] = f"{g.start:g}:{g.stop:g}:{g.count}"
            windows, crossings = detect_windows(data, config=cfg)
            s.set_stabilization(data, windows, crossings)
            invalidate_session_cache(s.id)
            return {
                "session": s.id,
                "n_roots": data.n_roots,
                "n_alpha": len(data.alpha_grid),
                "windows": [
                    {"id": wid, **sess.window_to_dict(w)} for wid, w in s.windows.items()
                ],
                "crossings": [sess.crossing_to_dict(c) for c in s.crossings],
            }

        return submit_job(session_id, "stabilize", key, work)

    @app.post("/sessions/{session_id}/windows")
    async def rewindow(session_id: str, body: WindowsBody):
        s = get_session_or_404(session_id)
        if isinstance(s, Response):
            return s
        if s.stabilization is None:
            return _error_response(400, "validation", "session has no stabilization data")
        cfg: Config = app.state.config

        def compute():
            windows, crossings = detect_windows(
                s.stabilization,
                flatness_tol=body.flatness_tol,
                min_points=body.min_points,
                gap_tol=body.gap_tol,
                guard_steps=body.guard_steps,
                config=cfg,
            )
            s.set_stabilization(s.stabilization, windows, crossings)
            invalidate_session_cache(s.id)
            return {
                "windows": [
                    {"id": wid, **sess.window_to_dict(w)} for wid, w in s.windows.items()
                ],
                "crossings": [sess.crossing_to_dict(c) for c in s.crossings],
            }

        return cached(session_id, "windows", body.model_dump_json(), compute)

    @app.post("/sessions/{session_id}/fit")
    async def fit(session_id: str, body: FitBody):
        s = get_session_or_404(session_id)
        if isinstance(s, Response):
            return s
        if s.stabilization is None:
            return _error_response(400, "validation", "session has no stabilization data")
        if body.window_id not in s.windows:
            return _error_response(404, "not_found", f"no window '{body.window_id}'")
        cfg: Config = app.state.config
        if body.point_indices is not None and body.point_range is not None:
            return _error_response(
                400, "validation", "give either point_indices or point_range, not both"
            )
        indices = body.point_indices
        if body.point_range is not None:
            lo, hi = body.point_range
            if hi < lo:
                return _error_response(400, "validation", "point_range must be increasing")
            indices = list(range(lo, hi + 1))

        def compute():
            cf, abs_idx, diag, hit = pipeline.make_fit(
                s.stabilization,
                s.windows[body.window_id],
                s.crossings,
                point_indices=indices,
                order=body.order,
                force=body.force,
                config=cfg,
            )
            rec = s.add_fit(
                cf, abs_idx, window_id=body.window_id, diagnostics=diag, forced=hit is not None
            )
            return {
                "id": rec.id,
                "window_id": rec.window_id,
                "point_indices": list(rec.point_indices),
                "order": rec.order,
                "forced": rec.forced,
                "fraction": sess.fraction_to_dict(cf),
                "diagnostics": sess.diagnostics_to_dict(diag),
            }

        return cached(session_id, "fit", body.model_dump_json(), compute)

    @app.post("/sessions/{session_id}/trajectory")
    async def trajectory(session_id: str, body: TrajectoryBody):
        s = get_session_or_404(session_id)
        if isinstance(s, Response):
            return s
        if body.fit_id not in s.fits:
            return _error_response(404, "not_found", f"no fit '{body.fit_id}'")
        cfg: Config = app.state.config

        def compute():
            from .continuation import alpha_trajectory, theta_trajectory

            cf = s.fits[body.fit_id].fraction
            grid = body.grid.to_array()
            if body.kind == "theta":
                traj = theta_trajectory(cf, alpha=body.fixed, theta_grid=grid, config=cfg)
            else:
                traj = alpha_trajectory(cf, theta=body.fixed, alpha_grid=grid, config=cfg)
            rec = s.add_trajectory(traj, fit_id=body.fit_id)
            return {"id": rec.id, "fit_id": rec.fit_id, **sess.trajectory_to_dict(traj)}

        return cached(session_id, "trajectory", body.model_dump_json(), compute)

    @app.post("/sessions/{session_id}/stationary")
    async def stationary(session_id: str, body: StationaryBody):
        s = get_session_or_404(session_id)
        if isinstance(s, Response):
            return s
        if body.fit_id not in s.fits:
            return _error_response(404, "not_found", f"no fit '{body.fit_id}'")
        cfg: Config = app.state.config

        def compute():
            fit_rec = s.fits[body.fit_id]
            if body.region is not None:
                region = (tuple(body.region.alpha), tuple(body.region.theta))
            elif fit_rec.window_id is not None:
                region = pipeline.default_region(s.windows[fit_rec.window_id])
            else:
                raise ValidationError("fit has no window; a search region is required")
            found = find_stationary(
                fit_rec.fraction,
                region,
                window_id=fit_rec.window_id,
                strategy=body.strategy,
                config=cfg,
            )
            if isinstance(found, NotFoundResult):
                return {"stationary_points": [], "not_found": pipeline.not_found_doc(found)}
            out = []
            for point in found:
                rec = s.add_stationary(point, fit_id=fit_rec.id)
                out.append(
                    {"id": rec.id, "fit_id": rec.fit_id, **sess.stationary_to_dict(rec.point)}
                )
            return {"stationary_points": out, "not_found": None}

        return cached(session_id, "stationary", body.model_dump_json(), compute)

    @app.post("/sessions/{session_id}/crosscheck")
    async def crosscheck(session_id: str, body: CrosscheckBody):
        s = get_session_or_404(session_id)
        if isinstance(s, Response):
            return s
        if body.stationary_id not in s.stationary_points:
            return _error_response(404, "not_found", f"no stationary point '{body.stationary_id}'")
        cfg: Config = app.state.config
        model_text = body.model or s.metadata.get("model")
        basis_text = body.basis or s.metadata.get("basis")
        if not model_text or not basis_text:
            return _error_response(
                400, "validation", "session records no model/basis; pass them in the request"
            )

        def work():
            point = s.stationary_points[body.stationary_id].point
            ucs_pt, difference = pipeline.crosscheck_point(
                pipeline.parse_model(model_text),
                pipeline.parse_basis(basis_text),
                point,
                config=cfg,
            )
            return pipeline.crosscheck_doc(body.stationary_id, point, ucs_pt, difference)

        return submit_job(session_id, "crosscheck", body.model_dump_json(), work)

    @app.get("/sessions/{session_id}/landscape")
    async def landscape(
        session_id: str,
        seed_re: float,
        seed_im: float = 0.0,
        alpha: str | None = None,
        theta: str | None = None,
        model: str | None = None,
        basis: str | None = None,
    ):
        s = get_session_or_404(session_id)
        if isinstance(s, Response):
            return s
        cfg: Config = app.state.config
        model_text = model or s.metadata.get("model")
        basis_text = basis or s.metadata.get("basis")
        if not model_text or not basis_text:
            return _error_response(
                400, "validation", "session records no model/basis; pass them as query params"
            )
        key = sess.to_json([model_text, basis_text, alpha, theta, seed_re, seed_im])

        def compute():
            ls = pipeline.run_landscape(
                pipeline.parse_model(model_text),
                pipeline.parse_basis(basis_text),
                complex(seed_re, seed_im),
                alpha_grid=pipeline.parse_grid(alpha) if alpha else None,
                theta_grid=pipeline.parse_grid(theta) if theta else None,
                config=cfg,
            )
            return pipeline.landscape_doc(ls, include_grids=True)

        return submit_job(session_id, "landscape", key, compute)

    @app.get("/jobs/{job_id}")
    async def get_job(job_id: str):
        job = store.jobs.get(job_id)
        if job is None:
            return _error_response(404, "not_found", f"no job '{job_id}'")
        payload = {"job_id": job.id, "session_id": job.session_id, "step": job.step,
                   "status": job.status}
        if job.status == "done":
            payload["result"] = job.result
        if job.status == "error":
            payload["error"] = job.error
            payload["error_type"] = job.error_type
        return _json_response(payload)

    return app


app = create_app()
