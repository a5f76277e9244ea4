"""HTTP API for analysis, simulation jobs and study planning.

Analysis is synchronous and byte-identical to the CLI JSON output.
Simulation and planning run as background jobs with polled progress; the
in-process job store evicts entries after a TTL and can snapshot finished
jobs to disk so results survive restarts.  Job ids are 128-bit random
tokens and there is no listing endpoint.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .datasets import SPECIES_PRESETS
from .design import EfficacyDesign
from .distributions import BetaParams
from .errors import NbRatioError, ScanCancelledError
from .estimators import PairedDataset, pool_replicates, summarize
from .methods import AnalysisOptions, KScaling, Method, analyze_summary
from .montecarlo import PlanCriteria, SimScenario, plan_sample_size, run_scan
from .serialize import (
    canonical_json,
    plan_report_to_dict,
    report_to_dict,
    scan_result_to_dict,
)


@dataclass(frozen=True)
class ServiceConfig:
    workers: int = 1
    replicate_cap: int = 100_000
    data_dir: str | None = None
    ttl_seconds: float = 24 * 3600.0
    cors_origins: tuple[str, ...] = ("*",)
    static_dir: str | None = None


@dataclass
class Job:
    id: str
    kind: str
    state: str = "queued"
    progress: float = 0.0
    result: dict | None = None
    error: str | None = None
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)
    cancel_event: threading.Event = field(default_factory=threading.Event)

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "state": self.state,
            "progress": self.progress,
            "result": self.result,
            "error": self.error,
            "created": self.created,
            "updated": self.updated,
        }


class JobStore:
    def __init__(self, ttl_seconds: float, data_dir: str | None) -> None:
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._ttl = ttl_seconds
        self._data_dir = Path(data_dir) if data_dir else None
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)

    def create(self, kind: str) -> Job:
        job = Job(id=secrets.token_urlsafe(16), kind=kind)
        with self._lock:
            self._evict_expired()
            self._jobs[job.id] = job
        return job

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            self._evict_expired()
            job = self._jobs.get(job_id)
            if job is not None:
                return job.snapshot()
        return self._load_snapshot(job_id)

    def update(self, job_id: str, **changes) -> None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                return
            for key, value in changes.items():
                if key == "progress":
                    value = max(job.progress, min(1.0, value))
                setattr(job, key, value)
            job.updated = time.time()
            if job.state in ("done", "failed"):
                self._persist(job)

    def cancel(self, job_id: str) -> dict | None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                return self._load_snapshot(job_id)
            job.cancel_event.set()
            if job.state in ("queued", "running"):
                job.state = "failed"
                job.error = "cancelled"
                job.updated = time.time()
            return job.snapshot()

    def cancel_requested(self, job_id: str) -> bool:
        with self._lock:
            job = self._jobs.get(job_id)
            return job.cancel_event.is_set() if job is not None else True

    def _evict_expired(self) -> None:
        now = time.time()
        for key in [k for k, j in self._jobs.items() if now - j.updated > self._ttl]:
            del self._jobs[key]

    def _persist(self, job: Job) -> None:
        if self._data_dir is None or job.state != "done":
            return
        path = self._data_dir / f"{job.id}.json"
        path.write_text(canonical_json(job.snapshot()), encoding="utf-8")

    def _load_snapshot(self, job_id: str) -> dict | None:
        if self._data_dir is None or not job_id.replace("-", "").replace("_", "").isalnum():
            return None
        path = self._data_dir / f"{job_id}.json"
        if not path.is_file():
            return None
        return json.loads(path.read_text(encoding="utf-8"))


# --- request models ----------------------------------------------------------


class DesignBody(BaseModel):
    target: float = Field(ge=0.0, le=1.0)
    margin: float = Field(default=0.05, ge=0.0, le=1.0)
    alpha: float = Field(default=0.025, gt=0.0, lt=0.5)


class OptionsBody(BaseModel):
    prior_alpha: float = Field(default=1.0, gt=0.0)
    prior_beta: float = Field(default=1.0, gt=0.0)
    binomial_99: bool = False
    waavp_literal_variance: bool = False
    k_scaling: Literal["divide", "multiply"] = "divide"

    def to_options(self) -> AnalysisOptions:
        return AnalysisOptions(
            prior=BetaParams(self.prior_alpha, self.prior_beta),
            binomial_99=self.binomial_99,
            waavp_literal_variance=self.waavp_literal_variance,
            k_scaling=KScaling(self.k_scaling),
        )


class AnalyzeBody(BaseModel):
    pre: list[int] | list[list[int]]
    post: list[int] | list[list[int]]
    paired: bool = True
    design: DesignBody
    options: OptionsBody = OptionsBody()
    methods: list[str] = Field(default_factory=lambda: [m.value for m in Method])


class ScenarioBody(BaseModel):
    n: int = Field(ge=2)
    mu1: float = Field(gt=0.0)
    k1: float = Field(gt=0.0)
    k2: float = Field(gt=0.0)
    rho: float = Field(ge=0.0, lt=1.0)
    r_grid: list[float]
    replicates: int = Field(ge=0)
    seed: int = Field(ge=0)
    design: DesignBody
    options: OptionsBody = OptionsBody()
    methods: list[str] = Field(default_factory=lambda: [m.value for m in Method])


class PlanBody(BaseModel):
    scenario: ScenarioBody
    n_candidates: list[int]
    max_inconclusive: float = Field(default=1.0, gt=0.0, le=1.0)
    max_misleading: float = Field(default=1.0, gt=0.0, le=1.0)


def _field_errors(exc: RequestValidationError) -> list[dict]:
    return [
        {"field": ".".join(str(part) for part in err["loc"]), "message": err["msg"]}
        for err in exc.errors()
    ]


def _build_scenario(body: ScenarioBody) -> SimScenario:
    return SimScenario(
        n=body.n,
        mu1=body.mu1,
        k1=body.k1,
        k2=body.k2,
        rho=body.rho,
        r_grid=tuple(body.r_grid),
        replicates=body.replicates,
        seed=body.seed,
        design=EfficacyDesign(
            target=body.design.target, margin=body.design.margin, alpha=body.design.alpha
        ),
        methods=tuple(Method(m) for m in body.methods),
        options=body.options.to_options(),
    )


PRESETS_PAYLOAD = {
    "presets": [
        {
            "name": p.name,
            "target_efficacy": p.target_efficacy,
            "default_margin": p.default_margin,
            "mu1": p.mu1,
            "k1": p.k1,
            "k2": p.k2,
            "correlation": p.correlation,
        }
        for p in SPECIES_PRESETS
    ]
}


def create_app(config: ServiceConfig = ServiceConfig()) -> FastAPI:
    app = FastAPI(title="nbratio planner service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = JobStore(config.ttl_seconds, config.data_dir)
    app.state.job_store = store

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"errors": _field_errors(exc)})

    def canonical_response(payload: dict, status_code: int = 200) -> Response:
        return Response(
            content=canonical_json(payload),
            status_code=status_code,
            media_type="application/json",
        )

    @app.get("/health")
    async def health():
        return {"status": "ok", "version": __version__}

    @app.get("/api/presets")
    async def presets():
        return canonical_response(PRESETS_PAYLOAD)

    @app.post("/api/analyze")
    async def analyze(body: AnalyzeBody):
        try:
            pre_rows = body.pre if isinstance(body.pre[0], list) else [[v] for v in body.pre]
            post_rows = (
                body.post if isinstance(body.post[0], list) else [[v] for v in body.post]
            )
            pre, m_pre = pool_replicates(pre_rows)
            post, m_post = pool_replicates(post_rows)
            dataset = PairedDataset(
                pre, post, paired=body.paired, m_pre=m_pre, m_post=m_post
            )
            design = EfficacyDesign(
                target=body.design.target,
                margin=body.design.margin,
                alpha=body.design.alpha,
            )
            options = body.options.to_options()
            methods = tuple(Method(m) for m in body.methods)
            summary = summarize(dataset)
            outcomes = analyze_summary(summary, design, options, methods)
        except (NbRatioError, ValueError, IndexError) as exc:
            return JSONResponse(
                status_code=400, content={"errors": [{"field": "body", "message": str(exc)}]}
            )
        infeasible = all(
            o.degenerate is not None and o.lcl is None and o.p_inferiority is None
            for o in outcomes
        )
        report = report_to_dict(
            design, summary, outcomes, options, m_pre=m_pre, m_post=m_post
        )
        return canonical_response(report, status_code=422 if infeasible else 200)

    def _launch(kind: str, target) -> Response:
        job = store.create(kind)

        def runner() -> None:
            store.update(job.id, state="running")
            try:
                result = target(job)
            except ScanCancelledError:
                store.update(job.id, state="failed", error="cancelled")
            except NbRatioError as exc:
                store.update(job.id, state="failed", error=str(exc))
            except Exception as exc:  # pragma: no cover - defensive
                store.update(job.id, state="failed", error=f"internal error: {exc}")
            else:
                store.update(job.id, state="done", progress=1.0, result=result)

        threading.Thread(target=runner, daemon=True).start()
        return canonical_response({"job_id": job.id, "state": "queued"}, status_code=202)

    def _over_cap(replicates: int) -> Response | None:
        if replicates > config.replicate_cap:
            return JSONResponse(
                status_code=400,
                content={
                    "errors": [
                        {
                            "field": "replicates",
                            "message": (
                                f"replicates {replicates} exceeds the per-efficacy cap "
                                f"of {config.replicate_cap}"
                            ),
                        }
                    ]
                },
            )
        return None

    @app.post("/api/simulate")
    async def simulate(body: ScenarioBody):
        over = _over_cap(body.replicates)
        if over is not None:
            return over
        try:
            scenario = _build_scenario(body)
        except NbRatioError as exc:
            return JSONResponse(
                status_code=400, content={"errors": [{"field": "scenario", "message": str(exc)}]}
            )

        def work(job: Job) -> dict:
            result = run_scan(
                scenario,
                parallelism=config.workers,
                progress=lambda done, total: store.update(
                    job.id, progress=done / total if total else 1.0
                ),
                should_stop=lambda: store.cancel_requested(job.id),
            )
            return scan_result_to_dict(result)

        return _launch("scan", work)

    @app.post("/api/plan")
    async def plan(body: PlanBody):
        over = _over_cap(body.scenario.replicates)
        if over is not None:
            return over
        try:
            scenario = _build_scenario(body.scenario)
            criteria = PlanCriteria(
                max_inconclusive=body.max_inconclusive,
                max_misleading=body.max_misleading,
            )
        except NbRatioError as exc:
            return JSONResponse(
                status_code=400, content={"errors": [{"field": "scenario", "message": str(exc)}]}
            )
        candidates = body.n_candidates

        def work(job: Job) -> dict:
            report = plan_sample_size(
                scenario,
                candidates,
                criteria,
                parallelism=config.workers,
                progress=lambda done, total: store.update(
                    job.id, progress=done / total if total else 1.0
                ),
                should_stop=lambda: store.cancel_requested(job.id),
            )
            return plan_report_to_dict(report)

        return _launch("plan", work)

    @app.get("/api/jobs/{job_id}")
    async def get_job(job_id: str):
        snapshot = store.get(job_id)
        if snapshot is None:
            return JSONResponse(status_code=404, content={"error": "unknown job id"})
        return canonical_response(snapshot)

    @app.delete("/api/jobs/{job_id}")
    async def cancel_job(job_id: str):
        snapshot = store.cancel(job_id)
        if snapshot is None:
            return JSONResponse(status_code=404, content={"error": "unknown job id"})
        return canonical_response(snapshot)

    if config.static_dir and Path(config.static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
