"""HTTP face of the simulator.

Stateless request/response endpoints wrapping the core package: submit a
scenario, get back validation, metrics, and (optionally) the CSV artifacts.
Runs are sub-second, so everything is synchronous. Serve with e.g.
`uvicorn msrpa.service.app:app`.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, export, metrics
from ..engine import Scenario, ScenarioError, replay_check, run, validate
from ..graph import CapacityError, strongly_robust_bruteforce, strongly_robust_wrt
from ..metrics import EXACT_TOL
from ..scenario_io import ScenarioSpec, _build_graph, resolve
from . import models


def _apply_overrides(spec: ScenarioSpec, ov: models.RunOverrides) -> ScenarioSpec:
    updates: dict = {}
    params_updates: dict = {}
    if ov.eta is not None:
        params_updates["eta"] = ov.eta
    if ov.u_max is not None:
        params_updates["u_max"] = ov.u_max
    if params_updates:
        updates["params"] = spec.params.model_copy(update=params_updates)
    if ov.seed is not None:
        updates["seed"] = ov.seed
    if ov.horizon is not None:
        updates["horizon"] = ov.horizon
    return spec.model_copy(update=updates) if updates else spec


def _reject_path_graphs(spec) -> None:
    # The service is file-free: clients inline edge lists before submitting
    # (the CLI does this automatically).
    if spec.edge_list is not None:
        raise ScenarioError(
            "service requests must be self-contained; inline the edge list "
            "as `edges` instead of an `edge_list` path"
        )


def _resolve(spec: ScenarioSpec, ov: models.RunOverrides) -> Scenario:
    _reject_path_graphs(spec.graph)
    return resolve(_apply_overrides(spec, ov))


def _validation_model(report) -> models.ValidationModel:
    return models.ValidationModel(
        passed=report.passed,
        checks=[
            models.CheckModel(name=c.name, passed=c.passed, detail=c.detail)
            for c in report.checks
        ],
        failed=list(report.failed),
    )


def _theorem_report(tr, series) -> models.TheoremReport:
    sc = tr.scenario
    eta = sc.params.comm_rate
    monotonic = series.first_violation_t is None
    if sc.params.input_bound is None:
        guaranteed_from = tr.t0 + eta
        e = series.e
        tail_ok = all(v <= EXACT_TOL for v in e[eta:])
        return models.TheoremReport(
            theorem="unbounded_exact_tracking",
            bound_periods=1,
            guaranteed_from=guaranteed_from,
            observed_convergence=series.convergence_time,
            monotonic=monotonic,
            passed=tail_ok and monotonic,
        )
    t_bound = series.theorem2_T
    guaranteed_from = None if t_bound is None else tr.t0 + t_bound * eta
    observed = series.convergence_time
    idx = None if guaranteed_from is None else guaranteed_from - tr.t0
    tail_ok = idx is not None and all(v <= EXACT_TOL for v in series.e[idx:])
    passed = (
        t_bound is not None
        and observed is not None
        and observed <= guaranteed_from
        and tail_ok
        and monotonic
    )
    return models.TheoremReport(
        theorem="bounded_finite_time",
        bound_periods=t_bound,
        guaranteed_from=guaranteed_from,
        observed_convergence=observed,
        monotonic=monotonic,
        passed=passed,
    )


class _SeriesBundle:
    """Metric series plus the bits the response models need."""

    def __init__(self, tr):
        ms = metrics.metric_series(tr)
        mono = metrics.monotonicity_check(tr)
        self.e = ms.e
        self.v = ms.v
        self.series = ms
        self.convergence_time = ms.convergence_time
        self.theorem2_T = ms.theorem2_T
        self.first_violation_t = mono.first_violation


def create_app() -> FastAPI:
    app = FastAPI(
        title="msrpa",
        version=__version__,
        description="Resilient leader-follower consensus simulation service",
    )

    @app.exception_handler(ScenarioError)
    async def _scenario_error(request: Request, exc: ScenarioError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(CapacityError)
    async def _capacity_error(request: Request, exc: CapacityError):
        return JSONResponse(status_code=413, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=models.HealthResponse)
    def health() -> models.HealthResponse:
        return models.HealthResponse(status="ok", version=__version__)

    @app.post("/scenario/validate", response_model=models.ValidationModel)
    def validate_scenario(req: models.ValidateRequest) -> models.ValidationModel:
        sc = _resolve(req.scenario, req.overrides)
        return _validation_model(validate(sc))

    @app.post("/simulation/run", response_model=models.RunResponse)
    def run_simulation(req: models.RunRequest) -> models.RunResponse:
        sc = _resolve(req.scenario, req.overrides)
        tr = run(sc)
        bundle = _SeriesBundle(tr)
        summary = models.MetricsSummary(
            initial_error=bundle.e[0],
            final_error=bundle.e[-1],
            convergence_time=bundle.convergence_time,
            theorem2_T=bundle.theorem2_T,
            monotonic=bundle.first_violation_t is None,
            first_monotonicity_violation=bundle.first_violation_t,
        )
        artifacts = None
        if req.include_artifacts:
            artifacts = models.Artifacts(
                trace_csv=export.trace_csv(tr),
                messages_csv=export.messages_csv(tr),
                metrics_csv=export.metrics_csv(tr, bundle.series),
            )
        theorems = _theorem_report(tr, bundle) if req.check_theorems else None
        return models.RunResponse(
            name=sc.name,
            n_agents=sc.graph.n,
            t0=sc.params.start_time,
            horizon=sc.horizon,
            seed=sc.seed,
            validation=_validation_model(tr.validation),
            metrics=summary,
            acceptance_events=len(tr.acceptances),
            assumption_violations=len(tr.violations),
            theorems=theorems,
            artifacts=artifacts,
        )

    @app.post("/simulation/replay-check", response_model=models.ReplayResponse)
    def replay(req: models.ReplayRequest) -> models.ReplayResponse:
        sc = _resolve(req.scenario, req.overrides)
        return models.ReplayResponse(identical=replay_check(sc))

    @app.post("/graph/robustness", response_model=models.RobustnessResponse)
    def robustness(req: models.RobustnessRequest) -> models.RobustnessResponse:
        _reject_path_graphs(req.graph)
        g = _build_graph(req.graph, Path("."), index_base=req.index_base)
        s = {i - req.index_base for i in req.s}
        cert = strongly_robust_wrt(g, s, req.r)
        brute = None
        if req.bruteforce:
            brute = strongly_robust_bruteforce(g, s, req.r)
        return models.RobustnessResponse(
            holds=cert.holds,
            r=cert.r,
            peel_order=[
                models.PeelRound(round=rnd, agents=sorted(agents))
                for rnd, agents in cert.peel_order
            ],
            witness=sorted(cert.witness),
            bruteforce=brute,
        )

    return app


app = create_app()
