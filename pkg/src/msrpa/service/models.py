"""Request/response models for the HTTP service.

Scenario payloads reuse the scenario-file schema directly, so anything
loadable from disk can be POSTed verbatim.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..scenario_io import GraphSpec, ScenarioSpec


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunOverrides(_Model):
    """Sweep-friendly overrides applied on top of the submitted scenario."""

    eta: int | None = Field(default=None, ge=1)
    seed: int | None = None
    horizon: int | None = Field(default=None, ge=1)
    u_max: float | None = Field(default=None, gt=0)


class RunRequest(_Model):
    scenario: ScenarioSpec
    overrides: RunOverrides = RunOverrides()
    include_artifacts: bool = True
    check_theorems: bool = False


class CheckModel(_Model):
    name: str
    passed: bool
    detail: str


class ValidationModel(_Model):
    passed: bool
    checks: list[CheckModel]
    failed: list[str]


class MetricsSummary(_Model):
    initial_error: float
    final_error: float
    convergence_time: int | None
    theorem2_T: int | None
    monotonic: bool
    first_monotonicity_violation: int | None


class TheoremReport(_Model):
    theorem: Literal["unbounded_exact_tracking", "bounded_finite_time"]
    bound_periods: int | None
    guaranteed_from: int | None
    observed_convergence: int | None
    monotonic: bool
    passed: bool


class Artifacts(_Model):
    trace_csv: str
    messages_csv: str
    metrics_csv: str


class RunResponse(_Model):
    name: str
    n_agents: int
    t0: int
    horizon: int
    seed: int
    validation: ValidationModel
    metrics: MetricsSummary
    acceptance_events: int
    assumption_violations: int
    theorems: TheoremReport | None = None
    artifacts: Artifacts | None = None


class ValidateRequest(_Model):
    scenario: ScenarioSpec
    overrides: RunOverrides = RunOverrides()


class ReplayRequest(_Model):
    scenario: ScenarioSpec
    overrides: RunOverrides = RunOverrides()


class ReplayResponse(_Model):
    identical: bool


class RobustnessRequest(_Model):
    graph: GraphSpec
    s: list[int] = Field(min_length=1)
    r: int = Field(ge=1)
    bruteforce: bool = False
    index_base: Literal[0, 1] = 0


class PeelRound(_Model):
    round: int
    agents: list[int]


class RobustnessResponse(_Model):
    holds: bool
    r: int
    peel_order: list[PeelRound]
    witness: list[int]
    bruteforce: bool | None = None


class HealthResponse(_Model):
    status: str
    version: str
