"""Scenario-file schema, YAML ingestion, and resolution into runnable scenarios.

Scenario files are human-editable YAML validated against the pydantic models
below (unknown keys are rejected; errors carry key paths). The same models
serve as the wire schema for the HTTP service, so a file and a request body
are interchangeable. Files may label agents 1-based via `index_base`; ids are
0-based internally. Edge-list files referenced by path are always 0-based.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Annotated, Literal, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import engine, graph, protocol
from . import signal as refsignal
from .engine import Scenario, ScenarioError


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------


class CirculantSpec(_Spec):
    n: int = Field(ge=2)
    k: int = Field(ge=1)
    undirected: bool = True


class GraphSpec(_Spec):
    """Exactly one of: a circulant generator, inline edges, or an edge-list path."""

    circulant: CirculantSpec | None = None
    edges: list[tuple[int, int]] | None = None
    edge_list: str | None = None
    n: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _one_source(self) -> "GraphSpec":
        given = [
            name
            for name, val in (
                ("circulant", self.circulant),
                ("edges", self.edges),
                ("edge_list", self.edge_list),
            )
            if val is not None
        ]
        if len(given) != 1:
            raise ValueError(
                f"graph needs exactly one of circulant/edges/edge_list, got {given or 'none'}"
            )
        if self.circulant is not None and self.n is not None:
            raise ValueError("n is derived from the circulant generator; drop it")
        return self


# ---------------------------------------------------------------------------
# Signal
# ---------------------------------------------------------------------------


class SinusoidSpec(_Spec):
    kind: Literal["sinusoid"]
    amplitude: float
    rate: float | None = None
    rate_over_pi: float | None = None

    @model_validator(mode="after")
    def _one_rate(self) -> "SinusoidSpec":
        if (self.rate is None) == (self.rate_over_pi is None):
            raise ValueError("sinusoid needs exactly one of rate/rate_over_pi")
        return self


class ConstantSpec(_Spec):
    kind: Literal["constant"]
    value: float


class RampSpec(_Spec):
    kind: Literal["ramp"]
    slope: float
    intercept: float = 0.0


class TableSignalSpec(_Spec):
    kind: Literal["table"]
    values: list[float] = Field(min_length=1)


SignalSpec = Annotated[
    Union[SinusoidSpec, ConstantSpec, RampSpec, TableSignalSpec],
    Field(discriminator="kind"),
]


# ---------------------------------------------------------------------------
# Behaviors, params, initial states
# ---------------------------------------------------------------------------


class BehaviorSpec(_Spec):
    behavior: Literal["malicious", "byzantine", "faulty_fixed", "state_hijack"]
    low: float = -50.0
    high: float = 50.0
    value: float | None = None
    table: list[float] | None = Field(default=None, min_length=1)

    @model_validator(mode="after")
    def _per_kind(self) -> "BehaviorSpec":
        if self.behavior == "faulty_fixed":
            if self.value is None:
                raise ValueError("faulty_fixed needs a value")
            if self.table is not None:
                raise ValueError("faulty_fixed takes a single value, not a table")
        elif self.value is not None:
            raise ValueError(f"{self.behavior} draws from low/high or a table, not value")
        return self


class ParamsSpec(_Spec):
    f: int = Field(ge=0)
    eta: int = Field(ge=1)
    t0: int = 0
    u_max: float | None = Field(default=None, gt=0)


class UniformInitSpec(_Spec):
    low: float
    high: float
    seed: int | None = None


class InitSpec(_Spec):
    uniform: UniformInitSpec | None = None
    explicit: dict[int, float] | None = None

    @model_validator(mode="after")
    def _one_source(self) -> "InitSpec":
        if (self.uniform is None) == (self.explicit is None):
            raise ValueError("initial_followers needs exactly one of uniform/explicit")
        return self


# ---------------------------------------------------------------------------
# Scenario file
# ---------------------------------------------------------------------------


class ScenarioSpec(_Spec):
    name: str = "scenario"
    description: str | None = None
    graph: GraphSpec
    index_base: Literal[0, 1] = 0
    leaders: list[int] = Field(min_length=1)
    followers: list[int] = Field(min_length=1)
    adversaries: dict[int, BehaviorSpec] = Field(default_factory=dict)
    params: ParamsSpec
    signal: SignalSpec
    initial_followers: InitSpec
    horizon: int | None = Field(default=None, ge=1)
    seed: int


def _format_validation_error(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        path = " -> ".join(str(p) for p in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return "; ".join(lines)


def parse_spec(data: object) -> ScenarioSpec:
    if not isinstance(data, dict):
        raise ScenarioError(f"scenario must be a mapping, got {type(data).__name__}")
    try:
        return ScenarioSpec.model_validate(data)
    except ValidationError as err:
        raise ScenarioError(f"invalid scenario: {_format_validation_error(err)}") from err


def load_spec(path: str | Path) -> ScenarioSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ScenarioError(f"cannot read scenario file {path}: {err}") from err
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ScenarioError(f"cannot parse {path}: {err}") from err
    return parse_spec(data)


def dump_spec(spec: ScenarioSpec) -> str:
    """YAML form of a spec; load -> dump -> load resolves to the same scenario."""
    return yaml.safe_dump(
        spec.model_dump(exclude_none=True), sort_keys=False, default_flow_style=None
    )


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------


def _build_graph(spec: GraphSpec, base_dir: Path, index_base: int) -> graph.Digraph:
    """Inline edges follow the file's index_base; edge-list files stay 0-based."""
    if spec.circulant is not None:
        c = spec.circulant
        try:
            return graph.k_circulant(c.n, c.k, undirected=c.undirected)
        except ValueError as err:
            raise ScenarioError(f"graph -> circulant: {err}") from err
    if spec.edge_list is not None:
        path = Path(spec.edge_list)
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ScenarioError(f"graph -> edge_list: file not found: {path}")
        try:
            return graph.load_edge_list(path, n=spec.n)
        except ValueError as err:
            raise ScenarioError(f"graph -> edge_list: {err}") from err
    assert spec.edges is not None
    edges = [(h - index_base, t - index_base) for h, t in spec.edges]
    n = spec.n
    if n is None:
        n = max((max(h, t) for h, t in edges), default=-1) + 1
    try:
        return graph.Digraph(n, edges)
    except ValueError as err:
        raise ScenarioError(f"graph -> edges: {err}") from err


def _shift(ids: list[int], base: int, what: str, n: int) -> list[int]:
    out = []
    for raw in ids:
        i = raw - base
        if not 0 <= i < n:
            raise ScenarioError(f"{what}: id {raw} (base {base}) out of range for n={n}")
        out.append(i)
    return out


def _behavior(spec: BehaviorSpec) -> protocol.AdversaryBehavior:
    if spec.behavior == "faulty_fixed":
        return protocol.FaultyFixed(value=float(spec.value))  # type: ignore[arg-type]
    if spec.table is not None:
        source: protocol.ValueSource = protocol.TableSource(tuple(spec.table))
    else:
        source = protocol.UniformSource(low=spec.low, high=spec.high)
    if spec.behavior == "malicious":
        return protocol.Malicious(source)
    if spec.behavior == "byzantine":
        return protocol.Byzantine(source)
    return protocol.StateHijack(source)


def _signal(spec: SignalSpec) -> refsignal.ReferenceSignal:
    if isinstance(spec, SinusoidSpec):
        rate = spec.rate if spec.rate is not None else spec.rate_over_pi / math.pi
        return refsignal.Sinusoid(amplitude=spec.amplitude, angular_rate=rate)
    if isinstance(spec, ConstantSpec):
        return refsignal.Constant(value=spec.value)
    if isinstance(spec, RampSpec):
        return refsignal.Ramp(slope=spec.slope, intercept=spec.intercept)
    return refsignal.Table(values=tuple(spec.values))


def resolve(spec: ScenarioSpec, base_dir: str | Path = ".") -> Scenario:
    """Turn a validated spec into a runnable, fully 0-based scenario."""
    base = spec.index_base
    g = _build_graph(spec.graph, Path(base_dir), base)
    n = g.n
    leaders = _shift(spec.leaders, base, "leaders", n)
    followers = _shift(spec.followers, base, "followers", n)

    leader_set, follower_set = set(leaders), set(followers)
    overlap = sorted(leader_set & follower_set)
    if overlap:
        raise ScenarioError(
            f"roles are a static partition: agents {overlap} declared both leader and follower"
        )
    uncovered = sorted(set(range(n)) - leader_set - follower_set)
    if uncovered:
        raise ScenarioError(
            f"roles are a static partition: agents {uncovered} have no declared role"
        )

    adversaries = {}
    for raw_id, bspec in spec.adversaries.items():
        i = raw_id - base
        if not 0 <= i < n:
            raise ScenarioError(f"adversaries: id {raw_id} (base {base}) out of range for n={n}")
        adversaries[i] = _behavior(bspec)

    params = protocol.ProtocolParams(
        max_faulty=spec.params.f,
        comm_rate=spec.params.eta,
        start_time=spec.params.t0,
        input_bound=spec.params.u_max,
    )

    init: engine.InitialFollowers
    if spec.initial_followers.uniform is not None:
        u = spec.initial_followers.uniform
        init = engine.UniformInit(low=u.low, high=u.high, seed=u.seed)
    else:
        explicit = spec.initial_followers.explicit or {}
        init = engine.ExplicitInit.from_mapping(
            {raw - base: val for raw, val in explicit.items()}
        )

    horizon = spec.horizon if spec.horizon is not None else 40 * params.comm_rate

    return Scenario.build(
        graph=g,
        leaders=leader_set,
        adversaries=adversaries,
        params=params,
        signal=_signal(spec.signal),
        init=init,
        horizon=horizon,
        seed=spec.seed,
        name=spec.name,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return resolve(load_spec(path), base_dir=path.parent)


def inline_spec(spec: ScenarioSpec, base_dir: str | Path = ".") -> ScenarioSpec:
    """Replace an edge-list file reference with inline 0-based edges so the
    spec is self-contained (e.g. before sending it to a remote service)."""
    if spec.graph.edge_list is None:
        return spec
    g = _build_graph(spec.graph, Path(base_dir), spec.index_base)
    shift = spec.index_base
    return spec.model_copy(
        update={
            "graph": GraphSpec(
                edges=[(h + shift, t + shift) for h, t in sorted(g.edges)], n=g.n
            )
        }
    )
