"""Synchronous round scheduler with full trace capture.

Each timestep runs the protocol phases in a fixed order: state transitions
land first (leaders snap to the reference, followers apply their held input,
latches reset; all of this only at period boundaries), then leaders broadcast the
upcoming reference value and misbehaving agents act, then followers evaluate
the previous step's inbox, and finally latched followers relay. Messages sent
at t are delivered into inboxes read at t+1; delivery is lossless and
synchronous.

A run is strictly single-threaded and bit-reproducible: all randomness comes
from counter-based Philox streams keyed by (scenario seed, stream id), so the
trace depends only on the scenario.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .graph import Digraph, is_f_local, strongly_robust_wrt
from .protocol import (
    AdversaryBehavior,
    AgentState,
    Message,
    NormalFollower,
    NormalLeader,
    ProtocolParams,
    adversary_step,
    follower_broadcast,
    follower_receive,
    follower_state_update,
    leader_step,
)
from .signal import ReferenceSignal, Table, theorem2_epsilon


class ScenarioError(ValueError):
    """A scenario is malformed (role overlap, bad indices, bad sizes)."""


# ---------------------------------------------------------------------------
# Deterministic stream derivation
# ---------------------------------------------------------------------------

INIT_STREAM = 0  # stream id for initial-state draws; agent i uses stream i+1


def derive_stream(seed: int, stream: int) -> np.random.Generator:
    """Philox generator keyed by (seed, stream): reproducible and independent
    of the order other streams are consumed in."""
    key = (seed % (1 << 64)) + (stream << 64)
    return np.random.Generator(np.random.Philox(key=key))


def agent_stream(seed: int, agent_id: int) -> np.random.Generator:
    return derive_stream(seed, agent_id + 1)


def init_stream(seed: int) -> np.random.Generator:
    return derive_stream(seed, INIT_STREAM)


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformInit:
    """Follower initial states drawn uniformly; seed falls back to the scenario's."""

    low: float
    high: float
    seed: int | None = None


@dataclass(frozen=True)
class ExplicitInit:
    """Follower initial states pinned per agent id."""

    values: tuple[tuple[int, float], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, float]) -> "ExplicitInit":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[int, float]:
        return dict(self.values)


InitialFollowers = Union[UniformInit, ExplicitInit]


@dataclass(frozen=True, eq=True)
class Scenario:
    """Complete run description; immutable and replayable from the seed."""

    graph: Digraph
    leaders: frozenset[int]
    adversaries: tuple[tuple[int, AdversaryBehavior], ...]
    params: ProtocolParams
    signal: ReferenceSignal
    init: InitialFollowers
    horizon: int
    seed: int
    name: str = "scenario"

    def __post_init__(self) -> None:
        n = self.graph.n
        for i in self.leaders:
            if not 0 <= i < n:
                raise ScenarioError(f"leader id {i} out of range for n={n}")
        if not self.leaders:
            raise ScenarioError("scenario needs at least one leader")
        if len(self.leaders) == n:
            raise ScenarioError("scenario needs at least one follower")
        adv_ids = [i for i, _ in self.adversaries]
        if len(set(adv_ids)) != len(adv_ids):
            raise ScenarioError("duplicate adversary ids")
        for i in adv_ids:
            if not 0 <= i < n:
                raise ScenarioError(f"adversary id {i} out of range for n={n}")
        if self.horizon < self.params.comm_rate:
            raise ScenarioError(
                f"horizon {self.horizon} shorter than one period ({self.params.comm_rate})"
            )
        if isinstance(self.init, ExplicitInit):
            declared = set(self.init.as_dict())
            if declared != set(self.followers):
                missing = sorted(set(self.followers) - declared)
                extra = sorted(declared - set(self.followers))
                raise ScenarioError(
                    f"explicit initial states must cover exactly the followers "
                    f"(missing {missing}, extraneous {extra})"
                )
        if isinstance(self.signal, Table):
            needed = self.horizon // self.params.comm_rate + 1
            if len(self.signal.values) < needed:
                raise ScenarioError(
                    f"table signal has {len(self.signal.values)} entries; "
                    f"horizon {self.horizon} needs {needed}"
                )

    @classmethod
    def build(
        cls,
        graph: Digraph,
        leaders: set[int] | frozenset[int],
        adversaries: Mapping[int, AdversaryBehavior],
        params: ProtocolParams,
        signal: ReferenceSignal,
        init: InitialFollowers,
        horizon: int,
        seed: int,
        name: str = "scenario",
    ) -> "Scenario":
        return cls(
            graph=graph,
            leaders=frozenset(leaders),
            adversaries=tuple(sorted(adversaries.items())),
            params=params,
            signal=signal,
            init=init,
            horizon=horizon,
            seed=seed,
            name=name,
        )

    @property
    def followers(self) -> tuple[int, ...]:
        return tuple(i for i in self.graph.agents() if i not in self.leaders)

    @property
    def adversary_map(self) -> dict[int, AdversaryBehavior]:
        return dict(self.adversaries)

    @property
    def adversary_ids(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.adversaries)

    @property
    def normal_leaders(self) -> tuple[int, ...]:
        bad = self.adversary_ids
        return tuple(sorted(i for i in self.leaders if i not in bad))

    @property
    def normal_followers(self) -> tuple[int, ...]:
        bad = self.adversary_ids
        return tuple(i for i in self.followers if i not in bad)


def initial_states(sc: Scenario) -> dict[int, float]:
    """Initial scalar state per agent: every leader starts on the reference at
    tau=0 (normal leaders are mutually consistent by construction); followers
    come from the init spec, uniform draws in ascending id order."""
    x0: dict[int, float] = {}
    ref0 = sc.signal.eval(0)
    for i in sorted(sc.leaders):
        x0[i] = ref0
    if isinstance(sc.init, ExplicitInit):
        x0.update(sc.init.as_dict())
    else:
        rng = init_stream(sc.init.seed if sc.init.seed is not None else sc.seed)
        for i in sc.followers:
            x0[i] = float(rng.uniform(sc.init.low, sc.init.high))
    return x0


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[HypothesisCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.passed)


def validate(sc: Scenario) -> ValidationReport:
    """Check the convergence-guarantee hypotheses. Failures never block a run
    (negative tests need them); they are stamped into the trace."""
    p = sc.params
    checks: list[HypothesisCheck] = []

    r = 2 * p.max_faulty + 1
    cert = strongly_robust_wrt(sc.graph, sc.leaders, r)
    checks.append(
        HypothesisCheck(
            name="strong_robustness",
            passed=cert.holds,
            detail=(
                f"graph strongly {r}-robust w.r.t. leaders"
                if cert.holds
                else f"graph not strongly {r}-robust w.r.t. leaders; "
                f"stalled set {sorted(cert.witness)}"
            ),
        )
    )

    adv = set(sc.adversary_ids)
    local_ok = is_f_local(sc.graph, adv, p.max_faulty)
    checks.append(
        HypothesisCheck(
            name="f_local_adversaries",
            passed=local_ok,
            detail=(
                f"adversary set {sorted(adv)} is {p.max_faulty}-local"
                if local_ok
                else f"adversary set {sorted(adv)} exceeds {p.max_faulty} members "
                f"in some agent's in-neighborhood"
            ),
        )
    )

    n_followers = len(sc.followers)
    rate_ok = p.comm_rate > n_followers
    checks.append(
        HypothesisCheck(
            name="comm_rate_exceeds_followers",
            passed=rate_ok,
            detail=f"comm_rate {p.comm_rate} {'>' if rate_ok else '<='} |followers| {n_followers}",
        )
    )

    if p.input_bound is not None:
        tau_max = max(1, sc.horizon // p.comm_rate)
        eps = theorem2_epsilon(sc.signal, p.input_bound, tau_max)
        checks.append(
            HypothesisCheck(
                name="input_bound_feasible",
                passed=eps is not None,
                detail=(
                    f"epsilon = {eps}" if eps is not None
                    else f"signal max step >= input bound {p.input_bound}"
                ),
            )
        )

    return ValidationReport(checks=tuple(checks))


# ---------------------------------------------------------------------------
# Trace
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceStep:
    """States in effect at t: x(t), u(t), and the latch after step t's inbox
    evaluation. Tuples are indexed by agent id."""

    t: int
    x: tuple[float, ...]
    u: tuple[float, ...]
    in_c: tuple[bool, ...]
    accepted: tuple[float | None, ...]


@dataclass(frozen=True)
class Acceptance:
    t: int
    agent: int
    value: float
    supporters: int


@dataclass(frozen=True)
class TieViolation:
    """Two or more distinct values reached the acceptance threshold at once."""

    t: int
    agent: int
    values: tuple[float, ...]


@dataclass(frozen=True)
class Trace:
    scenario: Scenario
    validation: ValidationReport
    steps: tuple[TraceStep, ...]
    messages: tuple[Message, ...]
    acceptances: tuple[Acceptance, ...]
    violations: tuple[TieViolation, ...]

    @property
    def t0(self) -> int:
        return self.scenario.params.start_time

    @property
    def final_t(self) -> int:
        return self.t0 + self.scenario.horizon

    def step_at(self, t: int) -> TraceStep:
        idx = t - self.t0
        if not 0 <= idx < len(self.steps):
            raise IndexError(f"t={t} outside trace range [{self.t0}, {self.final_t}]")
        return self.steps[idx]


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------


def run(sc: Scenario) -> Trace:
    p = sc.params
    g = sc.graph
    report = validate(sc)

    behaviors = {}
    adv_map = sc.adversary_map
    for i in g.agents():
        if i in adv_map:
            behaviors[i] = adv_map[i]
        elif i in sc.leaders:
            behaviors[i] = NormalLeader()
        else:
            behaviors[i] = NormalFollower()

    x0 = initial_states(sc)
    states: dict[int, AgentState] = {
        i: AgentState(id=i, x=x0[i], behavior=behaviors[i]) for i in g.agents()
    }
    rngs = {i: agent_stream(sc.seed, i) for i in sorted(adv_map)}
    out_nbrs = {i: tuple(sorted(g.out_neighbors(i))) for i in g.agents()}

    normal_leaders = sc.normal_leaders
    normal_followers = sc.normal_followers
    adversaries = tuple(sorted(adv_map))

    inbox: dict[int, list[Message]] = {}
    steps: list[TraceStep] = []
    msg_log: list[Message] = []
    acceptances: list[Acceptance] = []
    violations: list[TieViolation] = []

    def snapshot(t: int) -> TraceStep:
        return TraceStep(
            t=t,
            x=tuple(states[i].x for i in g.agents()),
            u=tuple(states[i].u for i in g.agents()),
            in_c=tuple(states[i].in_c for i in g.agents()),
            accepted=tuple(states[i].accepted for i in g.agents()),
        )

    for step in range(sc.horizon):
        t = p.start_time + step
        out: list[Message] = []
        pending_leader: dict[int, AgentState] = {}

        # Leaders broadcast the upcoming reference value; their boundary
        # transition is held back until after this step's snapshot.
        for i in normal_leaders:
            new_state, value = leader_step(states[i], t, p, sc.signal)
            pending_leader[i] = new_state
            out.extend(Message(i, r, value, t) for r in out_nbrs[i])

        # Misbehaving agents act: own state update plus per-receiver values.
        for i in adversaries:
            new_state, values = adversary_step(states[i], step, len(out_nbrs[i]), rngs[i])
            states[i] = new_state
            out.extend(
                Message(i, r, v, t) for r, v in zip(out_nbrs[i], values)
            )

        # Followers evaluate last step's inbox; gated off on the first step of
        # every period (acceptance starts at the second communication step).
        if step % p.comm_rate != 0:
            for i in normal_followers:
                res = follower_receive(states[i], inbox.get(i, []), t, p)
                states[i] = res.state
                if res.accepted is not None:
                    acceptances.append(
                        Acceptance(t=t, agent=i, value=res.accepted, supporters=res.supporters)
                    )
                if res.ties:
                    violations.append(TieViolation(t=t, agent=i, values=res.ties))

        # Latched followers relay for the remainder of the period.
        for i in normal_followers:
            value = follower_broadcast(states[i])
            if value is not None:
                out.extend(Message(i, r, value, t) for r in out_nbrs[i])

        steps.append(snapshot(t))
        msg_log.extend(out)

        delivered: dict[int, list[Message]] = {}
        for m in out:
            delivered.setdefault(m.receiver, []).append(m)
        inbox = delivered

        # Transition into t+1: leaders snap, followers apply u, latches reset
        # when t+1 is a boundary.
        for i, new_state in pending_leader.items():
            states[i] = new_state
        for i in normal_followers:
            states[i] = follower_state_update(states[i], t, p)

    steps.append(snapshot(p.start_time + sc.horizon))

    return Trace(
        scenario=sc,
        validation=report,
        steps=tuple(steps),
        messages=tuple(msg_log),
        acceptances=tuple(acceptances),
        violations=tuple(violations),
    )


def replay_check(sc: Scenario) -> bool:
    """Run twice and compare the full traces for bit-equality."""
    return run(sc) == run(sc)
