"""Per-agent state machines for resilient reference propagation.

Normal leaders broadcast the upcoming reference value every communication
step and snap onto it at update boundaries. Normal followers accept a value
only once at least F+1 distinct in-neighbors sent it in the previous step,
then relay it for the rest of the period and apply it (optionally saturated)
at the boundary. Misbehaving agents replace all of this with their tagged
behavior.

All step functions are pure: they take a state and return a new one. The
engine owns sequencing.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from typing import ClassVar, NamedTuple, Sequence, Union

import numpy as np

from .signal import ReferenceSignal


class ContractError(RuntimeError):
    """A step function was applied to an agent of the wrong behavior."""


# ---------------------------------------------------------------------------
# Value sources for misbehaving agents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformSource:
    """Seeded uniform draws over [low, high]; the stream belongs to the agent."""

    low: float = -50.0
    high: float = 50.0

    def draw(self, step: int, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class TableSource:
    """Deterministic per-step values; cycles when the run outlives the table."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("table source needs at least one value")

    def draw(self, step: int, rng: np.random.Generator) -> float:
        return self.values[step % len(self.values)]


ValueSource = Union[UniformSource, TableSource]


# ---------------------------------------------------------------------------
# Behaviors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalLeader:
    tag: ClassVar[str] = "normal_leader"


@dataclass(frozen=True)
class NormalFollower:
    tag: ClassVar[str] = "normal_follower"


@dataclass(frozen=True)
class Malicious:
    """Sends one (possibly false) value, identical to every out-neighbor."""

    source: ValueSource
    tag: ClassVar[str] = "malicious"


@dataclass(frozen=True)
class Byzantine:
    """May send a different value to each out-neighbor."""

    source: ValueSource
    tag: ClassVar[str] = "byzantine"


@dataclass(frozen=True)
class FaultyFixed:
    """Stuck agent: state and every outgoing message equal a fixed value."""

    value: float
    tag: ClassVar[str] = "faulty_fixed"


@dataclass(frozen=True)
class StateHijack:
    """Updates its own state off-protocol and broadcasts that (false) state."""

    source: ValueSource
    tag: ClassVar[str] = "state_hijack"


AdversaryBehavior = Union[Malicious, Byzantine, FaultyFixed, StateHijack]
Behavior = Union[NormalLeader, NormalFollower, AdversaryBehavior]


# ---------------------------------------------------------------------------
# Agent state and protocol parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AgentState:
    id: int
    x: float
    behavior: Behavior
    u: float = 0.0
    accepted: float | None = None
    in_c: bool = False


@dataclass(frozen=True)
class ProtocolParams:
    """F, the communication rate, the start time, and the optional input bound."""

    max_faulty: int
    comm_rate: int
    start_time: int = 0
    input_bound: float | None = None

    def __post_init__(self) -> None:
        if self.max_faulty < 0:
            raise ValueError("max_faulty must be nonnegative")
        if self.comm_rate < 1:
            raise ValueError("comm_rate must be >= 1")
        if self.input_bound is not None and self.input_bound <= 0:
            raise ValueError("input_bound must be strictly positive when present")


class Message(NamedTuple):
    sender: int
    receiver: int
    value: float
    t: int


def update_index(t: int, p: ProtocolParams) -> int:
    """Index of the next state update: tau' with tau'*comm_rate the next boundary."""
    return (t - p.start_time) // p.comm_rate + 1


def is_update_edge(t: int, p: ProtocolParams) -> bool:
    """True when the state transition applies between t and t+1 (alpha(t) = 1)."""
    return (t - p.start_time + 1) % p.comm_rate == 0


def saturate(delta: float, u_max: float) -> float:
    # Branchwise form of delta*u_max/max(u_max, |delta|): identical mathematically,
    # but keeps |u| <= u_max exact and u == delta exact when within the bound.
    if abs(delta) <= u_max:
        return delta
    return u_max if delta > 0 else -u_max


# ---------------------------------------------------------------------------
# Normal-leader steps
# ---------------------------------------------------------------------------


def leader_step(
    a: AgentState, t: int, p: ProtocolParams, sig: ReferenceSignal
) -> tuple[AgentState, float]:
    """One leader timestep: broadcast the upcoming reference value, and take
    it on as state when this step closes a period.

    Returns the state effective at t+1 and the value broadcast at t (identical
    to every out-neighbor).
    """
    if not isinstance(a.behavior, NormalLeader):
        raise ContractError(f"leader_step on agent {a.id} with behavior {a.behavior!r}")
    tau_next = update_index(t, p)
    outgoing = sig.eval(tau_next)
    if is_update_edge(t, p):
        a = replace(a, x=sig.eval(tau_next))
    return a, outgoing


# ---------------------------------------------------------------------------
# Normal-follower steps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReceiveResult:
    state: AgentState
    accepted: float | None  # newly latched value, None when nothing changed
    supporters: int
    ties: tuple[float, ...]  # distinct qualifying values when more than one


def _bits(value: float) -> bytes:
    return struct.pack("<d", value)


def follower_receive(
    a: AgentState, inbox: Sequence[Message], t: int, p: ProtocolParams
) -> ReceiveResult:
    """Evaluate last step's inbox: latch a value carried by at least F+1
    distinct senders, set the control input, or hold the previous input.

    Value equality is exact (bit-level): normal agents relay verbatim, so a
    tolerance would only help an adversary. Once latched within a period the
    latch is idempotent. If several distinct values qualify simultaneously
    (impossible under the convergence hypotheses), the smallest wins and all
    of them are reported as a tie.
    """
    if not isinstance(a.behavior, NormalFollower):
        raise ContractError(
            f"follower_receive on agent {a.id} with behavior {a.behavior!r}"
        )
    for m in inbox:
        if m.t != t - 1:
            raise ContractError(f"inbox for t={t} holds a message stamped t={m.t}")
        if m.receiver != a.id:
            raise ContractError(f"agent {a.id} got a message addressed to {m.receiver}")

    if a.in_c:
        return ReceiveResult(state=a, accepted=None, supporters=0, ties=())

    senders_by_value: dict[bytes, set[int]] = {}
    rep: dict[bytes, float] = {}
    for m in inbox:
        key = _bits(m.value)
        senders_by_value.setdefault(key, set()).add(m.sender)
        rep.setdefault(key, m.value)

    threshold = p.max_faulty + 1
    qualifying = sorted(
        (rep[key] for key, senders in senders_by_value.items() if len(senders) >= threshold),
        key=lambda v: (math.isnan(v), v),
    )
    if not qualifying:
        return ReceiveResult(state=a, accepted=None, supporters=0, ties=())

    value = qualifying[0]
    supporters = len(senders_by_value[_bits(value)])
    delta = value - a.x
    u = delta if p.input_bound is None else saturate(delta, p.input_bound)
    new_state = replace(a, u=u, accepted=value, in_c=True)
    ties = tuple(qualifying) if len(qualifying) > 1 else ()
    return ReceiveResult(state=new_state, accepted=value, supporters=supporters, ties=ties)


def follower_state_update(a: AgentState, t: int, p: ProtocolParams) -> AgentState:
    """Advance x by u when this step closes a period; the latch resets at the
    boundary the step lands on. Returns the state effective at t+1."""
    if not isinstance(a.behavior, NormalFollower):
        raise ContractError(
            f"follower_state_update on agent {a.id} with behavior {a.behavior!r}"
        )
    if not is_update_edge(t, p):
        return a
    return replace(a, x=a.x + a.u, accepted=None, in_c=False)


def follower_broadcast(a: AgentState) -> float | None:
    """The latched value while the latch is set; nothing otherwise."""
    if not isinstance(a.behavior, NormalFollower):
        raise ContractError(
            f"follower_broadcast on agent {a.id} with behavior {a.behavior!r}"
        )
    return a.accepted if a.in_c else None


# ---------------------------------------------------------------------------
# Misbehaving agents
# ---------------------------------------------------------------------------


def adversary_step(
    a: AgentState, step: int, out_degree: int, rng: np.random.Generator
) -> tuple[AgentState, tuple[float, ...]]:
    """One misbehaving timestep: new own state plus per-receiver values.

    `step` is the elapsed step count since the start time (indexes table
    sources). Draw order is fixed: one state draw, then, for byzantine only,
    one draw per out-neighbor in ascending id order.
    """
    b = a.behavior
    if isinstance(b, Malicious):
        v = b.source.draw(step, rng)
        return replace(a, x=v), (v,) * out_degree
    if isinstance(b, Byzantine):
        own = b.source.draw(step, rng)
        values = tuple(b.source.draw(step, rng) for _ in range(out_degree))
        return replace(a, x=own), values
    if isinstance(b, FaultyFixed):
        return replace(a, x=b.value), (b.value,) * out_degree
    if isinstance(b, StateHijack):
        v = b.source.draw(step, rng)
        return replace(a, x=v), (v,) * out_degree
    raise ContractError(f"adversary_step on agent {a.id} with behavior {b!r}")
