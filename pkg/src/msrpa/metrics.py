"""Error and Lyapunov functionals, convergence detection, and trace checks.

Everything here is a pure function over an immutable trace (or scenario), so
metric extraction parallelizes trivially across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import Scenario, Trace, initial_states
from .protocol import update_index
from .signal import theorem2_epsilon

# Exact-tracking tolerance: the protocol relays values verbatim, so the only
# float effects are the single add at each boundary and the saturation branch.
EXACT_TOL = 1e-9


class UndefinedMetricError(ValueError):
    """The trace has no normal leaders or no normal followers."""


def _normal_sets(sc: Scenario) -> tuple[tuple[int, ...], tuple[int, ...]]:
    leaders = sc.normal_leaders
    followers = sc.normal_followers
    if not leaders or not followers:
        raise UndefinedMetricError(
            "tracking error needs at least one normal leader and one normal follower"
        )
    return leaders, followers


def error_series(tr: Trace) -> tuple[float, ...]:
    """Worst normal-follower-to-normal-leader distance at every recorded t."""
    leaders, followers = _normal_sets(tr.scenario)
    out = []
    for step in tr.steps:
        out.append(
            max(abs(step.x[i] - step.x[l]) for i in followers for l in leaders)
        )
    return tuple(out)


def _update_instants(tr: Trace) -> tuple[int, ...]:
    eta = tr.scenario.params.comm_rate
    return tuple(
        tr.t0 + tau * eta for tau in range(tr.scenario.horizon // eta + 1)
    )


def lyapunov_series(tr: Trace) -> tuple[float, ...]:
    """Spread M - m of normal agents' states at each update instant (tau = 0, 1, ...)."""
    m_env, m_env_max = envelopes(tr)
    return tuple(hi - lo for lo, hi in zip(m_env, m_env_max))


def envelopes(tr: Trace) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Min/max of normal followers' and normal leaders' states at update instants."""
    leaders, followers = _normal_sets(tr.scenario)
    members = followers + leaders
    lows, highs = [], []
    for t in _update_instants(tr):
        xs = [tr.step_at(t).x[i] for i in members]
        lows.append(min(xs))
        highs.append(max(xs))
    return tuple(lows), tuple(highs)


def convergence_time(tr: Trace, tol: float = EXACT_TOL) -> int | None:
    """Least t such that the error stays within tol through the horizon."""
    e = error_series(tr)
    if e[-1] > tol:
        return None
    t = tr.final_t
    for idx in range(len(e) - 1, -1, -1):
        if e[idx] > tol:
            break
        t = tr.t0 + idx
    return t


@dataclass(frozen=True)
class MonotonicityResult:
    ok: bool
    first_violation: int | None  # timestep t where e(t+1) > e(t) + tol


def monotonicity_check(tr: Trace, tol: float = EXACT_TOL) -> MonotonicityResult:
    e = error_series(tr)
    for idx in range(len(e) - 1):
        if e[idx + 1] > e[idx] + tol:
            return MonotonicityResult(ok=False, first_violation=tr.t0 + idx)
    return MonotonicityResult(ok=True, first_violation=None)


def theorem2_bound(sc: Scenario) -> int | None:
    """Guaranteed number of periods to exact tracking under bounded inputs:
    ceil(V0 / epsilon) + 1, with V0 the initial spread of normal agents'
    states. None when the scenario is unbounded or the slack is infeasible."""
    p = sc.params
    if p.input_bound is None:
        return None
    tau_max = max(1, sc.horizon // p.comm_rate)
    eps = theorem2_epsilon(sc.signal, p.input_bound, tau_max)
    if eps is None:
        return None
    leaders, followers = _normal_sets(sc)
    x0 = initial_states(sc)
    xs = [x0[i] for i in followers + leaders]
    v0 = max(xs) - min(xs)
    return math.ceil(v0 / eps) + 1


@dataclass(frozen=True)
class MetricSeries:
    """Bundle of everything derivable from one trace."""

    e: tuple[float, ...]
    v: tuple[float, ...]
    m_env: tuple[float, ...]
    m_env_max: tuple[float, ...]
    convergence_time: int | None
    theorem2_T: int | None


def metric_series(tr: Trace, tol: float = EXACT_TOL) -> MetricSeries:
    lows, highs = envelopes(tr)
    return MetricSeries(
        e=error_series(tr),
        v=tuple(hi - lo for lo, hi in zip(lows, highs)),
        m_env=lows,
        m_env_max=highs,
        convergence_time=convergence_time(tr, tol),
        theorem2_T=theorem2_bound(tr.scenario),
    )


# ---------------------------------------------------------------------------
# Trace invariant checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdSafetyReport:
    ok: bool
    bad_acceptances: tuple[tuple[int, int, float, float], ...]  # (t, agent, got, expected)
    tie_events: int


def threshold_safety(tr: Trace) -> ThresholdSafetyReport:
    """Every acceptance at a normal follower latched exactly the reference
    value currently propagating, and no tie ever formed. Only meaningful when
    the validation hypotheses hold."""
    p = tr.scenario.params
    sig = tr.scenario.signal
    bad = []
    for acc in tr.acceptances:
        expected = sig.eval(update_index(acc.t, p))
        if acc.value != expected:
            bad.append((acc.t, acc.agent, acc.value, expected))
    return ThresholdSafetyReport(
        ok=not bad and not tr.violations,
        bad_acceptances=tuple(bad),
        tie_events=len(tr.violations),
    )


@dataclass(frozen=True)
class WavefrontReport:
    ok: bool
    periods_checked: int
    latest_offset: int  # worst first-acceptance offset p' across periods
    detail: str


def wavefront_report(tr: Trace) -> WavefrontReport:
    """Within every full period, every normal follower must latch strictly
    before the boundary, no later than offset |normal followers|."""
    sc = tr.scenario
    eta = sc.params.comm_rate
    followers = set(sc.normal_followers)
    n_periods = sc.horizon // eta

    first_acc: dict[tuple[int, int], int] = {}
    for acc in tr.acceptances:
        offset = (acc.t - tr.t0) % eta
        period = (acc.t - tr.t0) // eta + 1
        key = (period, acc.agent)
        if key not in first_acc:
            first_acc[key] = offset

    latest = 0
    for period in range(1, n_periods + 1):
        for agent in sorted(followers):
            offset = first_acc.get((period, agent))
            if offset is None:
                return WavefrontReport(
                    ok=False,
                    periods_checked=n_periods,
                    latest_offset=latest,
                    detail=f"agent {agent} never latched in period {period}",
                )
            latest = max(latest, offset)

    bound = len(followers)
    if latest > bound:
        return WavefrontReport(
            ok=False,
            periods_checked=n_periods,
            latest_offset=latest,
            detail=f"latest offset {latest} exceeds normal-follower count {bound}",
        )
    return WavefrontReport(
        ok=True, periods_checked=n_periods, latest_offset=latest, detail=""
    )


def order_fidelity(tr: Trace) -> tuple[bool, int | None]:
    """Normal followers' states may change only across period boundaries."""
    sc = tr.scenario
    eta = sc.params.comm_rate
    for idx in range(len(tr.steps) - 1):
        boundary = (idx + 1) % eta == 0
        if boundary:
            continue
        for i in sc.normal_followers:
            if tr.steps[idx + 1].x[i] != tr.steps[idx].x[i]:
                return False, tr.t0 + idx
    return True, None


def leader_consistency(tr: Trace) -> bool:
    """Normal leaders hold pairwise-equal states at every timestep."""
    leaders = tr.scenario.normal_leaders
    if len(leaders) < 2:
        return True
    ref = leaders[0]
    return all(
        step.x[l] == step.x[ref] for step in tr.steps for l in leaders[1:]
    )


def period_end_inputs_aligned(tr: Trace) -> bool:
    """Unbounded branch: at every step closing a period, each normal
    follower's input equals reference-minus-state exactly."""
    sc = tr.scenario
    p = sc.params
    if p.input_bound is not None:
        raise ValueError("endpoint check applies to unbounded-input runs")
    eta = p.comm_rate
    for tau in range(1, sc.horizon // eta + 1):
        t = tr.t0 + tau * eta - 1
        step = tr.step_at(t)
        target = sc.signal.eval(tau)
        for i in sc.normal_followers:
            if step.u[i] != target - step.x[i]:
                return False
    return True
