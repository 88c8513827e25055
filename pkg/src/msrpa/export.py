"""Flat CSV renderings of traces and metrics.

Column contracts are stable (regression-tested): any plotting tool can
consume these without custom parsing. Floats are written with shortest
round-trip formatting, so files are byte-stable for identical runs.
"""

from __future__ import annotations

from .engine import Trace
from .metrics import MetricSeries

TRACE_HEADER = "t,agent_id,role,behavior,x,u,in_c,accepted_value"
MESSAGES_HEADER = "t,sender,receiver,value"
METRICS_HEADER = "t,e,tau,V"


def _num(value: float) -> str:
    return repr(float(value))


def trace_csv(tr: Trace) -> str:
    sc = tr.scenario
    roles = {i: ("leader" if i in sc.leaders else "follower") for i in sc.graph.agents()}
    behaviors = dict(sc.adversaries)
    lines = [TRACE_HEADER]
    for step in tr.steps:
        for i in sc.graph.agents():
            b = behaviors.get(i)
            tag = b.tag if b is not None else f"normal_{roles[i]}"
            accepted = "" if step.accepted[i] is None else _num(step.accepted[i])
            lines.append(
                f"{step.t},{i},{roles[i]},{tag},{_num(step.x[i])},{_num(step.u[i])},"
                f"{int(step.in_c[i])},{accepted}"
            )
    return "\n".join(lines) + "\n"


def messages_csv(tr: Trace) -> str:
    lines = [MESSAGES_HEADER]
    lines.extend(
        f"{m.t},{m.sender},{m.receiver},{_num(m.value)}" for m in tr.messages
    )
    return "\n".join(lines) + "\n"


def metrics_csv(tr: Trace, series: MetricSeries) -> str:
    eta = tr.scenario.params.comm_rate
    lines = [METRICS_HEADER]
    for idx, e in enumerate(series.e):
        t = tr.t0 + idx
        if idx % eta == 0:
            tau = idx // eta
            lines.append(f"{t},{_num(e)},{tau},{_num(series.v[tau])}")
        else:
            lines.append(f"{t},{_num(e)},,")
    return "\n".join(lines) + "\n"
