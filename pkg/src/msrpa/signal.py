"""Reference signals driving the leader set, plus their step-variation bounds.

Signals are evaluated at nonnegative integer update indices tau. All kinds
are pure: repeated evaluation with equal arguments is bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


class SignalRangeError(IndexError):
    """A table signal was queried beyond its length."""


@dataclass(frozen=True)
class Sinusoid:
    amplitude: float
    angular_rate: float

    def eval(self, tau: int) -> float:
        _check_tau(tau)
        return self.amplitude * math.sin(self.angular_rate * tau)


@dataclass(frozen=True)
class Constant:
    value: float

    def eval(self, tau: int) -> float:
        _check_tau(tau)
        return self.value


@dataclass(frozen=True)
class Ramp:
    slope: float
    intercept: float = 0.0

    def eval(self, tau: int) -> float:
        _check_tau(tau)
        return self.slope * tau + self.intercept


@dataclass(frozen=True)
class Table:
    values: tuple[float, ...]

    def eval(self, tau: int) -> float:
        _check_tau(tau)
        if tau >= len(self.values):
            raise SignalRangeError(
                f"table signal has {len(self.values)} entries, queried at tau={tau}"
            )
        return self.values[tau]


ReferenceSignal = Union[Sinusoid, Constant, Ramp, Table]


def _check_tau(tau: int) -> None:
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")


def max_step(sig: ReferenceSignal, tau_max: int) -> float:
    """Largest |f(tau+1) - f(tau)| over tau in [0, tau_max).

    Computed by exhaustive scan; closed_form_step_bound gives the analytic
    ceiling for cross-checks, but the scan is authoritative since only the
    simulated range matters.
    """
    if tau_max < 1:
        raise ValueError(f"tau_max must be >= 1, got {tau_max}")
    return max(abs(sig.eval(tau + 1) - sig.eval(tau)) for tau in range(tau_max))


def closed_form_step_bound(sig: ReferenceSignal) -> float | None:
    """Analytic upper bound on one-step variation; None for table signals."""
    if isinstance(sig, Constant):
        return 0.0
    if isinstance(sig, Ramp):
        return abs(sig.slope)
    if isinstance(sig, Sinusoid):
        # |A sin(w(tau+1)) - A sin(w tau)| = 2|A sin(w/2) cos(w(2tau+1)/2)|
        return abs(2.0 * sig.amplitude * math.sin(sig.angular_rate / 2.0))
    return None


def theorem2_epsilon(sig: ReferenceSignal, u_max: float, tau_max: int) -> float | None:
    """Slack between the input bound and the signal's largest one-step move.

    Returns u_max - max_step when strictly positive, else None: the bounded
    convergence guarantee needs the signal to move strictly slower than the
    followers can, so the boundary case is infeasible.
    """
    if u_max <= 0:
        raise ValueError(f"u_max must be positive, got {u_max}")
    eps = u_max - max_step(sig, tau_max)
    return eps if eps > 0 else None
