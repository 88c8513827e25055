"""Deterministic simulator and analysis toolkit for resilient leader-follower
consensus under the multi-source resilient propagation algorithm (MS-RPA).

Core pieces: an immutable digraph model with strong-robustness certification,
per-agent protocol state machines with configurable misbehavior, a
synchronous round engine with bit-reproducible traces, and the error /
Lyapunov metrics backing the convergence guarantees. An HTTP service wraps
the package; the CLI is a thin client over it.
"""

__version__ = "0.1.0"

from .engine import (
    ExplicitInit,
    Scenario,
    ScenarioError,
    Trace,
    UniformInit,
    ValidationReport,
    replay_check,
    run,
    validate,
)
from .graph import (
    CapacityError,
    Digraph,
    RobustnessCertificate,
    is_f_local,
    is_f_total,
    k_circulant,
    strongly_robust_bruteforce,
    strongly_robust_wrt,
)
from .metrics import (
    MetricSeries,
    convergence_time,
    error_series,
    lyapunov_series,
    metric_series,
    monotonicity_check,
    theorem2_bound,
)
from .protocol import (
    AgentState,
    Byzantine,
    FaultyFixed,
    Malicious,
    ProtocolParams,
    StateHijack,
    TableSource,
    UniformSource,
)
from .scenario_io import ScenarioSpec, load_scenario, load_spec
from .signal import Constant, Ramp, ReferenceSignal, Sinusoid, Table

__all__ = [
    "__version__",
    "AgentState",
    "Byzantine",
    "CapacityError",
    "Constant",
    "Digraph",
    "ExplicitInit",
    "FaultyFixed",
    "Malicious",
    "MetricSeries",
    "ProtocolParams",
    "Ramp",
    "ReferenceSignal",
    "RobustnessCertificate",
    "Scenario",
    "ScenarioError",
    "ScenarioSpec",
    "Sinusoid",
    "StateHijack",
    "Table",
    "TableSource",
    "Trace",
    "UniformInit",
    "UniformSource",
    "ValidationReport",
    "convergence_time",
    "error_series",
    "is_f_local",
    "is_f_total",
    "k_circulant",
    "load_scenario",
    "load_spec",
    "lyapunov_series",
    "metric_series",
    "monotonicity_check",
    "replay_check",
    "run",
    "strongly_robust_bruteforce",
    "strongly_robust_wrt",
    "theorem2_bound",
    "validate",
]
