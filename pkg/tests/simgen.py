"""Shared builders for randomized tests: seeded digraphs and scenario batches.

Everything is driven by explicit integer seeds so failures reproduce exactly.
"""

from __future__ import annotations

import numpy as np

from msrpa.engine import Scenario, UniformInit, validate
from msrpa.graph import Digraph, is_f_local, k_circulant
from msrpa.protocol import (
    Byzantine,
    FaultyFixed,
    Malicious,
    ProtocolParams,
    UniformSource,
)
from msrpa.signal import Constant, Ramp, Sinusoid


def random_digraph(seed: int, n_max: int = 10) -> Digraph:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    p = float(rng.uniform(0.15, 0.65))
    edges = [
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and rng.random() < p
    ]
    return Digraph(n, edges)


def random_source_set_and_r(seed: int, g: Digraph) -> tuple[frozenset[int], int]:
    rng = np.random.default_rng(seed + 1_000_003)
    size = int(rng.integers(1, g.n))
    s = frozenset(int(i) for i in rng.choice(g.n, size=size, replace=False))
    r = int(rng.integers(1, 5))
    return s, r


def random_signal(rng: np.random.Generator):
    kind = rng.integers(0, 3)
    if kind == 0:
        return Sinusoid(
            amplitude=float(rng.uniform(1.0, 20.0)),
            angular_rate=float(rng.uniform(0.05, 1.5)),
        )
    if kind == 1:
        return Ramp(slope=float(rng.uniform(-3.0, 3.0)), intercept=float(rng.uniform(-5, 5)))
    return Constant(value=float(rng.uniform(-10.0, 10.0)))


def random_passing_scenario(seed: int, periods: int = 3) -> Scenario:
    """Random scenario satisfying every convergence hypothesis: circulant
    graph with a consecutive leader block of size >= 2F+1 <= k (which forces
    strong (2F+1)-robustness), an F-local adversary set mixing malicious and
    byzantine agents, and a comm rate above the follower count."""
    rng = np.random.default_rng(seed)
    f = int(rng.integers(1, 3))
    r = 2 * f + 1
    n = int(rng.integers(r + 3, 15))
    k = int(rng.integers(r, min(n - 1, r + 3) + 1))
    n_leaders = int(rng.integers(r, k + 1))
    n_leaders = min(n_leaders, n - 2)  # keep at least two followers
    g = k_circulant(n, k, undirected=True)
    leaders = set(range(n_leaders))

    adversaries = {}
    for _ in range(40):
        size = int(rng.integers(1, f + 1))
        picks = [int(i) for i in rng.choice(n, size=size, replace=False)]
        if is_f_local(g, set(picks), f):
            for i in picks:
                tag = rng.integers(0, 2)
                src = UniformSource(-50.0, 50.0)
                adversaries[i] = Malicious(src) if tag == 0 else Byzantine(src)
            break

    n_followers = n - n_leaders
    eta = n_followers + 1 + int(rng.integers(0, 3))
    sc = Scenario.build(
        graph=g,
        leaders=leaders,
        adversaries=adversaries,
        params=ProtocolParams(max_faulty=f, comm_rate=eta, start_time=0),
        signal=random_signal(rng),
        init=UniformInit(low=-25.0, high=25.0),
        horizon=eta * periods,
        seed=seed,
    )
    report = validate(sc)
    assert report.passed, f"generator produced a non-passing scenario: {report.failed}"
    return sc


def clustered_adversary_scenario(seed: int, f: int = 2) -> Scenario:
    """Scenario whose adversaries form an (F+1)-sized stuck cluster inside one
    follower's in-neighborhood: F-locality fails and tracking can break."""
    r = 2 * f + 1
    n = 14
    k = 5
    g = k_circulant(n, k, undirected=True)
    leaders = set(range(5))
    cluster = range(5, 5 + f + 1)
    adversaries = {i: FaultyFixed(42.0) for i in cluster}
    assert not is_f_local(g, set(cluster), f)
    return Scenario.build(
        graph=g,
        leaders=leaders,
        adversaries=adversaries,
        params=ProtocolParams(max_faulty=f, comm_rate=10, start_time=0),
        signal=Sinusoid(amplitude=10.0, angular_rate=1.0 / np.pi),
        init=UniformInit(low=-25.0, high=25.0),
        horizon=100,
        seed=seed,
    )
