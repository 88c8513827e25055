"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import dataclasses
import time

import pytest

from msrpa import cli
from msrpa.engine import replay_check, run, validate
from msrpa.graph import k_circulant, strongly_robust_bruteforce, strongly_robust_wrt
from msrpa.metrics import (
    EXACT_TOL,
    convergence_time,
    error_series,
    monotonicity_check,
    theorem2_bound,
    threshold_safety,
    wavefront_report,
)
from msrpa.scenario_io import load_scenario
from simgen import random_digraph, random_passing_scenario, random_source_set_and_r

N_SEEDS = 20
N_SCENARIOS = 100
N_GRAPHS = 200


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {num} {name}: {verdict}{suffix}")
    assert ok, f"criterion {num} ({name}) failed{suffix}"


@pytest.fixture(scope="module")
def passing_batch():
    """100 randomized hypothesis-satisfying runs shared by criteria 4 and 5."""
    traces = []
    for seed in range(N_SCENARIOS):
        sc = random_passing_scenario(seed, periods=3)
        traces.append(run(sc))
    return traces


def test_criterion_1_sim1_reproduction(sim1_path):
    sc0 = load_scenario(sim1_path)
    eta = sc0.params.comm_rate
    worst = 0.0
    slowest = 0.0
    for seed in range(N_SEEDS):
        sc = dataclasses.replace(sc0, seed=sc0.seed + seed)
        started = time.perf_counter()
        tr = run(sc)
        elapsed = time.perf_counter() - started
        slowest = max(slowest, elapsed)
        e = error_series(tr)
        worst = max(worst, max(e[eta:]))
        assert tr.validation.passed
    ok = worst <= EXACT_TOL and slowest < 1.0
    _report(
        1,
        "sim1 exact tracking from t0+eta",
        ok,
        f"worst e after t0+{eta} = {worst:.3g} over {N_SEEDS} seeds, "
        f"slowest run {slowest * 1000:.0f} ms",
    )


def test_criterion_2_sim2_reproduction(sim2_path):
    sc0 = load_scenario(sim2_path)
    eta = sc0.params.comm_rate
    worst_tail = 0.0
    bounds = []
    for seed in range(N_SEEDS):
        sc = dataclasses.replace(sc0, seed=sc0.seed + seed)
        bound = theorem2_bound(sc)
        assert bound is not None
        bounds.append(bound)
        tr = run(sc)
        assert tr.validation.passed
        mono = monotonicity_check(tr, tol=EXACT_TOL)
        assert mono.ok, f"seed {seed}: error grew at t={mono.first_violation}"
        e = error_series(tr)
        guaranteed_idx = bound * eta
        worst_tail = max(worst_tail, max(e[guaranteed_idx:]))
        observed = convergence_time(tr)
        assert observed is not None
        assert observed <= tr.t0 + bound * eta, (
            f"seed {seed}: converged at {observed}, bound {tr.t0 + bound * eta}"
        )
    ok = worst_tail <= EXACT_TOL
    _report(
        2,
        "sim2 bounded-input finite-time bound",
        ok,
        f"T in [{min(bounds)}, {max(bounds)}], worst e past bound = {worst_tail:.3g} "
        f"over {N_SEEDS} seeds",
    )


def test_criterion_3_robustness_oracle_equivalence():
    agreements = 0
    for seed in range(N_GRAPHS):
        g = random_digraph(seed, n_max=10)
        s, r = random_source_set_and_r(seed, g)
        if strongly_robust_wrt(g, s, r).holds == strongly_robust_bruteforce(g, s, r):
            agreements += 1
    g14 = k_circulant(14, 5, undirected=True)
    leaders = set(range(5))
    circulant_ok = (
        strongly_robust_wrt(g14, leaders, 5).holds
        and not strongly_robust_wrt(g14, leaders, 6).holds
    )
    ok = agreements == N_GRAPHS and circulant_ok
    _report(
        3,
        "peeling vs exhaustive oracle",
        ok,
        f"{agreements}/{N_GRAPHS} agreements; 14-node circulant holds r=5, fails r=6",
    )


def test_criterion_4_threshold_safety(passing_batch):
    bad_latches = 0
    ties = 0
    acceptances = 0
    for tr in passing_batch:
        report = threshold_safety(tr)
        bad_latches += len(report.bad_acceptances)
        ties += report.tie_events
        acceptances += len(tr.acceptances)
    ok = bad_latches == 0 and ties == 0 and acceptances > 0
    _report(
        4,
        "threshold safety under F-local adversaries",
        ok,
        f"{acceptances} acceptances across {len(passing_batch)} runs, "
        f"{bad_latches} wrong latches, {ties} tie events",
    )


def test_criterion_5_wavefront(passing_batch, sim1_path, sim2_path):
    worst_margin = None
    for tr in list(passing_batch) + [
        run(load_scenario(sim1_path)),
        run(load_scenario(sim2_path)),
    ]:
        wf = wavefront_report(tr)
        assert wf.ok, wf.detail
        margin = len(tr.scenario.normal_followers) - wf.latest_offset
        worst_margin = margin if worst_margin is None else min(worst_margin, margin)
    _report(
        5,
        "wavefront covers all followers before each boundary",
        worst_margin is not None and worst_margin >= 0,
        f"min slack (|normal followers| - p') = {worst_margin}",
    )


def test_criterion_6_negative_controls(scenario_dir):
    eta9 = load_scenario(scenario_dir / "sim1_eta9.yaml")
    eta9_report = validate(eta9)
    eta9_flagged = eta9_report.failed == ("comm_rate_exceeds_followers",)

    broken = load_scenario(scenario_dir / "sim1_flocal_broken.yaml")
    broken_report = validate(broken)
    broken_flagged = broken_report.failed == ("f_local_adversaries",)

    tr = run(broken)
    e = error_series(tr)
    eta = broken.params.comm_rate
    tracking_broken = max(e[eta:]) > EXACT_TOL
    poisoned = not threshold_safety(tr).ok

    ok = eta9_flagged and broken_flagged and tracking_broken and poisoned
    _report(
        6,
        "negative controls flag hypotheses and break tracking",
        ok,
        f"eta9 flags={eta9_report.failed}, cluster flags={broken_report.failed}, "
        f"max e after t0+eta = {max(e[eta:]):.3g}",
    )


def test_criterion_7_determinism(scenario_dir, tmp_path):
    bundled = sorted(scenario_dir.glob("*.yaml"))
    assert bundled, "no bundled scenarios found"
    replays_ok = all(replay_check(load_scenario(path)) for path in bundled)

    files_ok = True
    for name in ("sim1", "sim2"):
        out1, out2 = tmp_path / f"{name}_a", tmp_path / f"{name}_b"
        for out in (out1, out2):
            code = cli.main(
                ["run", str(scenario_dir / f"{name}.yaml"), "--out", str(out)]
            )
            assert code == 0
        for suffix in ("trace", "messages", "metrics"):
            a = (out1 / f"{name}_{suffix}.csv").read_bytes()
            b = (out2 / f"{name}_{suffix}.csv").read_bytes()
            files_ok = files_ok and a == b

    ok = replays_ok and files_ok
    _report(
        7,
        "bit-identical replays and byte-identical trace files",
        ok,
        f"{len(bundled)} bundled scenarios replayed",
    )
