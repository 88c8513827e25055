"""Thin command-line client over the simulation service.

By default the service runs in-process (no server needed); point `--server`
at a running instance to go over the network instead. Scenario files are
loaded and inlined client-side, artifacts are written client-side, so remote
and in-process behave identically.

Exit codes: 0 success, 2 validation failure under --strict (or `validate`),
3 parse/schema/runtime errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import httpx

from .engine import ScenarioError
from .scenario_io import inline_spec, load_spec

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

OUT_DIR_ENV = "MSRPA_OUT_DIR"


class ClientError(RuntimeError):
    pass


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=120.0)
    # In-process ASGI transport: same endpoints, no socket. Current starlette
    # warns about the httpx version pairing; harmless here.
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise ClientError(f"{path} -> {resp.status_code}: {detail}")
    return resp.json()


def _overrides(args: argparse.Namespace) -> dict:
    ov = {}
    if getattr(args, "eta", None) is not None:
        ov["eta"] = args.eta
    if getattr(args, "seed", None) is not None:
        ov["seed"] = args.seed
    if getattr(args, "horizon", None) is not None:
        ov["horizon"] = args.horizon
    if getattr(args, "u_max", None) is not None:
        ov["u_max"] = args.u_max
    return ov


def _scenario_payload(path: Path) -> dict:
    spec = inline_spec(load_spec(path), base_dir=path.parent)
    return spec.model_dump(exclude_none=True)


def _print_validation(name: str, validation: dict) -> None:
    status = "passed" if validation["passed"] else "FAILED"
    print(f"{name}: validation {status}")
    for check in validation["checks"]:
        mark = "ok " if check["passed"] else "FAIL"
        print(f"  [{mark}] {check['name']}: {check['detail']}")


def _write_artifacts(name: str, artifacts: dict, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for suffix, key in (
        ("trace", "trace_csv"),
        ("messages", "messages_csv"),
        ("metrics", "metrics_csv"),
    ):
        target = out_dir / f"{name}_{suffix}.csv"
        target.write_text(artifacts[key])
        written.append(target)
    return written


def _run_one(path: Path, args: argparse.Namespace) -> int:
    client = make_client(args.server)
    try:
        payload = {
            "scenario": _scenario_payload(path),
            "overrides": _overrides(args),
            "include_artifacts": not args.no_artifacts,
            "check_theorems": args.check_theorems,
        }
        result = _post(client, "/simulation/run", payload)
    finally:
        client.close()

    name = result["name"]
    _print_validation(name, result["validation"])
    if args.strict and not result["validation"]["passed"]:
        failed = ", ".join(result["validation"]["failed"])
        print(f"{name}: strict mode: failed hypotheses: {failed}")
        return EXIT_VALIDATION

    m = result["metrics"]
    conv = m["convergence_time"]
    print(
        f"{name}: e(t0)={m['initial_error']:.6g} e(end)={m['final_error']:.6g} "
        f"converged={'t=' + str(conv) if conv is not None else 'no'} "
        f"acceptances={result['acceptance_events']} "
        f"violations={result['assumption_violations']}"
    )
    if result.get("theorems"):
        th = result["theorems"]
        verdict = "PASS" if th["passed"] else "FAIL"
        print(
            f"{name}: {th['theorem']}: T={th['bound_periods']} periods, "
            f"guaranteed from t={th['guaranteed_from']}, "
            f"observed convergence t={th['observed_convergence']}, "
            f"monotonic={th['monotonic']} -> {verdict}"
        )
    if result.get("artifacts"):
        out_dir = Path(args.out or os.environ.get(OUT_DIR_ENV, "."))
        written = _write_artifacts(name, result["artifacts"], out_dir)
        print(f"{name}: wrote {' '.join(str(p) for p in written)}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    paths = [Path(p) for p in args.scenarios]
    if args.jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(lambda p: _run_one(p, args), paths))
        return max(codes)
    code = EXIT_OK
    for path in paths:
        code = max(code, _run_one(path, args))
    return code


def cmd_validate(args: argparse.Namespace) -> int:
    client = make_client(args.server)
    try:
        payload = {
            "scenario": _scenario_payload(Path(args.scenario)),
            "overrides": _overrides(args),
        }
        result = _post(client, "/scenario/validate", payload)
    finally:
        client.close()
    _print_validation(Path(args.scenario).stem, result)
    return EXIT_OK if result["passed"] else EXIT_VALIDATION


def cmd_replay(args: argparse.Namespace) -> int:
    client = make_client(args.server)
    try:
        payload = {"scenario": _scenario_payload(Path(args.scenario))}
        result = _post(client, "/simulation/replay-check", payload)
    finally:
        client.close()
    identical = result["identical"]
    print(f"replay identical: {identical}")
    return EXIT_OK if identical else EXIT_RUNTIME


def _graph_payload(args: argparse.Namespace) -> dict:
    if args.circulant:
        n, k = args.circulant
        return {"circulant": {"n": n, "k": k, "undirected": not args.directed}}
    spec = {"edge_list": args.edge_list}
    if args.n is not None:
        spec["n"] = args.n
    # Inline client-side; the service takes self-contained graphs only.
    from .scenario_io import GraphSpec, _build_graph

    g = _build_graph(GraphSpec.model_validate(spec), Path("."), index_base=0)
    return {"edges": [list(e) for e in sorted(g.edges)], "n": g.n}


def cmd_robustness(args: argparse.Namespace) -> int:
    client = make_client(args.server)
    try:
        payload = {
            "graph": _graph_payload(args),
            "s": args.sources,
            "r": args.r,
            "bruteforce": args.bruteforce,
            "index_base": args.index_base,
        }
        result = _post(client, "/graph/robustness", payload)
    finally:
        client.close()
    verdict = "HOLDS" if result["holds"] else "FAILS"
    base = args.index_base  # report agents in the caller's labeling
    print(f"strongly {result['r']}-robust w.r.t. {sorted(args.sources)}: {verdict}")
    for rnd in result["peel_order"]:
        print(f"  round {rnd['round']}: reached {[a + base for a in rnd['agents']]}")
    if not result["holds"]:
        print(f"  stalled set (witness): {[a + base for a in result['witness']]}")
    if result.get("bruteforce") is not None:
        agrees = result["bruteforce"] == result["holds"]
        print(f"  brute force: {result['bruteforce']} (agrees: {agrees})")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("msrpa.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msrpa", description="Resilient leader-follower consensus simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run scenario file(s), write trace/metric CSVs")
    run_p.add_argument("scenarios", nargs="+", help="scenario YAML file(s)")
    run_p.add_argument("--strict", action="store_true",
                       help="exit 2 when any convergence hypothesis fails")
    run_p.add_argument("--eta", type=int, help="override communication rate")
    run_p.add_argument("--seed", type=int, help="override scenario seed")
    run_p.add_argument("--horizon", type=int, help="override horizon")
    run_p.add_argument("--u-max", dest="u_max", type=float, help="override input bound")
    run_p.add_argument("--check-theorems", action="store_true",
                       help="report the applicable convergence guarantee vs the run")
    run_p.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    run_p.add_argument("--no-artifacts", action="store_true", help="skip CSV output")
    run_p.add_argument("--jobs", type=int, default=1, help="run scenarios concurrently")
    run_p.add_argument("--server", help="remote service URL (default: in-process)")
    run_p.set_defaults(func=cmd_run)

    val_p = sub.add_parser("validate", help="check convergence hypotheses only")
    val_p.add_argument("scenario")
    val_p.add_argument("--eta", type=int)
    val_p.add_argument("--seed", type=int)
    val_p.add_argument("--horizon", type=int)
    val_p.add_argument("--u-max", dest="u_max", type=float)
    val_p.add_argument("--server")
    val_p.set_defaults(func=cmd_validate)

    rep_p = sub.add_parser("replay", help="run twice, verify bit-identical traces")
    rep_p.add_argument("scenario")
    rep_p.add_argument("--server")
    rep_p.set_defaults(func=cmd_replay)

    rob_p = sub.add_parser("robustness", help="certify strong r-robustness w.r.t. a source set")
    src = rob_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--circulant", nargs=2, type=int, metavar=("N", "K"))
    src.add_argument("--edge-list", dest="edge_list", help="0-based edge-list file")
    rob_p.add_argument("--directed", action="store_true",
                       help="circulant only: skip the symmetric closure")
    rob_p.add_argument("--n", type=int, help="agent count for edge-list graphs")
    rob_p.add_argument("--sources", type=int, nargs="+", required=True, metavar="ID")
    rob_p.add_argument("--r", type=int, required=True)
    rob_p.add_argument("--bruteforce", action="store_true",
                       help="cross-check against the exhaustive oracle")
    rob_p.add_argument("--index-base", dest="index_base", type=int, choices=(0, 1), default=0)
    rob_p.add_argument("--server")
    rob_p.set_defaults(func=cmd_robustness)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ClientError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
