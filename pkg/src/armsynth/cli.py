"""Command-line client for the synthesis service.

The CLI is a thin client of the HTTP API: by default it mounts the service
in-process (no daemon needed); ``--server URL`` points it at a running
instance instead.  ``serve`` starts that instance.

Exit codes: 0 success / certificate verified, 1 configuration or input
error, 2 unsynthesizable / certificate rejected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import httpx


def make_client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .server.app import create_app

    return TestClient(create_app())


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _options_from_args(args) -> dict:
    return {
        "ubound": args.ubound,
        "epsilon": args.epsilon,
        "dt": args.dt,
        "grid": args.grid,
        "gp_budget": args.gp_budget,
        "max_links": args.max_links,
        "kmax": args.kmax,
        "seed": args.seed,
        "trust": args.trust,
        "wall_clock": args.wall_clock,
        "paths_per_structure": args.paths_per_structure,
        "grid_per_dim": args.grid_per_dim,
    }


def _post(client, url: str, payload: dict):
    resp = client.post(url, json=payload)
    if resp.status_code == 422:
        body = resp.json()
        detail = body.get("detail", body)
        print(f"error: {detail}", file=sys.stderr)
        raise SystemExit(1)
    resp.raise_for_status()
    return resp.json()


def cmd_synth(args) -> int:
    payload = {
        "workspace": _read(args.workspace),
        "catalog": _read(args.catalog) if args.catalog else None,
        "options": _options_from_args(args),
    }
    with make_client(args.server) as client:
        body = _post(client, "/synthesize", payload)
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    artifacts = body.get("artifacts") or {}
    names = {"report": "report.txt", "design": "design.json",
             "trajectory_csv": "trajectory.csv", "history_csv": "history.csv",
             "svg": "workspace.svg", "log_jsonl": "log.jsonl"}
    for key, filename in names.items():
        content = artifacts.get(key)
        if content:
            with open(os.path.join(outdir, filename), "w", encoding="utf-8") as fh:
                fh.write(content)
    if body["status"] == "success":
        design = body["design"]
        lengths = ", ".join("%.4g" % v for v in design["lengths"])
        print(f"success: {design['word']}")
        print(f"lengths: {lengths}  rho: {design['rho']:.6g}")
        print(f"artifacts written to {outdir}")
        return 0
    print(f"unsynthesizable: {body.get('reason')}", file=sys.stderr)
    return 2


def cmd_check(args) -> int:
    design_text = _read(args.design)
    try:
        design = json.loads(design_text)
    except json.JSONDecodeError as exc:
        print(f"error: design file is not valid JSON: {exc}", file=sys.stderr)
        return 1
    if design.get("format") != "armsynth-design/1":
        print("error: not an armsynth design document", file=sys.stderr)
        return 1
    design.pop("format", None)
    payload = {
        "design": design,
        "workspace": _read(args.workspace),
        "catalog": _read(args.catalog) if args.catalog else None,
        "ubound": args.ubound,
    }
    with make_client(args.server) as client:
        body = _post(client, "/check", payload)
    if body["ok"]:
        print(f"certificate verified: rho = {body['rho_text']}")
        return 0
    step = body.get("violation_step")
    reason = body.get("reason") or f"rho = {body['rho_text']}"
    where = f" at step {step}" if step is not None else ""
    print(f"certificate rejected{where}: {reason}", file=sys.stderr)
    return 2


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("armsynth.server.app:app", host=args.host, port=args.port)
    return 0


def _add_option_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ubound", type=float, default=10.0,
                   help="control magnitude budget (default 10)")
    p.add_argument("--epsilon", type=float, default=0.01,
                   help="slack growth bound (default 0.01)")
    p.add_argument("--dt", type=float, default=0.1,
                   help="discretization step in seconds (default 0.1)")
    p.add_argument("--grid", type=float, default=0.1,
                   help="abstraction cell size (default 0.1)")
    p.add_argument("--gp-budget", type=int, default=80, dest="gp_budget")
    p.add_argument("--max-links", type=int, default=4, dest="max_links")
    p.add_argument("--kmax", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trust", type=float, default=0.3,
                   help="pose linearization trust region in radians")
    p.add_argument("--wall-clock", type=float, default=None, dest="wall_clock")
    p.add_argument("--paths-per-structure", type=int, default=4,
                   dest="paths_per_structure")
    p.add_argument("--grid-per-dim", type=int, default=24, dest="grid_per_dim")
    p.add_argument("--server", default=None,
                   help="URL of a running service (in-process when omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="armsynth",
        description="synthesize certified reconfigurable planar manipulators")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="synthesize a design for a workspace")
    p_synth.add_argument("--workspace", required=True, help="workspace file")
    p_synth.add_argument("--catalog", default=None, help="module catalog file")
    p_synth.add_argument("--out", default=".", help="artifact output directory")
    _add_option_flags(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_check = sub.add_parser("check", help="re-verify a stored design")
    p_check.add_argument("design", help="design.json produced by synth")
    p_check.add_argument("--workspace", required=True)
    p_check.add_argument("--catalog", default=None)
    p_check.add_argument("--ubound", type=float, default=None,
                         help="re-check under a different control budget")
    p_check.add_argument("--server", default=None)
    p_check.set_defaults(func=cmd_check)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except httpx.HTTPError as exc:
        print(f"error: service request failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
