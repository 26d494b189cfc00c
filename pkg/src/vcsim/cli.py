"""Command line client for the simulation service.

The CLI builds service requests from scenario files and reads results back;
all simulation happens behind the HTTP interface. By default the service
app runs in-process, so no server is needed; point --server at a running
instance to use a remote one.

Exit codes: 0 success, 1 validation failure, 2 invariant violation,
3 livelock (event budget exceeded).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INVARIANT = 2
EXIT_LIVELOCK = 3

_ERROR_EXITS = {
    "validation_error": EXIT_VALIDATION,
    "parse_error": EXIT_VALIDATION,
    "invariant_violation": EXIT_INVARIANT,
    "livelock": EXIT_LIVELOCK,
}


class ServiceClient:
    """POSTs to a remote server when given a URL, else to the in-process app."""

    def __init__(self, server: str | None = None):
        self.server = server

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        return asyncio.run(self._post(path, payload))

    async def _post(self, path: str, payload: dict) -> tuple[int, dict]:
        if self.server:
            client = httpx.AsyncClient(base_url=self.server, timeout=300.0)
        else:
            from .service.app import app

            client = httpx.AsyncClient(
                transport=httpx.ASGITransport(app=app), base_url="http://vcsim.local"
            )
        async with client:
            response = await client.post(path, json=payload)
            return response.status_code, response.json()


def _load_document(path: str) -> dict | None:
    """Read and decode the scenario file; prints the failure and returns None."""
    file = Path(path)
    if not file.exists():
        print(f"error: scenario file not found: {path}", file=sys.stderr)
        return None
    try:
        return json.loads(file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        print(f"error: {path}:{exc.lineno}: {exc.msg}", file=sys.stderr)
        return None


def _exit_code_for(status: int, body: dict) -> int:
    if status == 200:
        return EXIT_OK
    detail = body.get("detail", {})
    kind = detail.get("kind") if isinstance(detail, dict) else None
    code = _ERROR_EXITS.get(kind, EXIT_VALIDATION)
    print(f"error: {json.dumps(detail)}", file=sys.stderr)
    return code


def _cmd_run(args: argparse.Namespace) -> int:
    document = _load_document(args.scenario)
    if document is None:
        return EXIT_VALIDATION
    client = ServiceClient(args.server)
    status, body = client.post("/run", {"scenario": document, "check": args.check})
    code = _exit_code_for(status, body)
    if code != EXIT_OK:
        return code
    if args.log:
        Path(args.log).write_text(body["log"], encoding="utf-8")
    if args.metrics:
        Path(args.metrics).write_text(
            json.dumps(body["metrics"], indent=2) + "\n", encoding="utf-8"
        )
    print(f"events: {body['event_count']}  final_time: {body['final_time']}")
    for key, value in body["metrics"].items():
        print(f"{key}: {value}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    document = _load_document(args.scenario)
    if document is None:
        return EXIT_VALIDATION
    client = ServiceClient(args.server)
    status, body = client.post("/validate", {"scenario": document})
    code = _exit_code_for(status, body)
    if code != EXIT_OK:
        return code
    print(json.dumps(body, indent=2))
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    document = _load_document(args.scenario)
    if document is None:
        return EXIT_VALIDATION
    client = ServiceClient(args.server)
    status, body = client.post("/replay", {"scenario": document})
    code = _exit_code_for(status, body)
    if code != EXIT_OK:
        return code
    if body["passed"]:
        print("replay: pass")
        return EXIT_OK
    print(f"replay: fail at line {body['line_number']}")
    print(f"  first:  {body['first_run']}")
    print(f"  second: {body['second_run']}")
    return EXIT_INVARIANT


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("vcsim.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vcsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and report metrics")
    run_p.add_argument("scenario", help="path to the scenario JSON file")
    run_p.add_argument("--log", help="write the rendered event log to this file")
    run_p.add_argument("--check", action="store_true", help="assert post-run invariants")
    run_p.add_argument("--metrics", help="write metrics JSON to this file")
    run_p.add_argument("--server", help="base URL of a running service")
    run_p.set_defaults(func=_cmd_run)

    val_p = sub.add_parser("validate", help="validate a scenario file")
    val_p.add_argument("scenario")
    val_p.add_argument("--server")
    val_p.set_defaults(func=_cmd_validate)

    rep_p = sub.add_parser("replay", help="run twice and compare log bytes")
    rep_p.add_argument("scenario")
    rep_p.add_argument("--server")
    rep_p.set_defaults(func=_cmd_replay)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
