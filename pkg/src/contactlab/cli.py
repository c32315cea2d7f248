"""Thin command-line client for the lab service.

Every subcommand builds a JSON request and posts it to the service: by
default an in-process instance of the app (no network involved), or a
remote server via --server. All randomness flows from --seed, falling
back to the CONTACT_BENCH_SEED environment variable, then to 0; the same
argv always produces byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import httpx

from .graphs import GraphError, parse_graph_spec, save_edge_list

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

_SEED_ENV = "CONTACT_BENCH_SEED"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # starlette's httpx pairing notice
        from starlette.testclient import TestClient

    from .service import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def _graph_payload(spec: str) -> dict:
    """file: specs are read locally and inlined; generator specs pass through."""
    if spec.startswith("file:"):
        g = parse_graph_spec(spec, allow_file=True)
        return {"edge_list": save_edge_list(g)}
    parse_graph_spec(spec, allow_file=False)  # validate client-side for exit code 2
    return {"graph": spec}


def _resolve_seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get(_SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"{_SEED_ENV} must be an integer, got {env!r}", EXIT_USAGE)
    return 0


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise CliError(f"expected comma-separated numbers, got {text!r}", EXIT_USAGE)


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise CliError(f"expected comma-separated integers, got {text!r}", EXIT_USAGE)


def _vertex_sets(text: str) -> list[list[int]]:
    return [_ints(part) for part in text.split(";") if part.strip() != ""]


def _constants_payload(args) -> Optional[dict]:
    vals = {
        "c_line": args.c_line,
        "c_star": args.c_star,
        "c0": args.c0,
        "c_coup": args.c_coup,
        "c_split": args.c_split,
        "c_eps": args.c_eps,
    }
    out = {k: v for k, v in vals.items() if v is not None}
    return out or None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contactlab",
        description="Contact-process simulation lab (client for the lab service).",
    )
    parser.add_argument("--server", help="remote service URL (default: run in-process)")
    parser.add_argument("--config", help="JSON file of flag defaults (mirrors every flag)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, graph=True, seed=True, lam=True, replicas=None, time_cap=True):
        if graph:
            p.add_argument("--graph", required=True,
                           help="line:N | star:N | tree:N:SEED | file:PATH")
        if lam:
            p.add_argument("--lambda", dest="lam", type=float, default=2.0,
                           help="infection rate (default 2.0)")
        if seed:
            p.add_argument("--seed", type=int, default=None,
                           help=f"base seed (default: ${_SEED_ENV} or 0)")
        if replicas is not None:
            p.add_argument("--replicas", type=int, default=replicas)
        if time_cap:
            p.add_argument("--time-cap", dest="time_cap", type=float, default=1e6)
        p.add_argument("--format", choices=("json", "csv", "text"), default=None,
                       help="output format (default depends on the command)")
        p.add_argument("--out", help="write output to a file instead of stdout")
        p.add_argument("--jobs", type=int, default=1, help="replica parallelism")
        for flag in ("c-line", "c-star", "c0", "c-coup", "c-split", "c-eps"):
            p.add_argument(f"--{flag}", dest=flag.replace("-", "_"),
                           type=float, default=None, help=argparse.SUPPRESS)

    p = sub.add_parser("gen", help="generate or canonicalize a graph")
    add_common(p, lam=False, seed=False, time_cap=False)

    p = sub.add_parser("simulate", help="one trajectory with checkpoints")
    add_common(p)
    p.add_argument("--checkpoint-dt", dest="checkpoint_dt", type=float, default=None)
    p.add_argument("--start", help="comma-separated infected vertices (default: all)")

    p = sub.add_parser("mean-tau", help="Monte Carlo mean extinction time")
    add_common(p, replicas=1000)

    p = sub.add_parser("exact", help="exact small-graph solver")
    add_common(p, time_cap=False)
    p.add_argument("--quantity", choices=("mean", "survival", "cdf"), default="mean")
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--t-grid", dest="t_grid", default=None,
                   help="comma-separated times (for cdf)")
    p.add_argument("--start", default=None, help="comma-separated vertices")
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("exp1", help="Exp(1) limit-law test on extinction times")
    add_common(p, replicas=1000)
    p.add_argument("--alpha", type=float, default=0.01)

    p = sub.add_parser("coupling", help="decoupling probability curve")
    add_common(p, replicas=500)
    p.add_argument("--start", default="0", help="comma-separated infected vertices")
    p.add_argument("--t-grid", dest="t_grid", default="1,2,4,8")

    p = sub.add_parser("split", help="balanced edge split of a tree")
    add_common(p, lam=False, seed=False, time_cap=False)
    p.add_argument("--degree-bound", dest="degree_bound", type=int, required=True)

    p = sub.add_parser("classify", help="three-case tree decomposition")
    add_common(p, lam=False, seed=False, time_cap=False)
    p.add_argument("--a-const", dest="a_const", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--mode", choices=("level3", "level4"), default="level4")

    p = sub.add_parser("bounds", help="inequality checks (attract/product/floor)")
    add_common(p, replicas=2000)
    p.add_argument("--check", choices=("attract", "product", "floor"), default="attract")
    p.add_argument("--t-grid", dest="t_grid", default=None)
    p.add_argument("--parts", default=None,
                   help="semicolon-separated comma lists, e.g. 0,1,2;3,4,5")
    p.add_argument("--auto-split", dest="auto_split", type=int, default=None)
    p.add_argument("--min-part-size", dest="min_part_size", type=int, default=1)
    p.add_argument("--eps", type=float, default=0.5)

    p = sub.add_parser("growth", help="mean extinction growth curve over sizes")
    add_common(p, graph=False, replicas=500)
    p.add_argument("--family", choices=("line", "star", "random_tree"), required=True)
    p.add_argument("--sizes", required=True, help="comma-separated sizes")

    p = sub.add_parser("calibrate", help="calibrate the lab constants")
    add_common(p, graph=False, time_cap=False)
    p.add_argument("--budget", type=int, default=4000)
    p.add_argument("--eps", type=float, default=0.5)

    p = sub.add_parser("dual-check", help="duality identity spot check")
    add_common(p)
    p.add_argument("--t", type=float, default=3.0)
    p.add_argument("--fixtures", type=int, default=1000)

    p = sub.add_parser("serve", help="run the lab service with uvicorn")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        raise CliError(f"{path} failed ({resp.status_code}): {detail}", EXIT_RUNTIME)
    return resp.json()


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _growth_csv(data: dict) -> str:
    lines = ["size,estimate,se,replicas,censored"]
    for size, rep in zip(data["sizes"], data["per_size"]):
        est = "" if rep["estimate"] is None else repr(rep["estimate"])
        se = "" if rep["se"] is None else repr(rep["se"])
        lines.append(f"{size},{est},{se},{rep['replicas']},{rep['censored']}")
    lines.append(f"# slope={data['slope']!r} ci95={data['ci95']!r}")
    return "\n".join(lines) + "\n"


def _coupling_csv(data: dict) -> str:
    lines = ["t,decoupled_probability,se,replicas"]
    for rep in data["curve"]:
        lines.append(f"{rep['config']['t']!r},{rep['estimate']!r},{rep['se']!r},{rep['replicas']}")
    return "\n".join(lines) + "\n"


def run_command(args) -> str:
    seed = _resolve_seed(getattr(args, "seed", None)) if hasattr(args, "seed") else 0
    with _client(args.server) as client:
        cmd = args.command
        if cmd == "gen":
            data = _post(client, "/v1/gen", _graph_payload(args.graph))
            if args.format == "json":
                return _dump_json(data)
            return data["edge_list"]

        if cmd == "simulate":
            payload = {
                **_graph_payload(args.graph),
                "lambda": args.lam,
                "seed": seed,
                "time_cap": args.time_cap,
                "checkpoint_dt": args.checkpoint_dt,
            }
            if args.start is not None:
                payload["start"] = _ints(args.start)
            data = _post(client, "/v1/simulate", payload)
            fmt = args.format or ("csv" if data["csv"] is not None else "json")
            if fmt == "csv":
                if data["csv"] is None:
                    raise CliError("csv dump needs at most 64 vertices; use --format json",
                                   EXIT_USAGE)
                return data["csv"]
            data.pop("csv")
            return _dump_json(data)

        if cmd == "mean-tau":
            payload = {
                **_graph_payload(args.graph),
                "lambda": args.lam,
                "replicas": args.replicas,
                "time_cap": args.time_cap,
                "seed": seed,
                "jobs": args.jobs,
                "include_samples": args.format == "csv",
            }
            consts = _constants_payload(args)
            if consts:
                payload["constants"] = consts
            data = _post(client, "/v1/mean-tau", payload)
            if args.format == "csv":
                return data["samples_csv"]
            return _dump_json(data["report"])

        if cmd == "exact":
            payload = {
                **_graph_payload(args.graph),
                "lambda": args.lam,
                "quantity": args.quantity,
                "tol": args.tol,
            }
            if args.t is not None:
                payload["t"] = args.t
            if args.t_grid is not None:
                payload["t_grid"] = _floats(args.t_grid)
            if args.start is not None:
                payload["start"] = _ints(args.start)
            return _dump_json(_post(client, "/v1/exact", payload))

        if cmd == "exp1":
            payload = {
                **_graph_payload(args.graph),
                "lambda": args.lam,
                "replicas": args.replicas,
                "time_cap": args.time_cap,
                "seed": seed,
                "alpha": args.alpha,
                "jobs": args.jobs,
            }
            return _dump_json(_post(client, "/v1/exp1", payload))

        if cmd == "coupling":
            payload = {
                **_graph_payload(args.graph),
                "lambda": args.lam,
                "start": _ints(args.start),
                "t_grid": _floats(args.t_grid),
                "replicas": args.replicas,
                "seed": seed,
            }
            data = _post(client, "/v1/coupling", payload)
            if args.format == "csv":
                return _coupling_csv(data)
            return _dump_json(data)

        if cmd == "split":
            payload = {**_graph_payload(args.graph), "degree_bound": args.degree_bound}
            return _dump_json(_post(client, "/v1/split", payload))

        if cmd == "classify":
            payload = {
                **_graph_payload(args.graph),
                "a_const": args.a_const,
                "exponent_eps": args.eps,
                "mode": args.mode,
            }
            return _dump_json(_post(client, "/v1/classify", payload))

        if cmd == "bounds":
            payload = {
                **_graph_payload(args.graph),
                "lambda": args.lam,
                "check": args.check,
                "replicas": args.replicas,
                "seed": seed,
                "eps": args.eps,
                "min_part_size": args.min_part_size,
            }
            if args.t_grid is not None:
                payload["t_grid"] = _floats(args.t_grid)
            if args.parts is not None:
                payload["parts"] = _vertex_sets(args.parts)
            if args.auto_split is not None:
                payload["auto_split"] = args.auto_split
            consts = _constants_payload(args)
            if consts:
                payload["constants"] = consts
            return _dump_json(_post(client, "/v1/bounds", payload))

        if cmd == "growth":
            payload = {
                "family": args.family,
                "sizes": _ints(args.sizes),
                "lambda": args.lam,
                "replicas": args.replicas,
                "time_cap": args.time_cap,
                "seed": seed,
                "jobs": args.jobs,
            }
            data = _post(client, "/v1/growth", payload)
            if args.format == "csv":
                return _growth_csv(data)
            return _dump_json(data)

        if cmd == "calibrate":
            payload = {
                "lambda": args.lam,
                "budget": args.budget,
                "seed": seed,
                "eps": args.eps,
            }
            return _dump_json(_post(client, "/v1/calibrate", payload))

        if cmd == "dual-check":
            payload = {
                **_graph_payload(args.graph),
                "lambda": args.lam,
                "t": args.t,
                "fixtures": args.fixtures,
                "seed": seed,
            }
            return _dump_json(_post(client, "/v1/dual-check", payload))

    raise CliError(f"unknown command {args.command!r}", EXIT_USAGE)


_DEST_ALIASES = {"lambda": "lam"}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if not isinstance(defaults, dict):
            print("error: config must be a JSON object of flag defaults", file=sys.stderr)
            return EXIT_USAGE
        # config values act as defaults: seed a namespace with them, then
        # re-parse so explicit argv flags still win
        ns = argparse.Namespace()
        for key, value in defaults.items():
            dest = _DEST_ALIASES.get(key, key.replace("-", "_"))
            setattr(ns, dest, value)
        args = parser.parse_args(argv, namespace=ns)

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_OK

    try:
        out = run_command(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except httpx.HTTPError as exc:
        print(f"error: request failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
        return EXIT_OK
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
