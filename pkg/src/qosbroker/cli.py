"""Operator command line.

Usage:
    qosbroker register <file>
    qosbroker match <request> [--top N] [--explain]
    qosbroker compare <request> --weights <schemes>
    qosbroker serve [--addr HOST:PORT] [--store PATH] [--schema FILE]

``--store`` falls back to $QOS_STORE, then ./registry.qos; ``--addr`` falls
back to $QOS_ADDR, then 127.0.0.1:8080.

Exit codes: 0 success, 1 validation error, 2 I/O or environment failure.
"""
from __future__ import annotations

import argparse
import json
import os
import signal
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, TextIO

from .api import BrokerApp, make_server
from .documents import (
    NO_MATCH_FEEDBACK,
    comparison_to_document,
    request_from_document,
    result_to_document,
    schemes_from_document,
)
from .errors import QosError
from .matchmaking import MatchResult, SchemeComparison, compare_schemes, match
from .model import resolve_weights
from .registry import (
    RegistryStore,
    load_store,
    parse_json,
    save_store,
    schema_from_document,
    service_from_document,
    store_from_document,
)

DEFAULT_STORE = "./registry.qos"
DEFAULT_ADDR = "127.0.0.1:8080"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


@dataclass(frozen=True)
class CliConfig:
    store_path: Path
    address: str
    output: str = "table"

    @classmethod
    def resolve(cls, args: argparse.Namespace, env: Optional[dict[str, str]] = None) -> "CliConfig":
        env = os.environ if env is None else env
        store = args.store or env.get("QOS_STORE") or DEFAULT_STORE
        addr = getattr(args, "addr", None) or env.get("QOS_ADDR") or DEFAULT_ADDR
        return cls(Path(store), addr, args.output)

    @property
    def host_port(self) -> tuple[str, int]:
        host, sep, port = self.address.rpartition(":")
        if not sep or not port.isdigit():
            raise QosError("invalid-field", f"address must look like HOST:PORT, got {self.address!r}")
        return host or "127.0.0.1", int(port)


def _read_json(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise QosError("io-failure", f"cannot read {path!r}: {exc}") from exc
    if not text.strip():
        return None
    return parse_json(text)


def _open_store(config: CliConfig) -> RegistryStore:
    return load_store(config.store_path)


# -- table rendering ----------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def print_ranking(result: MatchResult, out: TextIO, explain: bool = False) -> None:
    width = max([len("service")] + [len(r.service_id) for r in result.ranking])
    print(f"{'service':<{width}}  distance", file=out)
    for r in result.ranking:
        print(f"{r.service_id:<{width}}  {_fmt(r.distance)}", file=out)
    if result.unranked:
        print("(no QoS requirements given; candidates listed unranked)", file=out)
    if explain:
        for r in result.ranking:
            print(f"\n{r.service_id}", file=out)
            pw = max([len("property")] + [len(c.property) for c in r.contributions])
            print(f"  {'property':<{pw}}  request  service  weight  contribution", file=out)
            for c in r.contributions:
                print(
                    f"  {c.property:<{pw}}  {_fmt(c.request_norm)}   {_fmt(c.service_norm)}   "
                    f"{_fmt(c.weight)}  {_fmt(c.contribution)}",
                    file=out,
                )


def print_comparison(comparison: SchemeComparison, out: TextIO) -> None:
    columns = []
    for s in comparison.schemes:
        cells = [f"{r.service_id} {_fmt(r.distance)}" for r in s.result.ranking]
        columns.append([s.name] + cells)
    depth = max(len(c) for c in columns)
    widths = [max(len(x) for x in c) for c in columns]
    for i in range(depth):
        label = "#" if i == 0 else str(i)
        cells = [(c[i] if i < len(c) else "").ljust(w) for c, w in zip(columns, widths)]
        print(f"{label:<6}" + "  ".join(cells).rstrip(), file=out)
    print("winners: " + " | ".join(f"{s.name}: {s.winner}" for s in comparison.schemes), file=out)
    changed = [s for s in comparison.schemes if s.winner_changed]
    if changed:
        first = comparison.schemes[0].winner
        for s in changed:
            print(f"winner changed under {s.name}: {first} -> {s.winner}", file=out)
    else:
        print("winner unchanged across schemes", file=out)


# -- commands -----------------------------------------------------------------


def cmd_register(args: argparse.Namespace, config: CliConfig, out: TextIO) -> int:
    doc = _read_json(args.file)
    if doc is None:
        print("registered 0", file=out)
        return EXIT_OK
    if isinstance(doc, dict) and "schema" in doc:
        incoming = store_from_document(doc)
        if config.store_path.exists():
            store = load_store(config.store_path, expected_schema=incoming.schema)
        else:
            store = RegistryStore(incoming.schema)
        records = incoming.services()
    else:
        items = doc if isinstance(doc, list) else [doc]
        records = [service_from_document(item) for item in items]
        store = _open_store(config)
    count = store.register_many(records)
    save_store(store, config.store_path)
    print(f"registered {count}", file=out)
    return EXIT_OK


def _candidates(config: CliConfig, request_file: str):
    store = _open_store(config)
    request = request_from_document(_read_json(request_file))
    snap = store.snapshot()
    resolve_weights(request, snap.schema)
    return request, snap


def cmd_match(args: argparse.Namespace, config: CliConfig, out: TextIO) -> int:
    request, snap = _candidates(config, args.request)
    if args.top is not None:
        request = request.with_top_k(args.top)
    candidates = snap.find_by_function(request.functional_tags)
    if not candidates:
        result, feedback = MatchResult(()), NO_MATCH_FEEDBACK
    else:
        result, feedback = match(request, candidates, snap.schema), None
    if config.output == "document":
        print(json.dumps(result_to_document(result, feedback, snap.revision), indent=2), file=out)
    else:
        print_ranking(result, out, explain=args.explain)
        if feedback:
            print(feedback, file=out)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, config: CliConfig, out: TextIO) -> int:
    request, snap = _candidates(config, args.request)
    schemes = schemes_from_document(_read_json(args.weights))
    candidates = snap.find_by_function(request.functional_tags)
    if not candidates:
        print(NO_MATCH_FEEDBACK, file=out)
        return EXIT_OK
    comparison = compare_schemes(request, schemes, candidates, snap.schema)
    if config.output == "document":
        print(json.dumps(comparison_to_document(comparison), indent=2), file=out)
    else:
        print_comparison(comparison, out)
    return EXIT_OK


def _store_for_serving(config: CliConfig, schema_file: Optional[str]) -> RegistryStore:
    if config.store_path.exists():
        return load_store(config.store_path)
    if schema_file is None:
        raise QosError("io-failure", f"store {str(config.store_path)!r} does not exist; pass --schema to create it")
    doc = _read_json(schema_file)
    if isinstance(doc, dict):
        return RegistryStore(store_from_document(doc).schema)
    return RegistryStore(schema_from_document(doc))


def _raise_interrupt(signum: int, frame: Any) -> None:
    raise KeyboardInterrupt


def cmd_serve(args: argparse.Namespace, config: CliConfig, out: TextIO) -> int:
    store = _store_for_serving(config, args.schema)
    host, port = config.host_port
    app = BrokerApp(store, config.store_path)
    try:
        server = make_server(app, host, port)
    except OSError as exc:
        print(f"error: io-failure: cannot bind {config.address}: {exc}", file=sys.stderr)
        return EXIT_IO
    app.persist()
    signal.signal(signal.SIGTERM, _raise_interrupt)
    print(f"serving on http://{host}:{server.server_address[1]}", file=out, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        app.persist()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--store", help="registry file (default: $QOS_STORE or ./registry.qos)")
    common.add_argument("--output", choices=("table", "document"), default="table")

    parser = argparse.ArgumentParser(prog="qosbroker", description="QoS-aware service registry and matchmaker")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("register", parents=[common], help="register services from a file")
    p.add_argument("file")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("match", parents=[common], help="rank services for one request")
    p.add_argument("request")
    p.add_argument("--top", type=int, metavar="N")
    p.add_argument("--explain", action="store_true", help="show per-property contributions")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("compare", parents=[common], help="rank under several weight schemes")
    p.add_argument("request")
    p.add_argument("--weights", required=True, help="file of named weight schemes")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    p.add_argument("--addr", help="HOST:PORT (default: $QOS_ADDR or 127.0.0.1:8080)")
    p.add_argument("--schema", help="schema or store document used when the store does not exist yet")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout if out is None else out
    try:
        config = CliConfig.resolve(args)
        return args.func(args, config, out)
    except QosError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO if err.code == "io-failure" else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
