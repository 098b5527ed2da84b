"""HTTP front end for the registry and the matchmaker.

Routes::

    GET    /health           liveness, store revision and service count
    GET    /services         all records in registration order
    POST   /services         register one record (201, Location header)
    GET    /services/{id}
    PUT    /services/{id}    replace a record
    DELETE /services/{id}
    POST   /match            rank candidates; never mutates the store

Error bodies are ``{"code": ..., "message": ..., "status": ...}``.
"""
from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Optional
from urllib.parse import unquote, urlsplit

from .documents import NO_MATCH_FEEDBACK, request_from_document, result_to_document
from .errors import QosError
from .matchmaking import MatchResult, match
from .model import resolve_weights
from .registry import (
    RegistryStore,
    parse_json,
    save_store,
    service_from_document,
    service_to_document,
)

log = logging.getLogger(__name__)

Response = tuple[int, dict[str, str], Any]


def error_body(err: QosError) -> dict[str, Any]:
    return {"code": err.code, "message": err.message, "status": err.status}


def dumps(doc: Any) -> bytes:
    return json.dumps(doc, allow_nan=False).encode("utf-8")


class BrokerApp:
    """Transport-independent request handling.

    Mutations run under one writer lock so the in-memory store and the
    persisted file advance together; reads work on store snapshots.
    """

    def __init__(self, store: RegistryStore, store_path: Optional[Path] = None) -> None:
        self.store = store
        self.store_path = Path(store_path) if store_path is not None else None
        self._write_lock = threading.Lock()

    def persist(self) -> None:
        if self.store_path is not None:
            save_store(self.store, self.store_path)

    def handle(self, method: str, path: str, body: bytes = b"") -> Response:
        try:
            return self._route(method, path, body)
        except QosError as err:
            return err.status, {}, error_body(err)

    def _route(self, method: str, path: str, body: bytes) -> Response:
        parts = [unquote(p) for p in urlsplit(path).path.split("/") if p]
        if parts == ["health"] and method == "GET":
            snap = self.store.snapshot()
            return 200, {}, {"status": "ok", "revision": snap.revision, "count": len(snap.services)}
        if parts == ["services"]:
            if method == "GET":
                return 200, {}, {"services": [service_to_document(s) for s in self.store.services()]}
            if method == "POST":
                return self._register(body)
            raise QosError("method-not-allowed", f"{method} not allowed on /services")
        if len(parts) == 2 and parts[0] == "services":
            sid = parts[1]
            if method == "GET":
                return 200, {}, service_to_document(self.store.get(sid))
            if method == "PUT":
                return self._update(sid, body)
            if method == "DELETE":
                with self._write_lock:
                    record = self.store.remove(sid)
                    self.persist()
                return 200, {}, service_to_document(record)
            raise QosError("method-not-allowed", f"{method} not allowed on /services/{{id}}")
        if parts == ["match"]:
            if method == "POST":
                return self._match(body)
            raise QosError("method-not-allowed", f"{method} not allowed on /match")
        raise QosError("not-found", f"no route for {path}")

    def _register(self, body: bytes) -> Response:
        record = service_from_document(parse_json(body.decode("utf-8")))
        with self._write_lock:
            self.store.register(record)
            self.persist()
        return 201, {"Location": f"/services/{record.id}"}, service_to_document(record)

    def _update(self, sid: str, body: bytes) -> Response:
        record = service_from_document(parse_json(body.decode("utf-8")))
        with self._write_lock:
            self.store.update(sid, record)
            self.persist()
        return 200, {}, service_to_document(record)

    def _match(self, body: bytes) -> Response:
        request = request_from_document(parse_json(body.decode("utf-8")))
        snap = self.store.snapshot()
        resolve_weights(request, snap.schema)
        candidates = snap.find_by_function(request.functional_tags)
        if not candidates:
            empty = result_to_document(MatchResult(()), feedback=NO_MATCH_FEEDBACK, revision=snap.revision)
            return 200, {}, empty
        try:
            result = match(request, candidates, snap.schema)
        except QosError as err:
            if err.code == "no-candidates":
                raise QosError("unknown-mode", err.message) from None
            raise
        return 200, {}, result_to_document(result, revision=snap.revision)


class BrokerHandler(BaseHTTPRequestHandler):
    server_version = "qosbroker/0.1"
    protocol_version = "HTTP/1.1"
    app: BrokerApp  # set by make_server

    def _dispatch(self) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else b""
        try:
            status, headers, doc = self.app.handle(self.command, self.path, body)
        except UnicodeDecodeError:
            err = QosError("malformed-document", "request body is not UTF-8")
            status, headers, doc = err.status, {}, error_body(err)
        except Exception:
            log.exception("unhandled error for %s %s", self.command, self.path)
            err = QosError("internal-error", "unexpected server error")
            status, headers, doc = err.status, {}, error_body(err)
        payload = dumps(doc)
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        for name, value in headers.items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(payload)

    do_GET = do_POST = do_PUT = do_DELETE = _dispatch

    def log_message(self, format: str, *args: Any) -> None:
        log.info("%s - %s", self.address_string(), format % args)


class BrokerServer(ThreadingHTTPServer):
    daemon_threads = True
    request_queue_size = 128


def make_server(app: BrokerApp, host: str = "127.0.0.1", port: int = 8080) -> BrokerServer:
    """Bind a threaded server; raises OSError when the address is taken."""
    handler = type("BoundBrokerHandler", (BrokerHandler,), {"app": app})
    return BrokerServer((host, port), handler)
