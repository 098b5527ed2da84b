"""Service registry with keyword lookup and JSON file persistence.

Store document layout::

    {"version": "1",
     "revision": 4,
     "schema": [{"name": ..., "direction": "min" | "max", "unit": ...}, ...],
     "services": [{"id": ..., "name": ..., "tags": [...],
                   "profiles": {"<mode>": {"<property>": number, ...}}}, ...]}

Unknown fields are rejected at every level.
"""
from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Union

from .errors import QosError
from .model import QosPropertyDef, QosSchema, ServiceRecord, check_record, validate_schema

DOCUMENT_VERSION = "1"

PathLike = Union[str, "os.PathLike[str]"]


@dataclass(frozen=True)
class Snapshot:
    """Immutable view of the registry at one revision."""

    schema: QosSchema
    revision: int
    services: tuple[ServiceRecord, ...]

    def find_by_function(self, tags: Iterable[str]) -> list[ServiceRecord]:
        wanted = {t.lower() for t in tags}
        return [s for s in self.services if wanted <= s.functional_tags]


class RegistryStore:
    """Ordered id -> ServiceRecord map guarded by a single-writer lock.

    Every successful mutation bumps ``revision`` by one. Readers take a
    :class:`Snapshot`, which never changes afterwards.
    """

    def __init__(
        self,
        schema: QosSchema,
        services: Iterable[ServiceRecord] = (),
        revision: int = 0,
    ) -> None:
        self.schema = schema
        self._services: dict[str, ServiceRecord] = {}
        self._lock = threading.Lock()
        for record in services:
            self._check_new(record)
            self._services[record.id] = record
        self._revision = revision
        self._snapshot: Optional[Snapshot] = None

    def __len__(self) -> int:
        return len(self._services)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RegistryStore):
            return NotImplemented
        return self.snapshot() == other.snapshot()

    @property
    def revision(self) -> int:
        return self._revision

    def snapshot(self) -> Snapshot:
        snap = self._snapshot
        if snap is None:
            with self._lock:
                snap = Snapshot(self.schema, self._revision, tuple(self._services.values()))
                self._snapshot = snap
        return snap

    def _check_new(self, record: ServiceRecord) -> None:
        if record.id in self._services:
            raise QosError("duplicate-id", f"service {record.id!r} is already registered")
        check_record(record, self.schema)

    def _bump(self) -> None:
        self._revision += 1
        self._snapshot = None

    def register(self, record: ServiceRecord) -> None:
        with self._lock:
            self._check_new(record)
            self._services[record.id] = record
            self._bump()

    def register_many(self, records: Iterable[ServiceRecord]) -> int:
        """Register all of ``records`` or none of them; bumps revision once per record."""
        records = list(records)
        with self._lock:
            seen: set[str] = set()
            for r in records:
                if r.id in seen:
                    raise QosError("duplicate-id", f"service {r.id!r} appears twice in the batch")
                seen.add(r.id)
                self._check_new(r)
            for r in records:
                self._services[r.id] = r
                self._bump()
        return len(records)

    def update(self, service_id: str, record: ServiceRecord) -> None:
        with self._lock:
            if service_id not in self._services:
                raise QosError("unknown-id", f"no service {service_id!r}")
            if record.id != service_id:
                raise QosError("invalid-field", f"record id {record.id!r} does not match {service_id!r}")
            check_record(record, self.schema)
            self._services[service_id] = record
            self._bump()

    def remove(self, service_id: str) -> ServiceRecord:
        with self._lock:
            try:
                record = self._services.pop(service_id)
            except KeyError:
                raise QosError("unknown-id", f"no service {service_id!r}") from None
            self._bump()
            return record

    def get(self, service_id: str) -> ServiceRecord:
        try:
            return self._services[service_id]
        except KeyError:
            raise QosError("unknown-id", f"no service {service_id!r}") from None

    def find_by_function(self, tags: Iterable[str]) -> list[ServiceRecord]:
        """Records whose tags include every query tag, in registration order."""
        return self.snapshot().find_by_function(tags)

    def services(self) -> list[ServiceRecord]:
        return list(self.snapshot().services)


# -- documents ---------------------------------------------------------------


def require_object(doc: Any, where: str) -> Mapping[str, Any]:
    if not isinstance(doc, dict):
        raise QosError("malformed-document", f"{where} must be an object")
    return doc


def check_fields(
    doc: Mapping[str, Any], where: str, required: Iterable[str], optional: Iterable[str] = ()
) -> None:
    required = set(required)
    allowed = required | set(optional)
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise QosError("unknown-field", f"{where}: unknown field(s) {', '.join(unknown)}")
    missing = sorted(required - set(doc))
    if missing:
        raise QosError("missing-field", f"{where}: missing field(s) {', '.join(missing)}")


def string_field(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise QosError("invalid-field", f"{where} must be a string")
    return value


def string_list(value: Any, where: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise QosError("invalid-field", f"{where} must be a list of strings")
    return value


def schema_to_document(schema: QosSchema) -> list[dict[str, str]]:
    return [{"name": p.name, "direction": p.direction.value, "unit": p.unit} for p in schema.properties]


def schema_from_document(doc: Any) -> QosSchema:
    if not isinstance(doc, list):
        raise QosError("malformed-document", "schema must be a list of property definitions")
    defs = []
    for i, item in enumerate(doc):
        item = require_object(item, f"schema[{i}]")
        check_fields(item, f"schema[{i}]", ("name", "direction"), ("unit",))
        defs.append(
            QosPropertyDef(
                string_field(item["name"], f"schema[{i}].name"),
                item["direction"],
                string_field(item.get("unit", ""), f"schema[{i}].unit"),
            )
        )
    return validate_schema(defs)


def service_to_document(record: ServiceRecord) -> dict[str, Any]:
    return {
        "id": record.id,
        "name": record.display_name,
        "tags": sorted(record.functional_tags),
        "profiles": {mode: dict(p) for mode, p in record.profiles.items()},
    }


def service_from_document(doc: Any) -> ServiceRecord:
    doc = require_object(doc, "service")
    check_fields(doc, "service", ("id", "profiles"), ("name", "tags"))
    sid = string_field(doc["id"], "service.id")
    profiles = require_object(doc["profiles"], f"service {sid!r} profiles")
    for mode, p in profiles.items():
        require_object(p, f"service {sid!r} profile {mode!r}")
    return ServiceRecord(
        id=sid,
        display_name=string_field(doc.get("name", ""), "service.name"),
        functional_tags=frozenset(string_list(doc.get("tags", []), "service.tags")),
        profiles=profiles,
    )


def store_to_document(store: RegistryStore) -> dict[str, Any]:
    snap = store.snapshot()
    return {
        "version": DOCUMENT_VERSION,
        "revision": snap.revision,
        "schema": schema_to_document(snap.schema),
        "services": [service_to_document(s) for s in snap.services],
    }


def store_from_document(doc: Any, expected_schema: Optional[QosSchema] = None) -> RegistryStore:
    doc = require_object(doc, "store document")
    check_fields(doc, "store document", ("version", "schema", "services"), ("revision",))
    if doc["version"] != DOCUMENT_VERSION:
        raise QosError("malformed-document", f"unsupported document version {doc['version']!r}")
    schema = schema_from_document(doc["schema"])
    if expected_schema is not None and schema != expected_schema:
        raise QosError("schema-mismatch", "document schema differs from the expected schema")
    if not isinstance(doc["services"], list):
        raise QosError("malformed-document", "services must be a list")
    revision = doc.get("revision", 0)
    if isinstance(revision, bool) or not isinstance(revision, int) or revision < 0:
        raise QosError("malformed-document", "revision must be a non-negative integer")
    return RegistryStore(schema, [service_from_document(s) for s in doc["services"]], revision)


def _reject_constant(token: str) -> float:
    raise QosError("malformed-document", f"non-finite number {token} is not allowed")


def parse_json(text: str) -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise QosError("malformed-document", f"invalid JSON: {exc}") from None


def save_store(store: RegistryStore, path: PathLike) -> None:
    """Write the store atomically (temp file + rename)."""
    path = Path(path)
    text = json.dumps(store_to_document(store), indent=2, allow_nan=False)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", dir=path.parent, prefix=f".{path.name}.", delete=False
        ) as tf:
            tf.write(text + "\n")
            tf.flush()
            os.fsync(tf.fileno())
        os.replace(tf.name, path)
    except OSError as exc:
        raise QosError("io-failure", f"cannot write store {str(path)!r}: {exc}") from exc


def load_store(path: PathLike, expected_schema: Optional[QosSchema] = None) -> RegistryStore:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise QosError("io-failure", f"cannot read store {str(path)!r}: {exc}") from exc
    return store_from_document(parse_json(text), expected_schema)
