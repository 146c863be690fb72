"""Domain model for OSM changesets and edits, plus the canonical JSON forms.

Every downstream stage exchanges data as JSON lines built from
``changeset_to_json`` / ``changeset_from_json``.  Record keys appear in a
fixed order so that identical inputs always serialize to identical bytes:

changeset: id, user_id, user_name, commit_time, comment, editor,
           imagery_used, bbox, edits
edit:      kind, id, version, operation, timestamp, tags, then one
           geometry key by kind (location / node_refs / members)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Iterator


class ObjectKind(Enum):
    NODE = "node"
    WAY = "way"
    RELATION = "relation"


class Operation(Enum):
    CREATE = "create"
    MODIFY = "modify"
    DELETE = "delete"


class Label(Enum):
    VANDALISM = "vandalism"
    REGULAR = "regular"


class Provenance(Enum):
    REVERT_MENTION = "revert_mention"
    REVERT_DELETION = "revert_deletion"
    SAMPLED_NEGATIVE = "sampled_negative"


@dataclass(frozen=True)
class Member:
    kind: ObjectKind
    ref: int
    role: str


# (min_lat, min_lon, max_lat, max_lon) in degrees, as declared by the editor.
BBox = tuple[float, float, float, float]


@dataclass(frozen=True)
class OsmObject:
    id: int
    kind: ObjectKind
    version: int
    tags: dict[str, str] = field(default_factory=dict)
    location: tuple[float, float] | None = None  # nodes: (lat, lon)
    node_refs: tuple[int, ...] = ()  # ways: ordered member node ids
    members: tuple[Member, ...] = ()  # relations: opaque member references

    def tag(self, key: str) -> str | None:
        return self.tags.get(key)


@dataclass(frozen=True)
class Edit:
    """One create/modify/delete of one object.

    ``object`` holds the state after the edit; deletes keep only the
    identity (id, kind, version) with empty tags and no geometry.
    """

    object: OsmObject
    operation: Operation
    new_version: int
    timestamp: datetime


@dataclass(frozen=True)
class Changeset:
    id: int
    user_id: int
    user_name: str = ""
    commit_time: datetime = datetime(1970, 1, 1, tzinfo=timezone.utc)
    comment: str = ""
    editor: str = ""
    imagery_used: bool = False
    declared_bbox: BBox | None = None
    edits: tuple[Edit, ...] = ()

    def with_edits(self, edits: Iterable[Edit]) -> Changeset:
        return replace(self, edits=tuple(edits))


@dataclass(frozen=True)
class VandalismLabel:
    changeset_id: int
    label: Label
    provenance: Provenance


def parse_timestamp(text: str) -> datetime:
    """Parse an OSM UTC timestamp (``2019-01-01T00:00:00Z``), seconds resolution."""
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def edit_to_json(edit: Edit) -> dict:
    obj = edit.object
    record = {
        "kind": obj.kind.value,
        "id": obj.id,
        "version": edit.new_version,
        "operation": edit.operation.value,
        "timestamp": format_timestamp(edit.timestamp),
        "tags": {k: obj.tags[k] for k in sorted(obj.tags)},
    }
    if obj.kind is ObjectKind.NODE:
        record["location"] = list(obj.location) if obj.location else None
    elif obj.kind is ObjectKind.WAY:
        record["node_refs"] = list(obj.node_refs)
    else:
        record["members"] = [[m.kind.value, m.ref, m.role] for m in obj.members]
    return record


def edit_from_json(record: dict) -> Edit:
    kind = ObjectKind(record["kind"])
    location = None
    node_refs: tuple[int, ...] = ()
    members: tuple[Member, ...] = ()
    if kind is ObjectKind.NODE and record.get("location") is not None:
        lat, lon = record["location"]
        location = (float(lat), float(lon))
    elif kind is ObjectKind.WAY:
        node_refs = tuple(int(r) for r in record.get("node_refs", ()))
    elif kind is ObjectKind.RELATION:
        members = tuple(
            Member(ObjectKind(m[0]), int(m[1]), str(m[2]))
            for m in record.get("members", ())
        )
    obj = OsmObject(
        id=int(record["id"]),
        kind=kind,
        version=int(record["version"]),
        tags=dict(record.get("tags", {})),
        location=location,
        node_refs=node_refs,
        members=members,
    )
    return Edit(
        object=obj,
        operation=Operation(record["operation"]),
        new_version=int(record["version"]),
        timestamp=parse_timestamp(record["timestamp"]),
    )


def changeset_to_json(changeset: Changeset) -> dict:
    return {
        "id": changeset.id,
        "user_id": changeset.user_id,
        "user_name": changeset.user_name,
        "commit_time": format_timestamp(changeset.commit_time),
        "comment": changeset.comment,
        "editor": changeset.editor,
        "imagery_used": changeset.imagery_used,
        "bbox": list(changeset.declared_bbox) if changeset.declared_bbox else None,
        "edits": [edit_to_json(e) for e in changeset.edits],
    }


def changeset_from_json(record: dict) -> Changeset:
    bbox = record.get("bbox")
    return Changeset(
        id=int(record["id"]),
        user_id=int(record["user_id"]),
        user_name=str(record.get("user_name", "")),
        commit_time=parse_timestamp(record["commit_time"]),
        comment=str(record.get("comment", "")),
        editor=str(record.get("editor", "")),
        imagery_used=bool(record.get("imagery_used", False)),
        declared_bbox=tuple(float(v) for v in bbox) if bbox else None,
        edits=tuple(edit_from_json(e) for e in record.get("edits", ())),
    )


def dumps_canonical(record: dict) -> str:
    """Single-line JSON with a stable byte representation."""
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False)


def write_jsonl(path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(dumps_canonical(record))
            handle.write("\n")


def read_jsonl(path) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield json.loads(line)
