"""Indexed store over parsed changesets.

Answers the two history questions feature extraction needs: "what was the
previous version of this object" and "what had this user done before time
t".  The store is built once and immutable afterwards; all index lists are
kept in canonical order (version-ascending, commit-time-ascending) so that
permuting the input stream yields an identical store.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable

from .core import (
    Changeset,
    Edit,
    ObjectKind,
    Operation,
    changeset_from_json,
    changeset_to_json,
    dumps_canonical,
    format_timestamp,
    read_jsonl,
    write_jsonl,
)
from .errors import DuplicateChangesetIdError
from .vocab import TOP12_KEYS

STORE_FORMAT = "osmvand-store/1"


@dataclass(frozen=True)
class UserActivity:
    past_creates: int = 0
    past_modifies: int = 0
    past_deletes: int = 0
    past_contributions: int = 0
    first_contribution: datetime | None = None
    active_weeks: int = 0
    top12_key_uses: int = 0


class HistoryStore:
    def __init__(self) -> None:
        self.changesets: dict[int, Changeset] = {}
        # (id, kind) -> version-ascending [(edit, changeset_id)]
        self.object_index: dict[tuple[int, ObjectKind], list[tuple[Edit, int]]] = {}
        # user_id -> changeset ids, commit-time ascending, ties by id
        self.user_index: dict[int, list[int]] = {}

    def __eq__(self, other) -> bool:
        if not isinstance(other, HistoryStore):
            return NotImplemented
        return (
            self.changesets == other.changesets
            and self.object_index == other.object_index
            and self.user_index == other.user_index
        )

    def __len__(self) -> int:
        return len(self.changesets)

    def previous_version(self, object_id: int, kind: ObjectKind, version: int):
        """Stored edit with new_version == version - 1, or None.

        None covers both genuine creates (version 1) and incomplete history
        where the predecessor was never ingested.
        """
        if version <= 1:
            return None
        for edit, changeset_id in self.object_index.get((object_id, kind), ()):
            if edit.new_version == version - 1:
                return edit, changeset_id
        return None

    def user_activity_before(
        self, user_id: int, cutoff: datetime, top12: tuple[str, ...] = TOP12_KEYS
    ) -> UserActivity:
        """Aggregate a user's contributions strictly before the cutoff.

        The strict `<` keeps the changeset under classification out of its
        own user features.
        """
        top12_set = set(top12)
        creates = modifies = deletes = top12_uses = 0
        first: datetime | None = None
        weeks: set[tuple[int, int]] = set()
        for changeset_id in self.user_index.get(user_id, ()):
            changeset = self.changesets[changeset_id]
            if not changeset.commit_time < cutoff:
                continue
            if first is None or changeset.commit_time < first:
                first = changeset.commit_time
            iso = changeset.commit_time.isocalendar()
            weeks.add((iso[0], iso[1]))
            for edit in changeset.edits:
                if edit.operation is Operation.CREATE:
                    creates += 1
                elif edit.operation is Operation.MODIFY:
                    modifies += 1
                else:
                    deletes += 1
                if edit.operation is not Operation.DELETE:
                    top12_uses += sum(1 for key in edit.object.tags if key in top12_set)
        return UserActivity(
            past_creates=creates,
            past_modifies=modifies,
            past_deletes=deletes,
            past_contributions=creates + modifies + deletes,
            first_contribution=first,
            active_weeks=len(weeks),
            top12_key_uses=top12_uses,
        )

    def previous_authors(
        self, object_id: int, kind: ObjectKind, version: int, include: int | None = None
    ) -> set[int]:
        """Distinct authors of the stored versions strictly below ``version``.

        ``include=None`` keeps every author; passing a user id drops that
        author from the result (for the exclude-current-author variant).
        """
        authors = {
            self.changesets[changeset_id].user_id
            for edit, changeset_id in self.object_index.get((object_id, kind), ())
            if edit.new_version < version
        }
        if include is not None:
            authors.discard(include)
        return authors


def build_store(changesets: Iterable[Changeset]) -> HistoryStore:
    store = HistoryStore()
    for changeset in changesets:
        if changeset.id in store.changesets:
            raise DuplicateChangesetIdError(f"changeset id {changeset.id} seen twice")
        store.changesets[changeset.id] = changeset
        store.user_index.setdefault(changeset.user_id, []).append(changeset.id)
        for edit in changeset.edits:
            key = (edit.object.id, edit.object.kind)
            store.object_index.setdefault(key, []).append((edit, changeset.id))
    for entries in store.object_index.values():
        entries.sort(key=lambda item: item[0].new_version)
    for user_id, ids in store.user_index.items():
        ids.sort(key=lambda cid: (store.changesets[cid].commit_time, cid))
    return store


def save_snapshot(store: HistoryStore, jsonl_path, meta_path) -> None:
    """Write the store as JSON lines plus a sidecar with integrity metadata."""
    ordered = [store.changesets[cid] for cid in sorted(store.changesets)]
    write_jsonl(jsonl_path, (changeset_to_json(c) for c in ordered))
    digest = hashlib.sha256(Path(jsonl_path).read_bytes()).hexdigest()
    meta = {
        "format": STORE_FORMAT,
        "changesets": len(ordered),
        "edits": sum(len(c.edits) for c in ordered),
        "users": len(store.user_index),
        "sha256": digest,
        "first_commit": format_timestamp(min(c.commit_time for c in ordered)) if ordered else None,
        "last_commit": format_timestamp(max(c.commit_time for c in ordered)) if ordered else None,
    }
    with open(meta_path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(meta, indent=2, sort_keys=True))
        handle.write("\n")


def load_snapshot(jsonl_path) -> HistoryStore:
    return build_store(changeset_from_json(record) for record in read_jsonl(jsonl_path))


def store_fingerprint(store: HistoryStore) -> str:
    payload = "\n".join(
        dumps_canonical(changeset_to_json(store.changesets[cid])) for cid in sorted(store.changesets)
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
