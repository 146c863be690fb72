"""Revert-based label mining, negative sampling, and user-disjoint splits.

Positives come from two rules applied to revert changesets (those whose
comment mentions vandalism): if the comment names specific changesets, the
named changesets are vandalism; otherwise objects deleted by the revert are
inspected and, when exactly one user authored all prior versions, that
user's contributing changesets are vandalism.  When mentions exist the
deletion rule is not applied for that revert.
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, field
from enum import Enum

from .core import Changeset, Label, Operation, Provenance, VandalismLabel
from .errors import DataError, InsufficientNegativesError, NoVandalismFoundError
from .history import HistoryStore

logger = logging.getLogger(__name__)

REVERT_KEYWORD = "vandalism"

# The three comment conventions an explicit changeset reference can take:
# "changeset 123", "changeset/123" (URL form), and a bare "#123".
_MENTION_RE = re.compile(r"changeset\s+(\d+)|changeset/(\d+)|#(\d+)", re.IGNORECASE)


class Split(Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


@dataclass
class LabeledDataset:
    labels: list[VandalismLabel]
    splits: dict[int, Split]
    seed: int

    def label_map(self) -> dict[int, bool]:
        return {l.changeset_id: l.label is Label.VANDALISM for l in self.labels}

    def split_counts(self) -> dict[str, int]:
        counts = {split.value: 0 for split in Split}
        for split in self.splits.values():
            counts[split.value] += 1
        return counts

    def realized_ratios(self) -> dict[str, float]:
        total = len(self.splits)
        counts = self.split_counts()
        return {name: (count / total if total else 0.0) for name, count in counts.items()}


def find_revert_changesets(store: HistoryStore) -> list[int]:
    """Changesets whose comment contains "vandalism", case-insensitively."""
    return sorted(
        cid for cid, c in store.changesets.items() if REVERT_KEYWORD in c.comment.lower()
    )


def mentioned_changesets(comment: str) -> list[int]:
    """Changeset ids referenced in a comment, deduplicated in order of appearance."""
    seen: list[int] = []
    for match in _MENTION_RE.finditer(comment):
        value = int(next(group for group in match.groups() if group is not None))
        if value not in seen:
            seen.append(value)
    return seen


def attribute_via_deletions(store: HistoryStore, revert: Changeset) -> list[int]:
    """Vandalism changesets inferred from the objects a revert deletes.

    For each deleted object: when every stored prior version was authored by
    one single user, all of that user's changesets touching the object are
    vandalism.  Objects with several past authors (or no stored history)
    contribute nothing.
    """
    attributed: set[int] = set()
    for edit in revert.edits:
        if edit.operation is not Operation.DELETE:
            continue
        key = (edit.object.id, edit.object.kind)
        prior = [
            (prior_edit, cid)
            for prior_edit, cid in store.object_index.get(key, ())
            if prior_edit.new_version < edit.new_version and cid != revert.id
        ]
        if not prior:
            continue
        authors = {store.changesets[cid].user_id for _, cid in prior}
        if len(authors) == 1:
            attributed.update(cid for _, cid in prior)
    return sorted(attributed)


def mine_labels(store: HistoryStore, seed: int) -> list[VandalismLabel]:
    """Mine balanced vandalism/regular labels from the store."""
    reverts = set(find_revert_changesets(store))
    positives: dict[int, Provenance] = {}

    # Mention rule first: a revert with explicit references never falls back
    # to deletion attribution, and mention provenance wins overall.
    deletion_only: list[int] = []
    for revert_id in sorted(reverts):
        revert = store.changesets[revert_id]
        mentions = [
            cid
            for cid in mentioned_changesets(revert.comment)
            if cid in store.changesets and cid not in reverts
        ]
        if mentions:
            for cid in mentions:
                positives.setdefault(cid, Provenance.REVERT_MENTION)
        else:
            deletion_only.append(revert_id)
    for revert_id in deletion_only:
        for cid in attribute_via_deletions(store, store.changesets[revert_id]):
            if cid not in reverts:
                positives.setdefault(cid, Provenance.REVERT_DELETION)

    if not positives:
        raise NoVandalismFoundError("no vandalism changesets could be attributed")

    candidates = sorted(set(store.changesets) - set(positives) - reverts)
    if len(candidates) < len(positives):
        raise InsufficientNegativesError(
            f"need {len(positives)} negatives but only {len(candidates)} candidates remain"
        )
    negatives = random.Random(seed).sample(candidates, len(positives))

    labels = [
        VandalismLabel(cid, Label.VANDALISM, positives[cid]) for cid in sorted(positives)
    ]
    labels.extend(
        VandalismLabel(cid, Label.REGULAR, Provenance.SAMPLED_NEGATIVE)
        for cid in sorted(negatives)
    )
    return labels


def split_user_disjoint(
    labels: list[VandalismLabel],
    store: HistoryStore,
    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
    seed: int = 0,
) -> dict[int, Split]:
    """Assign labeled changesets to train/validation/test, author-disjoint.

    Authors are shuffled for tie-breaking, then processed largest-first;
    each author group goes to the split currently furthest below its target
    example share.  Exact ratios are generally unreachable under
    disjointness; the greedy assignment stays within one author group of
    the optimum.
    """
    groups: dict[int, list[int]] = {}
    for label in labels:
        changeset = store.changesets.get(label.changeset_id)
        if changeset is None:
            raise DataError(f"labeled changeset {label.changeset_id} is not in the store")
        groups.setdefault(changeset.user_id, []).append(label.changeset_id)

    authors = sorted(groups)
    random.Random(seed).shuffle(authors)
    authors.sort(key=lambda a: -len(groups[a]))  # stable: ties keep shuffled order

    total = sum(len(ids) for ids in groups.values())
    order = (Split.TRAIN, Split.VALIDATION, Split.TEST)
    assigned = {split: 0 for split in order}
    result: dict[int, Split] = {}
    for author in authors:
        deficits = [ratios[i] * total - assigned[split] for i, split in enumerate(order)]
        best = max(range(3), key=lambda i: (deficits[i], -i))
        split = order[best]
        assigned[split] += len(groups[author])
        for cid in groups[author]:
            result[cid] = split

    for split in (Split.VALIDATION, Split.TEST):
        if assigned[split] == 0:
            logger.warning("split %s is empty (too few distinct authors)", split.value)
    return result


def build_labels(
    store: HistoryStore,
    seed: int,
    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
) -> LabeledDataset:
    labels = mine_labels(store, seed)
    splits = split_user_disjoint(labels, store, ratios, seed)
    return LabeledDataset(labels=labels, splits=splits, seed=seed)


def labels_to_json(dataset: LabeledDataset) -> list[dict]:
    records = []
    for label in dataset.labels:
        record = {
            "changeset_id": label.changeset_id,
            "label": label.label.value,
            "provenance": label.provenance.value,
        }
        split = dataset.splits.get(label.changeset_id)
        if split is not None:
            record["split"] = split.value
        records.append(record)
    return records


def labels_from_json(records) -> LabeledDataset:
    labels = []
    splits: dict[int, Split] = {}
    for record in records:
        labels.append(
            VandalismLabel(
                changeset_id=int(record["changeset_id"]),
                label=Label(record["label"]),
                provenance=Provenance(record["provenance"]),
            )
        )
        if "split" in record:
            splits[int(record["changeset_id"])] = Split(record["split"])
    return LabeledDataset(labels=labels, splits=splits, seed=-1)
