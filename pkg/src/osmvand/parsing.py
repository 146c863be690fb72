"""Parsers for the OSM changeset-dump and osmChange XML formats.

Both parsers are total under a skip-and-count policy: records that are
structurally broken (missing required attributes, unknown elements) are
skipped and tallied in ``ParseStats`` instead of aborting the run.  Only
XML that fails to parse at all raises ``MalformedXmlError``.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

from .core import (
    BBox,
    Changeset,
    Edit,
    Member,
    ObjectKind,
    Operation,
    OsmObject,
    format_timestamp,
    parse_timestamp,
)
from .errors import MalformedXmlError

_BBOX_ATTRS = ("min_lat", "min_lon", "max_lat", "max_lon")
_OPERATION_BLOCKS = {"create": Operation.CREATE, "modify": Operation.MODIFY, "delete": Operation.DELETE}
_KIND_ELEMENTS = {"node": ObjectKind.NODE, "way": ObjectKind.WAY, "relation": ObjectKind.RELATION}


@dataclass
class ParseStats:
    skipped_changesets: int = 0
    skipped_elements: int = 0
    unknown_elements: int = 0
    notes: list[str] = field(default_factory=list)

    def total_skipped(self) -> int:
        return self.skipped_changesets + self.skipped_elements + self.unknown_elements


def _parse_root(document: str) -> ET.Element:
    try:
        return ET.fromstring(document)
    except ET.ParseError as exc:
        raise MalformedXmlError(str(exc), position=exc.position) from exc


def parse_changeset_metadata(document: str, stats: ParseStats | None = None) -> list[Changeset]:
    """Parse ``<osm><changeset .../></osm>`` dump XML into metadata-only changesets.

    Required attributes are id, uid, and created_at; a changeset missing any
    of them is skipped and counted.  The commit time is ``closed_at`` when
    present, otherwise ``created_at``.  Comment, editor, and imagery flags
    arrive as ``<tag k=... v=...>`` children.
    """
    stats = stats if stats is not None else ParseStats()
    root = _parse_root(document)
    changesets = []
    for element in root.iter("changeset"):
        parsed = _parse_changeset_element(element, stats)
        if parsed is not None:
            changesets.append(parsed)
    return changesets


def _parse_changeset_element(element: ET.Element, stats: ParseStats) -> Changeset | None:
    attrs = element.attrib
    missing = [name for name in ("id", "uid", "created_at") if not attrs.get(name)]
    if missing:
        stats.skipped_changesets += 1
        stats.notes.append(f"changeset missing required attribute(s): {', '.join(missing)}")
        return None

    commit_raw = attrs.get("closed_at") or attrs["created_at"]
    bbox: BBox | None = None
    if all(attrs.get(name) for name in _BBOX_ATTRS):
        bbox = tuple(float(attrs[name]) for name in _BBOX_ATTRS)

    comment = ""
    editor = ""
    imagery_used = False
    for tag in element.iter("tag"):
        key = tag.get("k", "")
        value = tag.get("v", "")
        if key == "comment":
            comment = value
        elif key == "created_by":
            editor = value
        elif key == "imagery_used":
            imagery_used = True

    return Changeset(
        id=int(attrs["id"]),
        user_id=int(attrs["uid"]),
        user_name=attrs.get("user", ""),
        commit_time=parse_timestamp(commit_raw),
        comment=comment,
        editor=editor,
        imagery_used=imagery_used,
        declared_bbox=bbox,
    )


def parse_osmchange(document: str, changeset_id: int, stats: ParseStats | None = None) -> list[Edit]:
    """Parse osmChange XML, keeping only edits of the given changeset, in document order."""
    by_changeset = parse_osmchange_all(document, stats)
    return by_changeset.get(changeset_id, [])


def parse_osmchange_all(document: str, stats: ParseStats | None = None) -> dict[int, list[Edit]]:
    """Parse osmChange XML into edits grouped by their changeset attribute."""
    stats = stats if stats is not None else ParseStats()
    root = _parse_root(document)
    edits: dict[int, list[Edit]] = {}
    for block in root:
        operation = _OPERATION_BLOCKS.get(block.tag)
        if operation is None:
            stats.unknown_elements += 1
            continue
        for element in block:
            parsed = _parse_edit_element(element, operation, stats)
            if parsed is None:
                continue
            changeset_id, edit = parsed
            edits.setdefault(changeset_id, []).append(edit)
    return edits


def _parse_edit_element(
    element: ET.Element, operation: Operation, stats: ParseStats
) -> tuple[int, Edit] | None:
    kind = _KIND_ELEMENTS.get(element.tag)
    if kind is None:
        stats.unknown_elements += 1
        return None
    attrs = element.attrib
    missing = [name for name in ("id", "version", "changeset", "timestamp") if not attrs.get(name)]
    if missing:
        stats.skipped_elements += 1
        stats.notes.append(f"{element.tag} missing required attribute(s): {', '.join(missing)}")
        return None

    version = int(attrs["version"])
    tags: dict[str, str] = {}
    location = None
    node_refs: tuple[int, ...] = ()
    members: tuple[Member, ...] = ()

    if operation is not Operation.DELETE:
        # Deletes keep only the object identity: no tags, no geometry.
        tags = {tag.get("k", ""): tag.get("v", "") for tag in element.iter("tag")}
        if kind is ObjectKind.NODE and attrs.get("lat") and attrs.get("lon"):
            location = (float(attrs["lat"]), float(attrs["lon"]))
        elif kind is ObjectKind.WAY:
            node_refs = tuple(int(nd.get("ref")) for nd in element.iter("nd") if nd.get("ref"))
        elif kind is ObjectKind.RELATION:
            members = tuple(
                Member(_KIND_ELEMENTS[m.get("type")], int(m.get("ref")), m.get("role", ""))
                for m in element.iter("member")
                if m.get("type") in _KIND_ELEMENTS and m.get("ref")
            )

    obj = OsmObject(
        id=int(attrs["id"]),
        kind=kind,
        version=version,
        tags=tags,
        location=location,
        node_refs=node_refs,
        members=members,
    )
    edit = Edit(
        object=obj,
        operation=operation,
        new_version=version,
        timestamp=parse_timestamp(attrs["timestamp"]),
    )
    return int(attrs["changeset"]), edit


def changesets_to_dump_xml(changesets) -> str:
    """Serialize changeset metadata back to the dump schema.

    The commit time is written as ``created_at``; re-parsing therefore
    reproduces the original ``Changeset`` values field by field.
    """
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<osm>"]
    for c in changesets:
        attrs = [
            f'id="{c.id}"',
            f'uid="{c.user_id}"',
            f"user={quoteattr(c.user_name)}",
            f'created_at="{format_timestamp(c.commit_time)}"',
        ]
        if c.declared_bbox is not None:
            attrs.extend(
                f'{name}="{value!r}"'
                for name, value in zip(_BBOX_ATTRS, c.declared_bbox)
            )
        tags = []
        if c.comment:
            tags.append(("comment", c.comment))
        if c.editor:
            tags.append(("created_by", c.editor))
        if c.imagery_used:
            tags.append(("imagery_used", "yes"))
        if tags:
            lines.append(f"  <changeset {' '.join(attrs)}>")
            for key, value in tags:
                lines.append(f"    <tag k={quoteattr(key)} v={quoteattr(value)}/>")
            lines.append("  </changeset>")
        else:
            lines.append(f"  <changeset {' '.join(attrs)}/>")
    lines.append("</osm>")
    return "\n".join(lines) + "\n"


def edits_to_osmchange_xml(changesets) -> str:
    """Serialize the edits of the given changesets as osmChange XML.

    Each edit becomes its own operation block so that document order equals
    per-changeset edit order.
    """
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', '<osmChange version="0.6">']
    for c in changesets:
        for edit in c.edits:
            obj = edit.object
            attrs = [
                f'id="{obj.id}"',
                f'version="{edit.new_version}"',
                f'changeset="{c.id}"',
                f'timestamp="{format_timestamp(edit.timestamp)}"',
            ]
            if obj.kind is ObjectKind.NODE and obj.location is not None:
                attrs.append(f'lat="{obj.location[0]!r}"')
                attrs.append(f'lon="{obj.location[1]!r}"')
            children = []
            if obj.kind is ObjectKind.WAY:
                children.extend(f'<nd ref="{ref}"/>' for ref in obj.node_refs)
            elif obj.kind is ObjectKind.RELATION:
                children.extend(
                    f'<member type="{m.kind.value}" ref="{m.ref}" role={quoteattr(m.role)}/>'
                    for m in obj.members
                )
            children.extend(
                f"<tag k={quoteattr(k)} v={quoteattr(obj.tags[k])}/>" for k in sorted(obj.tags)
            )
            block = edit.operation.value
            element = obj.kind.value
            if children:
                lines.append(f"  <{block}>")
                lines.append(f"    <{element} {' '.join(attrs)}>")
                lines.extend(f"      {child}" for child in children)
                lines.append(f"    </{element}>")
                lines.append(f"  </{block}>")
            else:
                lines.append(f"  <{block}><{element} {' '.join(attrs)}/></{block}>")
    lines.append("</osmChange>")
    return "\n".join(lines) + "\n"
