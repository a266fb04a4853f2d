"""Hierarchical record tree built from extraction markers, and its XML, CSV,
and JSON serializations.

Serialization contracts (golden-file exact):

* XML: compact UTF-8, element per record, record value as text before child
  elements, ``source_url`` attribute on depth-1 records, the five characters
  ``& < > " '`` escaped.  An empty tree is ``<results/>``.
* CSV: one row per depth-1 record, RFC 4180 quoting, header always present.
  Columns are ``record`` (the record's name), ``source_url``, then child
  names in first-seen order; repeated values join with ``|`` (values
  containing ``|`` are not escaped further - XML/JSON are the lossless
  formats).  Trees deeper than record -> field raise TooDeepForCsv.
* JSON: ``{"results": [...]}`` with one object per record; a child name
  seen once maps to its value, seen repeatedly to an array, in first-seen
  key order.  Metadata keys ``_record``, ``_source_url`` and ``_value``
  carry the record's own name/origin/value.  Non-ASCII stays literal.

Empty string values are stored as "no value": the serialized forms cannot
tell them apart, and normalizing keeps XML round-trips exact.
"""

from __future__ import annotations

import csv
import io
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import TooDeepForCsv

ROOT_NAME = "results"


@dataclass(eq=False)
class RecordNode:
    name: str
    value: str | None = None
    children: list["RecordNode"] = field(default_factory=list)
    source_url: str | None = None
    parent: "RecordNode | None" = None

    def values(self, child_name: str) -> list[str]:
        return [c.value or "" for c in self.children if c.name == child_name]

    def first(self, child_name: str) -> "RecordNode | None":
        for child in self.children:
            if child.name == child_name:
                return child
        return None


class ExtractionTree:
    """Single-writer record tree; the root is the synthetic ``results``."""

    def __init__(self) -> None:
        self.root = RecordNode(ROOT_NAME)

    def open_record(self, name: str, value: str | None, parent: RecordNode,
                    source_url: str | None = None) -> RecordNode:
        node = RecordNode(name, value or None, source_url=source_url, parent=parent)
        parent.children.append(node)
        return node

    def adopt(self, record: RecordNode) -> RecordNode:
        """Re-attach a detached record (e.g. one streamed from a run)."""
        record.parent = self.root
        self.root.children.append(record)
        return record

    @property
    def records(self) -> list[RecordNode]:
        return list(self.root.children)


def tree_equal(a: ExtractionTree, b: ExtractionTree) -> bool:
    """Equality on names, values, and order everywhere, plus source_url on
    depth-1 records (the only level the XML form carries it)."""
    return _node_equal(a.root, b.root, depth=0)


def _node_equal(a: RecordNode, b: RecordNode, depth: int) -> bool:
    if (a.name, a.value) != (b.name, b.value):
        return False
    if depth == 1 and a.source_url != b.source_url:
        return False
    if len(a.children) != len(b.children):
        return False
    return all(_node_equal(x, y, depth + 1) for x, y in zip(a.children, b.children))


# --- XML ----------------------------------------------------------------------

_XML_ESCAPES = [("&", "&amp;"), ("<", "&lt;"), (">", "&gt;"),
                ('"', "&quot;"), ("'", "&apos;")]


def _xml_escape(text: str) -> str:
    for raw, entity in _XML_ESCAPES:
        text = text.replace(raw, entity)
    return text


def serialize_xml(tree: ExtractionTree) -> bytes:
    out = io.StringIO()
    _write_xml(tree.root, out, depth=0)
    return out.getvalue().encode("utf-8")


def _write_xml(node: RecordNode, out: io.StringIO, depth: int) -> None:
    attrs = ""
    if depth == 1 and node.source_url is not None:
        attrs = f' source_url="{_xml_escape(node.source_url)}"'
    if node.value is None and not node.children:
        out.write(f"<{node.name}{attrs}/>")
        return
    out.write(f"<{node.name}{attrs}>")
    if node.value is not None:
        out.write(_xml_escape(node.value))
    for child in node.children:
        _write_xml(child, out, depth + 1)
    out.write(f"</{node.name}>")


def parse_records_xml(data: bytes) -> ExtractionTree:
    """Read serialize_xml output back into a tree (lossless by contract)."""
    root_el = ET.fromstring(data)
    tree = ExtractionTree()
    tree.root.name = root_el.tag
    for child in root_el:
        tree.adopt(_read_xml_node(child))
    return tree


def _read_xml_node(element: ET.Element) -> RecordNode:
    node = RecordNode(element.tag,
                      value=element.text or None,
                      source_url=element.get("source_url"))
    for child in element:
        sub = _read_xml_node(child)
        sub.parent = node
        node.children.append(sub)
    return node


# --- CSV ----------------------------------------------------------------------

def serialize_csv(tree: ExtractionTree) -> bytes:
    depth = _depth_below(tree.root)
    if depth > 2:
        raise TooDeepForCsv(depth)
    columns: list[str] = []
    for record in tree.root.children:
        for child in record.children:
            if child.name not in columns:
                columns.append(child.name)
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["record", "source_url"] + columns)
    for record in tree.root.children:
        row = [record.name, record.source_url or ""]
        for column in columns:
            row.append("|".join(record.values(column)))
        writer.writerow(row)
    return out.getvalue().encode("utf-8")


def _depth_below(node: RecordNode) -> int:
    if not node.children:
        return 0
    return 1 + max(_depth_below(c) for c in node.children)


# --- JSON ---------------------------------------------------------------------

def serialize_json(tree: ExtractionTree) -> bytes:
    records = [_json_record(r, top=True) for r in tree.root.children]
    return json.dumps({ROOT_NAME: records}, ensure_ascii=False).encode("utf-8")


def _json_record(node: RecordNode, top: bool = False):
    obj: dict[str, object] = {}
    if top:
        obj["_record"] = node.name
        if node.source_url is not None:
            obj["_source_url"] = node.source_url
    if node.value is not None:
        obj["_value"] = node.value
    for child in node.children:
        rep = _json_record(child) if child.children else (child.value or "")
        if child.name in obj and child.name not in ("_record", "_source_url", "_value"):
            existing = obj[child.name]
            if isinstance(existing, list):
                existing.append(rep)
            else:
                obj[child.name] = [existing, rep]
        else:
            obj[child.name] = rep
    return obj
