"""Test-collection enrichment: read a TREC-style collection, join harvested
records onto its documents by normalized id, write it back, and report
coverage plus a per-field availability matrix.

Collection format (normative here): documents delimited by ``<DOC>`` ...
``</DOC>``, a mandatory ``<DOCID>`` line, then one ``<FIELDNAME>value</FIELDNAME>``
per line with repeated elements for multi-valued fields; UTF-8.  Field names
come from a closed, configurable vocabulary; lines with unknown tags are
skipped with a warning count, documents without a DOCID (or with a duplicate
one) likewise.  Values are written raw, so they must not contain newlines or
text that forms a closing tag.

Joining is append-only: harvested values never replace original ones, and a
(field, value) pair already present on a document is not appended again, so
joining the same harvest twice is a no-op.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import CollectionFormatError, DuplicateHarvestKey, UnknownField
from .extraction import ExtractionTree

DEFAULT_VOCABULARY = (
    "id", "author", "editor", "title", "source", "issn", "isbn", "pubyear",
    "keywords", "class", "abstract", "fulltext", "method", "location",
    "publisher", "pages", "language", "country",
)

ORIGINAL = "original"
HARVESTED = "harvested"

ABSENT = "absent"
UNSTRUCTURED = "unstructured"
STRUCTURED = "structured"
_STATE_RANK = {ABSENT: 0, UNSTRUCTURED: 1, STRUCTURED: 2}
_STATE_SYMBOL = {ABSENT: "-", UNSTRUCTURED: "o", STRUCTURED: "*"}


@dataclass
class FieldEntry:
    name: str
    value: str
    origin: str = ORIGINAL


@dataclass
class CollectionDoc:
    docid: str
    fields: list[FieldEntry] = field(default_factory=list)

    def values(self, name: str) -> list[str]:
        return [e.value for e in self.fields if e.name == name]

    def has(self, name: str, value: str) -> bool:
        return any(e.name == name and e.value == value for e in self.fields)

    def add(self, name: str, value: str, origin: str = ORIGINAL) -> None:
        self.fields.append(FieldEntry(name, value, origin))


# --- reading and writing ------------------------------------------------------

_FIELD_LINE = re.compile(r"^<([A-Za-z][A-Za-z0-9_]*)>(.*)</\1>$")


class CollectionReader:
    """Streaming reader; counts skipped documents and field lines."""

    def __init__(self, path: str | Path, vocabulary=DEFAULT_VOCABULARY):
        self.path = Path(path)
        self.vocabulary = set(vocabulary)
        self.skipped_docs = 0
        self.skipped_fields = 0
        self._seen_ids: set[str] = set()

    def __iter__(self):
        saw_doc = False
        current: list[str] | None = None
        with open(self.path, encoding="utf-8") as handle:
            for raw in handle:
                line = raw.rstrip("\n")
                if line.strip() == "<DOC>":
                    saw_doc = True
                    if current is not None:
                        self.skipped_docs += 1  # unterminated previous block
                    current = []
                elif line.strip() == "</DOC>":
                    if current is not None:
                        doc = self._build(current)
                        if doc is not None:
                            yield doc
                    current = None
                elif current is not None:
                    current.append(line)
        if current is not None:
            self.skipped_docs += 1
        if not saw_doc and self.path.stat().st_size > 0:
            raise CollectionFormatError(f"no <DOC> blocks in {self.path}")

    def _build(self, lines: list[str]) -> CollectionDoc | None:
        docid: str | None = None
        entries: list[FieldEntry] = []
        for line in lines:
            if not line.strip():
                continue
            match = _FIELD_LINE.match(line.strip())
            if match is None:
                self.skipped_fields += 1
                continue
            name, value = match.group(1).lower(), match.group(2)
            if name == "docid":
                if docid is None:
                    docid = value.strip()
                continue
            if name not in self.vocabulary:
                self.skipped_fields += 1
                continue
            entries.append(FieldEntry(name, value))
        if not docid or docid in self._seen_ids:
            self.skipped_docs += 1
            return None
        self._seen_ids.add(docid)
        return CollectionDoc(docid, entries)


def read_collection(path: str | Path,
                    vocabulary=DEFAULT_VOCABULARY) -> list[CollectionDoc]:
    return list(CollectionReader(path, vocabulary))


def write_collection(docs: list[CollectionDoc], path: str | Path) -> None:
    """Canonical serialization; ``read(write(docs))`` reproduces ``docs``."""
    with open(path, "w", encoding="utf-8") as handle:
        for doc in docs:
            handle.write("<DOC>\n")
            handle.write(f"<DOCID>{doc.docid}</DOCID>\n")
            for entry in doc.fields:
                tag = entry.name.upper()
                handle.write(f"<{tag}>{entry.value}</{tag}>\n")
            handle.write("</DOC>\n")


# --- id normalization and joining ----------------------------------------------

def normalize_id(docid: str, prefix: str) -> str:
    """Strip ``prefix`` (case-insensitively) plus one following ``-``/``_``,
    trim, and lowercase; inputs without the prefix just trim and lowercase."""
    text = docid.strip()
    if prefix and text[:len(prefix)].lower() == prefix.lower():
        rest = text[len(prefix):]
        if rest[:1] in ("-", "_"):
            rest = rest[1:]
        text = rest
    return text.lower()


@dataclass
class JoinReport:
    total_docs: int = 0
    matched: int = 0
    unmatched_docs: int = 0
    unmatched_harvest_records: int = 0
    new_fields: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "total_docs": self.total_docs,
            "matched": self.matched,
            "unmatched_docs": self.unmatched_docs,
            "unmatched_harvest_records": self.unmatched_harvest_records,
            "new_fields": list(self.new_fields),
        }


def join(docs: list[CollectionDoc], harvested: ExtractionTree, key_field: str,
         field_map: dict[str, str], prefix: str = "",
         vocabulary=DEFAULT_VOCABULARY) -> tuple[list[CollectionDoc], JoinReport]:
    """Append mapped harvest fields to every document whose normalized id
    matches a harvest record's key; original values are never overwritten.
    Duplicate keys on the harvest side are an error (the join is ambiguous).
    """
    vocab = set(vocabulary)
    for target in field_map.values():
        if target not in vocab:
            raise UnknownField(target)

    index: dict[str, object] = {}
    keyless = 0
    for record in harvested.records:
        key_node = record.first(key_field)
        if key_node is None or not (key_node.value or "").strip():
            keyless += 1
            continue
        key = normalize_id(key_node.value, prefix)
        if key in index:
            raise DuplicateHarvestKey(key)
        index[key] = record

    report = JoinReport()
    appended_fields: list[str] = []
    matched_keys: set[str] = set()
    for doc in docs:
        report.total_docs += 1
        record = index.get(normalize_id(doc.docid, prefix))
        if record is None:
            report.unmatched_docs += 1
            continue
        report.matched += 1
        matched_keys.add(normalize_id(doc.docid, prefix))
        for harvest_name, target in field_map.items():
            for value in record.values(harvest_name):
                if not doc.has(target, value):
                    doc.add(target, value, HARVESTED)
                    if target not in appended_fields:
                        appended_fields.append(target)
    report.unmatched_harvest_records = keyless + len(index) - len(matched_keys)
    report.new_fields = appended_fields
    return docs, report


# --- field-availability matrix ---------------------------------------------------

def load_rules(path: str | Path | None = None) -> dict:
    """Validation rules: field -> null or {"pattern": regex, "checksum": name}."""
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = resources.files("oxtract").joinpath("data/field_rules.json").read_text("utf-8")
    return json.loads(text)


def _isbn_valid(value: str) -> bool:
    digits = value.replace("-", "").replace(" ", "").upper()
    if len(digits) == 10:
        if not re.fullmatch(r"\d{9}[\dX]", digits):
            return False
        total = sum((10 - i) * (10 if c == "X" else int(c))
                    for i, c in enumerate(digits))
        return total % 11 == 0
    if len(digits) == 13:
        if not digits.isdigit():
            return False
        total = sum((1 if i % 2 == 0 else 3) * int(c) for i, c in enumerate(digits))
        return total % 10 == 0
    return False


_CHECKSUMS = {"isbn": _isbn_valid}


@dataclass
class FieldMatrix:
    corpora: list[str]
    fields: list[str]
    states: dict[tuple[str, str], str]  # (corpus, field) -> state

    def state(self, corpus: str, field_name: str) -> str:
        return self.states[(corpus, field_name)]


def state_rank(state: str) -> int:
    return _STATE_RANK[state]


def field_matrix(corpora: list[tuple[str, list[CollectionDoc]]], rules: dict,
                 vocabulary=DEFAULT_VOCABULARY) -> FieldMatrix:
    """Classify every (corpus, field) as absent, unstructured, or structured.

    A field is absent when no document carries it, structured when every
    value matches the field's validation rule (pattern plus optional
    checksum), and unstructured otherwise.  Fields without a rule cap at
    unstructured.  The ``id`` field reads the DOCIDs.
    """
    fields = list(vocabulary)
    states: dict[tuple[str, str], str] = {}
    for corpus_name, docs in corpora:
        for field_name in fields:
            if field_name == "id":
                values = [d.docid for d in docs]
            else:
                values = [v for d in docs for v in d.values(field_name)]
            states[(corpus_name, field_name)] = _classify(values,
                                                          rules.get(field_name))
    return FieldMatrix([name for name, _ in corpora], fields, states)


def _classify(values: list[str], rule) -> str:
    values = [v for v in values if v.strip()]
    if not values:
        return ABSENT
    if not rule:
        return UNSTRUCTURED
    pattern = re.compile(rule["pattern"])
    check = _CHECKSUMS.get(rule.get("checksum", ""))
    for value in values:
        if not pattern.fullmatch(value.strip()):
            return UNSTRUCTURED
        if check is not None and not check(value.strip()):
            return UNSTRUCTURED
    return STRUCTURED


def render_matrix(matrix: FieldMatrix) -> str:
    """Aligned text table using ``-`` / ``o`` / ``*`` for the three states."""
    header = ["corpus"] + matrix.fields
    rows = [header]
    for corpus in matrix.corpora:
        rows.append([corpus] + [_STATE_SYMBOL[matrix.state(corpus, f)]
                                for f in matrix.fields])
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
             for row in rows]
    return "\n".join(lines) + "\n"
