"""Lenient HTML parsing into an immutable node tree, plus the document-order
primitives (axes, string values) the evaluator is built on.

Tag-soup handling follows a fixed rule table rather than the full HTML5
algorithm:

* element and attribute names are ASCII-lowercased;
* ``p li dt dd tr td th option`` auto-close when a sibling-starting tag
  arrives (see ``CLOSE_BEFORE``); void elements never take children;
* a missing ``<html>`` root and a missing ``<body>`` around content are
  synthesized; content after a premature ``</html>``/``</body>`` re-enters
  the existing elements; stray end tags are dropped;
* input decodes as UTF-8 with replacement characters; ``<meta charset>``
  sniffing and ``<base href>`` are not performed;
* comments, doctypes and processing instructions are discarded; script and
  style elements are kept (their text never runs).

Document order numbers every node: an element first, then its attribute
nodes in parse order, then its children recursively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from html.parser import HTMLParser
from urllib.parse import urlparse

ELEMENT = "element"
TEXT = "text"
ATTRIBUTE = "attribute"

VOID_ELEMENTS = frozenset({
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
})

# open tag -> incoming start tags that implicitly close it
CLOSE_BEFORE: dict[str, frozenset[str]] = {
    "p": frozenset({"p", "div", "ul", "ol", "dl", "table", "form", "section",
                    "article", "blockquote", "pre", "h1", "h2", "h3", "h4", "h5", "h6"}),
    "li": frozenset({"li"}),
    "dt": frozenset({"dt", "dd"}),
    "dd": frozenset({"dt", "dd"}),
    "tr": frozenset({"tr"}),
    "td": frozenset({"td", "th", "tr"}),
    "th": frozenset({"td", "th", "tr"}),
    "option": frozenset({"option", "optgroup"}),
}

FORM_FIELD_TAGS = frozenset({"input", "select", "textarea", "button"})


@dataclass(eq=False)
class DomNode:
    kind: str
    name: str = ""           # tag or attribute name, lowercase
    value: str = ""          # text content / attribute value
    attrs: dict[str, str] = field(default_factory=dict)
    attr_nodes: list["DomNode"] = field(default_factory=list)
    children: list["DomNode"] = field(default_factory=list)
    parent: "DomNode | None" = None
    doc_order: int = -1

    def __repr__(self) -> str:  # debugging aid only
        if self.kind == ELEMENT:
            return f"<{self.name} #{self.doc_order}>"
        if self.kind == TEXT:
            return f"Text({self.value!r} #{self.doc_order})"
        return f"@{self.name}={self.value!r}"

    @property
    def root(self) -> "DomNode":
        node = self
        while node.parent is not None:
            node = node.parent
        return node

    def class_tokens(self) -> list[str]:
        return self.attrs.get("class", "").split()


@dataclass(eq=False)
class DomDocument:
    root: DomNode
    base_url: str
    node_count: int

    def iter_nodes(self):
        """All nodes in document order (elements, attributes, text)."""
        yield from _preorder(self.root)


def _preorder(node: DomNode):
    yield node
    if node.kind == ELEMENT:
        yield from node.attr_nodes
        for child in node.children:
            yield from _preorder(child)


def parse_html(data: bytes | str, base_url: str) -> DomDocument:
    """Parse markup leniently; total over byte inputs, never raises on soup."""
    parsed = urlparse(base_url)
    if not parsed.scheme:
        raise ValueError(f"base URL must be absolute: {base_url!r}")
    if isinstance(data, bytes):
        text = data.decode("utf-8", errors="replace")
    else:
        text = data
    builder = _TreeBuilder()
    builder.feed(text)
    builder.close()
    root = builder.finish()
    count = _assign_order(root)
    return DomDocument(root, base_url, count)


def _assign_order(root: DomNode) -> int:
    counter = 0
    for node in _preorder(root):
        node.doc_order = counter
        counter += 1
    return counter


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root: DomNode | None = None
        self.body: DomNode | None = None
        self.stack: list[DomNode] = []

    # --- structure helpers ---

    def _make_element(self, tag: str, attrs) -> DomNode:
        node = DomNode(ELEMENT, name=tag)
        for name, value in attrs:
            if name in node.attrs:
                continue  # first occurrence wins
            value = value if value is not None else ""
            node.attrs[name] = value
            node.attr_nodes.append(DomNode(ATTRIBUTE, name=name, value=value, parent=node))
        return node

    def _ensure_root(self) -> None:
        if self.root is None:
            self.root = DomNode(ELEMENT, name="html")
            self.stack = [self.root]

    def _insertion_point(self, tag: str) -> DomNode:
        self._ensure_root()
        if not self.stack:
            self.stack = [self.root]
        top = self.stack[-1]
        if top is self.root and tag not in ("head", "body", "html"):
            if self.body is None:
                self.body = DomNode(ELEMENT, name="body", parent=self.root)
                self.root.children.append(self.body)
            self.stack.append(self.body)
            top = self.body
        return top

    def _append(self, parent: DomNode, node: DomNode) -> None:
        node.parent = parent
        parent.children.append(node)

    # --- HTMLParser callbacks ---

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag == "html":
            if self.root is None:
                self.root = self._make_element(tag, attrs)
                self.stack = [self.root]
            return
        if tag == "body":
            self._ensure_root()
            if self.body is None:
                self.body = self._make_element(tag, attrs)
                self._append(self.root, self.body)
            self.stack = [self.root, self.body]
            return
        if tag == "head":
            self._ensure_root()
            head = self._make_element(tag, attrs)
            self._append(self.root, head)
            self.stack = [self.root, head]
            return
        while (self.stack and self.stack[-1].name in CLOSE_BEFORE
               and tag in CLOSE_BEFORE[self.stack[-1].name]):
            self.stack.pop()
        parent = self._insertion_point(tag)
        node = self._make_element(tag, attrs)
        self._append(parent, node)
        if tag not in VOID_ELEMENTS:
            self.stack.append(node)

    def handle_endtag(self, tag: str) -> None:
        if tag == "html" or self.root is None:
            return
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].name == tag:
                del self.stack[i:]
                return
        # stray end tag: ignored (self.body stays set, so content after
        # a premature </body> re-enters the same body element)

    def handle_data(self, data: str) -> None:
        if not data:
            return
        if self.root is None or self.stack[-1] is self.root:
            if not data.strip():
                return  # inter-element whitespace outside body
        parent = self._insertion_point("#text")
        if parent.children and parent.children[-1].kind == TEXT:
            parent.children[-1].value += data
        else:
            self._append(parent, DomNode(TEXT, value=data))

    def finish(self) -> DomNode:
        self._ensure_root()
        return self.root


# --- axes and values ---------------------------------------------------------

def axis_nodes(context: DomNode, axis: str) -> list[DomNode]:
    """Nodes along ``axis`` from ``context``: document order for forward
    axes, reverse document order for ancestor/preceding-sibling."""
    if axis == "self":
        return [context]
    if axis == "child":
        return list(context.children)
    if axis == "descendant":
        out: list[DomNode] = []
        _collect_descendants(context, out)
        return out
    if axis == "descendant-or-self":
        out = [context]
        _collect_descendants(context, out)
        return out
    if axis == "parent":
        return [context.parent] if context.parent is not None else []
    if axis == "ancestor":
        out = []
        node = context.parent
        while node is not None:
            out.append(node)
            node = node.parent
        return out
    if axis == "attribute":
        return list(context.attr_nodes)
    if axis == "following-sibling":
        return _siblings(context)[0]
    if axis == "preceding-sibling":
        return _siblings(context)[1]
    raise ValueError(f"unknown axis {axis!r}")


def _collect_descendants(node: DomNode, out: list[DomNode]) -> None:
    for child in node.children:
        out.append(child)
        _collect_descendants(child, out)


def _siblings(context: DomNode) -> tuple[list[DomNode], list[DomNode]]:
    if context.parent is None or context.kind == ATTRIBUTE:
        return [], []
    siblings = context.parent.children
    idx = next(i for i, n in enumerate(siblings) if n is context)
    return siblings[idx + 1:], list(reversed(siblings[:idx]))


def string_value(node: DomNode) -> str:
    """Concatenated descendant text in document order; attributes and text
    nodes yield their own value."""
    if node.kind in (TEXT, ATTRIBUTE):
        return node.value
    parts: list[str] = []
    _collect_text(node, parts)
    return "".join(parts)


def _collect_text(node: DomNode, parts: list[str]) -> None:
    for child in node.children:
        if child.kind == TEXT:
            parts.append(child.value)
        else:
            _collect_text(child, parts)
