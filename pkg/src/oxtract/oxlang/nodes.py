"""AST node types for the wrapper language.

Structural equality (dataclass ``==``) is the round-trip contract:
``parse(format_wrapper(ast)) == ast`` for every AST that satisfies the
invariants noted below.  Element and attribute name tests are stored
lowercase (the DOM lowercases markup names); id/class values, marker
names and string literals keep their case.
"""

from __future__ import annotations

from dataclasses import dataclass, field


AXES = (
    "child",
    "descendant",
    "descendant-or-self",
    "self",
    "parent",
    "ancestor",
    "attribute",
    "following-sibling",
    "preceding-sibling",
)

# Axes that would need a rendering engine; rejected at parse time.
VISUAL_AXES = ("style", "visible", "visibility")

REVERSE_AXES = ("ancestor", "preceding-sibling")


# --- node tests -------------------------------------------------------------

@dataclass(eq=True)
class NameTest:
    name: str  # lowercase


@dataclass(eq=True)
class AnyTest:
    pass


@dataclass(eq=True)
class TextTest:
    pass


@dataclass(eq=True)
class FieldTest:
    """Matches form controls: input, select, textarea, button."""


@dataclass(eq=True)
class IdTest:
    value: str


@dataclass(eq=True)
class ClassTest:
    value: str


NodeTest = NameTest | AnyTest | TextTest | FieldTest | IdTest | ClassTest


# --- expressions ------------------------------------------------------------

@dataclass(eq=True)
class StringLit:
    value: str


@dataclass(eq=True)
class NumberLit:
    value: float


@dataclass(eq=True)
class PathExpr:
    """A path used as an expression; steps carry predicate qualifiers only.

    ``from_root=True`` anchors at the document root ("//a"); otherwise the
    path is relative to the context node.  Empty steps with
    ``from_root=False`` is the bare context reference ".".
    """

    from_root: bool
    steps: list["Step"] = field(default_factory=list)


@dataclass(eq=True)
class FuncCall:
    name: str
    args: list["Expr"] = field(default_factory=list)


@dataclass(eq=True)
class Compare:
    op: str  # = != < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(eq=True)
class BoolOp:
    op: str  # and | or
    left: "Expr"
    right: "Expr"


Expr = StringLit | NumberLit | PathExpr | FuncCall | Compare | BoolOp


# --- qualifiers -------------------------------------------------------------

@dataclass(eq=True)
class Predicate:
    expr: Expr


@dataclass(eq=True)
class Marker:
    """Extraction marker ``:<name>`` / ``:<name=expr>``.

    A marker with a value expression emits a leaf field under the current
    record; a bare marker opens a nested record that later markers attach to
    (its value defaults to the matched node's string value).
    """

    name: str
    value_expr: Expr | None = None


@dataclass(eq=True)
class Action:
    """Simulated interaction: click, dblclick, submit, or fill ``{"text"}``.

    ``absolute=True`` (a trailing ``/`` inside the braces) continues
    evaluation from the resulting page's root instead of the current page.
    """

    kind: str  # click | dblclick | submit | fill
    text: str | None = None  # fill payload
    absolute: bool = False


Qualifier = Predicate | Marker | Action


# --- path items -------------------------------------------------------------

@dataclass(eq=True)
class Step:
    sep: str  # "/" or "//"
    axis: str
    test: NodeTest
    qualifiers: list[Qualifier] = field(default_factory=list)

    @property
    def predicates(self) -> list[Predicate]:
        return [q for q in self.qualifiers if isinstance(q, Predicate)]

    @property
    def markers(self) -> list[Marker]:
        return [q for q in self.qualifiers if isinstance(q, Marker)]

    @property
    def action(self) -> Action | None:
        for q in self.qualifiers:
            if isinstance(q, Action):
                return q
        return None


@dataclass(eq=True)
class KleeneGroup:
    """Repetition group ``( path )*`` with an optional ``{m,n}`` range.

    ``max_count=None`` means unbounded; the engine applies its own hard cap.
    """

    body: list["PathItem"]
    min_count: int = 0
    max_count: int | None = None


PathItem = Step | KleeneGroup


@dataclass(eq=True)
class WrapperAst:
    url: str
    path: list[PathItem] = field(default_factory=list)
