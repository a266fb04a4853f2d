"""Path, predicate, and function evaluation over a parsed document.

The value model and coercions follow XPath 1.0: a value is a node sequence,
text, a 64-bit float, or a boolean.

* node sequence -> text: string value of the first node in document order,
  or "" when empty;
* text -> number: optional sign and decimal digits after trimming, NaN on
  anything else;
* anything -> boolean: non-empty / non-zero-and-non-NaN / non-empty-text;
* comparisons involving node sequences are existential (any pair decides);
  relational comparisons always compare as numbers; NaN is never equal to
  anything (``=`` false, ``!=`` true) and orders as false.

A numeric predicate value is a position test: ``[2]`` keeps the node whose
position is 2 within the current candidate list.  Positions count in axis
order, so ``ancestor::div[1]`` is the nearest enclosing div.  Relative paths
inside expressions evaluate from the context node and never fire markers or
actions (the parser already rejects them there).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

from . import dom
from .oxlang.nodes import (
    AnyTest,
    BoolOp,
    ClassTest,
    Compare,
    Expr,
    FieldTest,
    FuncCall,
    IdTest,
    Marker,
    NameTest,
    NodeTest,
    NumberLit,
    PathExpr,
    Predicate,
    Step,
    StringLit,
    TextTest,
)

if TYPE_CHECKING:
    from .extraction import ExtractionTree, RecordNode


@dataclass
class EvalContext:
    node: dom.DomNode
    position: int = 1
    size: int = 1
    record_parent: "RecordNode | None" = None


NodeSeq = list[dom.DomNode]
Value = NodeSeq | str | float | bool


# --- coercions ---------------------------------------------------------------

_NUMBER_RE = re.compile(r"^-?(\d+(\.\d*)?|\.\d+)$")


def to_string(value: Value) -> str:
    if isinstance(value, list):
        return dom.string_value(value[0]) if value else ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return number_to_string(value)
    return value


def to_number(value: Value) -> float:
    if isinstance(value, list) or isinstance(value, str):
        text = to_string(value).strip()
        if _NUMBER_RE.match(text):
            return float(text)
        return math.nan
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    return value


def to_boolean(value: Value) -> bool:
    if isinstance(value, list):
        return bool(value)
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return value != 0 and not math.isnan(value)
    return value != ""


def number_to_string(value: float) -> str:
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    if value == int(value):
        return str(int(value))
    return repr(value)


# --- node tests --------------------------------------------------------------

def node_test_matches(test: NodeTest, node: dom.DomNode, axis: str = "child") -> bool:
    """Does ``node`` (found along ``axis``) satisfy the test?

    Name and ``*`` tests select the axis's principal node kind: attributes
    on the attribute axis, elements everywhere else.
    """
    principal = dom.ATTRIBUTE if axis == "attribute" else dom.ELEMENT
    if isinstance(test, NameTest):
        return node.kind == principal and node.name == test.name
    if isinstance(test, AnyTest):
        return node.kind == principal
    if isinstance(test, TextTest):
        return node.kind == dom.TEXT
    if isinstance(test, FieldTest):
        return node.kind == dom.ELEMENT and node.name in dom.FORM_FIELD_TAGS
    if isinstance(test, IdTest):
        return node.kind == dom.ELEMENT and node.attrs.get("id") == test.value
    if isinstance(test, ClassTest):
        return node.kind == dom.ELEMENT and test.value in node.class_tokens()
    raise TypeError(f"unknown node test {test!r}")


# --- step application --------------------------------------------------------

def _expand_descendant_or_self(nodes: NodeSeq) -> NodeSeq:
    out: NodeSeq = []
    seen: set[int] = set()
    for node in nodes:
        for cand in dom.axis_nodes(node, "descendant-or-self"):
            if id(cand) not in seen:
                seen.add(id(cand))
                out.append(cand)
    return out


def _candidates(step: Step, node: dom.DomNode) -> NodeSeq:
    return [n for n in dom.axis_nodes(node, step.axis)
            if node_test_matches(step.test, n, step.axis)]


def _apply_predicates(step: Step, nodes: NodeSeq) -> NodeSeq:
    current = nodes
    for pred in step.predicates:
        size = len(current)
        kept: NodeSeq = []
        for pos, node in enumerate(current, start=1):
            value = eval_expr(pred.expr, EvalContext(node, pos, size))
            if isinstance(value, float):
                keep = value == pos
            else:
                keep = to_boolean(value)
            if keep:
                kept.append(node)
        current = kept
    return current


def apply_step_to_nodes(step: Step, nodes: NodeSeq) -> NodeSeq:
    """Axis + node test + predicates over a node list; result deduplicated
    and sorted in document order.  Used for path expressions (no markers)."""
    out: NodeSeq = []
    seen: set[int] = set()
    sources = _expand_descendant_or_self(nodes) if step.sep == "//" else nodes
    for node in sources:
        for result in _apply_predicates(step, _candidates(step, node)):
            if id(result) not in seen:
                seen.add(id(result))
                out.append(result)
    out.sort(key=lambda n: n.doc_order)
    return out


def eval_path_expr(path: PathExpr, ctx: EvalContext) -> NodeSeq:
    if path.from_root:
        nodes: NodeSeq = [ctx.node.root]
    else:
        nodes = [ctx.node]
    for step in path.steps:
        nodes = apply_step_to_nodes(step, nodes)
    return nodes


# --- expressions -------------------------------------------------------------

_WS_RUN = re.compile(r"\s+")


def eval_expr(expr: Expr, ctx: EvalContext) -> Value:
    if isinstance(expr, NumberLit):
        return expr.value
    if isinstance(expr, StringLit):
        return expr.value
    if isinstance(expr, PathExpr):
        return eval_path_expr(expr, ctx)
    if isinstance(expr, FuncCall):
        return _call(expr, ctx)
    if isinstance(expr, BoolOp):
        left = to_boolean(eval_expr(expr.left, ctx))
        if expr.op == "and":
            return left and to_boolean(eval_expr(expr.right, ctx))
        return left or to_boolean(eval_expr(expr.right, ctx))
    if isinstance(expr, Compare):
        return _compare(expr, ctx)
    raise TypeError(f"unknown expression {expr!r}")


def _call(call: FuncCall, ctx: EvalContext) -> Value:
    name, args = call.name, call.args
    if name == "position":
        return float(ctx.position)
    if name == "last":
        return float(ctx.size)
    if name == "count":
        value = eval_expr(args[0], ctx)
        if not isinstance(value, list):
            raise TypeError("count() needs a node sequence argument")
        return float(len(value))
    if name == "not":
        return not to_boolean(eval_expr(args[0], ctx))
    if name == "string":
        if not args:
            return dom.string_value(ctx.node)
        return to_string(eval_expr(args[0], ctx))
    if name == "normalize-space":
        if not args:
            text = dom.string_value(ctx.node)
        else:
            text = to_string(eval_expr(args[0], ctx))
        return _WS_RUN.sub(" ", text).strip()
    if name == "contains":
        return to_string(eval_expr(args[1], ctx)) in to_string(eval_expr(args[0], ctx))
    if name == "starts-with":
        return to_string(eval_expr(args[0], ctx)).startswith(
            to_string(eval_expr(args[1], ctx)))
    raise TypeError(f"unknown function {name!r}")


def _compare(cmp: Compare, ctx: EvalContext) -> bool:
    left = eval_expr(cmp.left, ctx)
    right = eval_expr(cmp.right, ctx)
    op = cmp.op

    def ordered(a: float, b: float) -> bool:
        if math.isnan(a) or math.isnan(b):
            return False
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]

    def equal(a, b) -> bool:
        if isinstance(a, bool) or isinstance(b, bool):
            same = to_boolean(a) == to_boolean(b)
        elif isinstance(a, float) or isinstance(b, float):
            na, nb = to_number(a), to_number(b)
            if math.isnan(na) or math.isnan(nb):
                return op == "!="
            same = na == nb
        else:
            same = a == b
        return same if op == "=" else not same

    left_seq = isinstance(left, list)
    right_seq = isinstance(right, list)
    if left_seq or right_seq:
        lefts = [dom.string_value(n) for n in left] if left_seq else [left]
        rights = [dom.string_value(n) for n in right] if right_seq else [right]
        for a in lefts:
            for b in rights:
                if op in ("=", "!="):
                    if equal(a, b):
                        return True
                elif ordered(to_number(a), to_number(b)):
                    return True
        return False
    if op in ("=", "!="):
        return equal(left, right)
    return ordered(to_number(left), to_number(right))


# --- full steps (markers included) --------------------------------------------

def eval_step(
    step: Step,
    contexts: list[EvalContext],
    state=None,
    recorder: "ExtractionTree | None" = None,
) -> list[EvalContext]:
    """Advance a context sequence through one step.

    The output is duplicate-free and in document order, with positions
    renumbered over the merged result.  Extraction markers fire for every
    surviving node when ``recorder`` is given: a marker with a value
    expression adds a leaf field under the context's record, a bare marker
    opens a nested record that becomes the context's record for the rest of
    the path.  Any action on the step is the engine's business, not ours.
    """
    merged: list[tuple[dom.DomNode, "RecordNode | None"]] = []
    seen: set[int] = set()
    for ctx in contexts:
        sources = ([ctx.node] if step.sep != "//"
                   else _expand_descendant_or_self([ctx.node]))
        for source in sources:
            for node in _apply_predicates(step, _candidates(step, source)):
                if id(node) not in seen:
                    seen.add(id(node))
                    merged.append((node, ctx.record_parent))
    merged.sort(key=lambda pair: pair[0].doc_order)

    size = len(merged)
    url = getattr(state, "url", None)
    out: list[EvalContext] = []
    for pos, (node, record) in enumerate(merged, start=1):
        ctx = EvalContext(node, pos, size, record)
        if recorder is not None:
            for marker in step.markers:
                _fire_marker(marker, ctx, recorder, url)
        out.append(ctx)
    return out


def _fire_marker(marker: Marker, ctx: EvalContext, recorder: "ExtractionTree",
                 url: str | None) -> None:
    parent = ctx.record_parent if ctx.record_parent is not None else recorder.root
    if marker.value_expr is not None:
        value = to_string(eval_expr(marker.value_expr, ctx))
        recorder.open_record(marker.name, value, parent, source_url=url)
    else:
        value = dom.string_value(ctx.node)
        ctx.record_parent = recorder.open_record(marker.name, value, parent,
                                                 source_url=url)
