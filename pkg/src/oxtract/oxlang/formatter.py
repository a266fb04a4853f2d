"""Canonical source printer: the inverse of parse up to structural equality.

Canonicalization rules:

* the default child axis is elided; the attribute axis prints as ``@name``;
* actions print slash-attached after their step: ``//a/{click /}``;
* a repetition range of ``{0,unbounded}`` (the default) is omitted and
  ``{m,m}`` collapses to ``{m}``;
* double quotes for strings, integral numbers without a decimal point;
* parentheses appear only where precedence or the marker-closing ``>``
  requires them.
"""

from __future__ import annotations

from .nodes import (
    Action,
    AnyTest,
    BoolOp,
    ClassTest,
    Compare,
    Expr,
    FieldTest,
    FuncCall,
    IdTest,
    KleeneGroup,
    Marker,
    NameTest,
    NodeTest,
    NumberLit,
    PathExpr,
    PathItem,
    Predicate,
    Step,
    StringLit,
    TextTest,
    WrapperAst,
)

_PREC_OR = 1
_PREC_AND = 2
_PREC_EQ = 3
_PREC_REL = 4
_PREC_PRIMARY = 5


def format_wrapper(ast: WrapperAst) -> str:
    return f'doc({_string(ast.url)})' + format_path(ast.path)


def format_path(items: list[PathItem]) -> str:
    return "".join(_item(it) for it in items)


def _item(item: PathItem) -> str:
    if isinstance(item, KleeneGroup):
        return f"({format_path(item.body)})*{_range(item)}"
    return _step(item, lead_sep=True)


def _range(group: KleeneGroup) -> str:
    lo, hi = group.min_count, group.max_count
    if lo == 0 and hi is None:
        return ""
    if hi is None:
        return f"{{{lo},}}"
    if hi == lo:
        return f"{{{lo}}}"
    return f"{{{lo},{hi}}}"


def _step(step: Step, lead_sep: bool) -> str:
    parts: list[str] = []
    if lead_sep:
        parts.append(step.sep)
    axis = step.axis
    test = _node_test(step.test)
    if axis == "child":
        parts.append(test)
    elif axis == "attribute" and isinstance(step.test, NameTest):
        parts.append(f"@{step.test.name}")
    else:
        parts.append(f"{axis}::{test}")
    action = None
    for q in step.qualifiers:
        if isinstance(q, Predicate):
            parts.append(f"[{_expr(q.expr, _PREC_OR)}]")
        elif isinstance(q, Marker):
            parts.append(_marker(q))
        else:
            action = q
    if action is not None:
        parts.append(f"/{{{_action(action)}}}")
    return "".join(parts)


def _marker(marker: Marker) -> str:
    if marker.value_expr is None:
        return f":<{marker.name}>"
    body = _expr(marker.value_expr, _PREC_OR)
    if _closes_marker(marker.value_expr):
        body = f"({body})"
    return f":<{marker.name}={body}>"


def _closes_marker(expr: Expr) -> bool:
    """True when the printed expr would carry a bare ``>`` at depth zero."""
    if isinstance(expr, Compare):
        if expr.op in (">", ">="):
            return True
        return _closes_marker(expr.left) or _closes_marker(expr.right)
    if isinstance(expr, BoolOp):
        return _closes_marker(expr.left) or _closes_marker(expr.right)
    return False


def _action(action: Action) -> str:
    body = _string(action.text) if action.kind == "fill" else action.kind
    return f"{body} /" if action.absolute else body


def _node_test(test: NodeTest) -> str:
    if isinstance(test, NameTest):
        return test.name
    if isinstance(test, AnyTest):
        return "*"
    if isinstance(test, TextTest):
        return "text()"
    if isinstance(test, FieldTest):
        return "field()"
    if isinstance(test, IdTest):
        return f"#{test.value}"
    if isinstance(test, ClassTest):
        return f".{test.value}"
    raise TypeError(f"unknown node test {test!r}")


def _expr(expr: Expr, context_prec: int) -> str:
    text, prec = _expr_prec(expr)
    if prec < context_prec:
        return f"({text})"
    return text


def _expr_prec(expr: Expr) -> tuple[str, int]:
    if isinstance(expr, NumberLit):
        return _number(expr.value), _PREC_PRIMARY
    if isinstance(expr, StringLit):
        return _string(expr.value), _PREC_PRIMARY
    if isinstance(expr, FuncCall):
        args = ",".join(_expr(a, _PREC_OR) for a in expr.args)
        return f"{expr.name}({args})", _PREC_PRIMARY
    if isinstance(expr, PathExpr):
        return _path_expr(expr), _PREC_PRIMARY
    if isinstance(expr, Compare):
        prec = _PREC_EQ if expr.op in ("=", "!=") else _PREC_REL
        left = _expr(expr.left, prec)
        right = _expr(expr.right, prec + 1)
        return f"{left}{expr.op}{right}", prec
    if isinstance(expr, BoolOp):
        prec = _PREC_AND if expr.op == "and" else _PREC_OR
        left = _expr(expr.left, prec)
        right = _expr(expr.right, prec + 1)
        return f"{left} {expr.op} {right}", prec
    raise TypeError(f"unknown expression {expr!r}")


def _path_expr(path: PathExpr) -> str:
    if not path.steps:
        return "."
    parts: list[str] = []
    first = path.steps[0]
    if path.from_root:
        parts.append(_step(first, lead_sep=True))
    elif first.sep == "/":
        parts.append(_step(first, lead_sep=False))
    else:
        parts.append("." + _step(first, lead_sep=True))
    for step in path.steps[1:]:
        parts.append(_step(step, lead_sep=True))
    return "".join(parts)


def _number(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def _string(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
