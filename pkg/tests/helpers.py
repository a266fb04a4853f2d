"""Shared test machinery: seeded generators for wrapper ASTs, fixture
documents, and paths, plus a brute-force path evaluator written from the
language rules as an independent oracle (its own preorder indexing, its own
axis/test/predicate logic)."""

from __future__ import annotations

import random

from oxtract import dom
from oxtract.oxlang.nodes import (
    Action,
    AnyTest,
    BoolOp,
    ClassTest,
    Compare,
    FieldTest,
    FuncCall,
    IdTest,
    KleeneGroup,
    Marker,
    NameTest,
    NumberLit,
    PathExpr,
    Predicate,
    Step,
    StringLit,
    TextTest,
    WrapperAst,
)

WORDS = ["div", "span", "item", "entry", "nav", "row", "cell", "box", "note"]
CLASS_WORDS = ["result", "odd", "title", "next", "meta", "hit"]
ATTR_WORDS = ["href", "name", "id", "class", "rel", "data-k"]
AXES_POOL = [
    "child", "child", "child", "descendant", "descendant-or-self", "self",
    "parent", "ancestor", "attribute", "following-sibling", "preceding-sibling",
]
STRING_POOL = ["Next", "SOLIS", 'say "hi"', "a\\b", "Köln", "x,y", "", "two\nlines"]


# --- random wrapper ASTs (respecting the AST invariants) ---------------------


def random_wrapper_ast(rng: random.Random) -> WrapperAst:
    url = rng.choice(["http://example.test/", "file:///tmp/page.html",
                      'http://h/?q="x"', "http://h/köln"])
    return WrapperAst(url, random_items(rng, depth=0, max_items=rng.randint(0, 4)))


def random_items(rng: random.Random, depth: int, max_items: int) -> list:
    items = []
    for _ in range(max_items):
        if depth < 2 and rng.random() < 0.2:
            body = random_items(rng, depth + 1, rng.randint(1, 2))
            if not body:
                body = [random_step(rng, depth + 1)]
            items.append(KleeneGroup(body, *random_range(rng)))
        else:
            items.append(random_step(rng, depth))
    return items


def random_range(rng: random.Random) -> tuple[int, int | None]:
    pick = rng.random()
    if pick < 0.5:
        return 0, None
    if pick < 0.7:
        lo = rng.randint(0, 3)
        return lo, None
    lo = rng.randint(0, 3)
    return lo, lo + rng.randint(0, 3)


def random_step(rng: random.Random, depth: int, in_expr: bool = False) -> Step:
    axis = rng.choice(AXES_POOL)
    test = random_node_test(rng)
    qualifiers = []
    for _ in range(rng.randint(0, 2)):
        qualifiers.append(Predicate(random_expr(rng, depth + 1)))
    if not in_expr:
        for _ in range(rng.randint(0, 2) if rng.random() < 0.4 else 0):
            value = random_expr(rng, depth + 1) if rng.random() < 0.6 else None
            qualifiers.append(Marker(rng.choice(["rec", "title", "f_1", "x-y"]), value))
        if rng.random() < 0.25:
            qualifiers.append(random_action(rng))
    return Step(rng.choice(["/", "//"]), axis, test, qualifiers)


def random_node_test(rng: random.Random):
    pick = rng.random()
    if pick < 0.45:
        return NameTest(rng.choice(WORDS))
    if pick < 0.6:
        return AnyTest()
    if pick < 0.7:
        return TextTest()
    if pick < 0.75:
        return FieldTest()
    if pick < 0.85:
        return IdTest(rng.choice(["main", "Top", "n-1"]))
    return ClassTest(rng.choice(CLASS_WORDS))


def random_action(rng: random.Random) -> Action:
    kind = rng.choice(["click", "dblclick", "submit", "fill"])
    text = rng.choice(STRING_POOL) if kind == "fill" else None
    return Action(kind, text, absolute=rng.random() < 0.5)


def random_expr(rng: random.Random, depth: int):
    if depth >= 3:
        return rng.choice([NumberLit(float(rng.randint(0, 99))),
                           StringLit(rng.choice(STRING_POOL))])
    pick = rng.random()
    if pick < 0.15:
        return NumberLit(float(rng.randint(0, 9999)) + rng.choice([0, 0, 0.5]))
    if pick < 0.3:
        return StringLit(rng.choice(STRING_POOL))
    if pick < 0.5:
        return random_path_expr(rng, depth)
    if pick < 0.7:
        name = rng.choice(["position", "last", "contains", "starts-with",
                           "string", "normalize-space", "count", "not"])
        if name in ("position", "last"):
            args = []
        elif name in ("contains", "starts-with"):
            args = [random_expr(rng, depth + 1), random_expr(rng, depth + 1)]
        elif name == "count":
            args = [random_path_expr(rng, depth)]
        elif name in ("string", "normalize-space"):
            args = [random_expr(rng, depth + 1)] if rng.random() < 0.7 else []
        else:
            args = [random_expr(rng, depth + 1)]
        return FuncCall(name, args)
    if pick < 0.9:
        return Compare(rng.choice(["=", "!=", "<", "<=", ">", ">="]),
                       random_expr(rng, depth + 1), random_expr(rng, depth + 1))
    return BoolOp(rng.choice(["and", "or"]),
                  random_expr(rng, depth + 1), random_expr(rng, depth + 1))


def random_path_expr(rng: random.Random, depth: int) -> PathExpr:
    n_steps = rng.randint(0, 2)
    if n_steps == 0:
        return PathExpr(False, [])
    steps = [random_step(rng, depth + 1, in_expr=True) for _ in range(n_steps)]
    return PathExpr(rng.random() < 0.5, steps)


# --- random fixture documents -------------------------------------------------

DOC_TAGS = ["div", "p", "span", "a", "ul", "li", "section", "em", "b", "h1"]
DOC_CLASSES = ["result", "odd", "even", "title", "meta", "hit"]
DOC_TEXT = ["alpha", "beta", "Next", "42", "7.5", "gamma delta"]


def random_document(rng: random.Random, max_nodes: int = 400) -> dom.DomDocument:
    budget = [rng.randint(30, max_nodes)]
    parts: list[str] = []

    def element(depth: int) -> None:
        tag = rng.choice(DOC_TAGS)
        attrs = []
        if rng.random() < 0.5:
            attrs.append(f' class="{" ".join(rng.sample(DOC_CLASSES, rng.randint(1, 2)))}"')
        if rng.random() < 0.2:
            attrs.append(f' id="id{rng.randint(0, 30)}"')
        if tag == "a" and rng.random() < 0.7:
            attrs.append(f' href="page{rng.randint(0, 9)}.html"')
        parts.append(f"<{tag}{''.join(attrs)}>")
        budget[0] -= 1
        n_children = rng.randint(0, 4) if depth < 5 else 0
        for _ in range(n_children):
            if budget[0] <= 0:
                break
            if rng.random() < 0.4:
                parts.append(rng.choice(DOC_TEXT))
                budget[0] -= 1
            else:
                element(depth + 1)
        parts.append(f"</{tag}>")

    parts.append("<html><body>")
    while budget[0] > 0:
        element(1)
    parts.append("</body></html>")
    return dom.parse_html("".join(parts), "http://fixture.test/")


def random_query_path(rng: random.Random) -> list[Step]:
    """Action- and marker-free path over the shared document vocabulary."""
    steps = []
    for _ in range(rng.randint(1, 4)):
        axis = rng.choice(AXES_POOL)
        pick = rng.random()
        if pick < 0.5:
            test = NameTest(rng.choice(DOC_TAGS))
        elif pick < 0.65:
            test = AnyTest()
        elif pick < 0.75:
            test = TextTest()
        elif pick < 0.85:
            test = ClassTest(rng.choice(DOC_CLASSES))
        else:
            test = IdTest(f"id{rng.randint(0, 30)}")
        qualifiers = []
        for _ in range(rng.randint(0, 2)):
            qualifiers.append(Predicate(random_query_predicate(rng)))
        steps.append(Step(rng.choice(["/", "//"]), axis, test, qualifiers))
    return steps


def random_query_predicate(rng: random.Random):
    pick = rng.random()
    if pick < 0.25:
        return NumberLit(float(rng.randint(1, 4)))
    if pick < 0.4:
        return Compare("=", FuncCall("position", []), NumberLit(float(rng.randint(1, 3))))
    if pick < 0.5:
        return Compare(rng.choice(["<", ">=", ">"]), FuncCall("position", []),
                       NumberLit(float(rng.randint(1, 3))))
    if pick < 0.6:
        return FuncCall("last", [])
    if pick < 0.7:
        return PathExpr(False, [Step("/", "attribute", NameTest(rng.choice(["class", "id", "href"])))])
    if pick < 0.8:
        return Compare("=", PathExpr(False, []), StringLit(rng.choice(DOC_TEXT)))
    if pick < 0.9:
        return FuncCall("contains", [
            PathExpr(False, [Step("/", "attribute", NameTest("class"))]),
            StringLit(rng.choice(DOC_CLASSES))])
    return Compare(">", FuncCall("count", [PathExpr(False, [
        Step("/", "child", AnyTest())])]), NumberLit(float(rng.randint(0, 2))))


# --- brute-force oracle --------------------------------------------------------

def oracle_preorder_index(document: dom.DomDocument) -> dict[int, int]:
    order: dict[int, int] = {}

    def visit(node: dom.DomNode) -> None:
        order[id(node)] = len(order)
        if node.kind == dom.ELEMENT:
            for attr in node.attr_nodes:
                order[id(attr)] = len(order)
            for child in node.children:
                visit(child)

    visit(document.root)
    return order


def _o_descendants(node: dom.DomNode) -> list[dom.DomNode]:
    out = []
    for child in node.children:
        out.append(child)
        out.extend(_o_descendants(child))
    return out


def _o_ancestors(node: dom.DomNode) -> list[dom.DomNode]:
    out = []
    while node.parent is not None:
        node = node.parent
        out.append(node)
    return out


def oracle_axis(node: dom.DomNode, axis: str) -> list[dom.DomNode]:
    if axis == "self":
        return [node]
    if axis == "child":
        return list(node.children)
    if axis == "descendant":
        return _o_descendants(node)
    if axis == "descendant-or-self":
        return [node] + _o_descendants(node)
    if axis == "parent":
        return [node.parent] if node.parent is not None else []
    if axis == "ancestor":
        return _o_ancestors(node)
    if axis == "attribute":
        return list(node.attr_nodes)
    if node.parent is None or node.kind == dom.ATTRIBUTE:
        return []
    siblings = node.parent.children
    at = siblings.index(node)
    if axis == "following-sibling":
        return siblings[at + 1:]
    if axis == "preceding-sibling":
        return list(reversed(siblings[:at]))
    raise ValueError(axis)


def oracle_test(test, node: dom.DomNode, axis: str) -> bool:
    wanted = dom.ATTRIBUTE if axis == "attribute" else dom.ELEMENT
    if isinstance(test, NameTest):
        return node.kind == wanted and node.name == test.name
    if isinstance(test, AnyTest):
        return node.kind == wanted
    if isinstance(test, TextTest):
        return node.kind == dom.TEXT
    if isinstance(test, FieldTest):
        return (node.kind == dom.ELEMENT
                and node.name in ("input", "select", "textarea", "button"))
    if isinstance(test, IdTest):
        return node.kind == dom.ELEMENT and node.attrs.get("id") == test.value
    if isinstance(test, ClassTest):
        return (node.kind == dom.ELEMENT
                and test.value in node.attrs.get("class", "").split())
    raise TypeError(test)


def oracle_string(node: dom.DomNode) -> str:
    if node.kind != dom.ELEMENT:
        return node.value
    return "".join(oracle_string(c) if c.kind == dom.ELEMENT else c.value
                   for c in node.children)


def oracle_number(value) -> float:
    import math
    import re as _re
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if isinstance(value, float):
        return value
    if isinstance(value, list):
        value = oracle_string(value[0]) if value else ""
    value = value.strip()
    return float(value) if _re.fullmatch(r"-?(\d+(\.\d*)?|\.\d+)", value) else math.nan


def oracle_bool(value) -> bool:
    import math
    if isinstance(value, list):
        return bool(value)
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return value != 0 and not math.isnan(value)
    return value != ""


def oracle_expr(expr, node, pos, size, root):
    import math
    if isinstance(expr, NumberLit):
        return expr.value
    if isinstance(expr, StringLit):
        return expr.value
    if isinstance(expr, PathExpr):
        start = [root] if expr.from_root else [node]
        return oracle_eval_steps(expr.steps, start, root)
    if isinstance(expr, FuncCall):
        name = expr.name
        if name == "position":
            return float(pos)
        if name == "last":
            return float(size)
        if name == "count":
            return float(len(oracle_expr(expr.args[0], node, pos, size, root)))
        if name == "not":
            return not oracle_bool(oracle_expr(expr.args[0], node, pos, size, root))
        if name == "string":
            if not expr.args:
                return oracle_string(node)
            value = oracle_expr(expr.args[0], node, pos, size, root)
            return _oracle_to_string(value)
        if name == "normalize-space":
            if not expr.args:
                text = oracle_string(node)
            else:
                text = _oracle_to_string(oracle_expr(expr.args[0], node, pos, size, root))
            return " ".join(text.split())
        if name == "contains":
            a = _oracle_to_string(oracle_expr(expr.args[0], node, pos, size, root))
            b = _oracle_to_string(oracle_expr(expr.args[1], node, pos, size, root))
            return b in a
        if name == "starts-with":
            a = _oracle_to_string(oracle_expr(expr.args[0], node, pos, size, root))
            b = _oracle_to_string(oracle_expr(expr.args[1], node, pos, size, root))
            return a.startswith(b)
        raise TypeError(name)
    if isinstance(expr, BoolOp):
        left = oracle_bool(oracle_expr(expr.left, node, pos, size, root))
        right_thunk = lambda: oracle_bool(oracle_expr(expr.right, node, pos, size, root))
        return (left and right_thunk()) if expr.op == "and" else (left or right_thunk())
    if isinstance(expr, Compare):
        left = oracle_expr(expr.left, node, pos, size, root)
        right = oracle_expr(expr.right, node, pos, size, root)
        lefts = ([oracle_string(n) for n in left] if isinstance(left, list) else [left])
        rights = ([oracle_string(n) for n in right] if isinstance(right, list) else [right])
        for a in lefts:
            for b in rights:
                if _oracle_pair(expr.op, a, b):
                    return True
        return False
    raise TypeError(expr)


def _oracle_pair(op: str, a, b) -> bool:
    import math
    if op in ("=", "!="):
        if isinstance(a, bool) or isinstance(b, bool):
            same = oracle_bool(a) == oracle_bool(b)
        elif isinstance(a, float) or isinstance(b, float):
            na, nb = oracle_number(a), oracle_number(b)
            if math.isnan(na) or math.isnan(nb):
                return op == "!="
            same = na == nb
        else:
            same = a == b
        return same if op == "=" else not same
    na, nb = oracle_number(a), oracle_number(b)
    if math.isnan(na) or math.isnan(nb):
        return False
    return {"<": na < nb, "<=": na <= nb, ">": na > nb, ">=": na >= nb}[op]


def _oracle_to_string(value) -> str:
    if isinstance(value, list):
        return oracle_string(value[0]) if value else ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if value == int(value):
            return str(int(value))
        return repr(value)
    return value


def oracle_eval_steps(steps, start_nodes, root):
    nodes = list(start_nodes)
    for step in steps:
        pool = nodes
        if step.sep == "//":
            pool = []
            seen = set()
            for n in nodes:
                for m in [n] + _o_descendants(n):
                    if id(m) not in seen:
                        seen.add(id(m))
                        pool.append(m)
        gathered = []
        gathered_ids = set()
        for source in pool:
            kept = [m for m in oracle_axis(source, step.axis)
                    if oracle_test(step.test, m, step.axis)]
            for pred in step.predicates:
                size = len(kept)
                filtered = []
                for idx, m in enumerate(kept, start=1):
                    value = oracle_expr(pred.expr, m, idx, size, root)
                    keep = (value == idx) if isinstance(value, float) else oracle_bool(value)
                    if keep:
                        filtered.append(m)
                kept = filtered
            for m in kept:
                if id(m) not in gathered_ids:
                    gathered_ids.add(id(m))
                    gathered.append(m)
        nodes = gathered
    return nodes


def oracle_eval_document(document: dom.DomDocument, steps) -> list[dom.DomNode]:
    order = oracle_preorder_index(document)
    result = oracle_eval_steps(steps, [document.root], document.root)
    return sorted(result, key=lambda n: order[id(n)])
