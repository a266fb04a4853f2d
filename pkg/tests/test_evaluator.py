import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import oracle_eval_document, random_document, random_query_path
from oxtract import dom
from oxtract.evaluator import (
    EvalContext,
    eval_expr,
    eval_step,
    node_test_matches,
    to_boolean,
    to_number,
    to_string,
)
from oxtract.oxlang import parse, parse_path
from oxtract.oxlang.nodes import ClassTest, FieldTest, IdTest

LIST_PAGE = """
<html><body>
  <h1>hits</h1>
  <div class="item result odd"><a class="title" href="d1.html">One</a></div>
  <div class="result even">Two</div>
  <div class="other">skip</div>
  <ul><li>1</li><li>2</li><li>3</li><li>4</li><li>5</li><li>6</li><li>7</li></ul>
  <form><input name="db"><select name="n"></select><textarea name="t"></textarea>
  <button>go</button><span>not a field</span></form>
</body></html>
"""


@pytest.fixture(scope="module")
def page():
    return dom.parse_html(LIST_PAGE, "http://fix/list.html")


def run_path(doc, source):
    steps = parse_path(source)
    contexts = [EvalContext(doc.root)]
    for step in steps:
        contexts = eval_step(step, contexts)
    return [c.node for c in contexts]


def test_class_filter(page):
    nodes = run_path(page, "//div[@class='result even']")
    assert len(nodes) == 1
    nodes = run_path(page, "//.result")
    assert len(nodes) == 2


def test_identity_step(page):
    contexts = [EvalContext(page.root)]
    (out,) = eval_step(parse_path("/self::*")[0], contexts)
    assert out.node is page.root


def test_position_predicate(page):
    nodes = run_path(page, "//li[position()=2]")
    assert [dom.string_value(n) for n in nodes] == ["2"]
    assert [dom.string_value(n) for n in run_path(page, "//li[2]")] == ["2"]


def test_positions_renumbered_between_predicates(page):
    assert [dom.string_value(n)
            for n in run_path(page, "//li[position()>2][2]")] == ["4"]


def test_reverse_axis_positions(page):
    title = run_path(page, "//.title")[0]
    (ctx,) = eval_step(parse_path("/ancestor::*[1]")[0], [EvalContext(title)])
    assert "result" in ctx.node.class_tokens()


def test_field_node_test(page):
    nodes = run_path(page, "//field()")
    assert [n.name for n in nodes] == ["input", "select", "textarea", "button"]


def test_node_test_matches_contract(page):
    div = run_path(page, "//.odd")[0]
    assert node_test_matches(ClassTest("result"), div)
    assert not node_test_matches(IdTest("main"), div)
    assert not node_test_matches(FieldTest(), div)


def test_id_requires_exact_match():
    doc = dom.parse_html("<div id='main2'>x</div>", "http://fix/")
    assert run_path(doc, "//#main") == []
    assert len(run_path(doc, "//#main2")) == 1


def ctx_for(doc):
    return EvalContext(doc.root, 1, 1)


def expr_value(doc, source, position=1, size=1, node=None):
    wrapper = parse(f'doc("u")//*[{source}]')
    (step,) = wrapper.path
    expr = step.predicates[0].expr
    return eval_expr(expr, EvalContext(node or doc.root, position, size))


def test_contains_literal(page):
    assert expr_value(page, "contains('database: SOLIS','SOLIS')") is True
    assert expr_value(page, "contains('a','b')") is False


def test_count_function(page):
    assert expr_value(page, "count(//li)") == 7.0


def test_position_equals_last(page):
    assert expr_value(page, "position()=last()", position=3, size=3) is True
    assert expr_value(page, "position()=last()", position=2, size=3) is False


def test_string_and_normalize(page):
    assert expr_value(page, "normalize-space('  a   b ')") == "a b"
    assert expr_value(page, "string(7.0)") == "7"
    assert expr_value(page, "string(@missing)") == ""


def test_existential_comparison(page):
    # some li equals "5", none equals "9"
    assert expr_value(page, "//li='5'") is True
    assert expr_value(page, "//li='9'") is False
    # any-pair semantics across two sequences
    assert expr_value(page, "//li=//li") is True


def test_relative_paths_do_not_escape_context(page):
    item = run_path(page, "//ul")[0]
    value = eval_expr(parse(f'doc("u")//*[count(li)]').path[0].predicates[0].expr,
                      EvalContext(item))
    assert value == 7.0


def test_nan_comparisons():
    doc = dom.parse_html("<p>x</p>", "http://fix/")
    assert expr_value(doc, "'foo' < 1") is False
    assert expr_value(doc, "'foo' > 1") is False
    assert expr_value(doc, "'foo' != 1") is True
    assert expr_value(doc, "'foo' = 1") is False


@given(st.text(max_size=30))
def test_to_number_text_rule(text):
    value = to_number(text)
    stripped = text.strip()
    try:
        expected = float(stripped)
        is_plain = all(c.isdigit() or c in ".-" for c in stripped) and stripped not in ("", "-", ".")
    except ValueError:
        is_plain = False
    if is_plain:
        assert value == expected
    else:
        assert math.isnan(value)


def test_coercion_table():
    assert to_string([]) == ""
    assert to_string(True) == "true"
    assert to_string(3.0) == "3"
    assert to_string(3.5) == "3.5"
    assert to_boolean([]) is False
    assert to_boolean("") is False
    assert to_boolean(float("nan")) is False
    assert to_boolean(0.5) is True
    assert to_number(True) == 1.0


def test_duplicate_free_document_order(page):
    # parent axis from every li collapses to the single ul
    nodes = run_path(page, "//li/parent::*")
    assert len(nodes) == 1 and nodes[0].name == "ul"
    orders = [n.doc_order for n in run_path(page, "//div//text()")]
    assert orders == sorted(orders) and len(orders) == len(set(orders))


@pytest.mark.parametrize("seed", range(10))
def test_oracle_equivalence_random_paths(seed):
    rng = random.Random(7000 + seed)
    doc = random_document(rng, max_nodes=250)
    for _ in range(40):
        steps = random_query_path(rng)
        expected = oracle_eval_document(doc, steps)
        contexts = [EvalContext(doc.root)]
        for step in steps:
            contexts = eval_step(step, contexts)
        got = [c.node for c in contexts]
        assert [id(n) for n in got] == [id(n) for n in expected]


@pytest.mark.parametrize("seed", range(5))
def test_predicate_composition(seed):
    # [P][Q] filters by P, renumbers positions, then filters by Q: the
    # result is a subset of [P] alone and matches the oracle's sequential
    # filtering exactly.
    from helpers import random_query_predicate
    from oxtract.oxlang.nodes import AnyTest, Predicate, Step

    rng = random.Random(9000 + seed)
    doc = random_document(rng, max_nodes=200)
    for _ in range(25):
        p, q = random_query_predicate(rng), random_query_predicate(rng)
        combined = Step("//", "child", AnyTest(), [Predicate(p), Predicate(q)])
        p_only = Step("//", "child", AnyTest(), [Predicate(p)])

        got = [c.node for c in eval_step(combined, [EvalContext(doc.root)])]
        expected = oracle_eval_document(doc, [combined])
        assert [id(n) for n in got] == [id(n) for n in expected]

        p_nodes = {id(c.node) for c in eval_step(p_only, [EvalContext(doc.root)])}
        assert all(id(n) in p_nodes for n in got)
