"""Recursive-descent parser producing a validated WrapperAst.

Grammar (wrapper files use extension ``.oxp``, UTF-8):

    Wrapper   ::= 'doc(' String ')' Path?
    Path      ::= ( Sep Step | '(' Path ')*' Range? )+
    Sep       ::= '/' | '//'
    Step      ::= (AxisName '::')? NodeTest Qualifier*
    NodeTest  ::= Name | '*' | 'text()' | 'field()' | '@'Name | '#'Name | '.'Name
    Qualifier ::= '[' Expr ']' | ':<' Name ('=' Expr)? '>' | '{' Action ' /'? '}'
    Action    ::= 'click' | 'dblclick' | 'submit' | String
    Range     ::= '{' Int (',' Int?)? '}'
    Expr      ::= OrExpr over comparisons (= != < <= > >=), 'and'/'or'/'not(...)',
                  position(), last(), contains(a,b), string(x?),
                  normalize-space(x?), starts-with(a,b), count(p),
                  Number, String, RelativePath

Accepted conveniences beyond the grammar above:

* a plain ``/`` may precede ``(`` (it separates nothing and is dropped);
* ``step/{click}`` attaches the action to the preceding step, which is how
  actions are canonically written.

Restrictions enforced here rather than at evaluation time:

* one action per step, and the action must be the step's last qualifier;
* markers and actions are rejected inside expression paths (they would
  never fire there);
* style/visibility axes raise UnsupportedFeature instead of misparsing;
* inside a marker value expression a bare ``>`` at parenthesis depth zero
  closes the marker, so ``>`` comparisons there must be parenthesized.
"""

from __future__ import annotations

from ..errors import UnsupportedFeature, WrapperParseError
from .lexer import Kind, Token, tokenize
from .nodes import (
    AXES,
    VISUAL_AXES,
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

# name -> (min_arity, max_arity)
FUNCTIONS = {
    "position": (0, 0),
    "last": (0, 0),
    "contains": (2, 2),
    "starts-with": (2, 2),
    "string": (0, 1),
    "normalize-space": (0, 1),
    "count": (1, 1),
    "not": (1, 1),
}

_NODE_TEST_STARTS = (
    Kind.IDENT, Kind.STAR, Kind.ATTR_TEST, Kind.ID_TEST, Kind.CLASS_TEST,
)


def parse(source: str) -> WrapperAst:
    """Parse wrapper source into an AST, or raise a positioned error."""
    return _Parser(tokenize(source)).parse_wrapper()


def parse_path(source: str) -> list[PathItem]:
    """Parse a bare path fragment (no doc call); used by tests and tools."""
    parser = _Parser(tokenize(source))
    items = parser.parse_path_items(stop=(Kind.EOF,))
    parser.expect(Kind.EOF)
    return items


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.paren_depth = 0
        self.marker_depth = 0

    # --- token plumbing ---

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind is not Kind.EOF:
            self.pos += 1
        return tok

    def fail(self, message: str, expected: tuple[str, ...] = (), token: Token | None = None) -> None:
        tok = token or self.cur
        raise WrapperParseError(message, tok.line, tok.column, expected)

    def expect(self, kind: Kind, what: str | None = None) -> Token:
        if self.cur.kind is not kind:
            label = what or kind.name.lower()
            self.fail(f"expected {label}, found {self.cur.lexeme or 'end of input'!r}",
                      expected=(label,))
        return self.advance()

    # --- wrapper ---

    def parse_wrapper(self) -> WrapperAst:
        tok = self.expect(Kind.IDENT, "'doc'")
        if tok.value != "doc":
            self.fail("wrapper must start with doc(...)", expected=("doc",), token=tok)
        self.expect(Kind.LPAREN, "'('")
        url = self.expect(Kind.STRING, "string URL").value
        self.expect(Kind.RPAREN, "')'")
        items = self.parse_path_items(stop=(Kind.EOF,))
        self.expect(Kind.EOF, "end of wrapper")
        return WrapperAst(url, items)

    # --- paths ---

    def parse_path_items(self, stop: tuple[Kind, ...]) -> list[PathItem]:
        items: list[PathItem] = []
        while self.cur.kind not in stop:
            if self.cur.kind is Kind.SEP:
                sep_tok = self.advance()
                if self.cur.kind is Kind.LPAREN:
                    if sep_tok.value == "//":
                        self.fail("'//' cannot precede a repetition group",
                                  expected=("node test",), token=sep_tok)
                    items.append(self.parse_group())
                elif self.cur.kind is Kind.LBRACE:
                    self.attach_action(items, sep_tok)
                else:
                    items.append(self.parse_step(sep_tok.value))
            elif self.cur.kind is Kind.LPAREN:
                items.append(self.parse_group())
            else:
                self.fail(f"expected path separator or '(', found {self.cur.lexeme!r}",
                          expected=("/", "//", "("))
        return items

    def parse_group(self) -> KleeneGroup:
        open_tok = self.expect(Kind.LPAREN)
        body = self.parse_path_items(stop=(Kind.RPAREN, Kind.EOF))
        self.expect(Kind.RPAREN, "')'")
        self.expect(Kind.STAR, "'*' after repetition group")
        if not body:
            self.fail("repetition group body is empty", token=open_tok)
        min_count, max_count = 0, None
        if self.cur.kind is Kind.LBRACE:
            min_count, max_count = self.parse_range()
        return KleeneGroup(body, min_count, max_count)

    def parse_range(self) -> tuple[int, int | None]:
        self.expect(Kind.LBRACE)
        lo_tok = self.expect(Kind.NUMBER, "integer")
        lo = self._int_value(lo_tok)
        hi: int | None = lo
        if self.cur.kind is Kind.COMMA:
            self.advance()
            if self.cur.kind is Kind.NUMBER:
                hi_tok = self.advance()
                hi = self._int_value(hi_tok)
                if hi < lo:
                    self.fail("range maximum is below its minimum", token=hi_tok)
            else:
                hi = None
        self.expect(Kind.RBRACE, "'}'")
        return lo, hi

    def _int_value(self, tok: Token) -> int:
        if "." in tok.lexeme:
            self.fail("range bounds must be integers", token=tok)
        return int(tok.lexeme)

    def attach_action(self, items: list[PathItem], sep_tok: Token) -> None:
        if sep_tok.value != "/":
            self.fail("'//' cannot precede an action", token=sep_tok)
        if not items or not isinstance(items[-1], Step):
            self.fail("an action must follow a step", token=sep_tok)
        step = items[-1]
        action = self.parse_action()
        self._add_qualifier(step, action, self.cur)

    def _add_qualifier(self, step: Step, qual, tok: Token) -> None:
        if step.action is not None:
            if isinstance(qual, Action):
                self.fail("second action on one step", token=tok)
            self.fail("an action must be the last qualifier of its step", token=tok)
        step.qualifiers.append(qual)

    # --- steps ---

    def parse_step(self, sep: str, in_expr: bool = False) -> Step:
        axis = "child"
        if self.cur.kind is Kind.IDENT and self.peek().kind is Kind.AXIS_SEP:
            axis_tok = self.advance()
            self.advance()
            if axis_tok.value in VISUAL_AXES:
                raise UnsupportedFeature(
                    f"unsupported: visual axis {axis_tok.value!r}",
                    axis_tok.line, axis_tok.column)
            if axis_tok.value not in AXES:
                self.fail(f"unknown axis {axis_tok.value!r}", expected=AXES, token=axis_tok)
            axis = axis_tok.value
        test, implied_axis = self.parse_node_test(explicit_axis=axis != "child")
        if implied_axis:
            axis = implied_axis
        step = Step(sep, axis, test)
        while True:
            tok = self.cur
            if tok.kind is Kind.LBRACKET:
                self.advance()
                expr = self.parse_expr()
                self.expect(Kind.RBRACKET, "']'")
                self._add_qualifier(step, Predicate(expr), tok)
            elif tok.kind is Kind.MARKER_OPEN:
                if in_expr:
                    self.fail("extraction markers are not allowed inside expressions", token=tok)
                self.advance()
                name = self.expect(Kind.IDENT, "marker name").value
                value_expr = None
                if self.cur.kind is Kind.EQ:
                    self.advance()
                    self.marker_depth += 1
                    value_expr = self.parse_expr()
                    self.marker_depth -= 1
                self.expect(Kind.GT, "'>' closing marker")
                self._add_qualifier(step, Marker(name, value_expr), tok)
            elif tok.kind is Kind.LBRACE and not in_expr:
                action = self.parse_action()
                self._add_qualifier(step, action, tok)
            else:
                break
        return step

    def parse_node_test(self, explicit_axis: bool) -> tuple[NodeTest, str | None]:
        tok = self.cur
        if tok.kind is Kind.IDENT:
            # "text()" is a node-test function; "text(" followed by anything
            # else is a name test with a repetition group after it.
            if (tok.value in ("text", "field") and self.peek().kind is Kind.LPAREN
                    and self.peek(2).kind is Kind.RPAREN):
                self.advance()
                self.advance()
                self.advance()
                return (TextTest() if tok.value == "text" else FieldTest()), None
            self.advance()
            return NameTest(tok.value.lower()), None
        if tok.kind is Kind.STAR:
            self.advance()
            return AnyTest(), None
        if tok.kind is Kind.ATTR_TEST:
            if explicit_axis:
                self.fail("'@' already names the attribute axis", token=tok)
            self.advance()
            return NameTest(tok.value.lower()), "attribute"
        if tok.kind is Kind.ID_TEST:
            self.advance()
            return IdTest(tok.value), None
        if tok.kind is Kind.CLASS_TEST:
            self.advance()
            return ClassTest(tok.value), None
        self.fail(f"expected node test, found {tok.lexeme or 'end of input'!r}",
                  expected=("name", "*", "text()", "field()", "@name", "#id", ".class"))
        raise AssertionError("unreachable")

    def parse_action(self) -> Action:
        self.expect(Kind.LBRACE)
        tok = self.cur
        if tok.kind is Kind.STRING:
            self.advance()
            kind, text = "fill", tok.value
        elif tok.kind is Kind.IDENT and tok.value in ("click", "dblclick", "submit"):
            self.advance()
            kind, text = tok.value, None
        else:
            self.fail("expected click, dblclick, submit, or a fill string",
                      expected=("click", "dblclick", "submit", "string"), token=tok)
            raise AssertionError("unreachable")
        absolute = False
        if self.cur.kind is Kind.SEP and self.cur.value == "/":
            self.advance()
            absolute = True
        self.expect(Kind.RBRACE, "'}'")
        return Action(kind, text, absolute)

    # --- expressions ---

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.cur.kind is Kind.IDENT and self.cur.value == "or":
            self.advance()
            left = BoolOp("or", left, self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_equality()
        while self.cur.kind is Kind.IDENT and self.cur.value == "and":
            self.advance()
            left = BoolOp("and", left, self.parse_equality())
        return left

    def parse_equality(self) -> Expr:
        left = self.parse_relational()
        while self.cur.kind in (Kind.EQ, Kind.NEQ):
            op = self.advance().value
            left = Compare(op, left, self.parse_relational())
        return left

    def parse_relational(self) -> Expr:
        left = self.parse_primary()
        while True:
            kind = self.cur.kind
            if kind is Kind.GT and self.marker_depth and self.paren_depth == 0:
                return left  # closes the enclosing marker
            if kind in (Kind.LT, Kind.LE, Kind.GT, Kind.GE):
                op = self.advance().value
                left = Compare(op, left, self.parse_primary())
            else:
                return left

    def parse_primary(self) -> Expr:
        tok = self.cur
        if tok.kind is Kind.NUMBER:
            self.advance()
            return NumberLit(float(tok.lexeme))
        if tok.kind is Kind.STRING:
            self.advance()
            return StringLit(tok.value)
        if tok.kind is Kind.LPAREN:
            self.advance()
            self.paren_depth += 1
            inner = self.parse_expr()
            self.paren_depth -= 1
            self.expect(Kind.RPAREN, "')'")
            return inner
        if tok.kind is Kind.IDENT and self.peek().kind is Kind.LPAREN:
            if tok.value in FUNCTIONS:
                return self.parse_call()
            if tok.value in ("text", "field"):
                return self.parse_path_expr()
            self.fail(f"unknown function {tok.value!r}", expected=tuple(FUNCTIONS), token=tok)
        if tok.kind in _NODE_TEST_STARTS or tok.kind in (Kind.DOT, Kind.SEP):
            return self.parse_path_expr()
        self.fail(f"expected expression, found {tok.lexeme or 'end of input'!r}",
                  expected=("number", "string", "function", "path", "("))
        raise AssertionError("unreachable")

    def parse_call(self) -> Expr:
        name_tok = self.advance()
        self.expect(Kind.LPAREN)
        self.paren_depth += 1
        args: list[Expr] = []
        if self.cur.kind is not Kind.RPAREN:
            args.append(self.parse_expr())
            while self.cur.kind is Kind.COMMA:
                self.advance()
                args.append(self.parse_expr())
        self.paren_depth -= 1
        self.expect(Kind.RPAREN, "')'")
        lo, hi = FUNCTIONS[name_tok.value]
        if not (lo <= len(args) <= hi):
            self.fail(f"{name_tok.value}() takes {lo} to {hi} arguments, got {len(args)}",
                      token=name_tok)
        return FuncCall(name_tok.value, args)

    def parse_path_expr(self) -> PathExpr:
        from_root = False
        steps: list[Step] = []
        if self.cur.kind is Kind.DOT:
            self.advance()
        elif self.cur.kind is Kind.SEP:
            from_root = True
            while self.cur.kind is Kind.SEP:
                sep = self.advance().value
                steps.append(self.parse_step(sep, in_expr=True))
            return PathExpr(from_root, steps)
        else:
            steps.append(self.parse_step("/", in_expr=True))
        while self.cur.kind is Kind.SEP:
            sep = self.advance().value
            steps.append(self.parse_step(sep, in_expr=True))
        return PathExpr(from_root, steps)
