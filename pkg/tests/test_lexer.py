import pytest
from hypothesis import given
from hypothesis import strategies as st

from oxtract.errors import IllegalCharacter, UnterminatedString
from oxtract.oxlang import Kind, tokenize


def kinds(source):
    return [t.kind for t in tokenize(source)][:-1]  # drop EOF


def test_smallest_wrapper():
    tokens = tokenize('doc("a")')
    assert [(t.kind, t.lexeme) for t in tokens[:-1]] == [
        (Kind.IDENT, "doc"),
        (Kind.LPAREN, "("),
        (Kind.STRING, '"a"'),
        (Kind.RPAREN, ")"),
    ]
    assert tokens[2].value == "a"


def test_marker_tokens():
    tokens = tokenize("//span:<title=string(.)>")
    assert [t.kind for t in tokens] == [
        Kind.SEP, Kind.IDENT, Kind.MARKER_OPEN, Kind.IDENT, Kind.EQ,
        Kind.IDENT, Kind.LPAREN, Kind.DOT, Kind.RPAREN, Kind.GT, Kind.EOF,
    ]


def test_unterminated_string_position():
    with pytest.raises(UnterminatedString) as exc:
        tokenize('doc("a')
    assert (exc.value.line, exc.value.column) == (1, 5)


def test_illegal_character_position():
    with pytest.raises(IllegalCharacter) as exc:
        tokenize("//a | //b")
    assert exc.value.column == 5


@pytest.mark.parametrize("source,expected", [
    ("//", [Kind.SEP]),
    ("::", [Kind.AXIS_SEP]),
    (":<", [Kind.MARKER_OPEN]),
    ("@href", [Kind.ATTR_TEST]),
    ("#main", [Kind.ID_TEST]),
    (".result", [Kind.CLASS_TEST]),
    (". result", [Kind.DOT, Kind.IDENT]),
    ("!= <= >= < >", [Kind.NEQ, Kind.LE, Kind.GE, Kind.LT, Kind.GT]),
    ("3.25", [Kind.NUMBER]),
    ("3 .5", [Kind.NUMBER, Kind.DOT, Kind.NUMBER]),
])
def test_token_kinds(source, expected):
    assert kinds(source) == expected


def test_lone_colon_is_illegal():
    with pytest.raises(IllegalCharacter):
        tokenize("a : b")


def test_string_escapes_preserved():
    token = tokenize(r'"say \"hi\" \\ done"')[0]
    assert token.value == 'say "hi" \\ done'
    assert token.lexeme == r'"say \"hi\" \\ done"'


def test_single_quoted_strings():
    token = tokenize("'it''s'")[0]
    assert token.value == "it"


def test_positions_are_one_based_and_monotonic():
    tokens = tokenize('doc("u")\n  //a')
    assert tokens[0].line == 1 and tokens[0].column == 1
    sep = next(t for t in tokens if t.kind is Kind.SEP)
    assert (sep.line, sep.column) == (2, 3)
    stream = [(t.line, t.column) for t in tokens]
    assert stream == sorted(stream)


def _reconstruct(source):
    return "".join(t.ws + t.lexeme for t in tokenize(source))


@pytest.mark.parametrize("source", [
    'doc("u")  //a [ @href ]\n:<x=1>',
    "  a//b \t [1]",
    '"multi\nline"',
])
def test_whitespace_reconstruction(source):
    assert _reconstruct(source) == source


@given(st.text(alphabet="ab/[]()@#.*<>=!{}:\"' \n\t0123456789", max_size=40))
def test_lexer_total_or_positioned_error(source):
    # Every input either tokenizes (and reconstructs exactly) or raises a
    # positioned lexical error; nothing else may escape.
    try:
        assert _reconstruct(source) == source
    except (UnterminatedString, IllegalCharacter) as err:
        assert err.line >= 1 and err.column >= 1
