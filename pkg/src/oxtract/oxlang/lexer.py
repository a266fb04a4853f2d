"""Tokenizer for wrapper source text.

Whitespace is insignificant outside string literals; each token records the
whitespace that preceded it so that ``ws + lexeme`` joined over the stream
reproduces the source byte-for-byte.  Positions are 1-based.  Only string
literals may span newlines.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from ..errors import IllegalCharacter, UnterminatedString


class Kind(Enum):
    IDENT = auto()
    STRING = auto()
    NUMBER = auto()
    SEP = auto()          # / or //
    AXIS_SEP = auto()     # ::
    MARKER_OPEN = auto()  # :<
    ATTR_TEST = auto()    # @name
    ID_TEST = auto()      # #name
    CLASS_TEST = auto()   # .name
    DOT = auto()
    STAR = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACKET = auto()
    RBRACKET = auto()
    LBRACE = auto()
    RBRACE = auto()
    COMMA = auto()
    EQ = auto()
    NEQ = auto()
    LT = auto()
    LE = auto()
    GT = auto()           # also closes markers
    GE = auto()
    EOF = auto()


@dataclass
class Token:
    kind: Kind
    lexeme: str
    value: str  # unescaped string / bare name; lexeme otherwise
    line: int
    column: int
    ws: str = ""  # whitespace preceding this token


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789-")
_WS = set(" \t\r\n")


def tokenize(source: str) -> list[Token]:
    """Lex ``source`` into a token list ending with an EOF token."""
    return _Scanner(source).run()


class _Scanner:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []

    def run(self) -> list[Token]:
        while True:
            ws = self._skip_ws()
            if self.pos >= len(self.src):
                self.tokens.append(Token(Kind.EOF, "", "", self.line, self.col, ws))
                return self.tokens
            self._scan_token(ws)

    def _skip_ws(self) -> str:
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos] in _WS:
            self._advance()
        return self.src[start:self.pos]

    def _advance(self) -> str:
        ch = self.src[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def _emit(self, kind: Kind, lexeme: str, value: str, line: int, col: int, ws: str) -> None:
        self.tokens.append(Token(kind, lexeme, value, line, col, ws))

    def _scan_token(self, ws: str) -> None:
        line, col = self.line, self.col
        ch = self._peek()

        if ch in "\"'":
            self._scan_string(ws, line, col)
            return
        if ch.isdigit():
            self._scan_number(ws, line, col)
            return
        if ch in _IDENT_START:
            name = self._scan_name()
            self._emit(Kind.IDENT, name, name, line, col, ws)
            return

        two = ch + self._peek(1)
        if two == "//":
            self._advance(); self._advance()
            self._emit(Kind.SEP, "//", "//", line, col, ws)
            return
        if two == "::":
            self._advance(); self._advance()
            self._emit(Kind.AXIS_SEP, "::", "::", line, col, ws)
            return
        if two == ":<":
            self._advance(); self._advance()
            self._emit(Kind.MARKER_OPEN, ":<", ":<", line, col, ws)
            return
        if two == "!=":
            self._advance(); self._advance()
            self._emit(Kind.NEQ, "!=", "!=", line, col, ws)
            return
        if two == "<=":
            self._advance(); self._advance()
            self._emit(Kind.LE, "<=", "<=", line, col, ws)
            return
        if two == ">=":
            self._advance(); self._advance()
            self._emit(Kind.GE, ">=", ">=", line, col, ws)
            return

        # @name / #name / .name node tests require the name to be adjacent.
        if ch in "@#." and self._peek(1) in _IDENT_START:
            self._advance()
            name = self._scan_name()
            kind = {"@": Kind.ATTR_TEST, "#": Kind.ID_TEST, ".": Kind.CLASS_TEST}[ch]
            self._emit(kind, ch + name, name, line, col, ws)
            return

        single = {
            "/": Kind.SEP,
            ".": Kind.DOT,
            "*": Kind.STAR,
            "(": Kind.LPAREN,
            ")": Kind.RPAREN,
            "[": Kind.LBRACKET,
            "]": Kind.RBRACKET,
            "{": Kind.LBRACE,
            "}": Kind.RBRACE,
            ",": Kind.COMMA,
            "=": Kind.EQ,
            "<": Kind.LT,
            ">": Kind.GT,
        }
        if ch in single:
            self._advance()
            self._emit(single[ch], ch, ch, line, col, ws)
            return

        raise IllegalCharacter(f"illegal character {ch!r}", line, col)

    def _scan_name(self) -> str:
        start = self.pos
        self._advance()
        while self._peek() in _IDENT_CONT and self._peek() != "":
            self._advance()
        return self.src[start:self.pos]

    def _scan_number(self, ws: str, line: int, col: int) -> None:
        start = self.pos
        while self._peek().isdigit():
            self._advance()
        if self._peek() == "." and self._peek(1).isdigit():
            self._advance()
            while self._peek().isdigit():
                self._advance()
        lexeme = self.src[start:self.pos]
        self._emit(Kind.NUMBER, lexeme, lexeme, line, col, ws)

    def _scan_string(self, ws: str, line: int, col: int) -> None:
        quote = self._advance()
        parts: list[str] = []
        start = self.pos - 1
        while True:
            if self.pos >= len(self.src):
                raise UnterminatedString("unterminated string literal", line, col)
            ch = self._advance()
            if ch == "\\" and self._peek() in (quote, "\\"):
                parts.append(self._advance())
            elif ch == quote:
                break
            else:
                parts.append(ch)
        lexeme = self.src[start:self.pos]
        self._emit(Kind.STRING, lexeme, "".join(parts), line, col, ws)
