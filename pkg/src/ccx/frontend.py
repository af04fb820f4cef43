"""Lexer and recursive-descent parser.

Operator precedence, tightest first: ``* /``, then ``+ -``, then the
comparisons. Every binary operator is left-associative.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .ast import COMPARE_OPS, Assign, BinOp, Expr, If, IntLit, Program, Stmt, Var, While
from .diagnostics import CcxError, syntax_error


class TokenKind(enum.Enum):
    IDENT = "identifier"
    INT = "int-literal"
    OP = "operator"
    ASSIGN = "assign"
    SEMI = "semicolon"
    LPAREN = "lparen"
    RPAREN = "rparen"
    LBRACE = "lbrace"
    RBRACE = "rbrace"
    IF = "keyword-if"
    WHILE = "keyword-while"
    EOI = "end-of-input"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int

    def __str__(self) -> str:
        return f"{self.line}:{self.kind.value}:{self.lexeme}"


KEYWORDS = {"if": TokenKind.IF, "while": TokenKind.WHILE}
_PUNCT = {
    ";": TokenKind.SEMI,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
}
_TWO_CHAR_OPS = ("<=", ">=", "==", "!=")
_ONE_CHAR_OPS = "+-*/<>"


def _is_ident_start(ch: str) -> bool:
    return "a" <= ch <= "z"


def _is_ident_char(ch: str) -> bool:
    return "a" <= ch <= "z" or "0" <= ch <= "9"


def tokenize(source: str, first_line: int = 1) -> list[Token]:
    """Split ``source`` into tokens, ending with an end-of-input token.

    Raises CcxError with a syntax diagnostic on the first character that
    cannot start a token (a decimal point, an upper-case letter, ...).
    """
    tokens: list[Token] = []
    line = first_line
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
        elif ch in " \t\r\f\v":
            i += 1
        elif _is_ident_start(ch):
            j = i + 1
            while j < n and _is_ident_char(source[j]):
                j += 1
            word = source[i:j]
            tokens.append(Token(KEYWORDS.get(word, TokenKind.IDENT), word, line))
            i = j
        elif ch.isdigit() and ch.isascii():
            j = i + 1
            while j < n and source[j].isdigit() and source[j].isascii():
                j += 1
            tokens.append(Token(TokenKind.INT, source[i:j], line))
            i = j
        elif source.startswith(_TWO_CHAR_OPS, i):
            tokens.append(Token(TokenKind.OP, source[i:i + 2], line))
            i += 2
        elif ch in _ONE_CHAR_OPS:
            tokens.append(Token(TokenKind.OP, ch, line))
            i += 1
        elif ch == "=":
            tokens.append(Token(TokenKind.ASSIGN, ch, line))
            i += 1
        elif ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, line))
            i += 1
        else:
            raise CcxError(syntax_error(line))
    eoi_line = tokens[-1].line if tokens else first_line
    tokens.append(Token(TokenKind.EOI, "", eoi_line))
    return tokens


class Incomplete(Exception):
    """Input ended inside a construct that more lines could complete."""


_LEVELS: list[tuple[str, ...]] = [COMPARE_OPS, ("+", "-"), ("*", "/")]


class Parser:
    def __init__(self, tokens: list[Token], partial: bool = False):
        if not tokens or tokens[-1].kind is not TokenKind.EOI:
            raise ValueError("token list must end with end-of-input")
        self.tokens = tokens
        self.pos = 0
        self.partial = partial

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOI:
            self.pos += 1
        return tok

    def fail(self, missing_semicolon: bool = False):
        tok = self.peek()
        if tok.kind is TokenKind.EOI and self.partial:
            raise Incomplete()
        if (missing_semicolon or tok.kind is TokenKind.EOI) and self.pos > 0:
            # report where the statement should have ended
            line = self.tokens[self.pos - 1].line
        else:
            line = tok.line
        raise CcxError(syntax_error(line))

    def expect(self, kind: TokenKind) -> Token:
        if self.peek().kind is not kind:
            self.fail(missing_semicolon=kind is TokenKind.SEMI)
        return self.advance()

    def program(self) -> Program:
        body = []
        while self.peek().kind is not TokenKind.EOI:
            body.append(self.statement())
        return Program(tuple(body))

    def statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind is TokenKind.IDENT:
            self.advance()
            self.expect(TokenKind.ASSIGN)
            value = self.expression()
            self.expect(TokenKind.SEMI)
            return Assign(tok.lexeme, value, tok.line)
        if tok.kind in (TokenKind.IF, TokenKind.WHILE):
            self.advance()
            self.expect(TokenKind.LPAREN)
            cond = self.expression()
            self.expect(TokenKind.RPAREN)
            self.expect(TokenKind.LBRACE)
            body = []
            while self.peek().kind is not TokenKind.RBRACE:
                if self.peek().kind is TokenKind.EOI:
                    self.fail()
                body.append(self.statement())
            self.advance()
            node = If if tok.kind is TokenKind.IF else While
            return node(cond, tuple(body), tok.line)
        self.fail()

    def expression(self, level: int = 0) -> Expr:
        if level == len(_LEVELS):
            return self.primary()
        ops = _LEVELS[level]
        lhs = self.expression(level + 1)
        while self.peek().kind is TokenKind.OP and self.peek().lexeme in ops:
            op_tok = self.advance()
            rhs = self.expression(level + 1)
            lhs = BinOp(op_tok.lexeme, lhs, rhs, op_tok.line)
        return lhs

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind is TokenKind.INT:
            self.advance()
            return IntLit(int(tok.lexeme), tok.line)
        if tok.kind is TokenKind.IDENT:
            self.advance()
            return Var(tok.lexeme, tok.line)
        if tok.kind is TokenKind.LPAREN:
            self.advance()
            inner = self.expression()
            self.expect(TokenKind.RPAREN)
            return inner
        self.fail()


def parse(tokens: list[Token]) -> Program:
    return Parser(tokens).program()


def parse_source(source: str) -> Program:
    return parse(tokenize(source))


class LineParser:
    """Incremental parser for interactive use.

    Lines are fed one at a time; complete statements come back as soon as
    their terminator has been read. Line numbers keep counting across the
    whole session.
    """

    def __init__(self) -> None:
        self.line = 0
        self.pending: list[Token] = []

    @property
    def open(self) -> bool:
        return bool(self.pending)

    def feed(self, text: str) -> list[Stmt]:
        self.line += 1
        try:
            new = tokenize(text, first_line=self.line)[:-1]
        except CcxError:
            self.pending = []
            raise
        if not new:
            if self.pending:
                # a blank line ends whatever was left open
                last = self.pending[-1].line
                self.pending = []
                raise CcxError(syntax_error(last))
            return []
        tokens = self.pending + new
        parser = Parser(tokens + [Token(TokenKind.EOI, "", self.line)], partial=True)
        done: list[Stmt] = []
        start = 0
        try:
            while parser.peek().kind is not TokenKind.EOI:
                start = parser.pos
                done.append(parser.statement())
            start = parser.pos
        except Incomplete:
            pass
        except CcxError:
            self.pending = []
            raise
        self.pending = tokens[start:]
        return done


def parse_stmt_line(line: str, carry: Optional[LineParser] = None) -> tuple[list[Stmt], LineParser]:
    carry = carry if carry is not None else LineParser()
    return carry.feed(line), carry
