"""Tokenizer for the MySQL-flavored SQL subset.

Tokens carry byte spans so that the original input can be reconstructed
exactly from the token stream plus the skipped whitespace.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from sqlgate.errors import UnterminatedComment, UnterminatedString


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    QUOTED_IDENTIFIER = "quoted-identifier"
    STRING = "string-literal"
    NUMBER = "numeric-literal"
    HEX = "hex-literal"
    OPERATOR = "operator"
    PUNCTUATION = "punctuation"
    COMMENT = "comment"
    PARAMETER = "parameter-marker"


@dataclass(frozen=True)
class SqlToken:
    kind: TokenKind
    text: str
    start: int
    end: int


KEYWORDS = frozenset(
    """
    SELECT INSERT UPDATE DELETE REPLACE CALL SET FROM WHERE AND OR NOT
    IN LIKE BETWEEN IS NULL JOIN INNER LEFT RIGHT OUTER CROSS STRAIGHT_JOIN
    ON USING AS GROUP BY HAVING ORDER LIMIT OFFSET UNION ALL DISTINCT
    DISTINCTROW VALUES VALUE INTO ASC DESC EXISTS TRUE FALSE UNKNOWN
    DIV MOD XOR NAMES GLOBAL SESSION DUPLICATE KEY IGNORE LOW_PRIORITY
    """.split()
)

# longest first so that multi-char operators win
_OPERATORS = (
    "<=>", ">=", "<=", "<>", "!=", ":=", "||", "&&",
    "=", ">", "<", "+", "-", "*", "/", "%", "!", "~", "^", "&", "|",
)

_PUNCT = "(),;.@{}"

_WS = " \t\r\n\f\v"

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_$")
_IDENT_CONT = _IDENT_START | frozenset("0123456789")
_DIGITS = frozenset("0123456789")
_HEX_DIGITS = frozenset("0123456789abcdefABCDEF")


def tokenize(sql: str) -> list[SqlToken]:
    """Produce the full token stream, comments included."""
    tokens: list[SqlToken] = []
    i = 0
    n = len(sql)
    while i < n:
        c = sql[i]
        if c in _WS:
            i += 1
            continue
        if c == "#":
            j = i
            while j < n and sql[j] != "\n":
                j += 1
            tokens.append(SqlToken(TokenKind.COMMENT, sql[i:j], i, j))
            i = j
            continue
        if c == "-" and sql.startswith("--", i) and (i + 2 >= n or sql[i + 2] in " \t\n"):
            j = i
            while j < n and sql[j] != "\n":
                j += 1
            tokens.append(SqlToken(TokenKind.COMMENT, sql[i:j], i, j))
            i = j
            continue
        if c == "/" and sql.startswith("/*", i):
            j = sql.find("*/", i + 2)
            if j < 0:
                raise UnterminatedComment(i)
            j += 2
            tokens.append(SqlToken(TokenKind.COMMENT, sql[i:j], i, j))
            i = j
            continue
        if c in ("'", '"'):
            j = _scan_quoted(sql, i, c, backslash=True)
            tokens.append(SqlToken(TokenKind.STRING, sql[i:j], i, j))
            i = j
            continue
        if c == "`":
            j = _scan_quoted(sql, i, c, backslash=False)
            tokens.append(SqlToken(TokenKind.QUOTED_IDENTIFIER, sql[i:j], i, j))
            i = j
            continue
        if c == "?":
            tokens.append(SqlToken(TokenKind.PARAMETER, "?", i, i + 1))
            i += 1
            continue
        if (c in ("x", "X") and i + 1 < n and sql[i + 1] == "'"):
            j = _scan_quoted(sql, i + 1, "'", backslash=False)
            tokens.append(SqlToken(TokenKind.HEX, sql[i:j], i, j))
            i = j
            continue
        if c == "0" and i + 1 < n and sql[i + 1] in ("x", "X") and i + 2 < n and sql[i + 2] in _HEX_DIGITS:
            j = i + 2
            while j < n and sql[j] in _HEX_DIGITS:
                j += 1
            tokens.append(SqlToken(TokenKind.HEX, sql[i:j], i, j))
            i = j
            continue
        if c in _DIGITS or (c == "." and i + 1 < n and sql[i + 1] in _DIGITS):
            j = _scan_number(sql, i)
            tokens.append(SqlToken(TokenKind.NUMBER, sql[i:j], i, j))
            i = j
            continue
        if c in _IDENT_START:
            j = i + 1
            while j < n and sql[j] in _IDENT_CONT:
                j += 1
            text = sql[i:j]
            kind = TokenKind.KEYWORD if text.upper() in KEYWORDS else TokenKind.IDENTIFIER
            tokens.append(SqlToken(kind, text, i, j))
            i = j
            continue
        matched = False
        for op in _OPERATORS:
            if sql.startswith(op, i):
                tokens.append(SqlToken(TokenKind.OPERATOR, op, i, i + len(op)))
                i += len(op)
                matched = True
                break
        if matched:
            continue
        if c in _PUNCT:
            tokens.append(SqlToken(TokenKind.PUNCTUATION, c, i, i + 1))
            i += 1
            continue
        # unknown byte: keep the round trip intact by emitting it as punctuation
        tokens.append(SqlToken(TokenKind.PUNCTUATION, c, i, i + 1))
        i += 1
    return tokens


def _scan_quoted(sql: str, start: int, quote: str, backslash: bool) -> int:
    """Return the index one past the closing quote; handles doubling and backslash escapes."""
    i = start + 1
    n = len(sql)
    while i < n:
        c = sql[i]
        if backslash and c == "\\":
            i += 2
            continue
        if c == quote:
            if i + 1 < n and sql[i + 1] == quote:  # doubled quote stays inside the literal
                i += 2
                continue
            return i + 1
        i += 1
    raise UnterminatedString(start)


def _scan_number(sql: str, start: int) -> int:
    i = start
    n = len(sql)
    while i < n and sql[i] in _DIGITS:
        i += 1
    if i < n and sql[i] == ".":
        i += 1
        while i < n and sql[i] in _DIGITS:
            i += 1
    if i < n and sql[i] in ("e", "E"):
        j = i + 1
        if j < n and sql[j] in "+-":
            j += 1
        if j < n and sql[j] in _DIGITS:
            i = j
            while i < n and sql[i] in _DIGITS:
                i += 1
    return i


def reconstruct(sql: str, tokens: list[SqlToken]) -> str:
    """Rebuild the input from token spans plus the whitespace between them."""
    out = []
    pos = 0
    for tok in tokens:
        out.append(sql[pos:tok.start])
        out.append(tok.text)
        pos = tok.end
    out.append(sql[pos:])
    return "".join(out)


def string_value(text: str) -> str:
    """Decode a quoted token's contents (escape sequences resolved)."""
    quote = text[0]
    body = text[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and quote != "`" and i + 1 < len(body):
            out.append(body[i + 1])
            i += 2
        elif c == quote and i + 1 < len(body) and body[i + 1] == quote:
            out.append(quote)
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)
