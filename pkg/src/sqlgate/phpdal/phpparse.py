"""Flow-insensitive parsing of a PHP subset.

Captures class/interface declarations with their inheritance relations,
function/method declarations, per-scope assignments, return expressions
and called names.  Everything else in a body is skipped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from sqlgate.errors import PhpParseError

# ---------------------------------------------------------------------------
# tokens


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident, var, string, number, op
    text: str
    line: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|\#[^\n]*|/\*.*?\*/)
  | (?P<string>'(?:\\.|[^'\\])*'|"(?:\\.|[^"\\])*")
  | (?P<var>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_\\][A-Za-z0-9_\\]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<op>\.=|->|::|=>|==|===|!=|!==|<=|>=|&&|\|\||[-+*/%.=<>!(){}\[\],;:?&|@~^])
    """,
    re.VERBOSE | re.DOTALL,
)


def _php_tokens(source: str, file: str) -> list[_Tok]:
    # only the code between <?php ... ?> markers is scanned
    chunks = []
    pos = 0
    while True:
        start = source.find("<?php", pos)
        if start < 0:
            break
        end = source.find("?>", start)
        if end < 0:
            end = len(source)
        chunks.append((start + 5, source[start + 5:end]))
        pos = end + 2
    tokens: list[_Tok] = []
    for offset, chunk in chunks:
        i = 0
        line_base = source.count("\n", 0, offset) + 1
        while i < len(chunk):
            m = _TOKEN_RE.match(chunk, i)
            if m is None:
                raise PhpParseError(file, line_base + chunk.count("\n", 0, i), f"bad character {chunk[i]!r}")
            i = m.end()
            kind = m.lastgroup
            if kind in ("ws", "comment"):
                continue
            tokens.append(_Tok(kind, m.group(), line_base + chunk.count("\n", 0, m.start())))
    return tokens


def _string_value(text: str) -> str:
    body = text[1:-1]
    return re.sub(r"\\(.)", r"\1", body)


# ---------------------------------------------------------------------------
# declarations


@dataclass(frozen=True)
class StringPart:
    kind: str  # "literal" | "variable" | "call"
    value: str = ""


@dataclass(frozen=True)
class StringExpr:
    parts: tuple[StringPart, ...]

    @property
    def is_constant(self) -> bool:
        return all(p.kind == "literal" for p in self.parts)


@dataclass(frozen=True)
class NewExpr:
    target: StringExpr  # class reference: a literal name or a variable


@dataclass(frozen=True)
class ReturnExpr:
    kind: str  # "new" | "var" | "call" | "other"
    new: NewExpr | None = None
    var: str = ""
    call: str = ""


@dataclass(frozen=True)
class AssignRecord:
    variable: str
    value: StringExpr | NewExpr
    scope: str  # enclosing function identity, "" at top level


@dataclass
class PhpDecl:
    kind: str  # "class" | "interface" | "function" | "method"
    name: str
    extends: str | None = None
    implements: list[str] = field(default_factory=list)
    owner: str | None = None
    returns: list[ReturnExpr] = field(default_factory=list)
    assigns: list[AssignRecord] = field(default_factory=list)
    calls: set[str] = field(default_factory=set)
    file: str = ""
    line: int = 0

    @property
    def identity(self) -> str:
        if self.kind == "method":
            return f"{self.owner}::{self.name}"
        return self.name


def parse_php(source: str, file: str = "<string>") -> list[PhpDecl]:
    """Extract declarations from one PHP source file."""
    tokens = _php_tokens(source, file)
    return _Scanner(tokens, file).scan()


class _Scanner:
    def __init__(self, tokens: list[_Tok], file: str):
        self.toks = tokens
        self.file = file
        self.pos = 0
        self.decls: list[PhpDecl] = []

    def scan(self) -> list[PhpDecl]:
        self._block(class_name=None)
        return self.decls

    # -- helpers -------------------------------------------------------

    def peek(self, ahead: int = 0) -> _Tok | None:
        i = self.pos + ahead
        return self.toks[i] if i < len(self.toks) else None

    def next(self) -> _Tok | None:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def _skip_balanced(self, open_: str, close: str) -> None:
        depth = 0
        while self.pos < len(self.toks):
            t = self.toks[self.pos].text
            self.pos += 1
            if t == open_:
                depth += 1
            elif t == close:
                depth -= 1
                if depth == 0:
                    return

    def _take_name_list(self) -> list[str]:
        names = []
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "ident":
                break
            names.append(tok.text)
            self.pos += 1
            if not (self.peek() and self.peek().text == ","):
                break
            self.pos += 1
        return names

    # -- structure -----------------------------------------------------

    def _block(self, class_name: str | None) -> None:
        """Scan a top-level or class-body token region."""
        while self.pos < len(self.toks):
            tok = self.toks[self.pos]
            if tok.text == "}":
                self.pos += 1
                return
            low = tok.text.lower()
            if tok.kind == "ident" and low in ("class", "interface") and class_name is None:
                self.pos += 1
                self._class_decl(low)
            elif tok.kind == "ident" and low == "abstract" and class_name is None:
                self.pos += 1
            elif tok.kind == "ident" and low == "function":
                self.pos += 1
                self._function_decl(class_name)
            elif tok.text == "{":
                self.pos += 1
                self._block(class_name)
            else:
                self.pos += 1

    def _class_decl(self, kind: str) -> None:
        name_tok = self.next()
        if name_tok is None or name_tok.kind != "ident":
            raise PhpParseError(self.file, name_tok.line if name_tok else 0, f"{kind} name expected")
        decl = PhpDecl(kind=kind, name=name_tok.text, file=self.file, line=name_tok.line)
        while True:
            tok = self.peek()
            if tok is None:
                break
            low = tok.text.lower()
            if low == "extends":
                self.pos += 1
                parents = self._take_name_list()
                if parents:
                    decl.extends = parents[0]
                    decl.implements.extend(parents[1:])  # interfaces may extend several
            elif low == "implements":
                self.pos += 1
                decl.implements.extend(self._take_name_list())
            else:
                break
        self.decls.append(decl)
        tok = self.peek()
        if tok is not None and tok.text == "{":
            self.pos += 1
            self._block(class_name=decl.name)

    def _function_decl(self, class_name: str | None) -> None:
        # skip modifiers already consumed elsewhere; name may be missing for closures
        name_tok = self.peek()
        if name_tok is None or name_tok.kind != "ident":
            self._skip_balanced("(", ")")
            if self.peek() is not None and self.peek().text == "{":
                self._skip_balanced("{", "}")
            return
        self.pos += 1
        decl = PhpDecl(
            kind="method" if class_name else "function",
            name=name_tok.text,
            owner=class_name,
            file=self.file,
            line=name_tok.line,
        )
        self.decls.append(decl)
        if self.peek() is not None and self.peek().text == "(":
            self._skip_balanced("(", ")")
        while self.peek() is not None and self.peek().text not in ("{", ";"):
            self.pos += 1
        tok = self.peek()
        if tok is None or tok.text == ";":
            self.pos += 1 if tok else 0
            return
        self.pos += 1  # {
        self._body(decl)

    def _body(self, decl: PhpDecl) -> None:
        depth = 1
        while self.pos < len(self.toks) and depth > 0:
            tok = self.toks[self.pos]
            if tok.text == "{":
                depth += 1
                self.pos += 1
                continue
            if tok.text == "}":
                depth -= 1
                self.pos += 1
                continue
            if tok.kind == "ident" and tok.text.lower() == "return":
                self.pos += 1
                decl.returns.append(self._return_expr(decl))
                continue
            if tok.kind == "var":
                nxt = self.peek(1)
                if nxt is not None and nxt.text in ("=", ".="):
                    self.pos += 2
                    value = self._rhs_expr(decl)
                    decl.assigns.append(AssignRecord(tok.text[1:], value, decl.identity))
                    continue
            if tok.kind == "ident":
                nxt = self.peek(1)
                if nxt is not None and nxt.text == "(":
                    decl.calls.add(tok.text.lower())
                elif nxt is not None and nxt.text == "::":
                    after = self.peek(2)
                    if after is not None and after.kind == "ident":
                        decl.calls.add(f"{tok.text.lower()}::{after.text.lower()}")
            self.pos += 1

    # -- expressions ---------------------------------------------------

    def _statement_tokens(self) -> list[_Tok]:
        out = []
        depth = 0
        while self.pos < len(self.toks):
            tok = self.toks[self.pos]
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth -= 1
            elif tok.text == ";" and depth <= 0:
                self.pos += 1
                break
            elif tok.text in ("{", "}") and depth <= 0:
                break
            out.append(tok)
            self.pos += 1
        return out

    def _rhs_expr(self, decl: PhpDecl) -> StringExpr | NewExpr:
        toks = self._statement_tokens()
        self._note_calls(toks, decl)
        return _parse_value(toks)

    def _return_expr(self, decl: PhpDecl) -> ReturnExpr:
        toks = self._statement_tokens()
        self._note_calls(toks, decl)
        if not toks:
            return ReturnExpr("other")
        if toks[0].kind == "ident" and toks[0].text.lower() == "new":
            return ReturnExpr("new", new=_parse_new(toks))
        if toks[0].kind == "var":
            if len(toks) == 1 or toks[1].text not in ("(",):
                return ReturnExpr("var", var=toks[0].text[1:])
        if toks[0].kind == "ident" and len(toks) > 1 and toks[1].text == "(":
            return ReturnExpr("call", call=toks[0].text.lower())
        if (
            len(toks) > 3
            and toks[0].kind == "ident"
            and toks[1].text == "::"
            and toks[2].kind == "ident"
            and toks[3].text == "("
        ):
            return ReturnExpr("call", call=f"{toks[0].text.lower()}::{toks[2].text.lower()}")
        return ReturnExpr("other")

    def _note_calls(self, toks: list[_Tok], decl: PhpDecl) -> None:
        for i, tok in enumerate(toks):
            if tok.kind == "ident" and i + 1 < len(toks) and toks[i + 1].text == "(":
                decl.calls.add(tok.text.lower())


def _parse_new(toks: list[_Tok]) -> NewExpr:
    """`new <target>(...)`; target is an identifier, a variable, or a concatenation."""
    rest = toks[1:]
    target_toks = []
    for tok in rest:
        if tok.text == "(":
            break
        target_toks.append(tok)
    return NewExpr(target=_parse_string_expr(target_toks))


def _parse_value(toks: list[_Tok]) -> StringExpr | NewExpr:
    if toks and toks[0].kind == "ident" and toks[0].text.lower() == "new":
        return _parse_new(toks)
    return _parse_string_expr(toks)


def _parse_string_expr(toks: list[_Tok]) -> StringExpr:
    """Split on top-level `.` into literal / variable / call-placeholder parts."""
    parts: list[StringPart] = []
    component: list[_Tok] = []
    depth = 0

    def flush() -> None:
        if not component:
            return
        if len(component) == 1:
            tok = component[0]
            if tok.kind == "string":
                parts.append(StringPart("literal", _string_value(tok.text)))
                component.clear()
                return
            if tok.kind == "var":
                parts.append(StringPart("variable", tok.text[1:]))
                component.clear()
                return
            if tok.kind in ("number", "ident"):
                parts.append(StringPart("literal", tok.text))
                component.clear()
                return
        parts.append(StringPart("call"))
        component.clear()

    for tok in toks:
        if tok.text == "(":
            depth += 1
            component.append(tok)
        elif tok.text == ")":
            depth -= 1
            component.append(tok)
        elif tok.text == "." and depth == 0:
            flush()
        else:
            component.append(tok)
    flush()
    return StringExpr(tuple(parts))
