"""Per-statement fact extraction: operation, tables, logical operators, function uses."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from sqlgate.sqlmodel.parser import Node, OpCode, SqlStatement
from sqlgate.sqlmodel.tokenizer import TokenKind, tokenize


class ArgKind(Enum):
    FIELD = "FIELD"
    LITERAL = "LITERAL"
    VAR = "VAR"
    NONE = "NONE"


@dataclass(frozen=True)
class FunctionUse:
    name: str
    argc: int
    first_arg: ArgKind
    rest_arg: ArgKind

    @property
    def triple(self) -> tuple[str, ArgKind, ArgKind]:
        return (self.name, self.first_arg, self.rest_arg)


@dataclass(frozen=True)
class QuerySignature:
    op: OpCode
    tables: frozenset[str]
    logic: frozenset[str]  # subset of {"AND", "OR"}
    funcs: frozenset[FunctionUse]

    @property
    def func_triples(self) -> frozenset[tuple[str, ArgKind, ArgKind]]:
        return frozenset(f.triple for f in self.funcs)


def classify_arg(node: Node) -> ArgKind:
    """FIELD for column references, LITERAL for everything else (computed values included)."""
    if node.kind in ("column", "star"):
        return ArgKind.FIELD
    return ArgKind.LITERAL


def function_use(node: Node) -> FunctionUse:
    """Summarize one func node: first argument kind, then a shared kind or VAR for the rest."""
    args = node.children
    argc = len(args)
    if argc == 0:
        return FunctionUse(node.value, 0, ArgKind.NONE, ArgKind.NONE)
    first = classify_arg(args[0])
    if argc == 1:
        return FunctionUse(node.value, 1, first, ArgKind.NONE)
    rest_kinds = {classify_arg(a) for a in args[1:]}
    rest = rest_kinds.pop() if len(rest_kinds) == 1 else ArgKind.VAR
    return FunctionUse(node.value, argc, first, rest)


def canonicalize(use: FunctionUse) -> FunctionUse:
    """A one-element IN list is the same check as `=`; fold it so training and
    enforcement agree regardless of how the server rewrites the query."""
    if use.name == "IN" and use.argc == 2:
        return FunctionUse("=", 2, use.first_arg, use.rest_arg)
    return use


def extract_signature(stmt: SqlStatement) -> QuerySignature:
    tables = set()
    funcs = {}
    for node in stmt.tree.walk():
        if node.kind == "table":
            tables.add(node.value)
        elif node.kind == "func":
            use = canonicalize(function_use(node))
            funcs.setdefault(use.triple, use)
    return QuerySignature(
        op=stmt.kind,
        tables=frozenset(tables),
        logic=frozenset(_lexical_logic(stmt.raw)),
        funcs=frozenset(funcs.values()),
    )


def _lexical_logic(raw: str) -> set[str]:
    # the logical-operator summary counts every AND/OR keyword outside
    # string literals and comments, BETWEEN's AND included
    found = set()
    for tok in tokenize(raw):
        if tok.kind is TokenKind.KEYWORD:
            upper = tok.text.upper()
            if upper in ("AND", "OR"):
                found.add(upper)
    return found
