"""Statement splitting and parse trees for the supported SQL subset.

Supported statement kinds: SELECT (joins, UNION, subqueries in IN and
FROM), INSERT (VALUES and SELECT forms), UPDATE, DELETE, REPLACE, CALL
and SET.  Any other leading keyword yields an OTHER statement with a
flat token tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from sqlgate.errors import ParseError
from sqlgate.sqlmodel.tokenizer import SqlToken, TokenKind, string_value, tokenize


class OpCode(IntEnum):
    SELECT = 0
    INSERT = 1
    UPDATE = 2
    DELETE = 3
    REPLACE = 4
    CALL = 5
    SET = 6
    OTHER = 99


@dataclass
class Node:
    """Parse tree node.

    Kinds in use: select, insert, update, delete, replace, call, set,
    other, union, select_list, from, where, group, having, order,
    limit, on, set_list, values, table, subquery, column, star,
    literal, param, func, and, or, not, calc, token.
    """

    kind: str
    value: str = ""
    children: list["Node"] = field(default_factory=list)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class SqlStatement:
    kind: OpCode
    tree: Node
    raw: str


_COMPARISONS = {"=", ">", "<", ">=", "<=", "<>", "!=", "<=>"}
# <> and != are the same comparison; record both under the canonical symbol
_CANONICAL_CMP = {"!=": "<>", "<=>": "="}


def parse_statements(sql: str) -> list[SqlStatement]:
    """Split on top-level semicolons and parse each statement."""
    tokens = [t for t in tokenize(sql) if t.kind is not TokenKind.COMMENT]
    groups: list[list[SqlToken]] = []
    current: list[SqlToken] = []
    for tok in tokens:
        if tok.kind is TokenKind.PUNCTUATION and tok.text == ";":
            groups.append(current)
            current = []
        else:
            current.append(tok)
    groups.append(current)
    statements = []
    for group in groups:
        if not group:
            continue
        raw = sql[group[0].start:group[-1].end]
        statements.append(_parse_one(group, raw))
    return statements


def _parse_one(tokens: list[SqlToken], raw: str) -> SqlStatement:
    parser = _Parser(tokens)
    head = tokens[0]
    lead = head.text.upper() if head.kind is TokenKind.KEYWORD else ""
    if lead == "SELECT" or (head.kind is TokenKind.PUNCTUATION and head.text == "("):
        tree = parser.parse_select_union()
        parser.expect_end()
        return SqlStatement(OpCode.SELECT, tree, raw)
    if lead in ("INSERT", "REPLACE"):
        tree = parser.parse_insert(lead)
        parser.expect_end()
        return SqlStatement(OpCode[lead], tree, raw)
    if lead == "UPDATE":
        tree = parser.parse_update()
        parser.expect_end()
        return SqlStatement(OpCode.UPDATE, tree, raw)
    if lead == "DELETE":
        tree = parser.parse_delete()
        parser.expect_end()
        return SqlStatement(OpCode.DELETE, tree, raw)
    if lead == "CALL":
        tree = parser.parse_call()
        parser.expect_end()
        return SqlStatement(OpCode.CALL, tree, raw)
    if lead == "SET":
        return SqlStatement(OpCode.SET, _flat_tree("set", tokens), raw)
    return SqlStatement(OpCode.OTHER, _flat_tree("other", tokens), raw)


def _flat_tree(kind: str, tokens: list[SqlToken]) -> Node:
    return Node(kind, children=[Node("token", t.text) for t in tokens])


def normalize_table(name: str) -> str:
    """Lowercase and keep only the table part of a qualified name."""
    return name.split(".")[-1].lower()


class _Parser:
    def __init__(self, tokens: list[SqlToken]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers -------------------------------------------------

    def peek(self) -> SqlToken | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> SqlToken:
        tok = self.peek()
        if tok is None:
            raise ParseError(self._offset(), "more input")
        self.pos += 1
        return tok

    def _offset(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos].start
        return self.tokens[-1].end if self.tokens else 0

    def at_keyword(self, *names: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is TokenKind.KEYWORD and tok.text.upper() in names

    def take_keyword(self, *names: str) -> bool:
        if self.at_keyword(*names):
            self.pos += 1
            return True
        return False

    def expect_keyword(self, name: str) -> None:
        if not self.take_keyword(name):
            raise ParseError(self._offset(), name)

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is TokenKind.PUNCTUATION and tok.text == text

    def take_punct(self, text: str) -> bool:
        if self.at_punct(text):
            self.pos += 1
            return True
        return False

    def expect_punct(self, text: str) -> None:
        if not self.take_punct(text):
            raise ParseError(self._offset(), repr(text))

    def at_operator(self, *texts: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is TokenKind.OPERATOR and tok.text in texts

    def expect_end(self) -> None:
        if self.peek() is not None:
            raise ParseError(self._offset(), "end of statement")

    def name(self) -> str:
        """An identifier or quoted identifier; keywords not in a clause position also pass."""
        tok = self.peek()
        if tok is None:
            raise ParseError(self._offset(), "identifier")
        if tok.kind is TokenKind.IDENTIFIER:
            self.pos += 1
            return tok.text
        if tok.kind is TokenKind.QUOTED_IDENTIFIER:
            self.pos += 1
            return string_value(tok.text)
        raise ParseError(tok.start, "identifier")

    # -- SELECT --------------------------------------------------------

    def parse_select_union(self) -> Node:
        branches = [self.parse_select_branch()]
        while self.take_keyword("UNION"):
            self.take_keyword("ALL") or self.take_keyword("DISTINCT")
            branches.append(self.parse_select_branch())
        if len(branches) == 1:
            return branches[0]
        return Node("union", children=branches)

    def parse_select_branch(self) -> Node:
        if self.take_punct("("):
            inner = self.parse_select_union()
            self.expect_punct(")")
            return inner
        return self.parse_select_core()

    def parse_select_core(self) -> Node:
        self.expect_keyword("SELECT")
        self.take_keyword("DISTINCT") or self.take_keyword("ALL") or self.take_keyword("DISTINCTROW")
        children = [Node("select_list", children=self.select_items())]
        if self.take_keyword("FROM"):
            children.append(Node("from", children=self.table_refs()))
        if self.take_keyword("WHERE"):
            children.append(Node("where", children=[self.expr()]))
        if self.take_keyword("GROUP"):
            self.expect_keyword("BY")
            children.append(Node("group", children=self.expr_list()))
        if self.take_keyword("HAVING"):
            children.append(Node("having", children=[self.expr()]))
        if self.take_keyword("ORDER"):
            self.expect_keyword("BY")
            children.append(Node("order", children=self.order_items()))
        if self.take_keyword("LIMIT"):
            children.append(Node("limit", children=self.limit_clause()))
        return Node("select", children=children)

    def select_items(self) -> list[Node]:
        items = [self.select_item()]
        while self.take_punct(","):
            items.append(self.select_item())
        return items

    def select_item(self) -> Node:
        if self.at_operator("*"):
            self.next()
            return Node("star", "*")
        item = self.expr()
        if self.take_keyword("AS"):
            self.name()
        else:
            tok = self.peek()
            if tok is not None and tok.kind in (TokenKind.IDENTIFIER, TokenKind.QUOTED_IDENTIFIER):
                self.next()  # bare alias
        return item

    def table_refs(self) -> list[Node]:
        refs = self.table_factor()
        while True:
            if self.take_punct(","):
                refs.extend(self.table_factor())
                continue
            if self._take_join():
                refs.extend(self.table_factor())
                if self.take_keyword("ON"):
                    refs.append(Node("on", children=[self.expr()]))
                elif self.take_keyword("USING"):
                    self.expect_punct("(")
                    self.column_name()
                    while self.take_punct(","):
                        self.column_name()
                    self.expect_punct(")")
                continue
            break
        return refs

    def _take_join(self) -> bool:
        if self.take_keyword("JOIN") or self.take_keyword("STRAIGHT_JOIN"):
            return True
        if self.at_keyword("INNER", "CROSS"):
            self.next()
            self.expect_keyword("JOIN")
            return True
        if self.at_keyword("LEFT", "RIGHT"):
            self.next()
            self.take_keyword("OUTER")
            self.expect_keyword("JOIN")
            return True
        return False

    def table_factor(self) -> list[Node]:
        if self.take_punct("("):
            if self.at_keyword("SELECT") or self.at_punct("("):
                sub = self.parse_select_union()
                self.expect_punct(")")
                self._alias()
                return [Node("subquery", children=[sub])]
            refs = self.table_refs()
            self.expect_punct(")")
            return refs
        name = self.name()
        while self.take_punct("."):
            name += "." + self.name()
        self._alias()
        return [Node("table", normalize_table(name))]

    def _alias(self) -> None:
        if self.take_keyword("AS"):
            self.name()
            return
        tok = self.peek()
        if tok is not None and tok.kind in (TokenKind.IDENTIFIER, TokenKind.QUOTED_IDENTIFIER):
            self.next()

    def order_items(self) -> list[Node]:
        items = [self.expr()]
        self.take_keyword("ASC") or self.take_keyword("DESC")
        while self.take_punct(","):
            items.append(self.expr())
            self.take_keyword("ASC") or self.take_keyword("DESC")
        return items

    def limit_clause(self) -> list[Node]:
        items = [self.primary()]
        if self.take_punct(","):
            items.append(self.primary())
        elif self.take_keyword("OFFSET"):
            items.append(self.primary())
        return items

    # -- INSERT / REPLACE ----------------------------------------------

    def parse_insert(self, lead: str) -> Node:
        self.expect_keyword(lead)
        self.take_keyword("LOW_PRIORITY")
        self.take_keyword("IGNORE")
        self.take_keyword("INTO")
        name = self.name()
        while self.take_punct("."):
            name += "." + self.name()
        children: list[Node] = [Node("table", normalize_table(name))]
        if self.take_punct("("):
            self.column_name()
            while self.take_punct(","):
                self.column_name()
            self.expect_punct(")")
        if self.take_keyword("VALUES", "VALUE"):
            rows = []
            while True:
                self.expect_punct("(")
                rows.append(Node("values", children=self.expr_list()))
                self.expect_punct(")")
                if not self.take_punct(","):
                    break
            children.extend(rows)
        elif self.at_keyword("SELECT") or self.at_punct("("):
            children.append(self.parse_select_union())
        else:
            raise ParseError(self._offset(), "VALUES or SELECT")
        if self.take_keyword("ON"):
            self.expect_keyword("DUPLICATE")
            self.expect_keyword("KEY")
            self.expect_keyword("UPDATE")
            children.append(Node("set_list", children=self.assignments()))
        return Node(lead.lower(), children=children)

    # -- UPDATE / DELETE / CALL ----------------------------------------

    def parse_update(self) -> Node:
        self.expect_keyword("UPDATE")
        self.take_keyword("LOW_PRIORITY")
        self.take_keyword("IGNORE")
        children = list(self.table_refs())
        self.expect_keyword("SET")
        children.append(Node("set_list", children=self.assignments()))
        if self.take_keyword("WHERE"):
            children.append(Node("where", children=[self.expr()]))
        if self.take_keyword("ORDER"):
            self.expect_keyword("BY")
            children.append(Node("order", children=self.order_items()))
        if self.take_keyword("LIMIT"):
            children.append(Node("limit", children=self.limit_clause()))
        return Node("update", children=children)

    def assignments(self) -> list[Node]:
        # each SET pair is recorded as an `=` function use, mirroring how
        # the assignment shows up in the statement's parse tree
        pairs = [self.assignment()]
        while self.take_punct(","):
            pairs.append(self.assignment())
        return pairs

    def assignment(self) -> Node:
        col = self.column_name()
        if not self.at_operator("="):
            raise ParseError(self._offset(), "'='")
        self.next()
        return Node("func", "=", children=[col, self.expr()])

    def parse_delete(self) -> Node:
        self.expect_keyword("DELETE")
        self.expect_keyword("FROM")
        name = self.name()
        while self.take_punct("."):
            name += "." + self.name()
        children: list[Node] = [Node("table", normalize_table(name))]
        if self.take_keyword("WHERE"):
            children.append(Node("where", children=[self.expr()]))
        if self.take_keyword("ORDER"):
            self.expect_keyword("BY")
            children.append(Node("order", children=self.order_items()))
        if self.take_keyword("LIMIT"):
            children.append(Node("limit", children=self.limit_clause()))
        return Node("delete", children=children)

    def parse_call(self) -> Node:
        self.expect_keyword("CALL")
        name = self.name()
        while self.take_punct("."):
            name += "." + self.name()
        args: list[Node] = []
        if self.take_punct("("):
            if not self.at_punct(")"):
                args = self.expr_list()
            self.expect_punct(")")
        return Node("call", name, children=[Node("func", name.upper(), children=args)])

    # -- expressions ---------------------------------------------------

    def expr_list(self) -> list[Node]:
        items = [self.expr()]
        while self.take_punct(","):
            items.append(self.expr())
        return items

    def expr(self) -> Node:
        node = self.and_expr()
        while self.take_keyword("OR"):
            node = Node("or", children=[node, self.and_expr()])
        return node

    def and_expr(self) -> Node:
        node = self.not_expr()
        while self.take_keyword("AND"):
            node = Node("and", children=[node, self.not_expr()])
        return node

    def not_expr(self) -> Node:
        if self.take_keyword("NOT"):
            return Node("not", children=[self.not_expr()])
        return self.predicate()

    def predicate(self) -> Node:
        left = self.additive()
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.OPERATOR and tok.text in _COMPARISONS:
            self.next()
            op = _CANONICAL_CMP.get(tok.text, tok.text)
            return Node("func", op, children=[left, self.additive()])
        negated = self.take_keyword("NOT")
        if self.take_keyword("IN"):
            self.expect_punct("(")
            if self.at_keyword("SELECT") or self.at_punct("("):
                args = [self.parse_select_union()]
                args = [Node("subquery", children=args)]
            else:
                args = self.expr_list()
            self.expect_punct(")")
            return Node("func", "IN", children=[left] + args)
        if self.take_keyword("LIKE"):
            return Node("func", "LIKE", children=[left, self.additive()])
        if self.take_keyword("BETWEEN"):
            low = self.additive()
            self.expect_keyword("AND")
            high = self.additive()
            return Node("func", "BETWEEN", children=[left, low, high])
        if negated:
            raise ParseError(self._offset(), "IN, LIKE or BETWEEN")
        if self.take_keyword("IS"):
            self.take_keyword("NOT")
            tok = self.peek()
            if self.take_keyword("NULL", "TRUE", "FALSE", "UNKNOWN"):
                return Node("func", "IS", children=[left, Node("literal", tok.text.upper())])
            raise ParseError(self._offset(), "NULL")
        return left

    def additive(self) -> Node:
        node = self.multiplicative()
        parts = [node]
        while self.at_operator("+", "-"):
            self.next()
            parts.append(self.multiplicative())
        if len(parts) > 1:
            return Node("calc", children=parts)
        return node

    def multiplicative(self) -> Node:
        node = self.unary()
        parts = [node]
        while self.at_operator("*", "/", "%") or self.at_keyword("DIV", "MOD"):
            self.next()
            parts.append(self.unary())
        if len(parts) > 1:
            return Node("calc", children=parts)
        return node

    def unary(self) -> Node:
        if self.at_operator("-", "+", "!", "~"):
            self.next()
            return Node("calc", children=[self.unary()])
        return self.primary()

    def primary(self) -> Node:
        tok = self.peek()
        if tok is None:
            raise ParseError(self._offset(), "expression")
        if tok.kind in (TokenKind.STRING, TokenKind.NUMBER, TokenKind.HEX):
            self.next()
            return Node("literal", tok.text)
        if tok.kind is TokenKind.PARAMETER:
            self.next()
            return Node("param", "?")
        if tok.kind is TokenKind.KEYWORD and tok.text.upper() in ("NULL", "TRUE", "FALSE"):
            self.next()
            return Node("literal", tok.text.upper())
        if tok.kind is TokenKind.KEYWORD and tok.text.upper() == "EXISTS":
            self.next()
            self.expect_punct("(")
            sub = self.parse_select_union()
            self.expect_punct(")")
            return Node("func", "EXISTS", children=[Node("subquery", children=[sub])])
        if tok.kind is TokenKind.PUNCTUATION and tok.text == "(":
            self.next()
            if self.at_keyword("SELECT"):
                sub = self.parse_select_union()
                self.expect_punct(")")
                return Node("subquery", children=[sub])
            inner = self.expr()
            self.expect_punct(")")
            return inner
        if tok.kind in (TokenKind.IDENTIFIER, TokenKind.QUOTED_IDENTIFIER):
            name = self.name()
            if self.at_punct("("):
                return self.func_call(name)
            full = name
            while self.take_punct("."):
                if self.at_operator("*"):
                    self.next()
                    return Node("star", "*")
                full += "." + self.name()
            return Node("column", full.split(".")[-1].lower())
        raise ParseError(tok.start, "expression")

    def func_call(self, name: str) -> Node:
        self.expect_punct("(")
        args: list[Node] = []
        if self.at_operator("*"):  # COUNT(*)
            self.next()
            args = [Node("star", "*")]
        elif not self.at_punct(")"):
            self.take_keyword("DISTINCT")
            args = self.expr_list()
        self.expect_punct(")")
        return Node("func", name.upper(), children=args)

    def column_name(self) -> Node:
        name = self.name()
        while self.take_punct("."):
            name += "." + self.name()
        return Node("column", name.split(".")[-1].lower())
