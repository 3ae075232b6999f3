"""Training records and profile construction.

A training record is the three-line layout produced while observing
benign traffic:

    <tagged query>
    <node info: @-joined walk of the statement tree>
    <tables>@<opcode>

The profile maps each attributed application function to its set of
query descriptors (operation, tables, logical operators, function
uses).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from sqlgate.errors import BuildFailed, FormatError, MalformedRecord, ParseError, SqlGateError
from sqlgate.phpdal.analyzer import DalSet
from sqlgate.sqlmodel.parser import Node, OpCode, SqlStatement, parse_statements
from sqlgate.sqlmodel.signature import ArgKind, QuerySignature, classify_arg, extract_signature
from sqlgate.tagging import attribute, decode_tag

log = logging.getLogger(__name__)

PROFILE_HEADER = "SQLBLOCK-PROFILE v1"

FuncTriple = tuple[str, ArgKind, ArgKind]


@dataclass(frozen=True)
class TrainingRecord:
    tagged_query: str
    node_info: str
    table_op: str

    def lines(self) -> str:
        return f"{self.tagged_query}\n{self.node_info}\n{self.table_op}\n"


@dataclass(frozen=True)
class QueryDescriptor:
    op: OpCode
    tables: frozenset[str]
    cond: frozenset[str]  # subset of {"AND", "OR"}
    funcs: frozenset[FuncTriple]

    @classmethod
    def from_signature(cls, sig: QuerySignature) -> "QueryDescriptor":
        return cls(sig.op, sig.tables, sig.logic, sig.func_triples)


@dataclass
class Profile:
    entries: dict[str, set[QueryDescriptor]] = field(default_factory=dict)
    dal_fingerprint: str = ""
    created_at: str = ""  # informational only; never serialized

    def add(self, function: str, descriptor: QueryDescriptor) -> None:
        self.entries.setdefault(function, set()).add(descriptor)

    def descriptors_for(self, function: str) -> set[QueryDescriptor]:
        return self.entries.get(function, set())

    def __eq__(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        return self.entries == other.entries and self.dal_fingerprint == other.dal_fingerprint


# ---------------------------------------------------------------------------
# recording


def node_info_tokens(stmt: SqlStatement) -> list[str]:
    """Pre-order walk emitting FIELD/LITERAL for atoms and
    FUNC:<name>@<argc> plus argument kinds for each function node."""
    out: list[str] = []
    _walk_info(stmt.tree, out)
    return out


def _walk_info(node: Node, out: list[str]) -> None:
    if node.kind in ("column", "star"):
        out.append("FIELD")
        return
    if node.kind in ("literal", "param"):
        out.append("LITERAL")
        return
    if node.kind == "func":
        out.append(f"FUNC:{node.value}@{len(node.children)}")
        for arg in node.children:
            out.append(classify_arg(arg).value)
        for arg in node.children:
            if arg.kind not in ("column", "star", "literal", "param"):
                _walk_funcs_only(arg, out)
        return
    if node.kind in ("table", "token"):
        return
    for child in node.children:
        _walk_info(child, out)


def _walk_funcs_only(node: Node, out: list[str]) -> None:
    # computed arguments: only their nested function uses get recorded
    if node.kind == "func":
        _walk_info(node, out)
        return
    for child in node.children:
        _walk_funcs_only(child, out)


def record_training(tagged_query: str) -> TrainingRecord:
    sql, _tag = decode_tag(tagged_query)
    statements = parse_statements(sql)
    if len(statements) != 1:
        raise ParseError(0, "exactly one statement per training record")
    stmt = statements[0]
    sig = extract_signature(stmt)
    tables = ",".join(sorted(sig.tables))
    return TrainingRecord(
        tagged_query=tagged_query,
        node_info="@".join(node_info_tokens(stmt)),
        table_op=f"{tables}@{int(sig.op)}",
    )


def descriptor_from_record(rec: TrainingRecord) -> QueryDescriptor:
    tables_part, _, op_part = rec.table_op.rpartition("@")
    try:
        op = OpCode(int(op_part))
    except ValueError as exc:
        raise MalformedRecord(3, f"bad opcode {op_part!r}") from exc
    tables = frozenset(t for t in tables_part.split(",") if t)
    try:
        sql, _tag = decode_tag(rec.tagged_query)
        stmt = parse_statements(sql)[0]
    except (SqlGateError, IndexError) as exc:
        raise MalformedRecord(1, f"query does not parse: {exc}") from exc
    sig = extract_signature(stmt)
    if sig.op is not op:
        raise MalformedRecord(3, f"opcode {int(op)} does not match statement kind {sig.op.name}")
    return QueryDescriptor(op=op, tables=tables, cond=sig.logic, funcs=sig.func_triples)


def build_profile(records: Iterable[TrainingRecord], dal: DalSet) -> Profile:
    profile = Profile(dal_fingerprint=dal.fingerprint())
    ok = 0
    for rec in records:
        try:
            _sql, tag = decode_tag(rec.tagged_query)
            function = attribute(tag, dal)
            descriptor = descriptor_from_record(rec)
        except SqlGateError as exc:
            log.warning("skipping training record: %s", exc)
            continue
        profile.add(function, descriptor)
        ok += 1
    if ok == 0:
        raise BuildFailed("no usable training records")
    return profile


# ---------------------------------------------------------------------------
# training log


def append_record(path: str | Path, rec: TrainingRecord) -> None:
    with open(path, "a") as fh:
        fh.write(rec.lines())
        fh.write("\n")
        fh.flush()


def read_training_log(path: str | Path) -> list[TrainingRecord]:
    records = []
    block: list[str] = []
    lines = Path(path).read_text().splitlines()
    for lineno, line in enumerate(lines + [""], 1):
        if line.strip():
            block.append(line)
            continue
        if not block:
            continue
        if len(block) != 3:
            raise MalformedRecord(lineno, f"expected 3 lines per record, got {len(block)}")
        records.append(TrainingRecord(block[0], block[1], block[2]))
        block = []
    return records


# ---------------------------------------------------------------------------
# profile file format


_COND_NAMES = {
    frozenset(): "none",
    frozenset({"AND"}): "and",
    frozenset({"OR"}): "or",
    frozenset({"AND", "OR"}): "both",
}
_COND_VALUES = {v: k for k, v in _COND_NAMES.items()}


def _descriptor_line(d: QueryDescriptor) -> str:
    tables = ",".join(sorted(d.tables))
    funcs = ";".join(
        f"{name}:{first.value}:{rest.value}"
        for name, first, rest in sorted(d.funcs, key=lambda t: (t[0], t[1].value, t[2].value))
    )
    return f"D {int(d.op)}|{tables}|{_COND_NAMES[d.cond]}|{funcs}"


def serialize_profile(profile: Profile) -> str:
    lines = [PROFILE_HEADER]
    if profile.dal_fingerprint:
        lines.append(f"# dal {profile.dal_fingerprint}")
    for function in sorted(profile.entries):
        lines.append(f"F {function}")
        lines.extend(sorted(_descriptor_line(d) for d in profile.entries[function]))
    return "\n".join(lines) + "\n"


def parse_profile(text: str) -> Profile:
    lines = text.splitlines()
    if not lines or lines[0].strip() != PROFILE_HEADER:
        raise FormatError(1, f"missing header {PROFILE_HEADER!r}")
    profile = Profile()
    current: str | None = None
    for lineno, line in enumerate(lines[1:], 2):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("dal "):
                profile.dal_fingerprint = body[4:].strip()
            continue
        if line.startswith("F "):
            current = line[2:].strip()
            profile.entries.setdefault(current, set())
            continue
        if line.startswith("D "):
            if current is None:
                raise FormatError(lineno, "descriptor before any function")
            profile.add(current, _parse_descriptor(line[2:], lineno))
            continue
        raise FormatError(lineno, f"unrecognized line {line!r}")
    return profile


def _parse_descriptor(body: str, lineno: int) -> QueryDescriptor:
    parts = body.split("|")
    if len(parts) != 4:
        raise FormatError(lineno, "expected 4 |-separated fields")
    op_part, tables_part, cond_part, funcs_part = parts
    try:
        op = OpCode(int(op_part))
    except ValueError as exc:
        raise FormatError(lineno, f"bad opcode {op_part!r}") from exc
    if cond_part not in _COND_VALUES:
        raise FormatError(lineno, f"bad cond {cond_part!r}")
    funcs = set()
    if funcs_part:
        for item in funcs_part.split(";"):
            bits = item.rsplit(":", 2)
            if len(bits) != 3:
                raise FormatError(lineno, f"bad function entry {item!r}")
            try:
                funcs.add((bits[0], ArgKind(bits[1]), ArgKind(bits[2])))
            except ValueError as exc:
                raise FormatError(lineno, f"bad argument kind in {item!r}") from exc
    return QueryDescriptor(
        op=op,
        tables=frozenset(t for t in tables_part.split(",") if t),
        cond=_COND_VALUES[cond_part],
        funcs=frozenset(funcs),
    )


def load_profile(path: str | Path) -> Profile:
    return parse_profile(Path(path).read_text())


def save_profile(profile: Profile, path: str | Path) -> None:
    Path(path).write_text(serialize_profile(profile))
