"""ALLOW/BLOCK decisions for incoming tagged queries.

A query is allowed only when every one of its statements matches all
four components of at least one query descriptor recorded for the
function the tag attributes it to.  Everything abnormal folds into a
BLOCK verdict with a reason; nothing raises.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from sqlgate.errors import SqlGateError
from sqlgate.phpdal.analyzer import DalSet
from sqlgate.profiler import Profile, QueryDescriptor
from sqlgate.sqlmodel.parser import parse_statements
from sqlgate.sqlmodel.signature import QuerySignature, extract_signature
from sqlgate.tagging import attribute, decode_tag
from sqlgate.errors import MissingTag


class Reason(Enum):
    NO_PROFILE_ENTRY = "NoProfileEntry"
    NO_TAG_POLICY = "NoTagPolicy"
    PARSE_FAIL_POLICY = "ParseFailPolicy"
    OP_MISMATCH = "OpMismatch"
    TABLE_NOT_SUBSET = "TableNotSubset"
    COND_NOT_SUBSET = "CondNotSubset"
    FUNC_NOT_SUBSET = "FuncNotSubset"
    MULTI_STATEMENT = "MultiStatementPartBlocked"


@dataclass(frozen=True)
class Verdict:
    decision: str  # "ALLOW" | "BLOCK"
    reason: Reason | None = None
    matched_descriptor: int | None = None

    @property
    def allowed(self) -> bool:
        return self.decision == "ALLOW"

    def line(self) -> str:
        if self.allowed:
            return "ALLOW"
        return f"BLOCK {self.reason.value}"


ALLOW = Verdict("ALLOW")


def _block(reason: Reason) -> Verdict:
    return Verdict("BLOCK", reason)


@dataclass(frozen=True)
class EnforceConfig:
    untagged: str = "block"  # "allow" | "block"
    parsefail: str = "block"


@dataclass(frozen=True)
class ComponentMatch:
    op: bool
    tables: bool
    cond: bool
    funcs: bool

    @property
    def ok(self) -> bool:
        return self.op and self.tables and self.cond and self.funcs

    def first_failure(self) -> Reason:
        if not self.op:
            return Reason.OP_MISMATCH
        if not self.tables:
            return Reason.TABLE_NOT_SUBSET
        if not self.cond:
            return Reason.COND_NOT_SUBSET
        return Reason.FUNC_NOT_SUBSET

    @property
    def depth(self) -> int:
        for i, part in enumerate((self.op, self.tables, self.cond, self.funcs)):
            if not part:
                return i
        return 4


def match_descriptor(sig: QuerySignature, d: QueryDescriptor) -> ComponentMatch:
    """Four-component subset check of a signature against one descriptor."""
    return ComponentMatch(
        op=sig.op is d.op,
        tables=sig.tables <= d.tables,
        cond=sig.logic <= d.cond,
        funcs=all(_func_allowed(triple, d.funcs) for triple in sig.func_triples),
    )


def _func_allowed(triple, allowed) -> bool:
    if triple in allowed:
        return True
    # a recorded IN licenses the equality the server rewrites a
    # one-element IN list into, with the same argument kinds
    name, first, rest = triple
    if name == "=" and ("IN", first, rest) in allowed:
        return True
    return False


def signature_verdict(sig: QuerySignature, descriptors: list[QueryDescriptor]) -> Verdict:
    """Match one signature against a function's descriptor list."""
    if not descriptors:
        return _block(Reason.NO_PROFILE_ENTRY)
    best: ComponentMatch | None = None
    for index, descriptor in enumerate(descriptors):
        result = match_descriptor(sig, descriptor)
        if result.ok:
            return Verdict("ALLOW", matched_descriptor=index)
        if best is None or result.depth > best.depth:
            best = result
    return _block(best.first_failure())


def decide(
    tagged_query: str,
    profile: Profile,
    dal: DalSet,
    config: EnforceConfig = EnforceConfig(),
) -> Verdict:
    try:
        sql, tag = decode_tag(tagged_query)
    except MissingTag:
        return ALLOW if config.untagged == "allow" else _block(Reason.NO_TAG_POLICY)
    except SqlGateError:
        # tokenization failed before the tag could even be located
        return ALLOW if config.parsefail == "allow" else _block(Reason.PARSE_FAIL_POLICY)
    try:
        statements = parse_statements(sql)
    except SqlGateError:
        return ALLOW if config.parsefail == "allow" else _block(Reason.PARSE_FAIL_POLICY)
    if not statements:
        return ALLOW if config.parsefail == "allow" else _block(Reason.PARSE_FAIL_POLICY)

    function = attribute(tag, dal)
    descriptors = sorted(
        profile.descriptors_for(function),
        key=lambda d: (int(d.op), sorted(d.tables), sorted(d.cond), sorted(map(str, d.funcs))),
    )
    if not descriptors:
        return _block(Reason.NO_PROFILE_ENTRY)

    verdicts = [signature_verdict(extract_signature(s), descriptors) for s in statements]
    failed = [v for v in verdicts if not v.allowed]
    if not failed:
        return Verdict("ALLOW", matched_descriptor=verdicts[0].matched_descriptor)
    if len(statements) > 1:
        return _block(Reason.MULTI_STATEMENT)
    return failed[0]
