import pytest

from sqlgate.enforcer import (
    EnforceConfig,
    Reason,
    Verdict,
    decide,
    match_descriptor,
    signature_verdict,
)
from sqlgate.profiler import QueryDescriptor
from sqlgate.sqlmodel.parser import OpCode, parse_statements
from sqlgate.sqlmodel.signature import ArgKind, extract_signature
from tests.conftest import DEMO_TAGGED

F = ArgKind.FIELD
L = ArgKind.LITERAL
V = ArgKind.VAR

TAG = " # executeQuery@get_public_info"


def sig(sql):
    return extract_signature(parse_statements(sql)[0])


def desc(op, tables, cond, funcs):
    return QueryDescriptor(op, frozenset(tables), frozenset(cond), frozenset(funcs))


DEMO_DESC = desc(OpCode.SELECT, {"public_info"}, set(), {(">", F, L)})


# ---------------------------------------------------------------------------
# single-descriptor matching


def test_demo_query_matches_its_descriptor():
    m = match_descriptor(sig("SELECT * FROM public_info where id > 0"), DEMO_DESC)
    assert m.ok
    assert m.depth == 4


def test_tautology_fails_on_cond():
    m = match_descriptor(
        sig("SELECT * FROM public_info where id > 0 OR 1 = 1"), DEMO_DESC
    )
    assert not m.ok
    assert m.first_failure() is Reason.COND_NOT_SUBSET


def test_union_fails_on_tables():
    m = match_descriptor(
        sig("SELECT * FROM public_info where id > 0 UNION SELECT pass FROM users"),
        DEMO_DESC,
    )
    assert m.first_failure() is Reason.TABLE_NOT_SUBSET


def test_wrong_operation_fails_on_op():
    m = match_descriptor(sig("DELETE FROM public_info WHERE id > 0"), DEMO_DESC)
    assert m.first_failure() is Reason.OP_MISMATCH


def test_new_function_fails_on_funcs():
    m = match_descriptor(
        sig("SELECT * FROM public_info where id > SLEEP(5)"), DEMO_DESC
    )
    assert m.first_failure() is Reason.FUNC_NOT_SUBSET


def test_subset_is_enough():
    wide = desc(OpCode.SELECT, {"a", "b"}, {"AND", "OR"}, {("=", F, L), (">", F, L)})
    assert match_descriptor(sig("SELECT * FROM a WHERE x = 1"), wide).ok
    assert match_descriptor(sig("SELECT * FROM a"), wide).ok  # empty funcs/cond


def test_literal_kind_must_match():
    d = desc(OpCode.SELECT, {"t"}, set(), {("=", F, L)})
    assert match_descriptor(sig("SELECT * FROM t WHERE a = 1"), d).ok
    assert not match_descriptor(sig("SELECT * FROM t WHERE a = b"), d).ok


def test_recorded_in_licenses_equality():
    d = desc(OpCode.SELECT, {"t"}, set(), {("IN", F, L)})
    assert match_descriptor(sig("SELECT * FROM t WHERE a IN (1, 2)"), d).ok
    assert match_descriptor(sig("SELECT * FROM t WHERE a = 1"), d).ok
    # same kinds only: field-to-field equality stays blocked
    assert not match_descriptor(sig("SELECT * FROM t WHERE a = b"), d).ok


def test_recorded_equality_covers_one_element_in():
    d = desc(OpCode.SELECT, {"t"}, set(), {("=", F, L)})
    # one-element IN canonicalizes to = at extraction, so it matches
    assert match_descriptor(sig("SELECT * FROM t WHERE a IN (1)"), d).ok
    assert not match_descriptor(sig("SELECT * FROM t WHERE a IN (1, 2)"), d).ok


# ---------------------------------------------------------------------------
# descriptor-list verdicts


def test_verdict_empty_list_is_no_profile_entry():
    v = signature_verdict(sig("SELECT 1"), [])
    assert v.line() == "BLOCK NoProfileEntry"


def test_verdict_reports_matched_descriptor_index():
    other = desc(OpCode.DELETE, {"t"}, set(), set())
    v = signature_verdict(
        sig("SELECT * FROM public_info where id > 0"), [other, DEMO_DESC]
    )
    assert v.allowed
    assert v.matched_descriptor == 1


def test_verdict_reason_comes_from_deepest_near_miss():
    # one descriptor fails at op, another only at funcs: report funcs
    far = desc(OpCode.DELETE, {"public_info"}, set(), {(">", F, L)})
    near = desc(OpCode.SELECT, {"public_info"}, set(), set())
    v = signature_verdict(sig("SELECT * FROM public_info where id > 0"), [far, near])
    assert v.line() == "BLOCK FuncNotSubset"


# ---------------------------------------------------------------------------
# end-to-end decisions


def test_decide_allows_demo_query(demo_profile, demo_dal):
    v = decide(DEMO_TAGGED, demo_profile, demo_dal)
    assert v.allowed
    assert v.line() == "ALLOW"


def test_decide_blocks_tautology(demo_profile, demo_dal):
    v = decide(
        "SELECT * FROM public_info where id > 0 OR 1 = 1" + TAG,
        demo_profile,
        demo_dal,
    )
    assert v.line() == "BLOCK CondNotSubset"


def test_decide_blocks_piggyback_as_multi_statement(demo_profile, demo_dal):
    v = decide(
        "SELECT * FROM public_info where id > 0; DROP TABLE public_info" + TAG,
        demo_profile,
        demo_dal,
    )
    assert v.line() == "BLOCK MultiStatementPartBlocked"


def test_decide_multi_statement_all_benign_allowed(demo_profile, demo_dal):
    v = decide(
        "SELECT * FROM public_info where id > 1; "
        "SELECT * FROM public_info where id > 2" + TAG,
        demo_profile,
        demo_dal,
    )
    assert v.allowed


def test_decide_unknown_function_is_no_profile_entry(demo_profile, demo_dal):
    v = decide("SELECT 1 # executeQuery@mystery_func", demo_profile, demo_dal)
    assert v.line() == "BLOCK NoProfileEntry"


def test_decide_untagged_policy(demo_profile, demo_dal):
    blocked = decide("SELECT * FROM public_info", demo_profile, demo_dal)
    assert blocked.line() == "BLOCK NoTagPolicy"
    allowed = decide(
        "SELECT * FROM public_info",
        demo_profile,
        demo_dal,
        EnforceConfig(untagged="allow"),
    )
    assert allowed.allowed


def test_decide_parsefail_policy(demo_profile, demo_dal):
    broken = "SELECT 'unterminated" + TAG
    blocked = decide(broken, demo_profile, demo_dal)
    assert blocked.line() == "BLOCK ParseFailPolicy"
    allowed = decide(
        broken, demo_profile, demo_dal, EnforceConfig(parsefail="allow")
    )
    assert allowed.allowed


def test_decide_empty_sql_uses_parsefail_policy(demo_profile, demo_dal):
    v = decide(" ; " + TAG.lstrip(), demo_profile, demo_dal)
    assert v.line() == "BLOCK ParseFailPolicy"


def test_decide_never_raises_on_hostile_input(demo_profile, demo_dal):
    for hostile in (
        "",
        "#",
        "\x00\x01" + TAG,
        "SELECT /* " + TAG,
        ");--" + TAG,
    ):
        v = decide(hostile, demo_profile, demo_dal)
        assert isinstance(v, Verdict)
        assert not v.allowed
