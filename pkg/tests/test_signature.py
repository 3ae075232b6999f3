from sqlgate.sqlmodel.parser import OpCode, parse_statements
from sqlgate.sqlmodel.signature import ArgKind, extract_signature

F = ArgKind.FIELD
L = ArgKind.LITERAL
V = ArgKind.VAR
N = ArgKind.NONE


def sig(sql):
    return extract_signature(parse_statements(sql)[0])


def test_demo_query_signature():
    s = sig("SELECT * FROM public_info where id > 0")
    assert s.op is OpCode.SELECT
    assert s.tables == {"public_info"}
    assert s.logic == frozenset()
    assert s.func_triples == {(">", F, L)}
    (use,) = s.funcs
    assert use.argc == 2


def test_both_logical_operators():
    s = sig("SELECT * FROM t WHERE a=1 AND b=2 OR c=3")
    assert s.logic == {"AND", "OR"}


def test_in_with_mixed_argument_kinds_summarizes_to_var():
    s = sig("SELECT * FROM t WHERE a IN (1, x, 2)")
    assert ("IN", F, V) in s.func_triples
    use = next(u for u in s.funcs if u.name == "IN")
    assert use.argc == 4


def test_one_element_in_canonicalizes_to_equals():
    assert sig("SELECT * FROM t WHERE a IN (1)").func_triples == {("=", F, L)}
    assert sig("SELECT * FROM t WHERE a IN (1, 2)").func_triples == {("IN", F, L)}


def test_union_absorbs_tables():
    s = sig("SELECT a FROM t UNION SELECT b FROM u")
    assert s.op is OpCode.SELECT
    assert s.tables == {"t", "u"}


def test_subquery_tables_included():
    s = sig("SELECT * FROM t WHERE id IN (SELECT id FROM blocked)")
    assert s.tables == {"t", "blocked"}


def test_update_set_pairs_record_equals():
    s = sig("UPDATE wp_polls SET votes = 10 WHERE id = 4")
    assert s.op is OpCode.UPDATE
    assert s.func_triples == {("=", F, L)}
    assert s.logic == frozenset()


def test_literal_kinds():
    s = sig("SELECT * FROM t WHERE a = NULL OR b = ? OR c = 0xFF")
    assert s.func_triples == {("=", F, L)}


def test_field_to_field_comparison():
    s = sig("SELECT * FROM a, b WHERE a.id = b.a_id")
    assert s.func_triples == {("=", F, F)}


def test_nested_function_argument_is_computed():
    s = sig("SELECT * FROM t WHERE a = CHAR(49)")
    assert ("=", F, L) in s.func_triples
    assert ("CHAR", L, N) in s.func_triples


def test_zero_and_one_arg_functions():
    s = sig("SELECT * FROM t WHERE stamp > NOW() AND score < ROUND(total)")
    assert ("NOW", N, N) in s.func_triples
    assert ("ROUND", F, N) in s.func_triples


def test_between_counts_its_and_keyword():
    s = sig("SELECT * FROM t WHERE a BETWEEN 1 AND 5")
    assert ("BETWEEN", F, L) in s.func_triples
    assert s.logic == {"AND"}  # lexical rule: any AND outside strings/comments


def test_no_logic_when_and_only_in_string():
    s = sig("SELECT * FROM t WHERE a = 'this and that'")
    assert s.logic == frozenset()


def test_determinism_across_whitespace_and_comments():
    a = sig("SELECT * FROM t WHERE a = 1 AND b = 2")
    b = sig("SELECT  *  FROM t /* hi */ WHERE a = 1   AND b = 2 -- done")
    assert a == b


def test_other_statement_has_no_tables_or_funcs():
    s = sig("DROP TABLE users")
    assert s.op is OpCode.OTHER
    assert s.tables == frozenset()
    assert s.funcs == frozenset()
