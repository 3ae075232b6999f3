import logging

import pytest

from sqlgate.errors import InvalidFrame, MissingTag
from sqlgate.tagging import FrameRef, attribute, decode_tag, encode_tag, make_tag
from tests.conftest import DEMO_SQL, DEMO_TAGGED


def test_encode_demo_tag():
    tag = make_tag(
        "mysqli::multi_query",
        "DatabaseConnectionmysqli::multi_execute",
        "executeQuery",
        "get_public_info",
    )
    assert encode_tag(DEMO_SQL, tag) == DEMO_TAGGED


def test_decode_demo_tag():
    sql, tag = decode_tag(DEMO_TAGGED)
    assert sql == DEMO_SQL
    assert [f.identity for f in tag.frames] == [
        "mysqli::multi_query",
        "DatabaseConnectionmysqli::multi_execute",
        "executeQuery",
        "get_public_info",
    ]


def test_round_trip_preserves_everything():
    tag = make_tag("PDO::query", "main")
    sql, back = decode_tag(encode_tag("SELECT 1", tag))
    assert sql == "SELECT 1"
    assert back == tag


def test_hash_in_string_literal_is_not_the_tag():
    sql, tag = decode_tag("SELECT '# x' FROM t # main")
    assert sql == "SELECT '# x' FROM t"
    assert [f.identity for f in tag.frames] == ["main"]


def test_untagged_query_raises_missing_tag():
    with pytest.raises(MissingTag):
        decode_tag("SELECT * FROM t")
    with pytest.raises(MissingTag):
        decode_tag("SELECT * FROM t # ")  # empty tag body


def test_mid_query_comment_is_not_the_tag():
    with pytest.raises(MissingTag):
        decode_tag("SELECT 1 # note\nFROM t")


def test_frame_ref_rejects_separator_characters():
    for bad in ("a@b", "a#b", "a\nb", ""):
        with pytest.raises(InvalidFrame):
            FrameRef(bad)


def test_class_part():
    assert FrameRef("PDO::query").class_part == "PDO"
    assert FrameRef("main").class_part is None


def test_attribute_skips_dal_frames(demo_dal):
    _sql, tag = decode_tag(DEMO_TAGGED)
    assert attribute(tag, demo_dal) == "get_public_info"


def test_attribute_skips_procedures_by_bare_name(demo_dal):
    tag = make_tag("mysqli::query", "executeQuery", "list_orders")
    assert attribute(tag, demo_dal) == "list_orders"


def test_attribute_first_non_dal_frame_wins(demo_dal):
    tag = make_tag("mysqli::query", "helper_a", "helper_b")
    assert attribute(tag, demo_dal) == "helper_a"


def test_attribute_all_dal_falls_back_to_outermost(demo_dal, caplog):
    tag = make_tag("mysqli::query", "executeQuery")
    with caplog.at_level(logging.WARNING):
        assert attribute(tag, demo_dal) == "executeQuery"
    assert any("access layer" in r.message for r in caplog.records)
