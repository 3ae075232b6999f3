"""PHP static analysis: database access layer resolution."""

from sqlgate.phpdal.analyzer import (
    Cdg,
    DEFAULT_INITIALIZERS,
    DEFAULT_SEEDS,
    DalSet,
    analyze_corpus,
    analyze_decls,
    build_cdg,
    find_db_procedures,
    load_dal,
    parse_dal,
    resolve_dal_classes,
    resolve_string_expr,
    save_dal,
    serialize_dal,
)
from sqlgate.phpdal.phpparse import (
    AssignRecord,
    NewExpr,
    PhpDecl,
    ReturnExpr,
    StringExpr,
    StringPart,
    parse_php,
)

__all__ = [
    "AssignRecord",
    "Cdg",
    "DEFAULT_INITIALIZERS",
    "DEFAULT_SEEDS",
    "DalSet",
    "NewExpr",
    "PhpDecl",
    "ReturnExpr",
    "StringExpr",
    "StringPart",
    "analyze_corpus",
    "analyze_decls",
    "build_cdg",
    "find_db_procedures",
    "load_dal",
    "parse_dal",
    "parse_php",
    "resolve_dal_classes",
    "resolve_string_expr",
    "save_dal",
    "serialize_dal",
]
