"""SQL subset tokenizer, parser, and signature extraction."""

from sqlgate.sqlmodel.parser import Node, OpCode, SqlStatement, normalize_table, parse_statements
from sqlgate.sqlmodel.signature import (
    ArgKind,
    FunctionUse,
    QuerySignature,
    extract_signature,
)
from sqlgate.sqlmodel.tokenizer import SqlToken, TokenKind, reconstruct, tokenize

__all__ = [
    "ArgKind",
    "FunctionUse",
    "Node",
    "OpCode",
    "QuerySignature",
    "SqlStatement",
    "SqlToken",
    "TokenKind",
    "extract_signature",
    "normalize_table",
    "parse_statements",
    "reconstruct",
    "tokenize",
]
