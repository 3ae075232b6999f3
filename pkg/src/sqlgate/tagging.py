"""Call-stack tags: the trailing comment that names who issued a query.

Wire convention: `<sql> # <f1>@<f2>@...@<fn>` with frames ordered
innermost call first.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from sqlgate.errors import InvalidFrame, MissingTag
from sqlgate.phpdal.analyzer import DalSet
from sqlgate.sqlmodel.tokenizer import TokenKind, tokenize

log = logging.getLogger(__name__)

_FORBIDDEN = set("@#\n")


@dataclass(frozen=True)
class FrameRef:
    identity: str  # "function" or "Class::method"

    def __post_init__(self):
        if not self.identity or _FORBIDDEN & set(self.identity):
            raise InvalidFrame(f"bad frame {self.identity!r}")

    @property
    def class_part(self) -> str | None:
        if "::" in self.identity:
            return self.identity.split("::", 1)[0]
        return None


@dataclass(frozen=True)
class CallStackTag:
    frames: tuple[FrameRef, ...]  # innermost call first

    def __post_init__(self):
        if not self.frames:
            raise InvalidFrame("a tag needs at least one frame")


def make_tag(*identities: str) -> CallStackTag:
    return CallStackTag(tuple(FrameRef(i) for i in identities))


def encode_tag(sql: str, tag: CallStackTag) -> str:
    joined = "@".join(f.identity for f in tag.frames)
    return f"{sql} # {joined}"


def decode_tag(tagged: str) -> tuple[str, CallStackTag]:
    """Split off the trailing call-stack comment.

    The split point is found by tokenizing, so `#` inside string
    literals never counts as a tag start.
    """
    tokens = tokenize(tagged)
    for tok in reversed(tokens):
        if tok.kind is TokenKind.COMMENT and tok.text.startswith("#"):
            if tok.end != tokens[-1].end:
                break  # not the trailing comment
            body = tok.text[1:].strip()
            if not body:
                break
            sql = tagged[: tok.start].rstrip()
            frames = tuple(FrameRef(part) for part in body.split("@") if part)
            if not frames:
                break
            return sql, CallStackTag(frames)
        break
    raise MissingTag("no trailing call-stack comment")


def attribute(tag: CallStackTag, dal: DalSet) -> str:
    """Walk past database access layer frames to the application function.

    If every frame belongs to the DAL, fall back to the outermost frame
    (logged as anomalous rather than failing the record).
    """
    for frame in tag.frames:
        cls = frame.class_part
        if cls is not None and dal.is_dal_class(cls):
            continue
        if dal.is_procedure(frame.identity):
            continue
        if cls is None and dal.is_dal_class(frame.identity):
            continue
        return frame.identity
    log.warning("all frames are in the database access layer: %s", tag)
    return tag.frames[-1].identity
