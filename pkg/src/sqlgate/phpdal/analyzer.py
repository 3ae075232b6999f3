"""Database access layer resolution over a PHP source tree.

Builds the class dependency graph, resolves DB-API subclasses by
reachability from the seed classes, and finds database procedures:
functions whose returned object resolves to a DB-API subtype.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from sqlgate.errors import FormatError, PhpParseError
from sqlgate.phpdal.phpparse import (
    AssignRecord,
    NewExpr,
    PhpDecl,
    StringExpr,
    parse_php,
)

log = logging.getLogger(__name__)

DEFAULT_SEEDS = ("PDO", "mysqli")
DEFAULT_INITIALIZERS = ("mysqli_init", "mysqli_connect")


@dataclass
class Cdg:
    vertices: set[str] = field(default_factory=set)
    edges: set[tuple[str, str]] = field(default_factory=set)  # (child, parent)


@dataclass(frozen=True)
class DalSet:
    api_seeds: frozenset[str]
    subclasses: frozenset[str]
    procedures: frozenset[str]

    def is_dal_class(self, name: str) -> bool:
        return name.lower() in {c.lower() for c in self.subclasses}

    def is_procedure(self, identity: str) -> bool:
        return identity.lower() in {p.lower() for p in self.procedures}

    def fingerprint(self) -> str:
        return hashlib.sha256(serialize_dal(self).encode()).hexdigest()


def build_cdg(decls: list[PhpDecl]) -> Cdg:
    """Vertices for every class/interface plus referenced parents; one edge per relation."""
    cdg = Cdg()
    for decl in decls:
        if decl.kind not in ("class", "interface"):
            continue
        cdg.vertices.add(decl.name)
        parents = ([decl.extends] if decl.extends else []) + list(decl.implements)
        for parent in parents:
            cdg.vertices.add(parent)
            cdg.edges.add((decl.name, parent))
    return cdg


def resolve_dal_classes(
    cdg: Cdg,
    seeds: set[str] | frozenset[str],
    initializer_callers: set[str] | frozenset[str] = frozenset(),
) -> set[str]:
    """Transitive closure of vertices reaching a seed, plus classes whose
    methods call a recognized DB-API initializer."""
    lower_map: dict[str, str] = {}
    for v in sorted(cdg.vertices):
        lower_map.setdefault(v.lower(), v)
    children: dict[str, set[str]] = {}
    for child, parent in cdg.edges:
        children.setdefault(parent.lower(), set()).add(child)

    resolved: dict[str, str] = {}  # lower -> display name
    frontier = []
    for seed in seeds:
        display = lower_map.get(seed.lower(), seed)
        resolved[seed.lower()] = display
        frontier.append(seed.lower())
    for name in initializer_callers:
        if name.lower() not in resolved:
            resolved[name.lower()] = lower_map.get(name.lower(), name)
            frontier.append(name.lower())
    while frontier:
        current = frontier.pop()
        for child in children.get(current, ()):
            if child.lower() not in resolved:
                resolved[child.lower()] = child
                frontier.append(child.lower())
    return set(resolved.values())


def resolve_string_expr(expr: StringExpr, env: list[AssignRecord]) -> str:
    """Render a string expression as an anchored regex pattern.

    Literals are escaped verbatim, resolvable variables are inlined, and
    unresolved variables or call results widen to `.*`.
    """
    return _resolve(expr, env, frozenset())


def _resolve(expr: StringExpr, env: list[AssignRecord], seen: frozenset[str]) -> str:
    out = []
    for part in expr.parts:
        if part.kind == "literal":
            out.append(re.escape(part.value))
        elif part.kind == "variable":
            out.append(_resolve_var(part.value, env, seen))
        else:
            out.append(".*")
    return "".join(out) or ".*"


def _resolve_var(name: str, env: list[AssignRecord], seen: frozenset[str]) -> str:
    if name in seen:
        return ".*"
    for rec in reversed(env):  # the last assignment wins
        if rec.variable == name:
            if isinstance(rec.value, StringExpr):
                return _resolve(rec.value, env, seen | {name})
            return ".*"  # an object, not a string
    return ".*"


def find_db_procedures(decls: list[PhpDecl], dal_classes: set[str]) -> set[str]:
    """Functions returning an object of a DB-API subtype, run to a fixpoint so
    that wrappers around procedures are procedures too."""
    dal_lower = {c.lower() for c in dal_classes}
    funcs = [d for d in decls if d.kind in ("function", "method")]
    procedures: set[str] = set()
    proc_names: set[str] = set()  # lowercase identities and bare method names

    def returns_dal(decl: PhpDecl) -> bool:
        for ret in decl.returns:
            if ret.kind == "new":
                pattern = resolve_string_expr(ret.new.target, decl.assigns)
                if _pattern_matches_any(pattern, dal_classes):
                    return True
            elif ret.kind == "var":
                for rec in reversed(decl.assigns):
                    if rec.variable == ret.var:
                        if isinstance(rec.value, NewExpr):
                            pattern = resolve_string_expr(rec.value.target, decl.assigns)
                            if _pattern_matches_any(pattern, dal_classes):
                                return True
                        break
            elif ret.kind == "call" and ret.call in proc_names:
                return True
        return False

    changed = True
    while changed:
        changed = False
        for decl in funcs:
            if decl.identity in procedures:
                continue
            if decl.owner is not None and decl.owner.lower() in dal_lower:
                continue  # DAL-class methods are covered by the class itself
            if returns_dal(decl):
                procedures.add(decl.identity)
                proc_names.add(decl.identity.lower())
                proc_names.add(decl.name.lower())
                changed = True
    return procedures


def _pattern_matches_any(pattern: str, names: set[str]) -> bool:
    try:
        rx = re.compile(pattern, re.IGNORECASE)
    except re.error:
        return False
    return any(rx.fullmatch(name) for name in names)


def looks_like_php(path: Path) -> bool:
    if path.suffix.lower() != ".php":
        return False
    try:
        head = path.open("rb").read(256)
    except OSError:
        return False
    return b"<?php" in head


def analyze_corpus(
    root: str | Path,
    seeds: tuple[str, ...] = DEFAULT_SEEDS,
    initializers: tuple[str, ...] = DEFAULT_INITIALIZERS,
) -> DalSet:
    """Scan every PHP file under root and resolve the database access layer."""
    root = Path(root)
    decls: list[PhpDecl] = []
    for path in sorted(root.rglob("*.php")):
        if not looks_like_php(path):
            continue
        try:
            source = path.read_text(errors="replace")
        except OSError as exc:
            log.warning("cannot read %s: %s", path, exc)
            continue
        try:
            decls.extend(parse_php(source, str(path)))
        except PhpParseError as exc:
            log.warning("skipping %s: %s", path, exc)
    return analyze_decls(decls, seeds=seeds, initializers=initializers)


def analyze_decls(
    decls: list[PhpDecl],
    seeds: tuple[str, ...] = DEFAULT_SEEDS,
    initializers: tuple[str, ...] = DEFAULT_INITIALIZERS,
) -> DalSet:
    cdg = build_cdg(decls)
    init_lower = {i.lower() for i in initializers}
    callers = {
        decl.owner
        for decl in decls
        if decl.kind == "method" and decl.owner and (decl.calls & init_lower)
    }
    subclasses = resolve_dal_classes(cdg, set(seeds), callers)
    subclasses.update(seeds)
    procedures = find_db_procedures(decls, subclasses)
    return DalSet(
        api_seeds=frozenset(seeds),
        subclasses=frozenset(subclasses),
        procedures=frozenset(procedures),
    )


# ---------------------------------------------------------------------------
# file format: `S <ClassName>` and `P <identity>` lines, sorted


def serialize_dal(dal: DalSet) -> str:
    lines = ["# seeds " + " ".join(sorted(dal.api_seeds))]
    lines += sorted(f"S {name}" for name in dal.subclasses)
    lines += sorted(f"P {name}" for name in dal.procedures)
    return "\n".join(lines) + "\n"


def parse_dal(text: str) -> DalSet:
    seeds: list[str] = []
    subclasses = []
    procedures = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("seeds "):
                seeds = body.split()[1:]
            continue
        if line.startswith("S "):
            subclasses.append(line[2:].strip())
        elif line.startswith("P "):
            procedures.append(line[2:].strip())
        else:
            raise FormatError(lineno, "expected 'S <name>' or 'P <name>'")
    if not seeds:
        seeds = [s for s in DEFAULT_SEEDS if s in subclasses]
    return DalSet(
        api_seeds=frozenset(seeds),
        subclasses=frozenset(subclasses) | frozenset(seeds),
        procedures=frozenset(procedures),
    )


def load_dal(path: str | Path) -> DalSet:
    return parse_dal(Path(path).read_text())


def save_dal(dal: DalSet, path: str | Path) -> None:
    Path(path).write_text(serialize_dal(dal))
