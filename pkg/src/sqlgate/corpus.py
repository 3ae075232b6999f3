"""Benign/malicious scenario generation for the eight SQL-injection categories.

Each scenario bundles tagged benign queries (the training set), tagged
malicious variants that must be blocked, and the verdict reason the
category predicts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from sqlgate.enforcer import EnforceConfig, Reason, decide
from sqlgate.errors import FormatError, UnknownCategory
from sqlgate.phpdal.analyzer import DalSet
from sqlgate.profiler import Profile, build_profile, record_training

CATEGORIES = (
    "Tautologies",
    "Illegal/Logically incorrect Queries",
    "Union Query",
    "Piggy-backed Query",
    "Stored procedures",
    "Inference",
    "Alternate Encoding",
    "Second order injections",
)

# the parse-failure probing category is handled by policy, not by the profile
UNDEFENDED = "Illegal/Logically incorrect Queries"


@dataclass(frozen=True)
class Scenario:
    name: str
    category: str
    benign: tuple[str, ...]
    malicious: tuple[str, ...]
    expected_reason: Reason

    @property
    def defended(self) -> bool:
        return self.category != UNDEFENDED


@dataclass(frozen=True)
class Context:
    table: str = "public_info"
    function: str = "get_public_info"
    secret_table: str = "secrets"


def generate(category: str, context: Context = Context()) -> Scenario:
    """Deterministic scenario for one category."""
    t = context.table
    fn = context.function
    base = f"SELECT * FROM {t} WHERE id = 1 # {fn}"
    if category == "Tautologies":
        return Scenario(
            name=f"tautology-{t}",
            category=category,
            benign=(base,),
            malicious=(f"SELECT * FROM {t} WHERE id = 1 OR 1 = 1 # {fn}",),
            expected_reason=Reason.COND_NOT_SUBSET,
        )
    if category == UNDEFENDED:
        return Scenario(
            name=f"illegal-{t}",
            category=category,
            benign=(base,),
            malicious=(f"SELECT * FROM {t} WHERE id = ' # {fn}",),
            expected_reason=Reason.PARSE_FAIL_POLICY,
        )
    if category == "Union Query":
        return Scenario(
            name=f"union-{t}",
            category=category,
            benign=(base,),
            malicious=(
                f"SELECT * FROM {t} WHERE id = 1 UNION SELECT * FROM {context.secret_table} # {fn}",
            ),
            expected_reason=Reason.TABLE_NOT_SUBSET,
        )
    if category == "Piggy-backed Query":
        return Scenario(
            name=f"piggyback-{t}",
            category=category,
            benign=(base,),
            malicious=(f"SELECT * FROM {t} WHERE id = 1; DROP TABLE {t} # {fn}",),
            expected_reason=Reason.MULTI_STATEMENT,
        )
    if category == "Stored procedures":
        return Scenario(
            name=f"storedproc-{t}",
            category=category,
            benign=(base,),
            malicious=(f"CALL dump_to_file('/tmp/out') # {fn}",),
            expected_reason=Reason.OP_MISMATCH,
        )
    if category == "Inference":
        return Scenario(
            name=f"inference-{t}",
            category=category,
            benign=(f"SELECT * FROM {t} WHERE id = 1 AND active = 1 # {fn}",),
            malicious=(f"SELECT * FROM {t} WHERE id = 1 AND SLEEP(5) = 0 # {fn}",),
            expected_reason=Reason.FUNC_NOT_SUBSET,
        )
    if category == "Alternate Encoding":
        return Scenario(
            name=f"altencoding-{t}",
            category=category,
            benign=(base,),
            malicious=(f"SELECT * FROM {t} WHERE id = CHAR(49) # {fn}",),
            expected_reason=Reason.FUNC_NOT_SUBSET,
        )
    if category == "Second order injections":
        return Scenario(
            name=f"secondorder-{t}",
            category=category,
            benign=(base,),
            malicious=(f"SELECT * FROM {t} WHERE id = 1 # {fn}_stored_payload",),
            expected_reason=Reason.NO_PROFILE_ENTRY,
        )
    raise UnknownCategory(category)


def generate_all(prefix: str = "app") -> list[Scenario]:
    """One scenario per category, each over its own table and function."""
    scenarios = []
    for i, category in enumerate(CATEGORIES):
        context = Context(
            table=f"{prefix}_table_{i}",
            function=f"{prefix}_func_{i}",
            secret_table=f"{prefix}_secret_{i}",
        )
        scenarios.append(generate(category, context))
    return scenarios


# ---------------------------------------------------------------------------
# replay


@dataclass
class ScenarioResult:
    scenario: Scenario
    benign_allowed: int = 0
    benign_blocked: int = 0
    malicious_blocked: int = 0
    malicious_allowed: int = 0
    reasons: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        if not self.scenario.defended:
            return self.benign_blocked == 0
        return self.benign_blocked == 0 and self.malicious_allowed == 0


@dataclass
class ReplayReport:
    results: list[ScenarioResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def render(self) -> str:
        lines = [
            f"{'scenario':<28} {'category':<38} {'benign ok':>9} {'blocked':>7} "
            f"{'mal blocked':>11} {'mal allowed':>11}  reasons"
        ]
        for r in self.results:
            note = "" if r.scenario.defended else " [policy: not defended]"
            lines.append(
                f"{r.scenario.name:<28} {r.scenario.category:<38} {r.benign_allowed:>9} "
                f"{r.benign_blocked:>7} {r.malicious_blocked:>11} {r.malicious_allowed:>11}  "
                f"{','.join(sorted(set(r.reasons)))}{note}"
            )
        lines.append("RESULT: " + ("PASS" if self.ok else "FAIL"))
        return "\n".join(lines)


def replay(
    scenarios: list[Scenario],
    profile: Profile,
    dal: DalSet,
    config: EnforceConfig = EnforceConfig(),
) -> ReplayReport:
    results = []
    for scenario in scenarios:
        result = ScenarioResult(scenario)
        for query in scenario.benign:
            if decide(query, profile, dal, config).allowed:
                result.benign_allowed += 1
            else:
                result.benign_blocked += 1
        for query in scenario.malicious:
            verdict = decide(query, profile, dal, config)
            if verdict.allowed:
                result.malicious_allowed += 1
            else:
                result.malicious_blocked += 1
                result.reasons.append(verdict.reason.value)
        results.append(result)
    return ReplayReport(results)


def train_profile(scenarios: list[Scenario], dal: DalSet) -> Profile:
    """Profile built from every scenario's benign set."""
    records = [record_training(q) for s in scenarios for q in s.benign]
    return build_profile(records, dal)


# ---------------------------------------------------------------------------
# randomized benign workloads (closure testing)


def synthetic_dal() -> DalSet:
    """DAL used by the synthetic workloads: one shared query helper."""
    return DalSet(
        api_seeds=frozenset({"mysqli"}),
        subclasses=frozenset({"mysqli"}),
        procedures=frozenset({"db_helper"}),
    )


def random_benign_workload(
    seed: int, n_functions: int = 20, n_queries: int = 1000
) -> list[str]:
    """Tagged benign queries with randomized literals over a fixed set of
    synthetic functions; structure is drawn per function so repeated
    generation with a different seed keeps the same descriptors."""
    rng = random.Random(seed)
    queries = []
    for i in range(n_queries):
        f = i % n_functions
        fn = f"synthetic_func_{f}"
        t = f"synthetic_table_{f}"
        shape = f % 5
        v = rng.randint(1, 10_000)
        w = rng.randint(1, 10_000)
        if shape == 0:
            sql = f"SELECT * FROM {t} WHERE id = {v}"
        elif shape == 1:
            sql = f"SELECT name, score FROM {t} WHERE id > {v} AND score <= {w}"
        elif shape == 2:
            sql = f"UPDATE {t} SET score = {v} WHERE id IN ({v}, {w}, {v + 1})"
        elif shape == 3:
            sql = f"INSERT INTO {t} (id, name) VALUES ({v}, 'user_{w}')"
        else:
            sql = f"DELETE FROM {t} WHERE id = {v} OR score = {w}"
        queries.append(f"{sql} # db_helper@{fn}")
    return queries


# ---------------------------------------------------------------------------
# corpus directory layout: one scenario file per case


def scenario_to_text(scenario: Scenario) -> str:
    lines = [
        f"NAME: {scenario.name}",
        f"CATEGORY: {scenario.category}",
        f"EXPECT: {scenario.expected_reason.value}",
        "BENIGN:",
        *scenario.benign,
        "MALICIOUS:",
        *scenario.malicious,
    ]
    return "\n".join(lines) + "\n"


def scenario_from_text(text: str) -> Scenario:
    name = category = expect = None
    benign: list[str] = []
    malicious: list[str] = []
    section: list[str] | None = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("NAME:"):
            name = line[5:].strip()
        elif line.startswith("CATEGORY:"):
            category = line[9:].strip()
        elif line.startswith("EXPECT:"):
            expect = line[7:].strip()
        elif line.strip() == "BENIGN:":
            section = benign
        elif line.strip() == "MALICIOUS:":
            section = malicious
        elif section is not None:
            section.append(line.rstrip("\n"))
        else:
            raise FormatError(lineno, "query line outside BENIGN/MALICIOUS sections")
    if not (name and category and expect):
        raise FormatError(0, "scenario needs NAME, CATEGORY and EXPECT")
    if category not in CATEGORIES:
        raise UnknownCategory(category)
    try:
        reason = Reason(expect)
    except ValueError as exc:
        raise FormatError(0, f"unknown reason {expect!r}") from exc
    return Scenario(name, category, tuple(benign), tuple(malicious), reason)


def save_corpus(scenarios: list[Scenario], directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for scenario in scenarios:
        (directory / f"{scenario.name}.scenario").write_text(scenario_to_text(scenario))


def load_corpus(directory: str | Path) -> list[Scenario]:
    directory = Path(directory)
    scenarios = []
    for path in sorted(directory.glob("*.scenario")):
        scenarios.append(scenario_from_text(path.read_text()))
    return scenarios
