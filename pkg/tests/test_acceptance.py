"""End-to-end acceptance gate.

Each test covers one release criterion and prints a single PASS line on
success (pytest reports the FAIL line if the assertions trip).
"""

import random
import socket
import socketserver
import threading
import time

from sqlgate import corpus as corpus_mod
from sqlgate.enforcer import Reason, decide, signature_verdict
from sqlgate.gateway.cli import main, run_bench, bench_queries, _percentiles
from sqlgate.gateway.config import GateConfig
from sqlgate.gateway.server import GateClient, GateServer, recv_frame, send_frame
from sqlgate.phpdal.analyzer import analyze_corpus, save_dal
from sqlgate.profiler import (
    QueryDescriptor,
    build_profile,
    load_profile,
    record_training,
    save_profile,
)
from sqlgate.sqlmodel.parser import OpCode, parse_statements
from sqlgate.sqlmodel.signature import ArgKind, FunctionUse, QuerySignature, extract_signature
from tests.conftest import DEMO_SQL, DEMO_TAGGED, FIXTURES

F = ArgKind.FIELD
L = ArgKind.LITERAL
V = ArgKind.VAR
N = ArgKind.NONE


def _report(name):
    print(f"[PRIMARY] {name}: PASS", flush=True)


def desc(op, tables, cond, funcs):
    return QueryDescriptor(op, frozenset(tables), frozenset(cond), frozenset(funcs))


# ---------------------------------------------------------------------------
# criterion 1: reference pipeline on the demo webapp, byte-exact, under 1s


def test_criterion_1_demo_pipeline_golden():
    start = time.perf_counter()

    dal = analyze_corpus(FIXTURES / "webapp_demo", seeds=("mysqli",))
    assert dal.subclasses == {"mysqli", "DatabaseConnectionmysqli"}
    assert dal.procedures == {"executeQuery"}

    rec = record_training(DEMO_TAGGED)
    assert rec.lines() == (
        f"{DEMO_TAGGED}\n"
        "FIELD@FUNC:>@2@FIELD@LITERAL\n"
        "public_info@0\n"
    )

    profile = build_profile([rec], dal)
    assert set(profile.entries) == {"get_public_info"}
    assert profile.descriptors_for("get_public_info") == {
        desc(OpCode.SELECT, {"public_info"}, set(), {(">", F, L)})
    }

    assert decide(DEMO_TAGGED, profile, dal).line() == "ALLOW"
    tainted = DEMO_SQL + " OR 1 = 1 # executeQuery@get_public_info"
    assert decide(tainted, profile, dal).line() == "BLOCK CondNotSubset"

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"pipeline took {elapsed:.3f}s"
    _report("criterion 1: demo pipeline golden outputs in under 1s")


# ---------------------------------------------------------------------------
# criterion 2: eleven recorded application shapes with their exploits

ROWS = [
    # (function, benign queries, expected descriptor, [(exploit, reason)])
    (
        "row1_modals",
        ["UPDATE wp_em_modals SET active = 1 WHERE id IN (2, 3)"],
        desc(OpCode.UPDATE, {"wp_em_modals"}, set(), {("=", F, L), ("IN", F, L)}),
        [
            ("UPDATE wp_em_modals SET active = 1 WHERE id IN (2, 3) OR 1 = 1",
             Reason.COND_NOT_SUBSET),
            ("UPDATE wp_em_modals SET active = 1 WHERE id IN (2, SLEEP(5))",
             Reason.FUNC_NOT_SUBSET),
            ("UPDATE wp_em_modals SET active = CHAR(50) WHERE id IN (2, 3)",
             Reason.FUNC_NOT_SUBSET),
        ],
    ),
    (
        "row2_polls",
        ["UPDATE wp_polls SET votes = 9 WHERE id = 3"],
        desc(OpCode.UPDATE, {"wp_polls"}, set(), {("=", F, L)}),
        [
            ("UPDATE wp_polls SET votes = 9 WHERE id = 3 OR 1 = 1",
             Reason.COND_NOT_SUBSET),
        ],
    ),
    (
        "row3_submits",
        ["SELECT * FROM wp_formmaker_submits WHERE form_id = 2 AND user_id = 7"],
        desc(OpCode.SELECT, {"wp_formmaker_submits"}, {"AND"}, {("=", F, L)}),
        [
            ("SELECT * FROM wp_formmaker_submits WHERE form_id = 2 AND user_id = 7; "
             "DELETE FROM wp_formmaker_submits", Reason.MULTI_STATEMENT),
        ],
    ),
    (
        "row4_posts",
        ["SELECT ID, post_title FROM wp_posts "
         "WHERE post_status = 'publish' AND post_type = 'post'"],
        desc(OpCode.SELECT, {"wp_posts"}, {"AND"}, {("=", F, L)}),
        [
            ("SELECT ID, post_title FROM wp_posts "
             "WHERE post_status = 'publish' AND post_type = 'post' "
             "UNION SELECT user_login, user_pass FROM wp_users",
             Reason.TABLE_NOT_SUBSET),
        ],
    ),
    (
        "row5_login",
        ["SELECT id, name FROM users WHERE login = 'bob' AND pass = 'pw'"],
        desc(OpCode.SELECT, {"users"}, {"AND"}, {("=", F, L)}),
        [
            ("SELECT id, name FROM users WHERE login = 'bob' AND pass = 'pw' OR 1 = 1",
             Reason.COND_NOT_SUBSET),
            ("SELECT id, name FROM users WHERE login = 'bob' AND pass = 'pw' "
             "UNION SELECT login, pass FROM admins", Reason.TABLE_NOT_SUBSET),
            ("SELECT id, name FROM users WHERE login = 'bob' AND pass = 'pw'; "
             "DROP TABLE users", Reason.MULTI_STATEMENT),
            ("CALL backup_to_disk('/tmp/x')", Reason.OP_MISMATCH),
            ("SELECT id, name FROM users WHERE login = 'bob' AND SLEEP(5) = 0",
             Reason.FUNC_NOT_SUBSET),
            ("SELECT id, name FROM users WHERE login = CHAR(98) AND pass = 'pw'",
             Reason.FUNC_NOT_SUBSET),
        ],
    ),
    (
        "row6_join",
        ["SELECT users.name, fields.label FROM users, languages, fields "
         "WHERE users.lang = languages.id AND fields.owner = users.id "
         "AND (users.role = 'admin' OR users.id IN (7, 8))"],
        desc(
            OpCode.SELECT,
            {"users", "languages", "fields"},
            {"AND", "OR"},
            {("=", F, F), ("=", F, L), ("IN", F, L)},
        ),
        [
            ("SELECT users.name, fields.label FROM users, languages, fields "
             "WHERE users.lang = languages.id AND fields.owner = users.id "
             "AND (users.role = 'admin' OR users.id IN (SELECT id FROM blocked))",
             Reason.TABLE_NOT_SUBSET),
        ],
    ),
    (
        "row7_ordering",
        ["UPDATE js_jobs_fieldsordering SET ordering = 3 WHERE fieldid = 12"],
        desc(OpCode.UPDATE, {"js_jobs_fieldsordering"}, set(), {("=", F, L)}),
        [
            ("UPDATE js_jobs_fieldsordering SET ordering = 3 "
             "WHERE fieldid = 12 AND EXTRACTVALUE(1, 'x') = 1",
             Reason.COND_NOT_SUBSET),
        ],
    ),
    (
        "row8_gallery",
        ["SELECT * FROM jephotogallery WHERE cat_id = 5"],
        desc(OpCode.SELECT, {"jephotogallery"}, set(), {("=", F, L)}),
        [
            ("SELECT * FROM jephotogallery WHERE cat_id = 5 "
             "UNION SELECT username, password, 1 FROM jos_users",
             Reason.TABLE_NOT_SUBSET),
        ],
    ),
    (
        "row9_captcha",
        ["INSERT INTO jquickcontanct_captach (code, stamp) VALUES ('ab12', 99)"],
        desc(OpCode.INSERT, {"jquickcontanct_captach"}, set(), set()),
        [
            ("CALL sp_addlogin('eve')", Reason.OP_MISMATCH),
        ],
    ),
    (
        "row10_styles",
        ["SELECT params FROM template_styles WHERE home = 1"],
        desc(OpCode.SELECT, {"template_styles"}, set(), {("=", F, L)}),
        [],  # its exploit is a second-order retag, handled below
    ),
    (
        "row11_actions",
        ["SELECT product_id FROM catalog_product_frontend_action "
         "WHERE added_at >= 100 AND added_at <= 200"],
        desc(
            OpCode.SELECT,
            {"catalog_product_frontend_action"},
            {"AND"},
            {(">=", F, L), ("<=", F, L)},
        ),
        [
            ("SELECT product_id FROM catalog_product_frontend_action "
             "WHERE added_at >= 100 AND added_at <= 200 OR visitor_id = 5",
             Reason.COND_NOT_SUBSET),
        ],
    ),
]


def test_criterion_2_recorded_shapes_and_exploits():
    dal = corpus_mod.synthetic_dal()
    records = [
        record_training(f"{sql} # db_helper@{fn}")
        for fn, benign, _d, _x in ROWS
        for sql in benign
    ]
    profile = build_profile(records, dal)

    assert len(ROWS) == 11
    for fn, benign, expected, exploits in ROWS:
        assert profile.descriptors_for(fn) == {expected}, fn
        for sql in benign:
            assert decide(f"{sql} # db_helper@{fn}", profile, dal).allowed, sql
        for sql, reason in exploits:
            verdict = decide(f"{sql} # db_helper@{fn}", profile, dal)
            assert not verdict.allowed, sql
            assert verdict.reason is reason, (sql, verdict.reason)

    # the second-order exploit: identical SQL attributed to a function
    # that never issued queries during training
    retagged = f"{ROWS[9][1][0]} # db_helper@stored_payload_sink"
    verdict = decide(retagged, profile, dal)
    assert verdict.reason is Reason.NO_PROFILE_ENTRY
    _report("criterion 2: 11 recorded shapes, exploits blocked with predicted reasons")


# ---------------------------------------------------------------------------
# criterion 3: category corpus replay through the CLI


def test_criterion_3_category_corpus_via_cli(tmp_path, capsys):
    scenarios = corpus_mod.generate_all()
    corpus_dir = tmp_path / "corpus"
    corpus_mod.save_corpus(scenarios, corpus_dir)
    dal = corpus_mod.synthetic_dal()
    dal_path = tmp_path / "dal.txt"
    save_dal(dal, dal_path)
    profile_path = tmp_path / "profile.txt"
    save_profile(corpus_mod.train_profile(scenarios, dal), profile_path)

    code = main(["replay", "-p", str(profile_path), "-d", str(dal_path),
                 "--corpus", str(corpus_dir)])
    out = capsys.readouterr().out
    assert code == 0, out
    assert "RESULT: PASS" in out

    report = corpus_mod.replay(scenarios, load_profile(profile_path), dal)
    defended = [r for r in report.results if r.scenario.defended]
    assert len(defended) == 7
    for result in defended:
        assert result.malicious_blocked == len(result.scenario.malicious)
        assert result.malicious_allowed == 0
        assert result.benign_blocked == 0
        assert result.reasons == [result.scenario.expected_reason.value]
    (undefended,) = [r for r in report.results if not r.scenario.defended]
    assert undefended.benign_blocked == 0
    assert undefended.reasons == [Reason.PARSE_FAIL_POLICY.value]
    _report("criterion 3: 7 defended categories 100% blocked, 0 benign blocked, "
            "1 category handled by policy")


# ---------------------------------------------------------------------------
# criterion 4: zero false positives on a fresh randomized benign workload


def test_criterion_4_zero_false_positive_closure():
    dal = corpus_mod.synthetic_dal()
    train = corpus_mod.random_benign_workload(seed=1, n_functions=20, n_queries=1000)
    profile = build_profile([record_training(q) for q in train], dal)
    fresh = corpus_mod.random_benign_workload(seed=2, n_functions=20, n_queries=1000)
    blocked = [q for q in fresh if not decide(q, profile, dal).allowed]
    assert blocked == [], blocked[:3]
    _report("criterion 4: 0/1000 false positives on an unseen benign workload")


# ---------------------------------------------------------------------------
# criterion 5: matcher equivalence against a brute-force oracle


def _oracle_allowed(sig, descriptors):
    """Independent restatement of the matching rule, checked literally."""
    for d in descriptors:
        if sig.op is not d.op:
            continue
        if not sig.tables.issubset(d.tables):
            continue
        if not sig.logic.issubset(d.cond):
            continue
        ok = True
        for name, first, rest in sig.func_triples:
            if (name, first, rest) in d.funcs:
                continue
            if name == "=" and ("IN", first, rest) in d.funcs:
                continue
            ok = False
            break
        if ok:
            return True
    return False


def _random_signature(rng):
    ops = list(OpCode)
    names = ["=", "<", ">", "IN", "LIKE", "CHAR", "SLEEP"]
    kinds = list(ArgKind)
    funcs = frozenset(
        FunctionUse(rng.choice(names), 2, rng.choice(kinds), rng.choice(kinds))
        for _ in range(rng.randint(0, 3))
    )
    return QuerySignature(
        op=rng.choice(ops),
        tables=frozenset(rng.sample(["t0", "t1", "t2", "t3"], rng.randint(0, 3))),
        logic=frozenset(rng.sample(["AND", "OR"], rng.randint(0, 2))),
        funcs=funcs,
    )


def _random_descriptor(rng):
    sig = _random_signature(rng)
    return QueryDescriptor(sig.op, sig.tables, sig.logic, sig.func_triples)


def test_criterion_5_matcher_equals_brute_force_oracle():
    rng = random.Random(20260824)
    agreements = 0
    for _ in range(10_000):
        sig = _random_signature(rng)
        descriptors = [_random_descriptor(rng) for _ in range(rng.randint(0, 4))]
        got = signature_verdict(sig, descriptors).allowed
        want = _oracle_allowed(sig, descriptors)
        assert got == want, (sig, descriptors)
        agreements += 1
    assert agreements == 10_000
    _report("criterion 5: matcher agrees with brute-force oracle on 10000 instances")


# ---------------------------------------------------------------------------
# criterion 6: one-element IN and equality are interchangeable both ways


def test_criterion_6_in_equality_interchange():
    dal = corpus_mod.synthetic_dal()

    trained_on_in = build_profile(
        [record_training("SELECT * FROM t WHERE id IN (1, 2) # db_helper@fn")], dal
    )
    assert decide("SELECT * FROM t WHERE id = 5 # db_helper@fn", trained_on_in, dal).allowed
    assert decide("SELECT * FROM t WHERE id IN (5) # db_helper@fn", trained_on_in, dal).allowed

    trained_on_eq = build_profile(
        [record_training("SELECT * FROM t WHERE id = 1 # db_helper@fn")], dal
    )
    assert decide("SELECT * FROM t WHERE id IN (5) # db_helper@fn", trained_on_eq, dal).allowed
    # a genuine multi-element IN is still new structure
    assert not decide(
        "SELECT * FROM t WHERE id IN (5, 6) # db_helper@fn", trained_on_eq, dal
    ).allowed
    _report("criterion 6: one-element IN and equality interchange in both directions")


# ---------------------------------------------------------------------------
# criterion 7: latency budget and gate overhead vs a raw echo service


class _EchoServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class _EchoHandler(socketserver.BaseRequestHandler):
    def handle(self):
        while True:
            payload = recv_frame(self.request, 1 << 20)
            if payload is None:
                return
            send_frame(self.request, b"OK")


def _timed_run(host, port, query, n_threads, n_per_thread):
    errors = []

    def worker():
        try:
            with GateClient(host, port) as client:
                for _ in range(n_per_thread):
                    client.request(query)
        except Exception as exc:  # pragma: no cover
            errors.append(repr(exc))

    threads = [threading.Thread(target=worker) for _ in range(n_threads)]
    start = time.perf_counter()
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    return time.perf_counter() - start


def test_criterion_7_latency_and_gateway_overhead(tmp_path):
    started = time.perf_counter()
    dal = corpus_mod.synthetic_dal()
    train = corpus_mod.random_benign_workload(seed=1, n_functions=20, n_queries=200)
    profile = build_profile([record_training(q) for q in train], dal)

    queries = bench_queries(profile)
    assert queries
    latencies = run_bench(queries, profile, dal, 10_000)
    (median,) = _percentiles(latencies, (50,))
    assert median < 0.001, f"median decide latency {median * 1000:.3f}ms"

    dal_path = tmp_path / "dal.txt"
    profile_path = tmp_path / "profile.txt"
    save_dal(dal, dal_path)
    save_profile(profile, profile_path)
    gate = GateServer(
        GateConfig(
            mode="ENFORCE",
            listen_addr="127.0.0.1:0",
            dal_path=str(dal_path),
            profile_path=str(profile_path),
        )
    )
    echo = _EchoServer(("127.0.0.1", 0), _EchoHandler)
    for server in (gate, echo):
        threading.Thread(target=server.serve_forever, daemon=True).start()
    query = queries[0]
    try:
        gate_host, gate_port = gate.bound_addr
        echo_host, echo_port = echo.socket.getsockname()[:2]
        # warm-up populates the verdict cache and thread pools
        _timed_run(gate_host, gate_port, query, 8, 50)
        _timed_run(echo_host, echo_port, query, 8, 50)
        gate_time = min(_timed_run(gate_host, gate_port, query, 8, 1250) for _ in range(3))
        echo_time = min(_timed_run(echo_host, echo_port, query, 8, 1250) for _ in range(3))
    finally:
        for server in (gate, echo):
            server.shutdown()
            server.server_close()

    overhead = (gate_time - echo_time) / echo_time
    assert overhead < 0.05, (
        f"gate {gate_time:.3f}s vs echo {echo_time:.3f}s: {overhead * 100:.1f}% overhead"
    )
    elapsed = time.perf_counter() - started
    assert elapsed < 120, f"criterion 7 took {elapsed:.1f}s"
    _report(
        "criterion 7: median decide latency "
        f"{median * 1000:.3f}ms (<1ms), gate overhead {overhead * 100:.1f}% (<5%)"
    )


# ---------------------------------------------------------------------------
# criterion 8: the CLI pipeline is byte-for-byte reproducible


def test_criterion_8_cli_outputs_reproducible(tmp_path, capsys):
    outputs = []
    for run in ("a", "b"):
        dal_path = tmp_path / f"dal_{run}.txt"
        assert main([
            "analyze", str(FIXTURES / "webapp_demo"),
            "-o", str(dal_path), "--seeds", "mysqli",
        ]) == 0

        log_path = tmp_path / f"train_{run}.log"
        rec = record_training(DEMO_TAGGED)
        log_path.write_text(rec.lines() + "\n")
        profile_path = tmp_path / f"profile_{run}.txt"
        assert main([
            "build-profile", "-i", str(log_path),
            "-d", str(dal_path), "-o", str(profile_path),
        ]) == 0
        outputs.append((dal_path.read_bytes(), profile_path.read_bytes()))
    capsys.readouterr()
    assert outputs[0] == outputs[1]
    _report("criterion 8: analyze and build-profile outputs byte-identical across runs")
