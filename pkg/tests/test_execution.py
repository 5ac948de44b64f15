import itertools
import random
import sqlite3

import pytest

from sqlprobe.execution import ExecutionResult, execute, execution_match


@pytest.fixture(scope="module")
def fixture_db(tmp_path_factory):
    """Small database exercising NULLs, floats, duplicates, and text quirks."""
    path = tmp_path_factory.mktemp("exec") / "fixture.sqlite"
    conn = sqlite3.connect(path)
    conn.executescript(
        """
        CREATE TABLE items (id INTEGER, name TEXT, price REAL, qty INTEGER);
        INSERT INTO items VALUES (1, 'apple', 1.5, 10);
        INSERT INTO items VALUES (2, 'pear', 2.0, 5);
        INSERT INTO items VALUES (3, 'plum', 2.0, 5);
        INSERT INTO items VALUES (4, NULL, 3.25, 0);
        INSERT INTO items VALUES (5, 'apple', 1.5, 10);
        CREATE TABLE big (n INTEGER);
        """
    )
    conn.executemany("INSERT INTO big VALUES (?)", [(i,) for i in range(120)])
    conn.commit()
    conn.close()
    return path


class TestExecute:
    def test_select_one(self, fixture_db):
        result = execute(fixture_db, "SELECT 1")
        assert result.status == "ok"
        assert result.rows == ((1,),)

    def test_missing_table(self, fixture_db):
        result = execute(fixture_db, "SELECT x FROM no_such_table")
        assert result.status == "sql_error"
        assert "no_such_table" in result.error_message

    def test_missing_database_reported_in_status(self, tmp_path):
        result = execute(tmp_path / "nope.sqlite", "SELECT 1")
        assert result.status == "sql_error"
        assert "not found" in result.error_message

    def test_non_select_rejected(self, fixture_db):
        for sql in ("INSERT INTO items VALUES (9, 'x', 1.0, 1)",
                    "UPDATE items SET qty = 0",
                    "DROP TABLE items",
                    "PRAGMA journal_mode"):
            result = execute(fixture_db, sql)
            assert result.status == "sql_error"

    def test_write_blocked_even_if_disguised(self, fixture_db):
        # Read-only connection is the backstop for anything slipping the gate.
        result = execute(fixture_db, "SELECT 1; DROP TABLE items")
        assert result.status == "sql_error"
        assert execute(fixture_db, "SELECT count(*) FROM items").rows == ((5,),)

    def test_with_cte_allowed(self, fixture_db):
        result = execute(fixture_db, "WITH t AS (SELECT 2 AS v) SELECT v FROM t")
        assert result.status == "ok"
        assert result.rows == ((2,),)

    def test_columns_present(self, fixture_db):
        result = execute(fixture_db, "SELECT id, name FROM items LIMIT 1")
        assert result.columns == ("id", "name")

    def test_timeout_on_pathological_join(self, fixture_db):
        sql = "SELECT count(*) FROM big a, big b, big c, big d, big e"
        result = execute(fixture_db, sql, timeout=0.1)
        assert result.status == "timeout"

    def test_empty_statement(self, fixture_db):
        assert execute(fixture_db, "   ").status == "sql_error"


def ok(rows):
    return ExecutionResult(status="ok", columns=(), rows=tuple(tuple(r) for r in rows))


ERR = ExecutionResult(status="sql_error", error_message="boom")
TOUT = ExecutionResult(status="timeout", error_message="slow")

# Hand-labeled (gold rows, pred rows, gold_has_order_by, match, reason)
MATCH_FIXTURES = [
    # identity / exact
    ([[1]], [[1]], False, True, "exact"),
    ([[1, "a"], [2, "b"]], [[1, "a"], [2, "b"]], False, True, "exact"),
    ([], [], False, True, "exact"),
    # reordering without ORDER BY
    ([[1], [2]], [[2], [1]], False, True, "reordered_equal"),
    ([[1, "x"], [2, "y"], [3, "z"]], [[3, "z"], [1, "x"], [2, "y"]], False, True, "reordered_equal"),
    # ORDER BY sensitivity
    ([[1], [2]], [[2], [1]], True, False, "mismatch"),
    ([[1], [2]], [[1], [2]], True, True, "exact"),
    # duplicates are significant (multiset, not set)
    ([[1], [1], [2]], [[1], [2], [2]], False, False, "mismatch"),
    ([[1], [1]], [[1]], False, False, "mismatch"),
    ([[1], [1]], [[1], [1]], False, True, "exact"),
    ([["a"], ["a"], ["b"]], [["b"], ["a"], ["a"]], False, True, "reordered_equal"),
    # NULL handling: NULL equals only NULL
    ([[None]], [[None]], False, True, "exact"),
    ([[None]], [[0]], False, False, "mismatch"),
    ([[None]], [[""]], False, False, "mismatch"),
    ([[None, 1], [2, None]], [[2, None], [None, 1]], False, True, "reordered_equal"),
    # float/int coercion with absolute tolerance 1e-6
    ([[1]], [[1.0]], False, True, "exact"),
    ([[1.0000004]], [[1.0]], False, True, "exact"),
    ([[1.001]], [[1.0]], False, False, "mismatch"),
    ([[2.5], [3]], [[3.0], [2.5]], False, True, "reordered_equal"),
    # text comparison: trailing whitespace trimmed, otherwise byte-exact
    ([["abc "]], [["abc"]], False, True, "exact"),
    ([["abc"]], [["ABC"]], False, False, "mismatch"),
    ([[" abc"]], [["abc"]], False, False, "mismatch"),
    # numbers never equal text
    ([[1]], [["1"]], False, False, "mismatch"),
    # arity mismatch
    ([[1, 2]], [[1]], False, False, "mismatch"),
    # row count mismatch
    ([[1], [2]], [[1]], False, False, "mismatch"),
    # error and timeout propagation
    (ERR, [[1]], False, False, "gold_error"),
    ([[1]], ERR, False, False, "pred_error"),
    ([[1]], TOUT, False, False, "timeout"),
    (TOUT, [[1]], False, False, "timeout"),
    (ERR, ERR, False, False, "gold_error"),
]


@pytest.mark.parametrize(
    "gold,pred,order,match,reason",
    MATCH_FIXTURES,
    ids=[f"m{i:02d}" for i in range(len(MATCH_FIXTURES))],
)
def test_execution_match_fixture(gold, pred, order, match, reason):
    gold_result = gold if isinstance(gold, ExecutionResult) else ok(gold)
    pred_result = pred if isinstance(pred, ExecutionResult) else ok(pred)
    outcome = execution_match(gold_result, pred_result, order)
    assert outcome.match is match
    assert outcome.reason == reason


def test_fixture_count_meets_coverage_bar():
    assert len(MATCH_FIXTURES) >= 25


def test_match_true_only_for_exact_or_reordered():
    for gold, pred, order, match, reason in MATCH_FIXTURES:
        if match:
            assert reason in ("exact", "reordered_equal")


class TestMatchProperties:
    def test_reflexive_on_real_queries(self, fixture_db):
        queries = [
            "SELECT * FROM items",
            "SELECT name, sum(qty) FROM items GROUP BY name",
            "SELECT price FROM items ORDER BY price",
            "SELECT count(*) FROM items",
        ]
        for sql in queries:
            result = execute(fixture_db, sql)
            assert result.status == "ok"
            outcome = execution_match(result, result, gold_has_order_by=False)
            assert outcome.match is True and outcome.reason == "exact"

    def test_permutation_invariance_without_order_by(self):
        rows = [[1, "a"], [2, "b"], [None, "c"], [2.5, None]]
        gold = ok(rows)
        rng = random.Random(5)
        for _ in range(10):
            shuffled = rows[:]
            rng.shuffle(shuffled)
            assert execution_match(gold, ok(shuffled), False).match is True
        for perm in itertools.permutations(rows):
            assert execution_match(gold, ok(list(perm)), False).match is True

    def test_gold_error_never_matches(self):
        for pred in (ok([[1]]), ERR, TOUT):
            assert execution_match(ERR, pred, False).match is False
