"""Read-only SQL execution against SQLite and execution-match comparison.

Predicted SQL is untrusted: databases are opened read-only with one
connection per execution, non-SELECT statements are rejected, and a progress
handler enforces the timeout.  Failures are carried in the result status,
never thrown past the module boundary.
"""

from __future__ import annotations

import re
import sqlite3
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Union

NUMERIC_ABS_TOL = 1e-6
DEFAULT_TIMEOUT_S = 30.0

_SELECT_HEAD = re.compile(r"^\s*(?:--[^\n]*\n|/\*.*?\*/|\s)*(select|with)\b", re.IGNORECASE | re.DOTALL)


@dataclass(frozen=True)
class ExecutionResult:
    status: str  # ok | sql_error | timeout
    columns: tuple[str, ...] = ()
    rows: tuple[tuple, ...] = ()
    error_message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class MatchOutcome:
    match: bool
    reason: str  # exact | reordered_equal | mismatch | pred_error | gold_error | timeout

    def as_dict(self) -> dict:
        return {"match": self.match, "reason": self.reason}


def execute(
    db_file: Union[str, Path], sql: str, timeout: float = DEFAULT_TIMEOUT_S
) -> ExecutionResult:
    """Run one SELECT statement and materialize its result fully.

    Returns status=timeout once the deadline passes, status=sql_error for
    anything SQLite rejects, for non-SELECT statements, and for a missing
    database file.
    """
    path = Path(db_file)
    if not path.exists():
        return ExecutionResult(status="sql_error", error_message=f"database not found: {path}")
    if not sql or not sql.strip():
        return ExecutionResult(status="sql_error", error_message="empty statement")
    if not _SELECT_HEAD.match(sql):
        return ExecutionResult(status="sql_error", error_message="only SELECT statements are executed")

    deadline = time.monotonic() + timeout
    timed_out = False

    def check_deadline():
        nonlocal timed_out
        if time.monotonic() > deadline:
            timed_out = True
            return 1  # non-zero aborts the statement
        return 0

    try:
        conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True, timeout=timeout)
    except sqlite3.Error as exc:
        return ExecutionResult(status="sql_error", error_message=str(exc))
    try:
        conn.set_progress_handler(check_deadline, 1000)
        cursor = conn.execute(sql)
        rows = []
        while True:
            chunk = cursor.fetchmany(256)
            if not chunk:
                break
            rows.extend(chunk)
            if time.monotonic() > deadline:
                timed_out = True
                break
        if timed_out:
            return ExecutionResult(status="timeout", error_message=f"timed out after {timeout}s")
        columns = tuple(d[0] for d in cursor.description) if cursor.description else ()
        return ExecutionResult(
            status="ok", columns=columns, rows=tuple(tuple(r) for r in rows)
        )
    except sqlite3.OperationalError as exc:
        if timed_out or "interrupted" in str(exc).lower():
            return ExecutionResult(status="timeout", error_message=f"timed out after {timeout}s")
        return ExecutionResult(status="sql_error", error_message=str(exc))
    except (sqlite3.Error, sqlite3.Warning) as exc:
        # sqlite3.Warning covers multi-statement input; not a sqlite3.Error.
        return ExecutionResult(status="sql_error", error_message=str(exc))
    finally:
        conn.close()


# ---------------------------------------------------------------------------
# Result comparison
# ---------------------------------------------------------------------------

def _normalize_cell(value):
    if isinstance(value, bool):
        return float(value)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return value.rstrip()
    return value  # None, bytes


def _cells_equal(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, float) and isinstance(b, float):
        return abs(a - b) <= NUMERIC_ABS_TOL
    if type(a) is not type(b):
        return False
    return a == b


def _rows_equal(row_a, row_b) -> bool:
    return len(row_a) == len(row_b) and all(_cells_equal(a, b) for a, b in zip(row_a, row_b))


def _sort_key(row) -> tuple:
    key = []
    for cell in row:
        if cell is None:
            key.append((0, ""))
        elif isinstance(cell, float):
            key.append((1, cell))
        elif isinstance(cell, str):
            key.append((2, cell))
        else:
            key.append((3, repr(cell)))
    return tuple(key)


def execution_match(
    gold: ExecutionResult, pred: ExecutionResult, gold_has_order_by: bool
) -> MatchOutcome:
    """Decide whether a prediction's result matches gold.

    Values compare after normalization (ints/floats coerced, 1e-6 absolute
    tolerance; NULL equals only NULL; text byte-exact after trailing
    whitespace trim).  Column names are ignored.  Rows compare as ordered
    sequences when gold has ORDER BY, otherwise as multisets; duplicate rows
    are significant either way.
    """
    if gold.status == "sql_error":
        return MatchOutcome(match=False, reason="gold_error")
    if gold.status == "timeout" or pred.status == "timeout":
        return MatchOutcome(match=False, reason="timeout")
    if pred.status == "sql_error":
        return MatchOutcome(match=False, reason="pred_error")

    gold_rows = [tuple(_normalize_cell(c) for c in row) for row in gold.rows]
    pred_rows = [tuple(_normalize_cell(c) for c in row) for row in pred.rows]
    if len(gold_rows) != len(pred_rows):
        return MatchOutcome(match=False, reason="mismatch")
    if gold_rows and pred_rows and len(gold_rows[0]) != len(pred_rows[0]):
        return MatchOutcome(match=False, reason="mismatch")

    if all(_rows_equal(g, p) for g, p in zip(gold_rows, pred_rows)):
        return MatchOutcome(match=True, reason="exact")
    if gold_has_order_by:
        return MatchOutcome(match=False, reason="mismatch")
    gold_sorted = sorted(gold_rows, key=_sort_key)
    pred_sorted = sorted(pred_rows, key=_sort_key)
    if all(_rows_equal(g, p) for g, p in zip(gold_sorted, pred_sorted)):
        return MatchOutcome(match=True, reason="reordered_equal")
    return MatchOutcome(match=False, reason="mismatch")
