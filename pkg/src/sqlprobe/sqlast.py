"""SQL tokenizer, AST node types, and a recursive-descent parser.

Covers the SELECT dialect found in Spider/BIRD/FIBEN-style benchmarks:
select lists with aliases, FROM with comma joins and explicit JOIN ... ON,
WHERE / GROUP BY / HAVING / ORDER BY / LIMIT, subqueries in FROM, WHERE and
the select list, set operations, WITH (CTEs), CASE, CAST, and aggregate
function calls.  Statements outside that subset raise UnsupportedSqlError,
which is distinct from SqlSyntaxError.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


class SqlError(Exception):
    """Base class for parse-level failures."""


class SqlSyntaxError(SqlError):
    """Malformed SQL; carries the character offset of the offending token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnsupportedSqlError(SqlError):
    """Recognized SQL that this parser deliberately does not cover."""


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

KEYWORDS = frozenset(
    """
    SELECT FROM WHERE GROUP BY HAVING ORDER LIMIT OFFSET AS ON JOIN INNER
    LEFT RIGHT FULL OUTER CROSS NATURAL USING AND OR NOT IN EXISTS BETWEEN
    LIKE GLOB IS NULL DISTINCT ALL UNION INTERSECT EXCEPT CASE WHEN THEN
    ELSE END CAST ASC DESC WITH RECURSIVE
    """.split()
)

# Statement heads we recognize but do not parse.
_UNSUPPORTED_STATEMENTS = frozenset(
    """
    INSERT UPDATE DELETE CREATE DROP ALTER PRAGMA REPLACE ATTACH DETACH
    VACUUM ANALYZE EXPLAIN BEGIN COMMIT ROLLBACK GRANT REVOKE TRUNCATE MERGE
    """.split()
)

_TWO_CHAR_OPS = ("<=", ">=", "<>", "!=", "==", "||")
_ONE_CHAR_OPS = "=<>+-*/%(),.;"


@dataclass(frozen=True)
class Token:
    kind: str  # kw | name | num | str | op | eof
    text: str
    pos: int
    quoted: bool = False


def tokenize_sql(sql: str) -> list[Token]:
    """Split SQL text into tokens, skipping whitespace and comments."""
    tokens: list[Token] = []
    i, n = 0, len(sql)
    while i < n:
        ch = sql[i]
        if ch.isspace():
            i += 1
            continue
        if sql.startswith("--", i):
            j = sql.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if sql.startswith("/*", i):
            j = sql.find("*/", i + 2)
            if j < 0:
                raise SqlSyntaxError("unterminated block comment", i)
            i = j + 2
            continue
        if ch == "'":
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise SqlSyntaxError("unterminated string literal", i)
                if sql[j] == "'":
                    if j + 1 < n and sql[j + 1] == "'":
                        buf.append("'")
                        j += 2
                        continue
                    j += 1
                    break
                buf.append(sql[j])
                j += 1
            tokens.append(Token("str", "".join(buf), i))
            i = j
            continue
        if ch in '"`[':
            close = {'"': '"', "`": "`", "[": "]"}[ch]
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise SqlSyntaxError("unterminated quoted identifier", i)
                if sql[j] == close:
                    if close != "]" and j + 1 < n and sql[j + 1] == close:
                        buf.append(close)
                        j += 2
                        continue
                    j += 1
                    break
                buf.append(sql[j])
                j += 1
            tokens.append(Token("name", "".join(buf), i, quoted=True))
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and sql[i + 1].isdigit()):
            j = i
            seen_dot = seen_exp = False
            while j < n:
                c = sql[j]
                if c.isdigit():
                    j += 1
                elif c == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif c in "eE" and not seen_exp and j > i:
                    if j + 1 < n and (sql[j + 1].isdigit() or sql[j + 1] in "+-"):
                        seen_exp = True
                        j += 2
                    else:
                        break
                else:
                    break
            tokens.append(Token("num", sql[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (sql[j].isalnum() or sql[j] in "_$"):
                j += 1
            word = sql[i:j]
            upper = word.upper()
            if upper in KEYWORDS:
                tokens.append(Token("kw", upper, i))
            else:
                tokens.append(Token("name", word, i))
            i = j
            continue
        two = sql[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token("op", two, i))
            i += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token("op", ch, i))
            i += 1
            continue
        raise SqlSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(Token("eof", "", n))
    return tokens


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------

@dataclass
class Literal:
    value: object
    kind: str  # num | str | null | bool


@dataclass
class ColumnRef:
    table: Optional[str]
    name: str
    quoted: bool = False


@dataclass
class Star:
    table: Optional[str] = None


@dataclass
class FuncCall:
    name: str
    args: list
    distinct: bool = False
    star: bool = False


@dataclass
class Unary:
    op: str
    operand: object


@dataclass
class Binary:
    op: str
    left: object
    right: object


@dataclass
class Between:
    expr: object
    low: object
    high: object
    negated: bool = False


@dataclass
class InList:
    expr: object
    items: list = field(default_factory=list)
    negated: bool = False


@dataclass
class InSelect:
    expr: object
    select: "Query"
    negated: bool = False


@dataclass
class Exists:
    select: "Query"
    negated: bool = False


@dataclass
class IsNull:
    expr: object
    negated: bool = False


@dataclass
class Cast:
    expr: object
    type_name: str


@dataclass
class CaseExpr:
    operand: Optional[object]
    whens: list  # of (condition, result)
    default: Optional[object]


@dataclass
class ScalarSubquery:
    select: "Query"


@dataclass
class Aliased:
    expr: object
    alias: str


@dataclass
class TableRef:
    name: str
    alias: Optional[str] = None


@dataclass
class SubqueryTable:
    select: "Query"
    alias: Optional[str] = None


@dataclass
class JoinPart:
    kind: str  # inner | left | right | full | cross
    relation: object  # TableRef | SubqueryTable
    on: Optional[object] = None
    using: Optional[list] = None
    natural: bool = False


@dataclass
class JoinChain:
    base: object  # TableRef | SubqueryTable
    joins: list = field(default_factory=list)  # of JoinPart


@dataclass
class OrderItem:
    expr: object
    direction: Optional[str] = None  # asc | desc


@dataclass
class SelectCore:
    projections: list
    from_items: list = field(default_factory=list)  # of JoinChain
    where: Optional[object] = None
    group_by: list = field(default_factory=list)
    having: Optional[object] = None
    order_by: list = field(default_factory=list)  # of OrderItem
    limit: Optional[object] = None
    offset: Optional[object] = None
    distinct: bool = False
    ctes: list = field(default_factory=list)  # of (name, Query)


@dataclass
class SetOp:
    op: str  # union | union_all | intersect | except
    left: "Query"
    right: "Query"
    order_by: list = field(default_factory=list)
    limit: Optional[object] = None
    offset: Optional[object] = None
    ctes: list = field(default_factory=list)


Query = Union[SelectCore, SetOp]


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at_kw(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "kw" and tok.text in words

    def accept_kw(self, *words: str) -> bool:
        if self.at_kw(*words):
            self.i += 1
            return True
        return False

    def expect_kw(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind == "kw" and tok.text == word:
            return self.next()
        raise SqlSyntaxError(f"expected {word}, found {tok.text or 'end of input'!r}", tok.pos)

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def accept_op(self, *ops: str) -> bool:
        if self.at_op(*ops):
            self.i += 1
            return True
        return False

    def expect_op(self, op: str) -> Token:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            return self.next()
        raise SqlSyntaxError(f"expected {op!r}, found {tok.text or 'end of input'!r}", tok.pos)

    def expect_name(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind == "name":
            return self.next()
        raise SqlSyntaxError(f"expected {what}, found {tok.text or 'end of input'!r}", tok.pos)

    # -- statement ----------------------------------------------------------

    def parse_statement(self) -> Query:
        tok = self.peek()
        if tok.kind == "name" and tok.text.upper() in _UNSUPPORTED_STATEMENTS:
            raise UnsupportedSqlError(f"unsupported statement type: {tok.text.upper()}")
        if not (self.at_kw("SELECT", "WITH") or self.at_op("(")):
            raise SqlSyntaxError(
                f"expected SELECT, found {tok.text or 'end of input'!r}", tok.pos
            )
        query = self.parse_query()
        self.accept_op(";")
        tail = self.peek()
        if tail.kind != "eof":
            raise SqlSyntaxError(f"unexpected trailing input {tail.text!r}", tail.pos)
        return query

    def parse_query(self) -> Query:
        ctes: list = []
        if self.accept_kw("WITH"):
            self.accept_kw("RECURSIVE")
            while True:
                name = self.expect_name("CTE name").text
                self.expect_kw("AS")
                self.expect_op("(")
                ctes.append((name, self.parse_query()))
                self.expect_op(")")
                if not self.accept_op(","):
                    break

        node: Query = self.parse_select_core()
        while True:
            if self.accept_kw("UNION"):
                op = "union_all" if self.accept_kw("ALL") else "union"
            elif self.accept_kw("INTERSECT"):
                op = "intersect"
            elif self.accept_kw("EXCEPT"):
                op = "except"
            else:
                break
            right = self.parse_select_core()
            node = SetOp(op=op, left=node, right=right)

        if self.accept_kw("ORDER"):
            self.expect_kw("BY")
            node.order_by = self.parse_order_items()
        if self.accept_kw("LIMIT"):
            node.limit = self.parse_expr()
            if self.accept_kw("OFFSET"):
                node.offset = self.parse_expr()
            elif self.accept_op(","):
                # MySQL style LIMIT offset, count
                node.offset = node.limit
                node.limit = self.parse_expr()
        node.ctes = ctes
        return node

    def parse_select_core(self) -> Query:
        if self.at_op("("):
            # Parenthesized query as a set-operation branch.
            self.expect_op("(")
            inner = self.parse_query()
            self.expect_op(")")
            return inner
        self.expect_kw("SELECT")
        distinct = False
        if self.accept_kw("DISTINCT"):
            distinct = True
        else:
            self.accept_kw("ALL")
        projections = [self.parse_result_column()]
        while self.accept_op(","):
            projections.append(self.parse_result_column())

        core = SelectCore(projections=projections, distinct=distinct)
        if self.accept_kw("FROM"):
            core.from_items = [self.parse_join_chain()]
            while self.accept_op(","):
                core.from_items.append(self.parse_join_chain())
        if self.accept_kw("WHERE"):
            core.where = self.parse_expr()
        if self.accept_kw("GROUP"):
            self.expect_kw("BY")
            core.group_by = [self.parse_expr()]
            while self.accept_op(","):
                core.group_by.append(self.parse_expr())
        if self.accept_kw("HAVING"):
            core.having = self.parse_expr()
        return core

    def parse_order_items(self) -> list:
        items = [self.parse_order_item()]
        while self.accept_op(","):
            items.append(self.parse_order_item())
        return items

    def parse_order_item(self) -> OrderItem:
        expr = self.parse_expr()
        direction = None
        if self.accept_kw("ASC"):
            direction = "asc"
        elif self.accept_kw("DESC"):
            direction = "desc"
        return OrderItem(expr=expr, direction=direction)

    def parse_result_column(self):
        if self.accept_op("*"):
            return Star(None)
        # qualified star: name.*
        if (
            self.peek().kind == "name"
            and self.peek(1).kind == "op"
            and self.peek(1).text == "."
            and self.peek(2).kind == "op"
            and self.peek(2).text == "*"
        ):
            table = self.next().text
            self.next()
            self.next()
            return Star(table)
        expr = self.parse_expr()
        if self.accept_kw("AS"):
            alias = self.expect_name("alias").text
            return Aliased(expr, alias)
        if self.peek().kind == "name":
            return Aliased(expr, self.next().text)
        return expr

    # -- FROM clause --------------------------------------------------------

    _JOIN_INTRO = ("JOIN", "INNER", "LEFT", "RIGHT", "FULL", "CROSS", "NATURAL")

    def parse_join_chain(self) -> JoinChain:
        chain = JoinChain(base=self.parse_relation())
        while self.at_kw(*self._JOIN_INTRO):
            chain.joins.append(self.parse_join_part())
        return chain

    def parse_join_part(self) -> JoinPart:
        natural = self.accept_kw("NATURAL")
        kind = "inner"
        if self.accept_kw("LEFT"):
            kind = "left"
            self.accept_kw("OUTER")
        elif self.accept_kw("RIGHT"):
            kind = "right"
            self.accept_kw("OUTER")
        elif self.accept_kw("FULL"):
            kind = "full"
            self.accept_kw("OUTER")
        elif self.accept_kw("CROSS"):
            kind = "cross"
        else:
            self.accept_kw("INNER")
        self.expect_kw("JOIN")
        relation = self.parse_relation()
        on = None
        using = None
        if self.accept_kw("ON"):
            on = self.parse_expr()
        elif self.accept_kw("USING"):
            self.expect_op("(")
            using = [self.expect_name("column name").text]
            while self.accept_op(","):
                using.append(self.expect_name("column name").text)
            self.expect_op(")")
        return JoinPart(kind=kind, relation=relation, on=on, using=using, natural=natural)

    def parse_relation(self):
        if self.accept_op("("):
            if self.at_kw("SELECT", "WITH"):
                select = self.parse_query()
                self.expect_op(")")
                return SubqueryTable(select=select, alias=self.parse_optional_alias())
            raise UnsupportedSqlError("parenthesized join sources are not supported")
        name_tok = self.expect_name("table name")
        name = name_tok.text
        while self.at_op(".") and self.peek(1).kind == "name":
            self.next()
            name += "." + self.next().text
        return TableRef(name=name, alias=self.parse_optional_alias())

    def parse_optional_alias(self) -> Optional[str]:
        if self.accept_kw("AS"):
            return self.expect_name("alias").text
        if self.peek().kind == "name":
            return self.next().text
        return None

    # -- expressions --------------------------------------------------------

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.accept_kw("OR"):
            left = Binary("or", left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.accept_kw("AND"):
            left = Binary("and", left, self.parse_not())
        return left

    def parse_not(self):
        if self.at_kw("NOT") and not (
            self.peek(1).kind == "kw" and self.peek(1).text in ("IN", "LIKE", "GLOB", "BETWEEN", "EXISTS")
        ):
            self.next()
            return Unary("not", self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in ("=", "==", "!=", "<>", "<", "<=", ">", ">="):
                self.next()
                left = Binary(tok.text, left, self.parse_additive())
                continue
            if self.accept_kw("IS"):
                negated = self.accept_kw("NOT")
                if self.accept_kw("NULL"):
                    left = IsNull(left, negated=negated)
                else:
                    node = Binary("is", left, self.parse_additive())
                    left = Unary("not", node) if negated else node
                continue
            negated = False
            if self.at_kw("NOT") and self.peek(1).kind == "kw" and self.peek(1).text in (
                "IN",
                "LIKE",
                "GLOB",
                "BETWEEN",
            ):
                self.next()
                negated = True
            if self.accept_kw("IN"):
                left = self.parse_in_tail(left, negated)
                continue
            if self.accept_kw("LIKE") or self.accept_kw("GLOB"):
                op = self.tokens[self.i - 1].text.lower()
                node = Binary(op, left, self.parse_additive())
                left = Unary("not", node) if negated else node
                continue
            if self.accept_kw("BETWEEN"):
                low = self.parse_additive()
                self.expect_kw("AND")
                high = self.parse_additive()
                left = Between(left, low, high, negated=negated)
                continue
            if negated:
                raise SqlSyntaxError("dangling NOT", tok.pos)
            return left

    def parse_in_tail(self, left, negated: bool):
        self.expect_op("(")
        if self.at_kw("SELECT", "WITH"):
            select = self.parse_query()
            self.expect_op(")")
            return InSelect(left, select, negated=negated)
        items = []
        if not self.at_op(")"):
            items.append(self.parse_expr())
            while self.accept_op(","):
                items.append(self.parse_expr())
        self.expect_op(")")
        return InList(left, items, negated=negated)

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.at_op("+", "-", "||"):
            op = self.next().text
            left = Binary(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.at_op("*", "/", "%"):
            op = self.next().text
            left = Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.at_op("-", "+"):
            op = self.next().text
            return Unary(op, self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            text = tok.text
            value = float(text) if ("." in text or "e" in text or "E" in text) else int(text)
            return Literal(value, "num")
        if tok.kind == "str":
            self.next()
            return Literal(tok.text, "str")
        if self.accept_kw("NULL"):
            return Literal(None, "null")
        if self.accept_kw("CASE"):
            return self.parse_case()
        if self.accept_kw("CAST"):
            self.expect_op("(")
            expr = self.parse_expr()
            self.expect_kw("AS")
            type_name = self.expect_name("type name").text
            while self.peek().kind == "name":
                type_name += " " + self.next().text
            if self.accept_op("("):
                self.next()  # precision
                if self.accept_op(","):
                    self.next()
                self.expect_op(")")
            self.expect_op(")")
            return Cast(expr, type_name)
        if self.at_kw("EXISTS") or (self.at_kw("NOT") and self.peek(1).kind == "kw" and self.peek(1).text == "EXISTS"):
            negated = self.accept_kw("NOT")
            self.expect_kw("EXISTS")
            self.expect_op("(")
            select = self.parse_query()
            self.expect_op(")")
            return Exists(select, negated=negated)
        if self.accept_op("("):
            if self.at_kw("SELECT", "WITH"):
                select = self.parse_query()
                self.expect_op(")")
                return ScalarSubquery(select)
            expr = self.parse_expr()
            self.expect_op(")")
            return expr
        if tok.kind == "name":
            if tok.text.upper() in ("TRUE", "FALSE") and not (
                self.peek(1).kind == "op" and self.peek(1).text in (".", "(")
            ):
                self.next()
                return Literal(tok.text.upper() == "TRUE", "bool")
            return self.parse_name_expr()
        raise SqlSyntaxError(
            f"unexpected token {tok.text or 'end of input'!r}", tok.pos
        )

    def parse_case(self) -> CaseExpr:
        operand = None
        if not self.at_kw("WHEN"):
            operand = self.parse_expr()
        whens = []
        while self.accept_kw("WHEN"):
            cond = self.parse_expr()
            self.expect_kw("THEN")
            whens.append((cond, self.parse_expr()))
        if not whens:
            raise SqlSyntaxError("CASE without WHEN", self.peek().pos)
        default = self.parse_expr() if self.accept_kw("ELSE") else None
        self.expect_kw("END")
        return CaseExpr(operand=operand, whens=whens, default=default)

    def parse_name_expr(self):
        first = self.expect_name()
        # function call
        if self.at_op("(") and not first.quoted:
            self.next()
            call = FuncCall(name=first.text.lower(), args=[])
            if self.accept_op("*"):
                call.star = True
            elif not self.at_op(")"):
                if self.accept_kw("DISTINCT"):
                    call.distinct = True
                call.args.append(self.parse_expr())
                while self.accept_op(","):
                    call.args.append(self.parse_expr())
            self.expect_op(")")
            nxt = self.peek()
            if nxt.kind == "name" and nxt.text.upper() in ("OVER", "FILTER"):
                raise UnsupportedSqlError("window functions are not supported")
            return call
        parts = [first]
        while self.at_op(".") and self.peek(1).kind == "name":
            self.next()
            parts.append(self.next())
        if len(parts) == 1:
            return ColumnRef(table=None, name=first.text, quoted=first.quoted)
        # db.table.column collapses to table.column
        table = ".".join(p.text for p in parts[:-1])
        return ColumnRef(table=table, name=parts[-1].text, quoted=parts[-1].quoted)


def parse_sql(sql: str, dialect: str = "sqlite") -> Query:
    """Parse a SELECT statement into an AST.

    Raises SqlSyntaxError for malformed input (with character position) and
    UnsupportedSqlError for recognized-but-uncovered constructs.
    """
    if dialect not in ("sqlite", "ansi"):
        raise ValueError(f"unknown dialect: {dialect!r}")
    tokens = tokenize_sql(sql)
    if tokens[0].kind == "eof":
        raise SqlSyntaxError("empty statement", 0)
    return _Parser(tokens).parse_statement()
