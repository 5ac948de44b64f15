"""Hand-labeled schema-element extraction fixtures.

Each case pins the exact alias-resolved table and column sets for one query
against the bundled mini schemas; the acceptance suite re-runs this table.
Coverage: aliases, SELECT *, nested subqueries, comma joins, set operations,
unresolvable references.
"""

import pytest

from sqlprobe.sqlanalysis import diff_schema_elements, extract_schema_elements

# (schema name, sql, expected tables, expected columns, expected unresolved)
ELEMENT_FIXTURES = [
    # --- basics and aliases (music_fest) ---
    ("music_fest", "SELECT name FROM singer", {"singer"}, {"singer.name"}, ()),
    ("music_fest", "SELECT count(*) FROM singer", {"singer"}, set(), ()),
    ("music_fest", "SELECT T1.name FROM singer AS T1", {"singer"}, {"singer.name"}, ()),
    ("music_fest", "SELECT s.name FROM singer s WHERE s.age > 30",
     {"singer"}, {"singer.name", "singer.age"}, ()),
    ("music_fest",
     "SELECT T1.name FROM singer AS T1 JOIN singer_in_concert AS T2 ON T1.singer_id = T2.singer_id",
     {"singer", "singer_in_concert"},
     {"singer.name", "singer.singer_id", "singer_in_concert.singer_id"}, ()),
    ("music_fest", "select NAME from SINGER where AGE > 10",
     {"singer"}, {"singer.name", "singer.age"}, ()),
    # --- SELECT * expansion ---
    ("music_fest", "SELECT * FROM stadium",
     {"stadium"},
     {"stadium.stadium_id", "stadium.name", "stadium.capacity", "stadium.location"}, ()),
    ("music_fest",
     "SELECT * FROM concert JOIN stadium ON concert.stadium_id = stadium.stadium_id",
     {"concert", "stadium"},
     {"concert.concert_id", "concert.name", "concert.year", "concert.stadium_id",
      "stadium.stadium_id", "stadium.name", "stadium.capacity", "stadium.location"}, ()),
    ("music_fest",
     "SELECT T2.* FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id",
     {"concert", "stadium"},
     {"stadium.stadium_id", "stadium.name", "stadium.capacity", "stadium.location",
      "concert.stadium_id"}, ()),
    # --- comma joins ---
    ("music_fest",
     "SELECT singer.name, concert.year FROM singer, concert WHERE singer.singer_id = concert.concert_id",
     {"singer", "concert"},
     {"singer.name", "concert.year", "singer.singer_id", "concert.concert_id"}, ()),
    ("campus",
     "SELECT dept_name, count(*) FROM department, student "
     "WHERE department.dept_id = student.dept_id GROUP BY dept_name",
     {"department", "student"},
     {"department.dept_name", "department.dept_id", "student.dept_id"}, ()),
    ("campus",
     "SELECT student.name FROM department, student JOIN enrollment "
     "ON student.student_id = enrollment.student_id WHERE department.dept_id = student.dept_id",
     {"department", "student", "enrollment"},
     {"student.name", "student.student_id", "enrollment.student_id",
      "department.dept_id", "student.dept_id"}, ()),
    # --- nested subqueries ---
    ("music_fest",
     "SELECT name FROM singer WHERE singer_id IN (SELECT singer_id FROM singer_in_concert)",
     {"singer", "singer_in_concert"},
     {"singer.name", "singer.singer_id", "singer_in_concert.singer_id"}, ()),
    ("music_fest",
     "SELECT name FROM singer WHERE age > (SELECT avg(age) FROM singer)",
     {"singer"}, {"singer.name", "singer.age"}, ()),
    ("music_fest",
     "SELECT name FROM singer WHERE EXISTS "
     "(SELECT 1 FROM singer_in_concert WHERE singer_in_concert.singer_id = singer.singer_id)",
     {"singer", "singer_in_concert"},
     {"singer.name", "singer_in_concert.singer_id", "singer.singer_id"}, ()),
    # correlated subquery resolves "age" in the outer scope
    ("music_fest",
     "SELECT name FROM singer WHERE EXISTS (SELECT 1 FROM concert WHERE year > age)",
     {"singer", "concert"}, {"singer.name", "concert.year", "singer.age"}, ()),
    ("campus",
     "SELECT name FROM student WHERE gpa > (SELECT avg(gpa) FROM student)",
     {"student"}, {"student.name", "student.gpa"}, ()),
    # --- derived tables ---
    ("music_fest",
     "SELECT d.name FROM (SELECT name, age FROM singer) AS d WHERE d.age > 20",
     {"singer"}, {"singer.name", "singer.age"}, ()),
    ("campus",
     "SELECT avg(g) FROM (SELECT gpa AS g FROM student) AS sub",
     {"student"}, {"student.gpa"}, ()),
    ("campus",
     "SELECT sub.g FROM (SELECT gpa AS g FROM student) AS sub",
     {"student"}, {"student.gpa"}, ()),
    # --- CTEs ---
    ("campus",
     "WITH hi AS (SELECT student_id FROM student WHERE gpa > 3.5) SELECT count(*) FROM hi",
     {"student"}, {"student.student_id", "student.gpa"}, ()),
    ("campus",
     "WITH hi AS (SELECT student_id, gpa FROM student) SELECT student_id FROM hi WHERE gpa > 3",
     {"student"}, {"student.student_id", "student.gpa"}, ()),
    # --- set operations ---
    ("music_fest",
     "SELECT name FROM singer UNION SELECT name FROM stadium",
     {"singer", "stadium"}, {"singer.name", "stadium.name"}, ()),
    ("music_fest",
     "SELECT singer_id FROM singer EXCEPT SELECT singer_id FROM singer_in_concert",
     {"singer", "singer_in_concert"},
     {"singer.singer_id", "singer_in_concert.singer_id"}, ()),
    ("campus",
     "SELECT dept_id FROM department INTERSECT SELECT dept_id FROM student UNION SELECT dept_id FROM course",
     {"department", "student", "course"},
     {"department.dept_id", "student.dept_id", "course.dept_id"}, ()),
    # --- clause coverage ---
    ("music_fest",
     "SELECT country, count(*) FROM singer GROUP BY country HAVING count(*) > 1 ORDER BY country",
     {"singer"}, {"singer.country"}, ()),
    ("music_fest", "SELECT count(*) AS n FROM concert ORDER BY n", {"concert"}, set(), ()),
    ("campus", "SELECT name FROM student WHERE age IN (19, 20)",
     {"student"}, {"student.name", "student.age"}, ()),
    ("campus",
     "SELECT title FROM course WHERE credits BETWEEN 2 AND 4 AND title LIKE 'A%'",
     {"course"}, {"course.title", "course.credits"}, ()),
    ("campus", "SELECT DISTINCT grade FROM enrollment", {"enrollment"}, {"enrollment.grade"}, ()),
    ("campus",
     "SELECT T3.name FROM course AS T1 JOIN enrollment AS T2 ON T1.course_id = T2.course_id "
     "JOIN student AS T3 ON T2.student_id = T3.student_id WHERE T1.title = 'Algebra' ORDER BY T3.name",
     {"course", "enrollment", "student"},
     {"student.name", "course.course_id", "enrollment.course_id",
      "enrollment.student_id", "student.student_id", "course.title"}, ()),
    ("campus",
     "SELECT title FROM course JOIN department ON course.dept_id = department.dept_id",
     {"course", "department"},
     {"course.title", "course.dept_id", "department.dept_id"}, ()),
    # --- unqualified column owned by exactly one joined table ---
    ("music_fest",
     "SELECT location FROM concert JOIN stadium ON concert.stadium_id = stadium.stadium_id",
     {"concert", "stadium"},
     {"stadium.location", "concert.stadium_id", "stadium.stadium_id"}, ()),
    # --- SQLite double-quoted string fallback ---
    ("music_fest", 'SELECT name FROM singer WHERE country = "USA"',
     {"singer"}, {"singer.name", "singer.country"}, ()),
    # --- qualified reference to a table that is not in FROM ---
    ("music_fest", "SELECT singer.name FROM concert",
     {"concert", "singer"}, {"singer.name"}, ()),
    # --- schema-qualified table names ---
    ("music_fest", "SELECT main.singer.name FROM main.singer",
     {"singer"}, {"singer.name"}, ()),
    # --- unresolvable references land in diagnostics, not in the sets ---
    ("music_fest", "SELECT name FROM performers",
     set(), set(), ("column:name", "table:performers")),
    ("music_fest", "SELECT nickname FROM singer",
     {"singer"}, set(), ("column:nickname",)),
    ("music_fest",
     "SELECT name FROM singer JOIN stadium ON singer.singer_id = stadium.stadium_id",
     {"singer", "stadium"},
     {"singer.singer_id", "stadium.stadium_id"}, ("column:name",)),  # ambiguous
]


@pytest.mark.parametrize(
    "schema_name,sql,tables,columns,unresolved",
    ELEMENT_FIXTURES,
    ids=[f"q{i:02d}" for i in range(len(ELEMENT_FIXTURES))],
)
def test_element_extraction(mini_schemas, schema_name, sql, tables, columns, unresolved):
    elements = extract_schema_elements(sql, mini_schemas[schema_name])
    assert elements.tables == frozenset(tables)
    assert elements.columns == frozenset(columns)
    assert elements.unresolved == tuple(sorted(unresolved))


def test_fixture_count_meets_coverage_bar():
    assert len(ELEMENT_FIXTURES) >= 30


def test_alias_rename_invariance(mini_schemas):
    """Consistently rewriting every alias yields identical element sets."""
    pairs = [
        (
            "SELECT T1.name FROM singer AS T1 JOIN singer_in_concert AS T2 "
            "ON T1.singer_id = T2.singer_id WHERE T1.age > 25",
            "SELECT X.name FROM singer AS X JOIN singer_in_concert AS Y "
            "ON X.singer_id = Y.singer_id WHERE X.age > 25",
        ),
        (
            "SELECT a.title FROM course a, enrollment b WHERE a.course_id = b.course_id",
            "SELECT c2.title FROM course c2, enrollment e9 WHERE c2.course_id = e9.course_id",
        ),
    ]
    for schema_name, (left, right) in zip(("music_fest", "campus"), pairs):
        schema = mini_schemas[schema_name]
        assert extract_schema_elements(left, schema) == extract_schema_elements(right, schema)


def test_diff_identity_and_swap(mini_schemas):
    schema = mini_schemas["music_fest"]
    a = extract_schema_elements("SELECT name, age FROM singer", schema)
    b = extract_schema_elements("SELECT name FROM singer", schema)
    assert diff_schema_elements(a, a).total() == 0
    forward = diff_schema_elements(b, a)  # predicted=b, gold=a
    backward = diff_schema_elements(a, b)
    assert forward.missing_columns == backward.extra_columns == 1
    assert forward.extra_columns == backward.missing_columns == 0
    assert forward.missing_tables == backward.extra_tables == 0


def test_diff_examples(singer_schema):
    gold = extract_schema_elements("SELECT name, age FROM singer", singer_schema)
    pred = extract_schema_elements("SELECT name FROM singer", singer_schema)
    counts = diff_schema_elements(pred, gold)
    assert counts.missing_columns == 1
    assert counts.extra_columns == 0
    assert counts.missing_tables == 0
    assert counts.extra_tables == 0

    pred2 = extract_schema_elements(
        "SELECT T1.name FROM singer AS T1 JOIN concert AS T2 ON T1.singer_id = T2.singer_id",
        singer_schema,
    )
    gold2 = extract_schema_elements("SELECT name FROM singer", singer_schema)
    assert diff_schema_elements(pred2, gold2).extra_tables == 1
