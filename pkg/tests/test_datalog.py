from __future__ import annotations

import random
from datetime import timedelta

import pytest
from storegen import T0, _mk_eval, random_store

from tutorlab.datalog import (
    REQUIRED_COLUMNS,
    LogContext,
    LogStore,
    export_lines,
    export_tsv,
    import_lines,
    import_tsv,
    log_transaction,
)
from tutorlab.errors import ClockSkew, MalformedRow, SchemaMismatch


def ctx(student="stu00", session="sess0001", at=None, assignment="unit-a",
        problem="p1", condition="control"):
    return LogContext(
        anon_student_id=student, session_id=session, time=at or T0,
        level_assignment=assignment, problem_name=problem, condition_name=condition,
    )


def test_first_attempt_opportunity_is_one():
    store = LogStore()
    record = log_transaction(store, _mk_eval("CORRECT", "cell1", 1, ["k1"]), ctx())
    assert record.kcs == ("k1",)
    assert record.opportunities == (1,)


def test_opportunities_count_across_problems():
    store = LogStore()
    log_transaction(store, _mk_eval("CORRECT", "cell1", 1, ["k1"]), ctx())
    record = log_transaction(
        store, _mk_eval("INCORRECT", "cellZ", 1, ["k1"]),
        ctx(problem="p2", session="sess0002", at=T0 + timedelta(seconds=5)),
    )
    assert record.opportunities == (2,)


def test_retries_reuse_first_attempt_opportunity():
    store = LogStore()
    log_transaction(store, _mk_eval("INCORRECT", "cell1", 1, ["k1"]), ctx())
    retry = log_transaction(
        store, _mk_eval("CORRECT", "cell1", 2, ["k1"]), ctx(at=T0 + timedelta(seconds=2))
    )
    assert retry.opportunities == (1,)
    nxt = log_transaction(
        store, _mk_eval("CORRECT", "cell2", 1, ["k1"]), ctx(at=T0 + timedelta(seconds=4))
    )
    assert nxt.opportunities == (2,)


def test_hint_records_carry_help_level():
    store = LogStore()
    record = log_transaction(store, _mk_eval("HINT", "cell1", 1, ["k1"], help_level=2), ctx())
    assert record.outcome == "HINT"
    assert record.help_level == 2


def test_clock_skew_rejected_within_session():
    store = LogStore()
    log_transaction(store, _mk_eval("CORRECT", "cell1", 1, ["k1"]), ctx(at=T0))
    with pytest.raises(ClockSkew):
        log_transaction(store, _mk_eval("CORRECT", "cell2", 1, ["k1"]),
                        ctx(at=T0 - timedelta(seconds=1)))


def test_empty_store_exports_header_only(tmp_path):
    store = LogStore()
    path = tmp_path / "log.tsv"
    n = export_tsv(store, path)
    text = path.read_text(encoding="utf-8")
    assert text == "\t".join(REQUIRED_COLUMNS) + "\n"
    assert n == len(text.encode("utf-8"))


def test_multi_kc_long_format_shares_row():
    store = LogStore()
    log_transaction(store, _mk_eval("CORRECT", "cell1", 1, ["k1", "k2"]), ctx())
    lines = export_lines(store)
    assert len(lines) == 3  # header + 2 KC lines
    row1 = lines[1].split("\t")
    row2 = lines[2].split("\t")
    assert row1[0] == row2[0] == "1"
    assert (row1[15], row1[16]) == ("k1", "1")
    assert (row2[15], row2[16]) == ("k2", "1")


def test_round_trip_semantic_equality_and_bytes(tmp_path):
    rng = random.Random(99)
    for i in range(25):
        store = random_store(rng)
        path = tmp_path / f"log{i}.tsv"
        export_tsv(store, path)
        loaded = import_tsv(path)
        assert loaded.records == store.records
        assert loaded.custom_columns == store.custom_columns
        path2 = tmp_path / f"log{i}b.tsv"
        export_tsv(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()


def test_missing_outcome_column_is_schema_mismatch():
    lines = ["\t".join(c for c in REQUIRED_COLUMNS if c != "Outcome")]
    with pytest.raises(SchemaMismatch):
        import_lines(lines)


def test_lowercase_outcome_normalized():
    store = LogStore()
    log_transaction(store, _mk_eval("CORRECT", "cell1", 1, ["k1"]), ctx())
    lines = export_lines(store)
    lines[1] = lines[1].replace("CORRECT", "correct")
    loaded = import_lines(lines)
    assert loaded.records[0].outcome == "CORRECT"


def test_malformed_row_reports_line_number():
    store = LogStore()
    log_transaction(store, _mk_eval("CORRECT", "cell1", 1, ["k1"]), ctx())
    lines = export_lines(store)
    lines[1] = lines[1].replace("CORRECT", "MAYBE")
    with pytest.raises(MalformedRow) as err:
        import_lines(lines)
    assert err.value.line == 2


def test_unknown_trailing_columns_become_custom_fields():
    store = LogStore()
    log_transaction(store, _mk_eval("CORRECT", "cell1", 1, ["k1"]), ctx())
    lines = export_lines(store)
    lines[0] += "\tengagement"
    lines[1] += "\t0.75"
    loaded = import_lines(lines)
    assert loaded.custom_columns == ["engagement"]
    assert loaded.records[0].custom == {"engagement": 0.75}


def test_gapless_opportunities_per_student_kc():
    rng = random.Random(1234)
    for _ in range(10):
        store = random_store(rng)
        seen: dict[tuple[str, str], int] = {}
        for record in store.records:
            if record.attempt_at_step != 1 or record.is_tutor_performed:
                continue
            for kc, opp in zip(record.kcs, record.opportunities):
                key = (record.anon_student_id, kc)
                assert opp == seen.get(key, 0) + 1
                seen[key] = opp


def test_condition_constant_per_student_assignment():
    rng = random.Random(4321)
    for _ in range(10):
        store = random_store(rng)
        conditions: dict[tuple[str, str], str] = {}
        for record in store.records:
            key = (record.anon_student_id, record.level_assignment)
            assert conditions.setdefault(key, record.condition_name) == record.condition_name


def test_text_sanitized_against_tabs_and_newlines():
    store = LogStore()
    ev = _mk_eval("INCORRECT", "cell1", 1, ["k1"], feedback="bad\tvalue\nhere", input_text="x\ty")
    record = log_transaction(store, ev, ctx())
    assert "\t" not in record.feedback_text and "\n" not in record.feedback_text
    assert "\t" not in record.input
