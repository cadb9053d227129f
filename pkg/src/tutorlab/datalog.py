"""Append-only transaction log with a DataShop-style TSV form.

The TSV is both the export format and the store's durable form: one header
row, then one line per (transaction, KC) pair — multi-KC steps repeat the
transaction fields on consecutive lines sharing a Row value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from .errors import ClockSkew, MalformedRow, SchemaMismatch
from .student import StudentModel

REQUIRED_COLUMNS = [
    "Row",
    "Anon Student Id",
    "Session Id",
    "Time",
    "Level (Assignment)",
    "Problem Name",
    "Step Name",
    "Attempt At Step",
    "Outcome",
    "Selection",
    "Action",
    "Input",
    "Feedback Text",
    "Help Level",
    "Condition Name",
    "KC (Default)",
    "Opportunity (Default)",
]

OUTCOMES = ("CORRECT", "INCORRECT", "HINT")

TUTOR_ACTION_PREFIX = "tutor:"

_INT_RE = re.compile(r"^-?\d+$")


def format_time(dt: datetime) -> str:
    dt = dt.astimezone(timezone.utc)
    return f"{dt:%Y-%m-%dT%H:%M:%S}.{dt.microsecond // 1000:03d}Z"


def parse_time(text: str) -> datetime:
    raw = text.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def sanitize(text: str) -> str:
    """TSV cells cannot hold tabs or line breaks."""
    return re.sub(r"[\t\r\n]", " ", text)


@dataclass(frozen=True)
class TransactionRecord:
    row: int
    anon_student_id: str
    session_id: str
    time: datetime
    level_assignment: str
    problem_name: str
    step_name: str
    attempt_at_step: int
    outcome: str
    selection: str
    action: str
    input: str
    feedback_text: str = ""
    help_level: Optional[int] = None
    condition_name: str = ""
    kcs: tuple[str, ...] = ()
    opportunities: tuple[int, ...] = ()
    custom: dict[str, float] = field(default_factory=dict)

    @property
    def is_tutor_performed(self) -> bool:
        return self.action.startswith(TUTOR_ACTION_PREFIX)


@dataclass(frozen=True)
class LogContext:
    """Session/assignment metadata stamped onto each record."""

    anon_student_id: str
    session_id: str
    time: datetime
    level_assignment: str
    problem_name: str
    condition_name: str = ""


class LogStore:
    """In-memory record sequence plus the counters appends depend on."""

    def __init__(self, custom_columns: Iterable[str] = ()):
        self.records: list[TransactionRecord] = []
        self.custom_columns: list[str] = list(custom_columns)
        self._opportunity_count: dict[tuple[str, str], int] = {}
        self._step_opps: dict[tuple[str, str, str, str], dict[str, int]] = {}
        self._session_last_time: dict[str, datetime] = {}

    def __len__(self) -> int:
        return len(self.records)

    def next_row(self) -> int:
        return self.records[-1].row + 1 if self.records else 1

    def append(self, record: TransactionRecord) -> TransactionRecord:
        if self.records and record.row <= self.records[-1].row:
            raise ValueError(f"row {record.row} does not extend the store")
        last = self._session_last_time.get(record.session_id)
        if last is not None and record.time < last:
            raise ClockSkew(
                f"record at {format_time(record.time)} predates session tail {format_time(last)}"
            )
        self.records.append(record)
        self._session_last_time[record.session_id] = record.time
        if record.attempt_at_step == 1 and not record.is_tutor_performed:
            key = (record.anon_student_id, record.level_assignment, record.problem_name, record.step_name)
            snapshot = {}
            for kc, opp in zip(record.kcs, record.opportunities):
                self._opportunity_count[(record.anon_student_id, kc)] = opp
                snapshot[kc] = opp
            self._step_opps[key] = snapshot
        return record

    def opportunities_for(
        self, student: str, assignment: str, problem: str, step: str,
        kcs: tuple[str, ...], first_attempt: bool,
    ) -> tuple[int, ...]:
        """First attempts advance each KC's counter; retries reuse the step's values."""
        if first_attempt:
            return tuple(self._opportunity_count.get((student, kc), 0) + 1 for kc in kcs)
        snapshot = self._step_opps.get((student, assignment, problem, step), {})
        return tuple(
            snapshot.get(kc, self._opportunity_count.get((student, kc), 0) + 1) for kc in kcs
        )


def build_record(
    store: LogStore,
    evaluation,
    ctx: LogContext,
    model: Optional[StudentModel] = None,
) -> TransactionRecord:
    """Assemble (but do not append) the record for one evaluation."""
    opportunities = store.opportunities_for(
        ctx.anon_student_id,
        ctx.level_assignment,
        ctx.problem_name,
        evaluation.step_name,
        evaluation.kcs,
        evaluation.attempt_at_step == 1,
    )
    custom: dict[str, float] = {}
    if model is not None:
        for name in store.custom_columns:
            if name in model.custom_vars:
                custom[name] = model.custom_vars[name]
    return TransactionRecord(
        row=store.next_row(),
        anon_student_id=ctx.anon_student_id,
        session_id=ctx.session_id,
        time=ctx.time,
        level_assignment=ctx.level_assignment,
        problem_name=ctx.problem_name,
        step_name=evaluation.step_name,
        attempt_at_step=evaluation.attempt_at_step,
        outcome=evaluation.outcome,
        selection=sanitize(evaluation.selection),
        action=sanitize(evaluation.action),
        input=sanitize(evaluation.input),
        feedback_text=sanitize(evaluation.feedback_text or ""),
        help_level=evaluation.help_level,
        condition_name=ctx.condition_name,
        kcs=evaluation.kcs,
        opportunities=opportunities,
        custom=custom,
    )


def log_transaction(
    store: LogStore,
    evaluation,
    ctx: LogContext,
    model: Optional[StudentModel] = None,
) -> TransactionRecord:
    """Append exactly one record for a trace/hint evaluation."""
    return store.append(build_record(store, evaluation, ctx, model))


def log_tutor_action(store: LogStore, action, ctx: LogContext) -> TransactionRecord:
    """Record a tutor-performed interface update (excluded from analytics)."""
    record = TransactionRecord(
        row=store.next_row(),
        anon_student_id=ctx.anon_student_id,
        session_id=ctx.session_id,
        time=ctx.time,
        level_assignment=ctx.level_assignment,
        problem_name=ctx.problem_name,
        step_name=action.selection,
        attempt_at_step=1,
        outcome="CORRECT",
        selection=sanitize(action.selection),
        action=TUTOR_ACTION_PREFIX + sanitize(action.action),
        input=sanitize(action.input),
        feedback_text="",
        help_level=None,
        condition_name=ctx.condition_name,
        kcs=(),
        opportunities=(),
        custom={},
    )
    return store.append(record)


def _record_cells(record: TransactionRecord, kc: str, opp: str, custom_columns: list[str]) -> list[str]:
    cells = [
        str(record.row),
        record.anon_student_id,
        record.session_id,
        format_time(record.time),
        record.level_assignment,
        record.problem_name,
        record.step_name,
        str(record.attempt_at_step),
        record.outcome,
        record.selection,
        record.action,
        record.input,
        record.feedback_text,
        "" if record.help_level is None else str(record.help_level),
        record.condition_name,
        kc,
        opp,
    ]
    for name in custom_columns:
        value = record.custom.get(name)
        cells.append("" if value is None else _format_number(value))
    return cells


def _format_number(value: float) -> str:
    if isinstance(value, int):
        return str(value)
    if float(value).is_integer():
        return str(int(value)) + ".0"
    return repr(float(value))


def record_lines(record: TransactionRecord, custom_columns: list[str]) -> list[str]:
    """TSV lines for one record (one per KC; one bare line when unlabeled)."""
    if record.kcs:
        pairs = list(zip(record.kcs, (str(o) for o in record.opportunities)))
    else:
        pairs = [("", "")]
    return ["\t".join(_record_cells(record, kc, opp, custom_columns)) for kc, opp in pairs]


def header_line(custom_columns: list[str]) -> str:
    return "\t".join(REQUIRED_COLUMNS + list(custom_columns))


def export_lines(store: LogStore) -> list[str]:
    lines = [header_line(store.custom_columns)]
    for record in store.records:
        lines.extend(record_lines(record, store.custom_columns))
    return lines


def export_tsv(store: LogStore, path) -> int:
    """Write the store snapshot; returns bytes written."""
    data = ("\n".join(export_lines(store)) + "\n").encode("utf-8")
    Path(path).write_bytes(data)
    return len(data)


def import_tsv(path) -> LogStore:
    return import_lines(Path(path).read_text(encoding="utf-8").splitlines())


def import_lines(lines: list[str]) -> LogStore:
    if not lines:
        raise SchemaMismatch("file is empty (expected a header row)")
    header = lines[0].split("\t")
    if header[: len(REQUIRED_COLUMNS)] != REQUIRED_COLUMNS:
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        raise SchemaMismatch(
            f"header does not begin with the required columns (missing or misplaced: {missing})"
        )
    custom_columns = header[len(REQUIRED_COLUMNS):]
    store = LogStore(custom_columns=custom_columns)

    pending: list[tuple[int, list[str]]] = []  # (line number, cells) for one Row value

    def flush(group: list[tuple[int, list[str]]]):
        line_no, first = group[0]
        kcs: list[str] = []
        opportunities: list[int] = []
        for ln, cells in group:
            if cells[:15] != first[:15] or cells[17:] != first[17:]:
                raise MalformedRow(ln, "continuation line disagrees with its Row's transaction fields")
            if cells[15]:
                kcs.append(cells[15])
                if not _INT_RE.match(cells[16]) or int(cells[16]) < 1:
                    raise MalformedRow(ln, f"opportunity {cells[16]!r} is not a positive integer")
                opportunities.append(int(cells[16]))
            elif cells[16]:
                raise MalformedRow(ln, "opportunity given without a KC")
        try:
            row = int(first[0])
            time = parse_time(first[3])
            attempt = int(first[7])
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc))
        outcome = first[8].strip().upper()
        if outcome not in OUTCOMES:
            raise MalformedRow(line_no, f"outcome {first[8]!r} is not CORRECT/INCORRECT/HINT")
        if attempt < 1:
            raise MalformedRow(line_no, "Attempt At Step must be >= 1")
        help_level: Optional[int] = None
        if first[13]:
            if not _INT_RE.match(first[13]):
                raise MalformedRow(line_no, f"help level {first[13]!r} is not an integer")
            help_level = int(first[13])
        custom: dict[str, float] = {}
        for name, cell in zip(custom_columns, first[17:]):
            if cell == "":
                continue
            try:
                custom[name] = int(cell) if _INT_RE.match(cell) else float(cell)
            except ValueError:
                raise MalformedRow(line_no, f"custom column {name!r} value {cell!r} is not numeric")
        record = TransactionRecord(
            row=row,
            anon_student_id=first[1],
            session_id=first[2],
            time=time,
            level_assignment=first[4],
            problem_name=first[5],
            step_name=first[6],
            attempt_at_step=attempt,
            outcome=outcome,
            selection=first[9],
            action=first[10],
            input=first[11],
            feedback_text=first[12],
            help_level=help_level,
            condition_name=first[14],
            kcs=tuple(kcs),
            opportunities=tuple(opportunities),
            custom=custom,
        )
        if store.records and record.row <= store.records[-1].row:
            raise MalformedRow(line_no, f"Row {record.row} does not increase")
        try:
            store.append(record)
        except ClockSkew as exc:
            raise MalformedRow(line_no, str(exc))

    expected_width = len(REQUIRED_COLUMNS) + len(custom_columns)
    for line_no, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        cells = line.split("\t")
        if len(cells) != expected_width:
            raise MalformedRow(line_no, f"expected {expected_width} columns, found {len(cells)}")
        if pending and cells[0] == pending[0][1][0]:
            pending.append((line_no, cells))
        else:
            if pending:
                flush(pending)
            pending = [(line_no, cells)]
    if pending:
        flush(pending)
    return store
