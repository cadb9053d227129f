"""LMS core: accounts, classes, assignments, packages,
condition mappings, sessions, and reports.

Entities persist as JSON; the transaction log file is the ground truth for
progress, student models, and tracer states, all of which are rebuilt by
replaying the log on startup.
"""

from __future__ import annotations

import json
import secrets
import threading
import zlib
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Optional

from .. import datalog
from ..datalog import LogContext, LogStore, TransactionRecord, log_tutor_action
from ..errors import (
    AssignmentLocked,
    ClockSkew,
    DuplicateRow,
    HintsDisabled,
    ProvisioningFailed,
    SessionExpired,
    TutorlabError,
    Unauthorized,
    UnknownAssignment,
    UnknownClass,
    UnknownStudent,
    ValidationFailed,
)
from ..graph import ATTEMPT, BehaviorGraph, Evaluation, Transaction, TracerState, init_state, request_hint, trace
from ..pack import TutorPackage, validate_package
from ..student import DetectorRegistry, StudentModel, apply_transaction, run_detectors
from ..tasks import Curriculum, PolicyContext, PolicyRegistry, ProgressRecord, select_next

STUDENT = "student"
TEACHER = "teacher"
RESEARCHER = "researcher"
ROLES = (STUDENT, TEACHER, RESEARCHER)

LOCKED = "locked"
AVAILABLE = "available"
IN_PROGRESS = "in_progress"
COMPLETE = "complete"

DEFAULT_IDLE_HOURS = 8


class UnknownEntity(TutorlabError):
    code = "unknown_entity"


@dataclass
class Account:
    id: str
    login: str
    role: str
    display_name: str = ""


@dataclass
class ClassRoster:
    id: str
    name: str
    teacher_id: str
    student_ids: list[str] = field(default_factory=list)


@dataclass
class Assignment:
    id: str
    name: str
    class_id: str
    package_name: str
    package_version: int
    curriculum_id: str
    condition_name: str = ""
    test_mode: bool = False
    prerequisites: tuple[str, ...] = ()
    policy_override: Optional[str] = None
    mastery_threshold: float = 0.95


@dataclass
class SessionInfo:
    id: str
    student_id: str
    assignment_id: str
    problem_name: str
    opened_at: datetime
    last_activity: datetime
    completed: bool = False
    expired: bool = False


def _now() -> datetime:
    return datetime.now(timezone.utc)


def _seed_for(student_login: str, assignment_name: str, n_completed: int) -> int:
    return zlib.crc32(f"{student_login}|{assignment_name}|{n_completed}".encode("utf-8"))


class LmsService:
    def __init__(
        self,
        data_dir: Optional[Path] = None,
        detectors: Optional[DetectorRegistry] = None,
        policies: Optional[PolicyRegistry] = None,
        idle_hours: float = DEFAULT_IDLE_HOURS,
        now_fn: Callable[[], datetime] = _now,
    ):
        self._lock = threading.RLock()
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.detectors = detectors or DetectorRegistry()
        self.policies = policies or PolicyRegistry()
        self.idle = timedelta(hours=idle_hours)
        self.now = now_fn

        self.accounts: dict[str, Account] = {}
        self.tokens: dict[str, str] = {}  # token -> account id
        self.classes: dict[str, ClassRoster] = {}
        self.assignments: dict[str, Assignment] = {}
        self.packages: dict[str, dict[int, dict]] = {}  # name -> version -> raw doc
        self.condition_rows: list[tuple[str, str]] = []  # (student id, assignment id)
        self.sessions: dict[str, SessionInfo] = {}
        self.counters: dict[str, int] = {"account": 0, "class": 0, "assignment": 0, "session": 0}

        self.store = LogStore(custom_columns=self.detectors.names)
        self._parsed_packages: dict[tuple[str, int], TutorPackage] = {}
        self._tracers: dict[tuple[str, str, str], TracerState] = {}
        self._tutor_trail: dict[tuple[str, str, str], list] = {}
        self._models: dict[tuple[str, str], StudentModel] = {}
        self._completed: dict[tuple[str, str], set[str]] = {}

        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._entities_path = self.data_dir / "entities.json"
            self._log_path = self.data_dir / "transactions.tsv"
            self._load()
        else:
            self._entities_path = None
            self._log_path = None
        self._bootstrap_root()

    # ------------------------------------------------------------------ setup

    def _bootstrap_root(self) -> None:
        if not any(a.role == RESEARCHER for a in self.accounts.values()):
            account = Account(id=self._next_id("account", "acct"), login="root",
                              role=RESEARCHER, display_name="Root Researcher")
            self.accounts[account.id] = account
            self._persist_entities()

    def _next_id(self, counter: str, prefix: str) -> str:
        self.counters[counter] += 1
        return f"{prefix}{self.counters[counter]:04d}"

    # ---------------------------------------------------------------- persist

    def _persist_entities(self) -> None:
        if self._entities_path is None:
            return
        doc = {
            "accounts": [vars(a) for a in self.accounts.values()],
            "tokens": dict(self.tokens),
            "classes": [vars(c) for c in self.classes.values()],
            "assignments": [
                {**vars(a), "prerequisites": list(a.prerequisites)} for a in self.assignments.values()
            ],
            "packages": self.packages,
            "condition_rows": [list(row) for row in self.condition_rows],
            "sessions": [
                {
                    **{k: v for k, v in vars(s).items() if k not in ("opened_at", "last_activity")},
                    "opened_at": datalog.format_time(s.opened_at),
                    "last_activity": datalog.format_time(s.last_activity),
                }
                for s in self.sessions.values()
            ],
            "counters": dict(self.counters),
        }
        tmp = self._entities_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, indent=1), encoding="utf-8")
        tmp.replace(self._entities_path)

    def _append_log(self, record: TransactionRecord) -> None:
        if self._log_path is None:
            return
        new_file = not self._log_path.exists() or self._log_path.stat().st_size == 0
        with self._log_path.open("a", encoding="utf-8") as fh:
            if new_file:
                fh.write(datalog.header_line(self.store.custom_columns) + "\n")
            for line in datalog.record_lines(record, self.store.custom_columns):
                fh.write(line + "\n")

    def _load(self) -> None:
        if self._entities_path.exists():
            doc = json.loads(self._entities_path.read_text(encoding="utf-8"))
            self.accounts = {a["id"]: Account(**a) for a in doc.get("accounts", ())}
            self.tokens = dict(doc.get("tokens", {}))
            self.classes = {c["id"]: ClassRoster(**c) for c in doc.get("classes", ())}
            self.assignments = {}
            for a in doc.get("assignments", ()):
                a = dict(a)
                a["prerequisites"] = tuple(a.get("prerequisites", ()))
                self.assignments[a["id"]] = Assignment(**a)
            self.packages = {
                name: {int(v): d for v, d in versions.items()}
                for name, versions in doc.get("packages", {}).items()
            }
            self.condition_rows = [tuple(row) for row in doc.get("condition_rows", ())]
            self.sessions = {}
            for s in doc.get("sessions", ()):
                s = dict(s)
                s["opened_at"] = datalog.parse_time(s["opened_at"])
                s["last_activity"] = datalog.parse_time(s["last_activity"])
                self.sessions[s["id"]] = SessionInfo(**s)
            self.counters.update(doc.get("counters", {}))
        if self._log_path.exists() and self._log_path.stat().st_size > 0:
            self.store = datalog.import_tsv(self._log_path)
            for name in self.detectors.names:
                if name not in self.store.custom_columns:
                    self.store.custom_columns.append(name)
        self._rebuild_from_log()

    def _rebuild_from_log(self) -> None:
        """Log replay is the source of truth for tracer states, models, progress."""
        self._tracers.clear()
        self._tutor_trail.clear()
        self._models.clear()
        self._completed.clear()
        logins = {a.login: a.id for a in self.accounts.values()}
        names = {a.name: a.id for a in self.assignments.values()}
        for record in self.store.records:
            if record.is_tutor_performed:
                continue
            student_id = logins.get(record.anon_student_id)
            assignment_id = names.get(record.level_assignment)
            if student_id is None or assignment_id is None:
                continue  # imported foreign data; not service state
            assignment = self.assignments[assignment_id]
            try:
                graph = self._graph(assignment, record.problem_name)
            except KeyError:
                continue
            key = (student_id, assignment_id, record.problem_name)
            state = self._tracers.get(key)
            if state is None:
                state = init_state(graph)
                self._tutor_trail[key] = list(state.pending_tutor_actions)
            try:
                if record.outcome == "HINT":
                    state, evaluation = request_hint(state, graph, step=record.selection)
                else:
                    txn = Transaction(
                        student_id=record.anon_student_id,
                        session_id=record.session_id,
                        timestamp=record.time,
                        kind=ATTEMPT,
                        selection=record.selection,
                        action=record.action,
                        input=record.input,
                    )
                    state, evaluation = trace(state, graph, txn, test_mode=assignment.test_mode)
            except TutorlabError:
                continue  # hand-imported rows that no longer trace; replay tool reports these
            self._tracers[key] = state
            self._tutor_trail.setdefault(key, []).extend(evaluation.tutor_actions)
            model = apply_transaction(
                self._model(student_id, assignment_id), evaluation, self._params(assignment)
            )
            self._models[(student_id, assignment_id)] = run_detectors(model, record, self.detectors)
            if evaluation.completed_problem:
                self._completed.setdefault((student_id, assignment_id), set()).add(record.problem_name)
        for session in self.sessions.values():
            if session.completed:
                self._completed.setdefault(
                    (session.student_id, session.assignment_id), set()
                ).add(session.problem_name)

    # ------------------------------------------------------------------- auth

    def login(self, login: str) -> tuple[str, Account]:
        with self._lock:
            for account in self.accounts.values():
                if account.login == login:
                    token = secrets.token_hex(16)
                    self.tokens[token] = account.id
                    self._persist_entities()
                    return token, account
            raise Unauthorized(f"no account with login {login!r}")

    def authenticate(self, token: str) -> Account:
        account_id = self.tokens.get(token)
        if account_id is None:
            raise Unauthorized("invalid or expired token")
        return self.accounts[account_id]

    def _require(self, actor: Account, *roles: str) -> None:
        # Researchers hold every teacher privilege.
        allowed = set(roles)
        if TEACHER in allowed:
            allowed.add(RESEARCHER)
        if actor.role not in allowed:
            raise Unauthorized(f"{actor.role} accounts cannot perform this action")

    # --------------------------------------------------------------- entities

    def create_account(self, actor: Account, login: str, role: str, display_name: str = "") -> Account:
        with self._lock:
            self._require(actor, RESEARCHER)
            if role not in ROLES:
                raise ProvisioningFailed(f"unknown role {role!r}")
            if any(a.login == login for a in self.accounts.values()):
                raise ProvisioningFailed(f"login {login!r} already taken")
            account = Account(id=self._next_id("account", "acct"), login=login,
                              role=role, display_name=display_name)
            self.accounts[account.id] = account
            self._persist_entities()
            return account

    def create_class(self, actor: Account, name: str, student_ids: list[str],
                     teacher_id: Optional[str] = None) -> ClassRoster:
        with self._lock:
            self._require(actor, TEACHER)
            teacher_id = teacher_id or actor.id
            if teacher_id not in self.accounts or self.accounts[teacher_id].role == STUDENT:
                raise ProvisioningFailed(f"{teacher_id!r} cannot teach a class")
            for sid in student_ids:
                if sid not in self.accounts:
                    raise ProvisioningFailed(f"unknown student {sid!r}")
            roster = ClassRoster(id=self._next_id("class", "class"), name=name,
                                 teacher_id=teacher_id, student_ids=list(student_ids))
            self.classes[roster.id] = roster
            self._persist_entities()
            return roster

    def publish_package(self, actor: Account, doc: dict) -> int:
        with self._lock:
            self._require(actor, TEACHER)
            package = TutorPackage.from_json(doc)
            diagnostics = [d for d in validate_package(package) if d.severity == "error"]
            if diagnostics:
                raise ValidationFailed(diagnostics)
            versions = self.packages.setdefault(package.name, {})
            version = max(versions, default=0) + 1
            versions[version] = doc
            self._parsed_packages[(package.name, version)] = package
            self._persist_entities()
            return version

    def get_package_doc(self, actor: Account, name: str, version: Optional[int] = None) -> dict:
        self._require(actor, TEACHER)
        versions = self.packages.get(name)
        if not versions:
            raise UnknownEntity(f"no package named {name!r}")
        return versions[version if version is not None else max(versions)]

    def _package(self, name: str, version: int) -> TutorPackage:
        key = (name, version)
        if key not in self._parsed_packages:
            self._parsed_packages[key] = TutorPackage.from_json(self.packages[name][version])
        return self._parsed_packages[key]

    def create_assignment(
        self,
        actor: Account,
        name: str,
        class_id: str,
        package_name: str,
        curriculum_id: str,
        condition_name: str = "",
        test_mode: bool = False,
        prerequisites: Optional[list[str]] = None,
        package_version: Optional[int] = None,
        policy_override: Optional[str] = None,
        mastery_threshold: float = 0.95,
    ) -> Assignment:
        with self._lock:
            self._require(actor, TEACHER)
            if class_id not in self.classes:
                raise UnknownClass(f"no class {class_id!r}")
            if any(a.name == name for a in self.assignments.values()):
                raise ProvisioningFailed(f"assignment name {name!r} already taken")
            versions = self.packages.get(package_name)
            if not versions:
                raise ProvisioningFailed(f"no package named {package_name!r}")
            version = package_version if package_version is not None else max(versions)
            package = self._package(package_name, version)
            try:
                package.curriculum(curriculum_id)
            except KeyError:
                raise ProvisioningFailed(f"package has no curriculum {curriculum_id!r}")
            resolved = tuple(self._resolve_assignment(p).id for p in (prerequisites or ()))
            assignment = Assignment(
                id=self._next_id("assignment", "asg"),
                name=name,
                class_id=class_id,
                package_name=package_name,
                package_version=version,
                curriculum_id=curriculum_id,
                condition_name=condition_name,
                test_mode=test_mode,
                prerequisites=resolved,
                policy_override=policy_override,
                mastery_threshold=mastery_threshold,
            )
            self._check_prerequisite_cycle(assignment)
            self.assignments[assignment.id] = assignment
            self._persist_entities()
            return assignment

    def _check_prerequisite_cycle(self, assignment: Assignment) -> None:
        seen = set()
        stack = list(assignment.prerequisites)
        while stack:
            aid = stack.pop()
            if aid == assignment.id:
                raise ProvisioningFailed("prerequisite cycle detected")
            if aid in seen:
                continue
            seen.add(aid)
            stack.extend(self.assignments[aid].prerequisites)

    def _resolve_assignment(self, ref: str) -> Assignment:
        if ref in self.assignments:
            return self.assignments[ref]
        for assignment in self.assignments.values():
            if assignment.name == ref:
                return assignment
        raise UnknownEntity(f"no assignment {ref!r}")

    def _resolve_student(self, ref: str) -> Account:
        account = self.accounts.get(ref)
        if account is None:
            for a in self.accounts.values():
                if a.login == ref:
                    account = a
                    break
        if account is None or account.role != STUDENT:
            raise UnknownEntity(f"no student {ref!r}")
        return account

    # ------------------------------------------------------------- conditions

    def import_condition_mapping(self, actor: Account, csv_text: str) -> int:
        """All-or-nothing import of student_id,assignment_id rows."""
        with self._lock:
            self._require(actor, RESEARCHER)
            lines = csv_text.splitlines()
            if not lines or [c.strip() for c in lines[0].split(",")] != ["student_id", "assignment_id"]:
                raise ProvisioningFailed("CSV header must be exactly student_id,assignment_id")
            staged: list[tuple[str, str]] = []
            seen = set(self.condition_rows)
            for line_no, line in enumerate(lines[1:], start=2):
                if not line.strip():
                    continue
                cells = [c.strip() for c in line.split(",")]
                if len(cells) != 2:
                    raise ProvisioningFailed(f"line {line_no}: expected 2 columns")
                try:
                    student = self._resolve_student(cells[0])
                except UnknownEntity:
                    raise UnknownStudent(line_no, f"unknown student {cells[0]!r}")
                try:
                    assignment = self._resolve_assignment(cells[1])
                except UnknownEntity:
                    raise UnknownAssignment(line_no, f"unknown assignment {cells[1]!r}")
                row = (student.id, assignment.id)
                if row in seen:
                    raise DuplicateRow(line_no, f"{cells[0]} -> {cells[1]} already mapped")
                seen.add(row)
                staged.append(row)
            self.condition_rows.extend(staged)
            self._persist_entities()
            return len(staged)

    # --------------------------------------------------------------- worklist

    def _mapped_assignments(self, student_id: str) -> Optional[list[str]]:
        mapped = [aid for sid, aid in self.condition_rows if sid == student_id]
        return mapped or None

    def _worklist_assignments(self, student_id: str) -> list[Assignment]:
        mapped = self._mapped_assignments(student_id)
        if mapped is not None:
            return [self.assignments[aid] for aid in sorted(set(mapped))]
        out = []
        for roster in self.classes.values():
            if student_id in roster.student_ids:
                out.extend(a for a in self.assignments.values() if a.class_id == roster.id)
        return sorted({a.id: a for a in out}.values(), key=lambda a: a.id)

    def _model(self, student_id: str, assignment_id: str) -> StudentModel:
        key = (student_id, assignment_id)
        if key not in self._models:
            assignment = self.assignments[assignment_id]
            self._models[key] = StudentModel(
                student_id=student_id, mastery_threshold=assignment.mastery_threshold
            )
        return self._models[key]

    def _params(self, assignment: Assignment):
        return self._package(assignment.package_name, assignment.package_version).params_table()

    def _graph(self, assignment: Assignment, problem: str) -> BehaviorGraph:
        return self._package(assignment.package_name, assignment.package_version).graph(problem)

    def _curriculum(self, assignment: Assignment) -> Curriculum:
        package = self._package(assignment.package_name, assignment.package_version)
        curriculum = package.curriculum(assignment.curriculum_id)
        if assignment.policy_override:
            curriculum = replace(curriculum, policy=assignment.policy_override)
        return curriculum

    def _progress(self, student_id: str, assignment: Assignment) -> ProgressRecord:
        completed = frozenset(self._completed.get((student_id, assignment.id), set()))
        in_progress = None
        for session in self.sessions.values():
            if (session.student_id == student_id and session.assignment_id == assignment.id
                    and not session.completed and session.problem_name not in completed):
                in_progress = session.problem_name
        return ProgressRecord(student_id=student_id, completed_problems=completed,
                              in_progress=in_progress)

    def _next_problem(self, student_id: str, assignment: Assignment) -> Optional[str]:
        student = self.accounts[student_id]
        progress = self._progress(student_id, assignment)
        ctx = PolicyContext(
            model=self._model(student_id, assignment.id),
            curriculum=self._curriculum(assignment),
            progress=progress,
            seed=_seed_for(student.login, assignment.name, len(progress.completed_problems)),
        )
        return select_next(ctx, self.policies)

    def _assignment_complete(self, student_id: str, assignment: Assignment) -> bool:
        progress = self._progress(student_id, assignment)
        if progress.in_progress is not None:
            return False
        return self._next_problem(student_id, assignment) is None

    def _status(self, student_id: str, assignment: Assignment) -> str:
        for prereq in assignment.prerequisites:
            if not self._assignment_complete(student_id, self.assignments[prereq]):
                return LOCKED
        if self._assignment_complete(student_id, assignment):
            return COMPLETE
        progress = self._progress(student_id, assignment)
        if progress.completed_problems or progress.in_progress:
            return IN_PROGRESS
        has_records = any(
            s.student_id == student_id and s.assignment_id == assignment.id
            for s in self.sessions.values()
        )
        return IN_PROGRESS if has_records else AVAILABLE

    def get_worklist(self, actor: Account, student_ref: Optional[str] = None) -> list[tuple[Assignment, str]]:
        with self._lock:
            if student_ref is None:
                student = actor
            else:
                student = self._resolve_student(student_ref)
                if actor.id != student.id:
                    self._require(actor, TEACHER)
            return [(a, self._status(student.id, a)) for a in self._worklist_assignments(student.id)]

    # ----------------------------------------------------------------- session

    def _check_unlocked(self, student_id: str, assignment: Assignment) -> None:
        worklist_ids = {a.id for a in self._worklist_assignments(student_id)}
        if assignment.id not in worklist_ids:
            raise AssignmentLocked(f"assignment {assignment.name!r} is not on this student's worklist")
        if self._status(student_id, assignment) == LOCKED:
            raise AssignmentLocked(f"assignment {assignment.name!r} has incomplete prerequisites")

    def open_session(self, actor: Account, assignment_ref: str,
                     timestamp: Optional[datetime] = None) -> dict:
        with self._lock:
            assignment = self._resolve_assignment(assignment_ref)
            self._check_unlocked(actor.id, assignment)
            now = timestamp or self.now()
            package = self._package(assignment.package_name, assignment.package_version)

            for session in self.sessions.values():
                if (session.student_id == actor.id and session.assignment_id == assignment.id
                        and not session.completed and not session.expired):
                    if now - session.last_activity <= self.idle:
                        return self._session_payload(session, assignment, package, resumed=True)
                    session.expired = True

            # An abandoned problem resumes (fresh session, state rebuilt from
            # this student's logged transactions) rather than being reselected.
            progress = self._progress(actor.id, assignment)
            problem = progress.in_progress or self._next_problem(actor.id, assignment)
            if problem is None:
                return {"complete": True, "assignment_id": assignment.id, "session": None}
            key = (actor.id, assignment.id, problem)
            state = self._tracers.get(key)
            fresh_state = state is None
            if fresh_state:
                state = init_state(package.graph(problem))
                self._tracers[key] = state
                self._tutor_trail[key] = list(state.pending_tutor_actions)
            session = SessionInfo(
                id=self._next_id("session", "sess"),
                student_id=actor.id,
                assignment_id=assignment.id,
                problem_name=problem,
                opened_at=now,
                last_activity=now,
            )
            self.sessions[session.id] = session
            if fresh_state and state.pending_tutor_actions:
                ctx = self._log_ctx(session, assignment, now)
                for action in state.pending_tutor_actions:
                    self._append_log(log_tutor_action(self.store, action, ctx))
            if state.completed:
                # Degenerate problems (e.g. fully tutor-performed) finish at open.
                session.completed = True
                self._completed.setdefault((actor.id, assignment.id), set()).add(problem)
            self._persist_entities()
            return self._session_payload(session, assignment, package, resumed=False)

    def _session_payload(self, session: SessionInfo, assignment: Assignment,
                         package: TutorPackage, resumed: bool) -> dict:
        graph = package.graph(session.problem_name)
        trail = self._tutor_trail.get((session.student_id, session.assignment_id, session.problem_name), [])
        return {
            "complete": False,
            "session_id": session.id,
            "assignment_id": assignment.id,
            "problem": session.problem_name,
            "test_mode": assignment.test_mode,
            "interface": [w.to_json() for w in graph.interface],
            "tutor_actions": [a.to_json() for a in trail],
            "resumed": resumed,
            "problem_completed": session.completed,
        }

    def _log_ctx(self, session: SessionInfo, assignment: Assignment, when: datetime) -> LogContext:
        return LogContext(
            anon_student_id=self.accounts[session.student_id].login,
            session_id=session.id,
            time=when,
            level_assignment=assignment.name,
            problem_name=session.problem_name,
            condition_name=assignment.condition_name,
        )

    def _session_for(self, actor: Account, session_id: str) -> SessionInfo:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownEntity(f"no session {session_id!r}")
        if session.student_id != actor.id:
            raise Unauthorized("sessions accept transactions only from their own student")
        return session

    def _check_session_clock(self, session: SessionInfo, when: datetime) -> None:
        if session.expired:
            raise SessionExpired(f"session {session.id} expired; reopen the assignment")
        if when - session.last_activity > self.idle:
            session.expired = True
            self._persist_entities()
            raise SessionExpired(f"session {session.id} idle past {self.idle}; reopen the assignment")
        if when < session.last_activity:
            raise ClockSkew(
                f"transaction at {datalog.format_time(when)} predates session activity "
                f"{datalog.format_time(session.last_activity)}"
            )

    def submit_transaction(self, actor: Account, session_id: str, selection: str,
                           action: str, input: str,
                           timestamp: Optional[datetime] = None) -> dict:
        with self._lock:
            session = self._session_for(actor, session_id)
            assignment = self.assignments[session.assignment_id]
            self._check_unlocked(session.student_id, assignment)
            when = timestamp or self.now()
            self._check_session_clock(session, when)
            graph = self._graph(assignment, session.problem_name)
            key = (session.student_id, session.assignment_id, session.problem_name)
            txn = Transaction(
                student_id=self.accounts[actor.id].login,
                session_id=session.id,
                timestamp=when,
                kind=ATTEMPT,
                selection=selection,
                action=action,
                input=input,
            )
            state, evaluation = trace(self._tracers[key], graph, txn, test_mode=assignment.test_mode)
            self._tracers[key] = state
            self._tutor_trail.setdefault(key, []).extend(evaluation.tutor_actions)
            ctx = self._log_ctx(session, assignment, when)
            record = self._fold_and_log(session, assignment, evaluation, ctx)
            for tutor_action in evaluation.tutor_actions:
                self._append_log(log_tutor_action(self.store, tutor_action, ctx))
            session.last_activity = when
            if evaluation.completed_problem:
                session.completed = True
                self._completed.setdefault((session.student_id, assignment.id), set()).add(
                    session.problem_name
                )
            self._persist_entities()
            return self._projection(evaluation, assignment.test_mode)

    def request_session_hint(self, actor: Account, session_id: str,
                             step: Optional[str] = None,
                             timestamp: Optional[datetime] = None) -> dict:
        with self._lock:
            session = self._session_for(actor, session_id)
            assignment = self.assignments[session.assignment_id]
            self._check_unlocked(session.student_id, assignment)
            if assignment.test_mode:
                raise HintsDisabled("hint requests are refused in test mode")
            when = timestamp or self.now()
            self._check_session_clock(session, when)
            graph = self._graph(assignment, session.problem_name)
            key = (session.student_id, session.assignment_id, session.problem_name)
            state, evaluation = request_hint(self._tracers[key], graph, step=step)
            self._tracers[key] = state
            ctx = self._log_ctx(session, assignment, when)
            self._fold_and_log(session, assignment, evaluation, ctx)
            session.last_activity = when
            self._persist_entities()
            return self._projection(evaluation, test_mode=False)

    def _fold_and_log(self, session: SessionInfo, assignment: Assignment,
                      evaluation: Evaluation, ctx: LogContext) -> TransactionRecord:
        """Belief update, then detectors over the assembled record, then append."""
        model = apply_transaction(
            self._model(session.student_id, assignment.id),
            evaluation,
            self._params(assignment),
        )
        record = datalog.build_record(self.store, evaluation, ctx)
        model = run_detectors(model, record, self.detectors)
        self._models[(session.student_id, assignment.id)] = model
        custom = {name: model.custom_vars[name] for name in self.store.custom_columns
                  if name in model.custom_vars}
        record = replace(record, custom=custom)
        self.store.append(record)
        self._append_log(record)
        return record

    def _projection(self, evaluation: Evaluation, test_mode: bool) -> dict:
        base = {
            "tutor_actions": [a.to_json() for a in evaluation.tutor_actions],
            "completed_problem": evaluation.completed_problem,
            "attempt_at_step": evaluation.attempt_at_step,
            "test_mode": test_mode,
        }
        if test_mode:
            # Pre/post tests acknowledge the step but never reveal correctness.
            return {**base, "outcome": None, "feedback_text": None, "matched_link": None,
                    "kcs": [], "help_level": None}
        return {
            **base,
            "outcome": evaluation.outcome,
            "feedback_text": evaluation.feedback_text,
            "matched_link": evaluation.matched_link,
            "kcs": list(evaluation.kcs),
            "help_level": evaluation.help_level,
            "total_hint_levels": evaluation.total_hint_levels,
        }

    # ------------------------------------------------------------------ report

    def class_report(self, actor: Account, class_id: str) -> list[dict]:
        with self._lock:
            roster = self.classes.get(class_id)
            if roster is None:
                raise UnknownClass(f"no class {class_id!r}")
            if actor.role == STUDENT or (actor.role == TEACHER and roster.teacher_id != actor.id):
                raise Unauthorized("reports are visible to the class teacher and researchers")
            class_assignments = [a for a in self.assignments.values() if a.class_id == class_id]
            assignment_names = {a.name for a in class_assignments}
            rows = []
            for student_id in roster.student_ids:
                student = self.accounts[student_id]
                completed = sum(
                    len(self._completed.get((student_id, a.id), ())) for a in class_assignments
                )
                firsts = [
                    r for r in self.store.records
                    if r.anon_student_id == student.login
                    and r.level_assignment in assignment_names
                    and r.attempt_at_step == 1 and not r.is_tutor_performed
                ]
                correct = sum(1 for r in firsts if r.outcome == "CORRECT")
                mastered: set[str] = set()
                for a in class_assignments:
                    model = self._models.get((student_id, a.id))
                    if model is not None:
                        mastered |= {kc for kc, b in model.beliefs.items()
                                     if b.p_mastery >= model.mastery_threshold}
                student_records = [
                    r for r in self.store.records
                    if r.anon_student_id == student.login and r.level_assignment in assignment_names
                ]
                last = max((r.time for r in student_records), default=None)
                rows.append({
                    "student_id": student_id,
                    "login": student.login,
                    "display_name": student.display_name,
                    "problems_completed": completed,
                    "percent_correct_first_attempts": (100.0 * correct / len(firsts)) if firsts else 0.0,
                    "mastered_kc_count": len(mastered),
                    "last_activity": datalog.format_time(last) if last else None,
                })
            return rows

    # -------------------------------------------------------------------- logs

    def export_log_text(self, actor: Account) -> str:
        with self._lock:
            self._require(actor, RESEARCHER)
            return "\n".join(datalog.export_lines(self.store)) + "\n"
