"""Re-trace logged transactions and report outcome divergences.

Used both as a regression tool after editing a package and to audit
hand-entered logs (paper data) against the graph that should explain them.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..datalog import LogStore
from ..errors import NoHintAvailable, TutorlabError, UnknownProblem
from ..graph import ATTEMPT, Transaction, init_state, request_hint, trace
from ..graph.tracer import force_step
from ..pack import TutorPackage


@dataclass(frozen=True)
class Divergence:
    row: int
    session_id: str
    problem: str
    step: str
    logged_outcome: str
    recomputed_outcome: str


@dataclass(frozen=True)
class ReplayReport:
    records_checked: int
    divergences: tuple[Divergence, ...]

    @property
    def clean(self) -> bool:
        return not self.divergences


def replay_store(store: LogStore, package: TutorPackage) -> ReplayReport:
    problems = {g.problem_name for g in package.graphs}
    tracers: dict[tuple[str, str], object] = {}
    divergences: list[Divergence] = []
    checked = 0
    for record in store.records:
        if record.is_tutor_performed:
            continue
        if record.problem_name not in problems:
            raise UnknownProblem(f"log references problem {record.problem_name!r} not in package")
        graph = package.graph(record.problem_name)
        key = (record.session_id, record.problem_name)
        state = tracers.get(key)
        if state is None:
            state = init_state(graph)
        checked += 1
        if record.outcome == "HINT":
            try:
                state, evaluation = request_hint(state, graph, step=record.selection)
                recomputed = evaluation.outcome
            except (NoHintAvailable, TutorlabError):
                recomputed = "UNAVAILABLE"
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
            try:
                state, evaluation = trace(state, graph, txn)
                recomputed = evaluation.outcome
            except TutorlabError:
                recomputed = "UNTRACEABLE"
        if recomputed != record.outcome:
            divergences.append(
                Divergence(
                    row=record.row,
                    session_id=record.session_id,
                    problem=record.problem_name,
                    step=record.step_name,
                    logged_outcome=record.outcome,
                    recomputed_outcome=recomputed,
                )
            )
            if record.outcome == "CORRECT":
                # Teacher-force the logged advance so later records of this
                # session are judged on their own step, not on cascade damage.
                state = force_step(state, graph, record.selection)
        tracers[key] = state
    return ReplayReport(records_checked=checked, divergences=tuple(divergences))
