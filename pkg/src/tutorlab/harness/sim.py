"""Simulated students that speak the public API.

Behavior is sampled from a generative BKT model: an attempt is correct with
probability pL(1-slip) + (1-pL)guess over the step's KCs, knowledge
transitions after each first attempt, and a hint request (normal mode only)
is followed by a correct attempt 90% of the time. Everything is driven by
one seeded RNG per student, so runs are reproducible transaction for
transaction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Optional

from ..errors import ProvisioningFailed
from ..graph import ATTEMPT, BehaviorGraph, CORRECT, Transaction, init_state, trace
from ..graph.tracer import _index
from ..pack import TutorPackage
from ..student import KcParams
from .client import ApiClient

HINT_THEN_CORRECT_P = 0.9
MAX_RETRIES_PER_STEP = 25

SIM_EPOCH = datetime(2026, 1, 5, 9, 0, 0, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SimulatedStudent:
    id: str  # account login
    kc_params: dict[str, KcParams]
    hint_propensity: float = 0.0
    seed: int = 0


@dataclass
class StudentRuntime:
    """Mutable per-student simulation state spanning the whole experiment."""

    student: SimulatedStudent
    clock: datetime = SIM_EPOCH
    tick_ms: int = 1000
    rng: random.Random = field(init=False)
    p_know: dict[str, float] = field(default_factory=dict)
    acted_steps: set = field(default_factory=set)      # (assignment, problem, step) with any action
    attempted_steps: set = field(default_factory=set)  # (assignment, problem, step) with an attempt
    local_states: dict = field(default_factory=dict)   # (assignment, problem) -> TracerState
    transactions: int = 0

    def __post_init__(self):
        self.rng = random.Random(self.student.seed)
        for kc, params in self.student.kc_params.items():
            self.p_know[kc] = params.p_init

    def tick(self) -> datetime:
        self.clock += timedelta(milliseconds=self.tick_ms)
        return self.clock

    def p_correct(self, kcs) -> float:
        p = 1.0
        for kc in kcs:
            params = self.student.kc_params[kc]
            pl = self.p_know[kc]
            p *= pl * (1.0 - params.p_slip) + (1.0 - pl) * params.p_guess
        return p

    def transition(self, kcs) -> None:
        for kc in kcs:
            params = self.student.kc_params[kc]
            self.p_know[kc] = self.p_know[kc] + (1.0 - self.p_know[kc]) * params.p_transit


def _correct_input(link) -> str:
    example = link.matcher.input.example_input()
    if example is None:
        raise ProvisioningFailed(
            f"link {link.id!r} has no example input; simulation packages need concrete answers"
        )
    return example


def _wrong_input(runtime: StudentRuntime, graph: BehaviorGraph, state, link) -> str:
    """A buggy link's input when one is live on this step, else junk."""
    idx = _index(graph)
    selection = link.matcher.selection
    buggy = []
    for pos in state.frontier:
        for candidate in idx.live_buggy(pos):
            if candidate.matcher.selection == selection:
                example = candidate.matcher.input.example_input()
                if example is not None and not link.matcher.input.matches(example):
                    buggy.append(example)
    if buggy and runtime.rng.random() < 0.5:
        return buggy[0]
    return f"wrong-{runtime.rng.randrange(10_000)}"


def _target_link(graph: BehaviorGraph, state):
    idx = _index(graph)
    live = []
    for pos in state.frontier:
        for link, _ in idx.candidates(pos):
            if link.kind == CORRECT:
                live.append(link)
    if not live:
        return None
    return min(live, key=lambda l: idx.order[l.id])


def solve_problem(
    runtime: StudentRuntime,
    client: ApiClient,
    session: dict,
    package: TutorPackage,
    assignment_id: str,
    test_mode: bool,
    max_transactions: Optional[int] = None,
) -> int:
    """Work one problem to completion (or the transaction cap)."""
    problem = session["problem"]
    graph = package.graph(problem)
    key = (assignment_id, problem)
    state = runtime.local_states.get(key)
    if state is None:
        state = init_state(graph)
        runtime.local_states[key] = state
    count = 0
    retries: dict[str, int] = {}
    while not state.completed:
        if max_transactions is not None and runtime.transactions >= max_transactions:
            break
        target = _target_link(graph, state)
        if target is None:
            break
        step = target.matcher.selection
        step_key = (assignment_id, problem, step)
        hinted = False
        if step_key not in runtime.acted_steps:
            # Roll in both modes so test-mode runs replay the same RNG stream.
            roll = runtime.rng.random()
            if not test_mode and roll < runtime.student.hint_propensity:
                runtime.acted_steps.add(step_key)
                client.hint(session["session_id"], selection=step, timestamp=runtime.tick())
                runtime.transactions += 1
                count += 1
                hinted = True

        first_attempt = step_key not in runtime.attempted_steps
        if hinted:
            p_success = HINT_THEN_CORRECT_P
        else:
            p_success = runtime.p_correct(target.kcs)
        if retries.get(step, 0) >= MAX_RETRIES_PER_STEP:
            answer_correctly = True  # the student eventually works it out
        else:
            answer_correctly = runtime.rng.random() < p_success
        raw_input = _correct_input(target) if answer_correctly else _wrong_input(runtime, graph, state, target)

        when = runtime.tick()
        response = client.submit(session["session_id"], step, target.matcher.action, raw_input, timestamp=when)
        runtime.transactions += 1
        count += 1
        runtime.acted_steps.add(step_key)
        if first_attempt:
            runtime.attempted_steps.add(step_key)
            runtime.transition(target.kcs)

        txn = Transaction(
            student_id=runtime.student.id,
            session_id=session["session_id"],
            timestamp=when,
            kind=ATTEMPT,
            selection=step,
            action=target.matcher.action,
            input=raw_input,
        )
        state, evaluation = trace(state, graph, txn, test_mode=test_mode)
        if not test_mode and response["outcome"] != evaluation.outcome:
            raise ProvisioningFailed(
                f"service and local replica disagree on {step!r}: "
                f"{response['outcome']} vs {evaluation.outcome}"
            )
        if evaluation.outcome != "CORRECT":
            retries[step] = retries.get(step, 0) + 1
        runtime.local_states[key] = state
    return count


def run_assignment(
    runtime: StudentRuntime,
    client: ApiClient,
    assignment_id: str,
    package: TutorPackage,
    test_mode: bool,
    max_transactions: Optional[int] = None,
    max_problems: Optional[int] = None,
) -> int:
    """Open sessions until the policy is exhausted; returns transactions sent."""
    total = 0
    problems = 0
    while True:
        if max_transactions is not None and runtime.transactions >= max_transactions:
            break
        if max_problems is not None and problems >= max_problems:
            break
        session = client.open_session(assignment_id, timestamp=runtime.tick())
        if session["complete"]:
            break
        sent = solve_problem(
            runtime, client, session, package, assignment_id, test_mode, max_transactions
        )
        total += sent
        problems += 1
        if sent == 0:
            state = runtime.local_states.get((assignment_id, session["problem"]))
            if state is None or not state.completed:
                break  # stuck (cap hit or dead-end); a completed problem means
                       # the tutor did all the work and the policy moves on
    return total
