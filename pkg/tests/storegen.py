"""Randomized-but-valid log stores for round-trip and invariant tests."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from tutorlab.datalog import LogContext, LogStore, log_transaction, log_tutor_action
from tutorlab.graph import TutorAction
from tutorlab.graph.tracer import Evaluation

T0 = datetime(2026, 1, 5, 9, 0, 0, tzinfo=timezone.utc)

WORDS = ["alpha", "beta", "gamma", "x+1", "3/4", "zig zag", "...", "Ωmega", "4", "-2.5"]


def _mk_eval(outcome, step, attempt, kcs, help_level=None, feedback="", input_text=""):
    return Evaluation(
        outcome=outcome,
        feedback_text=feedback,
        matched_link=None,
        kcs=tuple(kcs),
        tutor_actions=(),
        help_level=help_level,
        completed_problem=False,
        step_name=step,
        attempt_at_step=attempt,
        selection=step,
        action="RequestHint" if outcome == "HINT" else "UpdateText",
        input="" if outcome == "HINT" else input_text,
        kind="hint_request" if outcome == "HINT" else "attempt",
    )


def random_store(rng: random.Random) -> LogStore:
    custom_columns = ["engagement"] if rng.random() < 0.5 else []
    store = LogStore(custom_columns=custom_columns)
    clock = T0
    all_kcs = [f"kc{i}" for i in range(1, rng.randint(2, 4))]
    session_n = 0
    for student_i in range(rng.randint(1, 3)):
        student = f"stu{student_i:02d}"
        for assignment in rng.sample(["unit-a", "unit-b"], k=rng.randint(1, 2)):
            condition = {"unit-a": "control", "unit-b": "treatment"}[assignment]
            for problem_i in range(rng.randint(1, 2)):
                session_n += 1
                session = f"sess{session_n:04d}"
                problem = f"p{problem_i + 1}"
                for step_i in range(rng.randint(1, 4)):
                    step = f"cell{step_i + 1}"
                    kcs = rng.sample(all_kcs, k=rng.randint(0, min(2, len(all_kcs))))
                    n_attempts = rng.randint(1, 3)
                    hint_first = rng.random() < 0.25
                    for attempt_i in range(1, n_attempts + 1):
                        clock += timedelta(milliseconds=rng.randint(200, 5_000))
                        ctx = LogContext(
                            anon_student_id=student,
                            session_id=session,
                            time=clock,
                            level_assignment=assignment,
                            problem_name=problem,
                            condition_name=condition,
                        )
                        if hint_first and attempt_i == 1:
                            ev = _mk_eval("HINT", step, 1, kcs,
                                          help_level=rng.randint(1, 3),
                                          feedback=rng.choice(WORDS))
                        else:
                            outcome = "CORRECT" if (attempt_i == n_attempts and rng.random() < 0.8) else "INCORRECT"
                            ev = _mk_eval(outcome, step, attempt_i, kcs,
                                          feedback=rng.choice(WORDS) if rng.random() < 0.5 else "",
                                          input_text=rng.choice(WORDS))
                        model = None
                        if custom_columns and rng.random() < 0.8:
                            from tutorlab.student import StudentModel

                            model = StudentModel(student_id=student)
                            model.custom_vars["engagement"] = round(rng.uniform(0, 5), 3)
                        log_transaction(store, ev, ctx, model)
                if rng.random() < 0.2:
                    clock += timedelta(milliseconds=500)
                    log_tutor_action(
                        store,
                        TutorAction(selection="cellT", action="Fill", input=rng.choice(WORDS)),
                        LogContext(
                            anon_student_id=student, session_id=session, time=clock,
                            level_assignment=assignment, problem_name=problem,
                            condition_name=condition,
                        ),
                    )
    return store
