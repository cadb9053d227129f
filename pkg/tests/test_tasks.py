from __future__ import annotations

import random

import pytest

from tutorlab.errors import DuplicatePolicy, PolicyContract, UnknownPolicy
from tutorlab.student import KcBelief, StudentModel
from tutorlab.tasks import (
    Curriculum,
    CurriculumProblem,
    PolicyContext,
    PolicyRegistry,
    ProgressRecord,
    next_task_fixed,
    next_task_mastery,
    select_next,
)


def make_ctx(policy="fixed", completed=(), beliefs=None, seed=0):
    curriculum = Curriculum(
        id="c1",
        policy=policy,
        problems=(
            CurriculumProblem("P1", frozenset({"k1"})),
            CurriculumProblem("P2", frozenset({"k2"})),
            CurriculumProblem("P3", frozenset({"k2", "k3"})),
        ),
    )
    model = StudentModel("s1")
    model.beliefs = {kc: KcBelief(kc, p) for kc, p in (beliefs or {}).items()}
    return PolicyContext(
        model=model,
        curriculum=curriculum,
        progress=ProgressRecord("s1", frozenset(completed)),
        seed=seed,
    )


def test_fixed_returns_first_uncompleted():
    assert next_task_fixed(make_ctx(completed={"P1"})) == "P2"


def test_fixed_order_governs_not_cardinality():
    assert next_task_fixed(make_ctx(completed={"P2"})) == "P1"


def test_fixed_none_when_all_done():
    assert next_task_fixed(make_ctx(completed={"P1", "P2", "P3"})) is None


def test_mastery_skips_mastered_kcs():
    ctx = make_ctx(policy="mastery", beliefs={"k1": 0.97, "k2": 0.50})
    assert next_task_mastery(ctx) == "P2"


def test_mastery_none_when_everything_mastered():
    ctx = make_ctx(policy="mastery", beliefs={"k1": 0.99, "k2": 0.96, "k3": 0.95})
    assert next_task_mastery(ctx) is None  # no over-practice


def test_mastery_curriculum_order_tie_break():
    ctx = make_ctx(policy="mastery", beliefs={"k1": 0.99, "k2": 0.2, "k3": 0.2})
    assert next_task_mastery(ctx) == "P2"


def test_select_next_dispatch_and_contract():
    registry = PolicyRegistry()
    registry.register("pick_last", lambda ctx: ctx.curriculum.problems[-1].name)
    ctx = make_ctx(policy="custom:pick_last")
    assert select_next(ctx, registry) == "P3"

    registry.register("rogue", lambda ctx: "P99")
    with pytest.raises(PolicyContract):
        select_next(make_ctx(policy="custom:rogue"), registry)

    registry.register("repeat", lambda ctx: "P1")
    with pytest.raises(PolicyContract):
        select_next(make_ctx(policy="custom:repeat", completed={"P1"}), registry)


def test_unknown_policy_at_selection_time():
    with pytest.raises(UnknownPolicy):
        select_next(make_ctx(policy="custom:missing"), PolicyRegistry())
    with pytest.raises(UnknownPolicy):
        select_next(make_ctx(policy="galactic"), PolicyRegistry())


def test_duplicate_policy_rejected():
    registry = PolicyRegistry().register("p", lambda ctx: None)
    with pytest.raises(DuplicatePolicy):
        registry.register("p", lambda ctx: None)


def test_seeded_custom_policy_is_reproducible():
    def random_unmastered(ctx):
        rng = random.Random(ctx.seed)
        candidates = [p.name for p in ctx.curriculum.problems
                      if p.name not in ctx.progress.completed_problems]
        return rng.choice(candidates) if candidates else None

    registry = PolicyRegistry().register("random_unmastered", random_unmastered)
    picks = {select_next(make_ctx(policy="custom:random_unmastered", seed=7), registry)
             for _ in range(10)}
    assert len(picks) == 1


def test_never_returns_completed_or_foreign_problems():
    for completed in (set(), {"P1"}, {"P1", "P2"}, {"P1", "P2", "P3"}):
        for policy in ("fixed", "mastery"):
            choice = select_next(make_ctx(policy=policy, completed=completed))
            if choice is not None:
                assert choice not in completed
                assert choice in {"P1", "P2", "P3"}


def test_mastery_none_implies_remaining_kcs_all_mastered():
    rng = random.Random(2026)
    all_problems = {"P1", "P2", "P3"}
    for _ in range(200):
        completed = {p for p in all_problems if rng.random() < 0.4}
        beliefs = {kc: rng.random() for kc in ("k1", "k2", "k3")}
        ctx = make_ctx(policy="mastery", completed=completed, beliefs=beliefs)
        if next_task_mastery(ctx) is None:
            mastered = {kc for kc, p in beliefs.items() if p >= 0.95}
            remaining_kcs = set()
            for problem in ctx.curriculum.problems:
                if problem.name not in completed:
                    remaining_kcs |= problem.kcs
            assert remaining_kcs <= mastered


def test_fixed_policy_full_run_is_curriculum_order():
    completed: set[str] = set()
    order = []
    while True:
        choice = next_task_fixed(make_ctx(completed=completed))
        if choice is None:
            break
        order.append(choice)
        completed.add(choice)
    assert order == ["P1", "P2", "P3"]
