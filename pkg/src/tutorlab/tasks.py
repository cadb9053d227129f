"""Task selection (the between-problem loop).

Built-in policies: a fixed sequence and individualized mastery learning.
Custom policies register by name and receive a read-only context.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .errors import DuplicatePolicy, PolicyContract, UnknownPolicy
from .student import StudentModel, mastered_kcs

FIXED = "fixed"
MASTERY = "mastery"
CUSTOM_PREFIX = "custom:"


@dataclass(frozen=True)
class CurriculumProblem:
    name: str
    kcs: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Curriculum:
    id: str
    problems: tuple[CurriculumProblem, ...]
    policy: str = FIXED  # "fixed" | "mastery" | "custom:<name>"

    def problem_names(self) -> list[str]:
        return [p.name for p in self.problems]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "policy": self.policy,
            "problems": [{"problem": p.name, "kcs": sorted(p.kcs)} for p in self.problems],
        }

    @staticmethod
    def from_json(doc: dict) -> "Curriculum":
        return Curriculum(
            id=doc["id"],
            problems=tuple(
                CurriculumProblem(p["problem"], frozenset(p.get("kcs", ())))
                for p in doc.get("problems", ())
            ),
            policy=doc.get("policy", FIXED),
        )


@dataclass(frozen=True)
class ProgressRecord:
    student_id: str
    completed_problems: frozenset[str] = frozenset()
    in_progress: Optional[str] = None


@dataclass(frozen=True)
class PolicyContext:
    """Read-only snapshot handed to selection policies."""

    model: StudentModel
    curriculum: Curriculum
    progress: ProgressRecord
    seed: int = 0


Policy = Callable[[PolicyContext], Optional[str]]


def next_task_fixed(ctx: PolicyContext) -> Optional[str]:
    """First problem in curriculum order the student has not completed."""
    for problem in ctx.curriculum.problems:
        if problem.name not in ctx.progress.completed_problems:
            return problem.name
    return None


def next_task_mastery(ctx: PolicyContext) -> Optional[str]:
    """Earliest uncompleted problem that still practices an unmastered KC.

    Returns None once every KC of every remaining problem is mastered, so
    students never over-practice.
    """
    mastered = mastered_kcs(ctx.model)
    for problem in ctx.curriculum.problems:
        if problem.name in ctx.progress.completed_problems:
            continue
        if any(kc not in mastered for kc in problem.kcs):
            return problem.name
    return None


class PolicyRegistry:
    def __init__(self):
        self._policies: dict[str, Policy] = {}

    def register(self, name: str, policy: Policy) -> "PolicyRegistry":
        if name in self._policies:
            raise DuplicatePolicy(f"policy {name!r} already registered")
        self._policies[name] = policy
        return self

    def get(self, name: str) -> Policy:
        if name not in self._policies:
            raise UnknownPolicy(f"no custom policy named {name!r}")
        return self._policies[name]

    def names(self) -> list[str]:
        return sorted(self._policies)


def select_next(ctx: PolicyContext, registry: Optional[PolicyRegistry] = None) -> Optional[str]:
    """Dispatch on the curriculum's policy and enforce the policy contract."""
    policy_name = ctx.curriculum.policy
    if policy_name == FIXED:
        choice = next_task_fixed(ctx)
    elif policy_name == MASTERY:
        choice = next_task_mastery(ctx)
    elif policy_name.startswith(CUSTOM_PREFIX):
        name = policy_name[len(CUSTOM_PREFIX):]
        if registry is None:
            raise UnknownPolicy(f"no custom policy named {name!r}")
        choice = registry.get(name)(ctx)
    else:
        raise UnknownPolicy(f"unrecognized policy {policy_name!r}")
    if choice is not None:
        if choice not in ctx.curriculum.problem_names():
            raise PolicyContract(f"policy {policy_name!r} chose {choice!r}, not in the curriculum")
        if choice in ctx.progress.completed_problems:
            raise PolicyContract(f"policy {policy_name!r} re-issued completed problem {choice!r}")
    return choice
