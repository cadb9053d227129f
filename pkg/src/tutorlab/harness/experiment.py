"""Scripted experiments: provision, randomize, run a cohort, export, summarize.

A script describes the package, the assignments (with condition labels,
test-mode flags, and prerequisites), the arms (which assignments each
condition group works through), and a cohort of simulated students. The
runner provisions everything through the public API, imports the seeded
condition CSV, runs every student, and writes the log and a per-condition
summary.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .. import datalog
from ..errors import ProvisioningFailed
from ..pack import TutorPackage
from ..service.app import create_app
from ..student import KcBelief, KcParams, bkt_update
from .client import ApiClient
from .sim import SimulatedStudent, StudentRuntime, run_assignment


def _as_range(value) -> tuple[float, float]:
    if isinstance(value, (int, float)):
        return float(value), float(value)
    lo, hi = value
    return float(lo), float(hi)


@dataclass(frozen=True)
class CohortSpec:
    n_students: int
    p_init: tuple[float, float] = (0.2, 0.4)
    p_transit: tuple[float, float] = (0.2, 0.3)
    p_slip: tuple[float, float] = (0.1, 0.1)
    p_guess: tuple[float, float] = (0.2, 0.2)
    hint_propensity: float = 0.0

    @staticmethod
    def from_json(doc: dict) -> "CohortSpec":
        return CohortSpec(
            n_students=int(doc["n_students"]),
            p_init=_as_range(doc.get("p_init", (0.2, 0.4))),
            p_transit=_as_range(doc.get("p_transit", (0.2, 0.3))),
            p_slip=_as_range(doc.get("p_slip", 0.1)),
            p_guess=_as_range(doc.get("p_guess", 0.2)),
            hint_propensity=float(doc.get("hint_propensity", 0.0)),
        )


@dataclass(frozen=True)
class AssignmentSpec:
    name: str
    curriculum: str
    condition_name: str = ""
    test_mode: bool = False
    prerequisites: tuple[str, ...] = ()
    policy_override: Optional[str] = None
    mastery_threshold: float = 0.95

    @staticmethod
    def from_json(doc: dict) -> "AssignmentSpec":
        return AssignmentSpec(
            name=doc["name"],
            curriculum=doc["curriculum"],
            condition_name=doc.get("condition_name", ""),
            test_mode=bool(doc.get("test_mode", False)),
            prerequisites=tuple(doc.get("prerequisites", ())),
            policy_override=doc.get("policy_override"),
            mastery_threshold=float(doc.get("mastery_threshold", 0.95)),
        )


@dataclass(frozen=True)
class ExperimentScript:
    seed: int
    package_doc: dict
    cohort: CohortSpec
    assignments: tuple[AssignmentSpec, ...]
    arms: tuple[tuple[str, ...], ...]
    class_name: str = "Experiment Class"
    max_transactions_per_student: Optional[int] = None
    max_problems_per_student: Optional[int] = None

    def validate(self) -> None:
        if self.cohort.n_students < 1:
            raise ProvisioningFailed("cohort needs at least one student")
        names = {a.name for a in self.assignments}
        for arm in self.arms:
            for ref in arm:
                if ref not in names:
                    raise ProvisioningFailed(f"arm references unknown assignment {ref!r}")
        for spec in self.assignments:
            for prereq in spec.prerequisites:
                if prereq not in names:
                    raise ProvisioningFailed(f"{spec.name!r} requires unknown assignment {prereq!r}")

    @staticmethod
    def from_json(doc: dict, base_dir: Optional[Path] = None) -> "ExperimentScript":
        if "package" in doc:
            package_doc = doc["package"]
        else:
            path = Path(doc["package_path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            package_doc = json.loads(path.read_text(encoding="utf-8"))
        return ExperimentScript(
            seed=int(doc.get("seed", 0)),
            package_doc=package_doc,
            cohort=CohortSpec.from_json(doc["cohort"]),
            assignments=tuple(AssignmentSpec.from_json(a) for a in doc["assignments"]),
            arms=tuple(tuple(arm) for arm in doc["arms"]),
            class_name=doc.get("class_name", "Experiment Class"),
            max_transactions_per_student=doc.get("max_transactions_per_student"),
            max_problems_per_student=doc.get("max_problems_per_student"),
        )

    @staticmethod
    def load(path) -> "ExperimentScript":
        p = Path(path)
        return ExperimentScript.from_json(json.loads(p.read_text(encoding="utf-8")), base_dir=p.parent)


@dataclass
class ExperimentResult:
    log_path: Path
    summary_path: Path
    conditions_csv_path: Path
    summary: dict
    class_id: str = ""


def _draw(rng: random.Random, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return lo if lo == hi else rng.uniform(lo, hi)


def _student_params(script: ExperimentScript, login: str, kcs: list[str]) -> dict[str, KcParams]:
    rng = random.Random(f"{script.seed}:{login}")
    return {
        kc: KcParams(
            p_init=_draw(rng, script.cohort.p_init),
            p_transit=_draw(rng, script.cohort.p_transit),
            p_slip=_draw(rng, script.cohort.p_slip),
            p_guess=_draw(rng, script.cohort.p_guess),
        )
        for kc in kcs
    }


def build_condition_csv(script: ExperimentScript, logins: list[str]) -> str:
    """Seeded randomization of students over arms, as the import CSV."""
    rng = random.Random(script.seed)
    shuffled = list(logins)
    rng.shuffle(shuffled)
    lines = ["student_id,assignment_id"]
    for i, login in enumerate(shuffled):
        for assignment_name in script.arms[i % len(script.arms)]:
            lines.append(f"{login},{assignment_name}")
    return "\n".join(lines) + "\n"


def run_experiment(script: ExperimentScript, out_dir, client: Optional[ApiClient] = None) -> ExperimentResult:
    script.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    owns_client = client is None
    test_client = None
    if owns_client:
        from fastapi.testclient import TestClient

        test_client = TestClient(create_app())
        test_client.__enter__()
        client = ApiClient(test_client)

    try:
        client.login("root")
        package = TutorPackage.from_json(script.package_doc)
        client.publish_package(script.package_doc)

        logins = [f"s{i:03d}" for i in range(1, script.cohort.n_students + 1)]
        student_ids = []
        for login in logins:
            student_ids.append(client.create_account(login, "student", f"Simulated {login}")["id"])
        teacher = client.create_account("teacher1", "teacher", "Experiment Teacher")
        roster = client.create_class(script.class_name, student_ids, teacher_id=teacher["id"])

        assignment_ids: dict[str, str] = {}
        for spec in script.assignments:
            created = client.create_assignment(
                name=spec.name,
                class_id=roster["id"],
                package_name=package.name,
                curriculum_id=spec.curriculum,
                condition_name=spec.condition_name,
                test_mode=spec.test_mode,
                prerequisites=[assignment_ids[p] for p in spec.prerequisites],
                policy_override=spec.policy_override,
                mastery_threshold=spec.mastery_threshold,
            )
            assignment_ids[spec.name] = created["id"]

        csv_text = build_condition_csv(script, logins)
        csv_path = out / "conditions.csv"
        csv_path.write_text(csv_text, encoding="utf-8")
        client.import_conditions(csv_text)

        test_modes = {assignment_ids[a.name]: a.test_mode for a in script.assignments}
        kcs = sorted(package.kc_model)
        for index, login in enumerate(sorted(logins)):
            student = SimulatedStudent(
                id=login,
                kc_params=_student_params(script, login, kcs),
                hint_propensity=script.cohort.hint_propensity,
                seed=script.seed * 100_003 + index,
            )
            runtime = StudentRuntime(student=student)
            student_client = ApiClient(client.http)
            student_client.login(login)
            while True:
                worklist = student_client.worklist()
                actionable = [
                    e for e in worklist if e["status"] in ("available", "in_progress")
                ]
                if not actionable:
                    break
                if (script.max_transactions_per_student is not None
                        and runtime.transactions >= script.max_transactions_per_student):
                    break
                entry = actionable[0]
                aid = entry["assignment"]["id"]
                run_assignment(
                    runtime,
                    student_client,
                    aid,
                    package,
                    test_mode=test_modes[aid],
                    max_transactions=script.max_transactions_per_student,
                    max_problems=script.max_problems_per_student,
                )

        log_text = client.export_log()
        log_path = out / "log.tsv"
        log_path.write_text(log_text, encoding="utf-8")

        report = client.class_report(roster["id"])
        summary = summarize(script, package, log_text, report)
        summary_path = out / "summary.json"
        summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        return ExperimentResult(
            log_path=log_path,
            summary_path=summary_path,
            conditions_csv_path=csv_path,
            summary=summary,
            class_id=roster["id"],
        )
    finally:
        if owns_client and test_client is not None:
            test_client.__exit__(None, None, None)


def bkt_replay_mastery(records, params_table: dict[str, KcParams], threshold: float) -> set[str]:
    """Independent recount: fold first attempts through BKT, return mastered KCs."""
    beliefs: dict[str, KcBelief] = {}
    for record in records:
        if record.is_tutor_performed or record.attempt_at_step != 1:
            continue
        correct = record.outcome == "CORRECT"
        for kc in record.kcs:
            belief = beliefs.get(kc) or KcBelief(kc=kc, p_mastery=params_table[kc].p_init)
            beliefs[kc] = bkt_update(belief, params_table[kc], correct)
    return {kc for kc, b in beliefs.items() if b.p_mastery >= threshold}


def summarize(script: ExperimentScript, package: TutorPackage, log_text: str, report: list[dict]) -> dict:
    store = datalog.import_lines(log_text.splitlines())
    params = package.params_table()
    by_condition: dict[str, dict] = {}
    per_student_conditions: dict[str, list[str]] = {}
    for record in store.records:
        if record.is_tutor_performed:
            continue
        cond = record.condition_name
        bucket = by_condition.setdefault(
            cond,
            {"students": set(), "transactions": 0, "first_attempts": 0,
             "first_correct": 0, "problems": set()},
        )
        bucket["students"].add(record.anon_student_id)
        bucket["transactions"] += 1
        bucket["problems"].add((record.anon_student_id, record.problem_name))
        if record.attempt_at_step == 1:
            bucket["first_attempts"] += 1
            bucket["first_correct"] += int(record.outcome == "CORRECT")
        conditions = per_student_conditions.setdefault(record.anon_student_id, [])
        if cond not in conditions:
            conditions.append(cond)

    thresholds = {a.condition_name: a.mastery_threshold for a in script.assignments}
    conditions_summary = {}
    for cond, bucket in sorted(by_condition.items()):
        threshold = thresholds.get(cond, 0.95)
        mastered_counts = []
        for login in sorted(bucket["students"]):
            records = [r for r in store.records
                       if r.anon_student_id == login and r.condition_name == cond]
            mastered_counts.append(len(bkt_replay_mastery(records, params, threshold)))
        n = len(bucket["students"])
        conditions_summary[cond] = {
            "students": n,
            "transactions": bucket["transactions"],
            "first_attempt_accuracy": (
                bucket["first_correct"] / bucket["first_attempts"]
                if bucket["first_attempts"] else None
            ),
            "mean_problems_worked": len(bucket["problems"]) / n if n else 0.0,
            "mean_mastered_kcs": sum(mastered_counts) / n if n else 0.0,
        }

    return {
        "seed": script.seed,
        "conditions": conditions_summary,
        "students": {
            login: conds for login, conds in sorted(per_student_conditions.items())
        },
        "class_report": report,
    }
