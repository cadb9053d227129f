"""Tutor packages: behavior graphs, curricula, KC model, and KC parameters
bundled in one JSON document, plus whole-package validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .graph import BehaviorGraph, Diagnostic, validate_graph
from .student import DEFAULT_KC_PARAMS, KcParams
from .tasks import CUSTOM_PREFIX, FIXED, MASTERY, Curriculum

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TutorPackage:
    name: str
    graphs: tuple[BehaviorGraph, ...]
    curricula: tuple[Curriculum, ...] = ()
    kc_model: dict[str, str] = field(default_factory=dict)
    kc_params: dict[str, KcParams] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def graph(self, problem_name: str) -> BehaviorGraph:
        for g in self.graphs:
            if g.problem_name == problem_name:
                return g
        raise KeyError(problem_name)

    def curriculum(self, curriculum_id: str) -> Curriculum:
        for c in self.curricula:
            if c.id == curriculum_id:
                return c
        raise KeyError(curriculum_id)

    def params_for(self, kc: str) -> KcParams:
        return self.kc_params.get(kc, DEFAULT_KC_PARAMS)

    def params_table(self) -> dict[str, KcParams]:
        return {kc: self.params_for(kc) for kc in self.kc_model}

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "name": self.name,
            "kc_model": dict(self.kc_model),
            "kc_params": [
                {
                    "kc": kc,
                    "p_init": p.p_init,
                    "p_transit": p.p_transit,
                    "p_slip": p.p_slip,
                    "p_guess": p.p_guess,
                }
                for kc, p in self.kc_params.items()
            ],
            "graphs": [g.to_json() for g in self.graphs],
            "curricula": [c.to_json() for c in self.curricula],
        }

    @staticmethod
    def from_json(doc: dict) -> "TutorPackage":
        kc_model = dict(doc.get("kc_model", {}))
        graphs = []
        for gdoc in doc.get("graphs", ()):
            gdoc = dict(gdoc)
            gdoc.setdefault("kc_model", kc_model)
            graphs.append(BehaviorGraph.from_json(gdoc))
        params = {}
        for row in doc.get("kc_params", ()):
            params[row["kc"]] = KcParams(
                p_init=float(row["p_init"]),
                p_transit=float(row["p_transit"]),
                p_slip=float(row["p_slip"]),
                p_guess=float(row["p_guess"]),
            )
        return TutorPackage(
            name=doc["name"],
            graphs=tuple(graphs),
            curricula=tuple(Curriculum.from_json(c) for c in doc.get("curricula", ())),
            kc_model=kc_model,
            kc_params=params,
            schema_version=int(doc.get("schema_version", SCHEMA_VERSION)),
        )


def validate_package(package: TutorPackage) -> list[Diagnostic]:
    """Every graph valid, curricula resolvable, all KC labels declared."""
    out: list[Diagnostic] = []
    names = [g.problem_name for g in package.graphs]
    for name in names:
        if names.count(name) > 1:
            out.append(Diagnostic("duplicate_problem", f"problem {name!r} defined more than once"))
    for graph in package.graphs:
        for d in validate_graph(graph, kc_model=package.kc_model or graph.kc_model):
            out.append(Diagnostic(d.code, f"{graph.problem_name}: {d.message}", d.severity))
    curriculum_ids = [c.id for c in package.curricula]
    for cid in curriculum_ids:
        if curriculum_ids.count(cid) > 1:
            out.append(Diagnostic("duplicate_curriculum", f"curriculum {cid!r} defined more than once"))
    for curriculum in package.curricula:
        seen = set()
        for problem in curriculum.problems:
            if problem.name in seen:
                out.append(Diagnostic(
                    "duplicate_problem",
                    f"curriculum {curriculum.id!r} lists {problem.name!r} twice"))
            seen.add(problem.name)
            if problem.name not in names:
                out.append(Diagnostic(
                    "unknown_problem",
                    f"curriculum {curriculum.id!r} references missing problem {problem.name!r}"))
            for kc in problem.kcs:
                if package.kc_model and kc not in package.kc_model:
                    out.append(Diagnostic(
                        "unknown_kc",
                        f"curriculum {curriculum.id!r} labels {problem.name!r} with undeclared KC {kc!r}"))
        policy = curriculum.policy
        if policy not in (FIXED, MASTERY) and not policy.startswith(CUSTOM_PREFIX):
            out.append(Diagnostic(
                "unknown_policy",
                f"curriculum {curriculum.id!r} names unrecognized policy {policy!r}"))
    for kc in package.kc_params:
        if package.kc_model and kc not in package.kc_model:
            out.append(Diagnostic("unknown_kc", f"KC parameter row for undeclared KC {kc!r}"))
    return out


def load_package(path) -> TutorPackage:
    """Load from a package JSON file, or a directory holding package.json."""
    p = Path(path)
    if p.is_dir():
        candidates = sorted(p.glob("*.json"))
        preferred = p / "package.json"
        p = preferred if preferred.exists() else (candidates[0] if candidates else preferred)
    return TutorPackage.from_json(json.loads(p.read_text(encoding="utf-8")))


def save_package(package: TutorPackage, path) -> None:
    Path(path).write_text(json.dumps(package.to_json(), indent=2) + "\n", encoding="utf-8")
