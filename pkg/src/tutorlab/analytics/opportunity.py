"""First-attempt opportunity tables, the substrate for curves and model fits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from ..datalog import LogStore
from ..errors import EmptyStore


@dataclass(frozen=True)
class OpportunityRow:
    student: str
    step: str
    problem: str
    kcs: tuple[str, ...]
    y: int  # 1 iff the first attempt was CORRECT (hints count as 0)
    opportunities: tuple[int, ...]  # parallel to kcs, 1-based


@dataclass(frozen=True)
class OpportunityTable:
    rows: tuple[OpportunityRow, ...]

    @property
    def students(self) -> list[str]:
        return sorted({r.student for r in self.rows})

    @property
    def kcs(self) -> list[str]:
        return sorted({kc for r in self.rows for kc in r.kcs})


def build_opportunity_table(
    store: LogStore,
    kc_model: Optional[Mapping[str, tuple[str, ...]]] = None,
) -> OpportunityTable:
    """One row per first attempt, with per-KC opportunity counts.

    Tutor-performed records and retries are skipped. Opportunities are always
    recounted from scratch so relabeled KC models (keys either
    "problem::step" or bare step name) renumber consistently.
    """
    if not store.records:
        raise EmptyStore("no transactions to tabulate")
    counts: dict[tuple[str, str], int] = {}
    rows: list[OpportunityRow] = []
    for record in store.records:
        if record.is_tutor_performed or record.attempt_at_step != 1:
            continue
        kcs = record.kcs
        if kc_model is not None:
            scoped = f"{record.problem_name}::{record.step_name}"
            if scoped in kc_model:
                kcs = tuple(kc_model[scoped])
            elif record.step_name in kc_model:
                kcs = tuple(kc_model[record.step_name])
            else:
                kcs = ()
        if not kcs:
            continue
        opps = []
        for kc in kcs:
            counts[(record.anon_student_id, kc)] = counts.get((record.anon_student_id, kc), 0) + 1
            opps.append(counts[(record.anon_student_id, kc)])
        rows.append(
            OpportunityRow(
                student=record.anon_student_id,
                step=record.step_name,
                problem=record.problem_name,
                kcs=kcs,
                y=1 if record.outcome == "CORRECT" else 0,
                opportunities=tuple(opps),
            )
        )
    return OpportunityTable(rows=tuple(rows))
