"""Per-student mastery tracking: Bayesian knowledge tracing plus detectors.

Beliefs update on the first action at each step only; retries are ignored.
A hint taken as the first action counts as an incorrect observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .errors import DetectorRange, DuplicateDetector, InvalidParams, UnknownKc

DEFAULT_MASTERY_THRESHOLD = 0.95


@dataclass(frozen=True)
class KcParams:
    p_init: float
    p_transit: float
    p_slip: float
    p_guess: float

    def validate(self) -> None:
        for name, p in (
            ("p_init", self.p_init),
            ("p_transit", self.p_transit),
            ("p_slip", self.p_slip),
            ("p_guess", self.p_guess),
        ):
            if not (0.0 <= p <= 1.0):
                raise InvalidParams(f"{name}={p} outside [0, 1]")
        if self.p_slip + self.p_guess >= 1.0:
            raise InvalidParams(
                f"p_slip + p_guess = {self.p_slip + self.p_guess} must stay below 1"
            )


# Neutral, identifiable defaults applied when a package omits a KC's row.
DEFAULT_KC_PARAMS = KcParams(p_init=0.25, p_transit=0.2, p_slip=0.1, p_guess=0.2)


@dataclass(frozen=True)
class KcBelief:
    kc: str
    p_mastery: float
    opportunities: int = 0


def bkt_update(belief: KcBelief, params: KcParams, correct: bool) -> KcBelief:
    """Bayes posterior on the observation, then the learning transition."""
    params.validate()
    p = belief.p_mastery
    if correct:
        num = p * (1.0 - params.p_slip)
        den = num + (1.0 - p) * params.p_guess
    else:
        num = p * params.p_slip
        den = num + (1.0 - p) * (1.0 - params.p_guess)
    posterior = num / den if den > 0.0 else p
    p_new = posterior + (1.0 - posterior) * params.p_transit
    p_new = min(1.0, max(0.0, p_new))
    return KcBelief(kc=belief.kc, p_mastery=p_new, opportunities=belief.opportunities + 1)


@dataclass(frozen=True)
class Detector:
    """Custom student-model variable updated after every transaction.

    The update function must be pure in (model, record); output is validated
    against the declared bounds.
    """

    name: str
    update: Callable[["StudentModel", object], float]
    lo: float = float("-inf")
    hi: float = float("inf")


class DetectorRegistry:
    def __init__(self):
        self._detectors: list[Detector] = []

    def register(self, detector: Detector) -> "DetectorRegistry":
        if any(d.name == detector.name for d in self._detectors):
            raise DuplicateDetector(f"detector {detector.name!r} already registered")
        self._detectors.append(detector)
        return self

    @property
    def names(self) -> list[str]:
        return [d.name for d in self._detectors]

    def __iter__(self):
        return iter(self._detectors)

    def __len__(self):
        return len(self._detectors)


@dataclass
class StudentModel:
    student_id: str
    beliefs: dict[str, KcBelief] = field(default_factory=dict)
    custom_vars: dict[str, float] = field(default_factory=dict)
    mastery_threshold: float = DEFAULT_MASTERY_THRESHOLD

    def __post_init__(self):
        if not (0.0 < self.mastery_threshold < 1.0):
            raise InvalidParams(f"mastery threshold {self.mastery_threshold} outside (0, 1)")

    def belief(self, kc: str, params_table: Mapping[str, KcParams]) -> KcBelief:
        existing = self.beliefs.get(kc)
        if existing is not None:
            return existing
        return KcBelief(kc=kc, p_mastery=params_table[kc].p_init, opportunities=0)


def apply_transaction(
    model: StudentModel,
    evaluation,
    params_table: Mapping[str, KcParams],
    detectors: Optional[DetectorRegistry] = None,
    record=None,
) -> StudentModel:
    """Fold one evaluated transaction into the model.

    Only the first action at a step moves beliefs (CORRECT as correct,
    INCORRECT or HINT as incorrect). Detectors always run, in registration
    order, seeing the belief-updated model.
    """
    beliefs = dict(model.beliefs)
    if evaluation.attempt_at_step == 1:
        correct = evaluation.outcome == "CORRECT"
        for kc in evaluation.kcs:
            if kc not in params_table:
                raise UnknownKc(f"KC {kc!r} has no parameter row")
            belief = beliefs.get(kc) or KcBelief(kc=kc, p_mastery=params_table[kc].p_init)
            beliefs[kc] = bkt_update(belief, params_table[kc], correct)
    updated = StudentModel(
        student_id=model.student_id,
        beliefs=beliefs,
        custom_vars=dict(model.custom_vars),
        mastery_threshold=model.mastery_threshold,
    )
    if detectors is not None:
        updated = run_detectors(updated, record if record is not None else evaluation, detectors)
    return updated


def run_detectors(model: StudentModel, record, detectors: DetectorRegistry) -> StudentModel:
    """Apply every detector in registration order; values land in custom_vars."""
    updated = StudentModel(
        student_id=model.student_id,
        beliefs=dict(model.beliefs),
        custom_vars=dict(model.custom_vars),
        mastery_threshold=model.mastery_threshold,
    )
    for detector in detectors:
        value = float(detector.update(updated, record))
        if not math.isfinite(value) or not (detector.lo <= value <= detector.hi):
            raise DetectorRange(
                f"detector {detector.name!r} produced {value}, outside [{detector.lo}, {detector.hi}]"
            )
        updated.custom_vars[detector.name] = value
    return updated


def mastered_kcs(model: StudentModel) -> set[str]:
    return {kc for kc, b in model.beliefs.items() if b.p_mastery >= model.mastery_threshold}
