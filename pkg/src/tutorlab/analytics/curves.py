"""Learning curves: error rate by practice opportunity."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnknownKc
from .opportunity import OpportunityTable


@dataclass(frozen=True)
class CurvePoint:
    opportunity: int
    error_rate: float
    n: int


@dataclass(frozen=True)
class LearningCurve:
    kc: str
    points: tuple[CurvePoint, ...]


def _curve(observations: dict[int, list[int]], kc: str) -> LearningCurve:
    points = []
    for t in range(1, max(observations) + 1):
        ys = observations.get(t, [])
        if not ys:
            continue
        points.append(CurvePoint(t, sum(1 - y for y in ys) / len(ys), len(ys)))
    return LearningCurve(kc=kc, points=tuple(points))


def learning_curve(table: OpportunityTable, kc: str) -> LearningCurve:
    observations: dict[int, list[int]] = {}
    found = False
    for row in table.rows:
        for row_kc, t in zip(row.kcs, row.opportunities):
            if row_kc == kc:
                found = True
                observations.setdefault(t, []).append(row.y)
    if not found:
        raise UnknownKc(f"KC {kc!r} has no observations")
    return _curve(observations, kc)


def aggregate_learning_curve(table: OpportunityTable) -> LearningCurve:
    """Pool every KC's observations by opportunity index."""
    observations: dict[int, list[int]] = {}
    for row in table.rows:
        for _, t in zip(row.kcs, row.opportunities):
            observations.setdefault(t, []).append(row.y)
    if not observations:
        raise UnknownKc("table has no KC-labeled rows")
    return _curve(observations, "*")


def curve_slope(curve: LearningCurve, max_opportunity: int | None = None) -> float:
    """Least-squares slope of error rate against opportunity index."""
    points = [p for p in curve.points if max_opportunity is None or p.opportunity <= max_opportunity]
    if len(points) < 2:
        raise ValueError("need at least two curve points for a slope")
    n = len(points)
    mean_t = sum(p.opportunity for p in points) / n
    mean_e = sum(p.error_rate for p in points) / n
    num = sum((p.opportunity - mean_t) * (p.error_rate - mean_e) for p in points)
    den = sum((p.opportunity - mean_t) ** 2 for p in points)
    return num / den
