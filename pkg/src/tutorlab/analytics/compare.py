"""KC-model comparison via AIC/BIC over per-model AFM fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from ..datalog import LogStore
from .afm import AfmConfig, fit_afm
from .opportunity import build_opportunity_table


@dataclass(frozen=True)
class ModelScore:
    name: str
    n_params: int
    n_obs: int
    log_likelihood: float
    aic: float
    bic: float


@dataclass(frozen=True)
class ModelComparison:
    scores: tuple[ModelScore, ...]  # in input order
    by_aic: tuple[str, ...]
    by_bic: tuple[str, ...]


def compare_kc_models(
    store: LogStore,
    models: Mapping[str, Mapping[str, tuple[str, ...]]],
    config: AfmConfig = AfmConfig(),
) -> ModelComparison:
    """Fit an AFM per candidate step->KCs relabeling and rank the fits.

    AIC = 2k - 2LL and BIC = k ln n - 2LL with k the parameter count and
    n the opportunity-table row count; ties keep input order.
    """
    if len(models) < 2:
        raise ValueError("need at least 2 candidate KC models to compare")
    scores = []
    for name, relabeling in models.items():
        table = build_opportunity_table(store, kc_model=relabeling)
        fit = fit_afm(table, config)
        k = fit.model.n_params
        n = len(table.rows)
        ll = fit.log_likelihood
        scores.append(
            ModelScore(
                name=name,
                n_params=k,
                n_obs=n,
                log_likelihood=ll,
                aic=2.0 * k - 2.0 * ll,
                bic=k * math.log(n) - 2.0 * ll,
            )
        )
    order = {s.name: i for i, s in enumerate(scores)}
    by_aic = tuple(s.name for s in sorted(scores, key=lambda s: (s.aic, order[s.name])))
    by_bic = tuple(s.name for s in sorted(scores, key=lambda s: (s.bic, order[s.name])))
    return ModelComparison(scores=tuple(scores), by_aic=by_aic, by_bic=by_bic)
