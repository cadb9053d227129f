"""Additive Factors Model: logistic growth in first-attempt accuracy.

For a row by student i on a step labeled with KCs K(s),

    logit p = theta_i + sum_{k in K(s)} (beta_k + gamma_k * T_ik)

with T_ik the 1-based opportunity index (0-based available via config).
The fit maximizes the penalized log-likelihood

    LL = sum_rows [y log p + (1-y) log(1-p)] - (lambda_theta / 2) * sum_i theta_i^2

by batch ascent along the diagonally preconditioned gradient with a
backtracking line search (log-likelihood never decreases), clamping each
gamma_k to [0, inf) after every step. Only theta is penalized, which pins
down the theta-vs-beta shift symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .opportunity import OpportunityTable


@dataclass(frozen=True)
class AfmConfig:
    lambda_theta: float = 1.0
    max_iter: int = 500
    tol: float = 1e-4
    zero_based_opportunities: bool = False


@dataclass
class AfmModel:
    theta: dict[str, float]
    beta: dict[str, float]
    gamma: dict[str, float]
    lambda_theta: float = 1.0

    @property
    def n_params(self) -> int:
        return len(self.theta) + len(self.beta) + len(self.gamma)


@dataclass(frozen=True)
class AfmFit:
    model: AfmModel
    log_likelihood: float  # penalized, at the returned parameters
    iterations: int
    converged: bool
    degenerate_kcs: tuple[str, ...] = ()


class _Design:
    """Flattened (row, kc) incidence arrays for vectorized evaluation."""

    def __init__(self, table: OpportunityTable, zero_based: bool):
        self.students = table.students
        self.kcs = table.kcs
        s_index = {s: i for i, s in enumerate(self.students)}
        k_index = {k: i for i, k in enumerate(self.kcs)}
        self.y = np.array([r.y for r in table.rows], dtype=float)
        self.student_idx = np.array([s_index[r.student] for r in table.rows], dtype=int)
        entry_row, entry_kc, entry_t = [], [], []
        for ri, row in enumerate(table.rows):
            for kc, t in zip(row.kcs, row.opportunities):
                entry_row.append(ri)
                entry_kc.append(k_index[kc])
                entry_t.append(t - 1 if zero_based else t)
        self.entry_row = np.array(entry_row, dtype=int)
        self.entry_kc = np.array(entry_kc, dtype=int)
        self.entry_t = np.array(entry_t, dtype=float)
        self.n_rows = len(table.rows)

    def logits(self, theta: np.ndarray, beta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
        z = theta[self.student_idx].copy()
        np.add.at(z, self.entry_row, beta[self.entry_kc] + gamma[self.entry_kc] * self.entry_t)
        return z

    def log_likelihood(self, theta, beta, gamma, lambda_theta: float) -> float:
        z = self.logits(theta, beta, gamma)
        # y=1 contributes -log(1+e^-z), y=0 contributes -log(1+e^z)
        ll = -np.logaddexp(0.0, (1.0 - 2.0 * self.y) * z).sum()
        return float(ll - 0.5 * lambda_theta * np.square(theta).sum())

    def gradient(self, theta, beta, gamma, lambda_theta: float):
        z = self.logits(theta, beta, gamma)
        p = 1.0 / (1.0 + np.exp(-np.clip(z, -700, 700)))
        resid = self.y - p
        g_theta = np.bincount(self.student_idx, weights=resid, minlength=len(self.students))
        g_theta -= lambda_theta * theta
        entry_resid = resid[self.entry_row]
        g_beta = np.bincount(self.entry_kc, weights=entry_resid, minlength=len(self.kcs))
        g_gamma = np.bincount(self.entry_kc, weights=entry_resid * self.entry_t, minlength=len(self.kcs))
        return g_theta, g_beta, g_gamma

    def hessian_diag(self, theta, beta, gamma, lambda_theta: float):
        """Per-parameter curvature, used as a diagonal preconditioner."""
        z = self.logits(theta, beta, gamma)
        p = 1.0 / (1.0 + np.exp(-np.clip(z, -700, 700)))
        w = p * (1.0 - p)
        h_theta = np.bincount(self.student_idx, weights=w, minlength=len(self.students)) + lambda_theta
        entry_w = w[self.entry_row]
        h_beta = np.bincount(self.entry_kc, weights=entry_w, minlength=len(self.kcs))
        h_gamma = np.bincount(self.entry_kc, weights=entry_w * self.entry_t ** 2, minlength=len(self.kcs))
        floor = 1e-8
        return np.maximum(h_theta, floor), np.maximum(h_beta, floor), np.maximum(h_gamma, floor)


def _to_arrays(model: AfmModel, students: list[str], kcs: list[str]):
    theta = np.array([model.theta.get(s, 0.0) for s in students])
    beta = np.array([model.beta.get(k, 0.0) for k in kcs])
    gamma = np.array([model.gamma.get(k, 0.0) for k in kcs])
    return theta, beta, gamma


def log_likelihood(model: AfmModel, table: OpportunityTable, penalized: bool = True,
                   config: AfmConfig = AfmConfig()) -> float:
    design = _Design(table, config.zero_based_opportunities)
    theta, beta, gamma = _to_arrays(model, design.students, design.kcs)
    lam = model.lambda_theta if penalized else 0.0
    return design.log_likelihood(theta, beta, gamma, lam)


def afm_gradient(model: AfmModel, table: OpportunityTable,
                 config: AfmConfig = AfmConfig()) -> dict[str, dict[str, float]]:
    """Analytic gradient of the penalized log-likelihood at `model`."""
    design = _Design(table, config.zero_based_opportunities)
    theta, beta, gamma = _to_arrays(model, design.students, design.kcs)
    g_theta, g_beta, g_gamma = design.gradient(theta, beta, gamma, model.lambda_theta)
    return {
        "theta": dict(zip(design.students, g_theta.tolist())),
        "beta": dict(zip(design.kcs, g_beta.tolist())),
        "gamma": dict(zip(design.kcs, g_gamma.tolist())),
    }


def _degenerate_kcs(table: OpportunityTable) -> tuple[str, ...]:
    seen: dict[str, set[int]] = {}
    for row in table.rows:
        for kc in row.kcs:
            seen.setdefault(kc, set()).add(row.y)
    return tuple(sorted(kc for kc, ys in seen.items() if len(ys) == 1))


def fit_afm(table: OpportunityTable, config: AfmConfig = AfmConfig()) -> AfmFit:
    """Maximize the penalized likelihood; monotone in LL at every iteration."""
    if len(table.students) < 2:
        raise ValueError("AFM needs at least 2 students")
    if not table.kcs:
        raise ValueError("AFM needs at least 1 KC")
    design = _Design(table, config.zero_based_opportunities)
    theta = np.zeros(len(design.students))
    beta = np.zeros(len(design.kcs))
    gamma = np.zeros(len(design.kcs))
    lam = config.lambda_theta

    ll = design.log_likelihood(theta, beta, gamma, lam)
    step = 1.0
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        g_theta, g_beta, g_gamma = design.gradient(theta, beta, gamma, lam)
        # Projected gradient: a gamma pinned at 0 with a negative pull is optimal.
        proj_gamma = np.where((gamma <= 0.0) & (g_gamma < 0.0), 0.0, g_gamma)
        grad_norm = max(
            np.abs(g_theta).max(initial=0.0),
            np.abs(g_beta).max(initial=0.0),
            np.abs(proj_gamma).max(initial=0.0),
        )
        if grad_norm < config.tol:
            converged = True
            break
        h_theta, h_beta, h_gamma = design.hessian_diag(theta, beta, gamma, lam)
        d_theta = g_theta / h_theta
        d_beta = g_beta / h_beta
        d_gamma = g_gamma / h_gamma
        improved = False
        alpha = min(step, 1.0)
        for _ in range(50):
            t2 = theta + alpha * d_theta
            b2 = beta + alpha * d_beta
            c2 = np.maximum(gamma + alpha * d_gamma, 0.0)
            ll2 = design.log_likelihood(t2, b2, c2, lam)
            if ll2 >= ll:
                theta, beta, gamma, ll = t2, b2, c2, ll2
                step = alpha * 1.5
                improved = True
                break
            alpha *= 0.5
        if not improved:
            converged = True  # no ascent direction at line-search resolution
            break

    model = AfmModel(
        theta=dict(zip(design.students, theta.tolist())),
        beta=dict(zip(design.kcs, beta.tolist())),
        gamma=dict(zip(design.kcs, gamma.tolist())),
        lambda_theta=lam,
    )
    return AfmFit(
        model=model,
        log_likelihood=ll,
        iterations=iterations,
        converged=converged,
        degenerate_kcs=_degenerate_kcs(table),
    )
