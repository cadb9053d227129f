from __future__ import annotations

import math
import random

import pytest

from tutorlab.analytics import AfmConfig, AfmModel, afm_gradient, fit_afm, log_likelihood
from tutorlab.analytics.opportunity import OpportunityRow, OpportunityTable


def make_table(rows):
    return OpportunityTable(rows=tuple(
        OpportunityRow(student=s, step=f"step-{i}", problem="p", kcs=tuple(kcs), y=y,
                       opportunities=tuple(ts))
        for i, (s, kcs, y, ts) in enumerate(rows)
    ))


def random_instance(rng: random.Random, n_students=4, n_kcs=3, n_rows=40, max_kcs_per_row=2):
    students = [f"s{i}" for i in range(n_students)]
    kcs = [f"k{i}" for i in range(n_kcs)]
    rows = []
    opp_count = {}
    for _ in range(n_rows):
        s = rng.choice(students)
        chosen = rng.sample(kcs, k=rng.randint(1, max_kcs_per_row))
        ts = []
        for kc in chosen:
            opp_count[(s, kc)] = opp_count.get((s, kc), 0) + 1
            ts.append(opp_count[(s, kc)])
        rows.append((s, chosen, rng.randint(0, 1), ts))
    table = make_table(rows)
    model = AfmModel(
        theta={s: rng.uniform(-1, 1) for s in students},
        beta={k: rng.uniform(-1, 1) for k in kcs},
        gamma={k: rng.uniform(0, 0.5) for k in kcs},
        lambda_theta=rng.choice([0.0, 0.5, 1.0]),
    )
    return model, table


def test_zero_model_predicts_half():
    model = AfmModel(theta={"s0": 0.0, "s1": 0.0}, beta={"k": 0.0}, gamma={"k": 0.0})
    table = make_table([("s0", ["k"], 1, [1]), ("s1", ["k"], 0, [1])])
    # Each row contributes log(0.5).
    assert log_likelihood(model, table) == pytest.approx(2 * math.log(0.5))


def test_beta_gamma_cancel_to_even_odds():
    model = AfmModel(theta={"s0": 0.0, "s1": 0.0}, beta={"k": -1.0}, gamma={"k": 0.5})
    table = make_table([("s0", ["k"], 1, [2])])  # logit = -1 + 0.5*2 = 0
    assert log_likelihood(model, table) == pytest.approx(math.log(0.5))


def test_gradient_balanced_data_is_zero_on_beta():
    model = AfmModel(theta={"s0": 0.0, "s1": 0.0}, beta={"k": 0.0}, gamma={"k": 0.0},
                     lambda_theta=0.0)
    table = make_table([("s0", ["k"], 1, [1]), ("s1", ["k"], 0, [1])])
    grad = afm_gradient(model, table)
    assert grad["beta"]["k"] == pytest.approx(0.0)


def test_gradient_single_row_half_residual():
    model = AfmModel(theta={"s0": 0.0, "s1": 0.0}, beta={"k": 0.0}, gamma={"k": 0.0},
                     lambda_theta=0.0)
    table = make_table([("s0", ["k"], 1, [1]), ("s1", [], 0, [])])
    grad = afm_gradient(model, table)
    assert grad["beta"]["k"] == pytest.approx(0.5)  # y - p = 1 - 0.5


def central_difference(model, table, group, key, h=1e-5):
    def perturbed(eps):
        kwargs = {
            "theta": dict(model.theta),
            "beta": dict(model.beta),
            "gamma": dict(model.gamma),
        }
        kwargs[group][key] += eps
        shifted = AfmModel(lambda_theta=model.lambda_theta, **kwargs)
        return log_likelihood(shifted, table)

    return (perturbed(h) - perturbed(-h)) / (2 * h)


def test_gradient_matches_central_differences_on_100_instances():
    rng = random.Random(1701)
    worst = 0.0
    for _ in range(100):
        model, table = random_instance(rng)
        grad = afm_gradient(model, table)
        for group in ("theta", "beta", "gamma"):
            for key, value in grad[group].items():
                fd = central_difference(model, table, group, key)
                scale = max(1.0, abs(fd))
                worst = max(worst, abs(value - fd) / scale)
    assert worst < 1e-6


def test_fit_requires_two_students_and_a_kc():
    table = make_table([("s0", ["k"], 1, [1])])
    with pytest.raises(ValueError):
        fit_afm(table)


def test_fit_monotone_log_likelihood():
    # Re-run the optimizer while checkpointing LL at every iterate count.
    rng = random.Random(77)
    _, table = random_instance(rng, n_students=6, n_kcs=3, n_rows=120)
    lls = []
    for iters in range(1, 30):
        fit = fit_afm(table, AfmConfig(max_iter=iters, tol=0.0))
        lls.append(fit.log_likelihood)
    assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))


def test_fit_keeps_gamma_nonnegative():
    rng = random.Random(11)
    # Decreasing-accuracy data pulls gamma negative; the clamp must hold it at 0.
    rows = []
    for s in ("s0", "s1", "s2"):
        for t in range(1, 15):
            rows.append((s, ["k"], 1 if t < 4 else 0, [t]))
    table = make_table(rows)
    fit = fit_afm(table)
    assert fit.model.gamma["k"] >= 0.0


def test_degenerate_kc_flagged_fit_proceeds():
    rows = [("s0", ["easy"], 1, [1]), ("s1", ["easy"], 1, [1]),
            ("s0", ["mixed"], 1, [1]), ("s1", ["mixed"], 0, [1])]
    fit = fit_afm(make_table(rows))
    assert fit.degenerate_kcs == ("easy",)
    assert math.isfinite(fit.log_likelihood)


def test_identifiability_shift_leaves_likelihood_unchanged():
    # The theta/beta shift symmetry holds on single-KC steps (the standard case).
    rng = random.Random(5)
    model, table = random_instance(rng, max_kcs_per_row=1)
    shifted = AfmModel(
        theta={s: v + 0.37 for s, v in model.theta.items()},
        beta={k: v - 0.37 for k, v in model.beta.items()},
        gamma=dict(model.gamma),
        lambda_theta=model.lambda_theta,
    )
    base = log_likelihood(model, table, penalized=False)
    assert log_likelihood(shifted, table, penalized=False) == pytest.approx(base, abs=1e-9)


def test_zero_based_opportunity_flag_shifts_predictor():
    model = AfmModel(theta={"s0": 0.0, "s1": 0.0}, beta={"k": 0.0}, gamma={"k": 1.0})
    table = make_table([("s0", ["k"], 1, [1])])
    one_based = log_likelihood(model, table, config=AfmConfig())
    zero_based = log_likelihood(model, table, config=AfmConfig(zero_based_opportunities=True))
    assert one_based == pytest.approx(-math.log(1 + math.exp(-1)))
    assert zero_based == pytest.approx(math.log(0.5))
