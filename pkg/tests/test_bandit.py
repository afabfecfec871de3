import numpy as np
import pytest

from mmdp import (Mmdp, Policy, counterexample_mmdp, exact_return, mixts_run,
                  per_model_optimum, regret_scan, validate)
from mmdp.bandit import _counterexample_markov_best, is_counterexample


def single_model_rollout_return(mmdp, model, actions_at_s0, horizon):
    """Deterministic rollout of one model taking the given state-0 actions."""
    single = Mmdp(horizon=horizon, transitions=mmdp.transitions[model:model + 1],
                  rewards=mmdp.rewards[model:model + 1],
                  initial_dist=mmdp.initial_dist, model_weights=[1.0])
    table = np.zeros((horizon, 4), dtype=int)
    for i, a in enumerate(actions_at_s0):
        table[2 * i, 0] = a
    return exact_return(single, Policy.deterministic(table))


def test_counterexample_is_valid_and_deterministic():
    ce = counterexample_mmdp(0.5, 6)
    assert validate(ce).ok
    nonzero = ce.transitions[ce.transitions > 0]
    assert np.array_equal(nonzero, np.ones_like(nonzero))
    assert is_counterexample(ce)


def test_counterexample_model0_action0_return():
    ce = counterexample_mmdp(0.5, 4)
    assert single_model_rollout_return(ce, 0, [0, 0], 4) == pytest.approx(4.0)


def test_counterexample_model1_action1_return():
    ce = counterexample_mmdp(0.5, 4)
    assert single_model_rollout_return(ce, 1, [1, 1], 4) == pytest.approx(6.0)


def test_counterexample_rejects_bad_inputs():
    with pytest.raises(ValueError):
        counterexample_mmdp(0.0, 4)
    with pytest.raises(ValueError):
        counterexample_mmdp(0.5, 1)


def test_mixts_single_model_trivial():
    P = np.ones((1, 1, 1, 1))
    R = np.full((1, 1, 1), 2.0)
    inst = Mmdp(horizon=3, transitions=P, rewards=R, initial_dist=[1.0],
                model_weights=[1.0])
    logs, trace, mean = mixts_run(inst, episodes=5, seed=0)
    assert all(np.allclose(p.probs, [1.0]) for p in trace)
    assert mean == pytest.approx(6.0)


def test_mixts_identifies_model_from_first_distinct_reward():
    # two bandit-like models with different rewards at the only (s, a)
    P = np.ones((2, 1, 1, 1))
    R = np.zeros((2, 1, 1))
    R[0, 0, 0] = 1.0
    R[1, 0, 0] = 2.0
    inst = Mmdp(horizon=2, transitions=P, rewards=R, initial_dist=[1.0],
                model_weights=[0.5, 0.5])
    logs, trace, _ = mixts_run(inst, episodes=1, seed=4, likelihood_floor=0.0)
    true = logs[0].true_model
    assert trace[-1].probs[true] >= 0.99


def test_mixts_bitwise_deterministic():
    ce = counterexample_mmdp(0.5, 6)
    runs = [mixts_run(ce, episodes=20, seed=9, likelihood_floor=1e-6)
            for _ in range(2)]
    for a, b in zip(runs[0][0], runs[1][0]):
        assert a.steps == b.steps and a.sampled_model == b.sampled_model
    assert runs[0][2] == runs[1][2]
    for pa, pb in zip(runs[0][1], runs[1][1]):
        assert np.array_equal(pa.probs, pb.probs)


def test_mixts_posterior_normalized_and_floor_protects_truth():
    ce = counterexample_mmdp(0.3, 6)
    logs, trace, _ = mixts_run(ce, episodes=50, seed=2, likelihood_floor=1e-6)
    true = logs[0].true_model
    for post in trace:
        assert abs(post.probs.sum() - 1.0) <= 1e-12
        assert post.probs[true] > 0.0


def test_mixts_parameter_validation():
    ce = counterexample_mmdp(0.5, 4)
    with pytest.raises(ValueError):
        mixts_run(ce, episodes=0, seed=0)
    with pytest.raises(ValueError):
        mixts_run(ce, episodes=1, seed=0, likelihood_floor=1.0)
    with pytest.raises(ValueError):
        mixts_run(ce, episodes=1, seed=0, likelihood="states")


def test_mixts_transition_likelihood_variant_also_identifies():
    ce = counterexample_mmdp(0.5, 6)
    logs, trace, _ = mixts_run(ce, episodes=40, seed=3, likelihood_floor=1e-9,
                               likelihood="rewards+transitions")
    true = logs[0].true_model
    assert trace[-1].probs[true] >= 1 - 1e-6


def test_markov_best_enumeration_matches_exact_returns():
    ce = counterexample_mmdp(0.4, 8)
    policy, value = _counterexample_markov_best(0.4, 8)
    assert exact_return(ce, policy) == pytest.approx(value, abs=1e-12)


def test_regret_bound_across_weights_and_horizons():
    for lam in (0.1, 0.3, 0.5, 0.7, 0.9):
        ce = counterexample_mmdp(lam, 40)
        horizons = list(range(4, 41, 4))
        report = regret_scan(ce, "markov-best", horizons)
        c = min(2 * lam, 1 - lam) / 2
        for T, regret in zip(report.horizons, report.regret):
            assert regret >= c * T - 1e-9


def test_dp_policies_also_suffer_linear_regret():
    ce = counterexample_mmdp(0.5, 20)
    for source in ("mvp", "wsu", "cadp"):
        report = regret_scan(ce, source, [4, 8, 12, 16, 20])
        for T, regret in zip(report.horizons, report.regret):
            assert regret >= 0.25 * T - 1e-9


def test_regret_slope_near_limit_weight():
    lam = 0.999
    ce = counterexample_mmdp(lam, 20)
    report = regret_scan(ce, "markov-best", [4, 8, 12, 16, 20])
    c = min(2 * lam, 1 - lam) / 2
    assert report.slope == pytest.approx(c, abs=1e-9)
    assert c == pytest.approx(0.0005)


def test_regret_report_csv_layout():
    ce = counterexample_mmdp(0.5, 8)
    text = regret_scan(ce, "markov-best", [4, 8]).to_csv()
    assert text.splitlines()[0] == "T,markov_best,history_best,regret,bound"
    assert len(text.splitlines()) == 3


def test_mixts_exploit_phase_regret_vanishes():
    ce = counterexample_mmdp(0.5, 8)
    values, _ = per_model_optimum(ce)
    logs, trace, _ = mixts_run(ce, episodes=60, seed=11, likelihood_floor=1e-9)
    true = logs[0].true_model
    concentrated = None
    for i, post in enumerate(trace[1:]):
        if post.probs[true] >= 1 - 1e-6:
            concentrated = i
            break
    assert concentrated is not None
    for log in logs[concentrated + 1:]:
        assert abs(values[true] - log.realized_return) <= 1e-9
