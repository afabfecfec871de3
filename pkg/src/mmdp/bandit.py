"""Thompson-sampling baseline, the linear-regret example, and regret scans."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dp import exact_return, per_model_optimum, solve_cadp, solve_mvp, solve_wsu
from .errors import DegeneratePosteriorError, IntractableError
from .model import Mmdp, Policy, fold_discount

REWARD_MATCH_ATOL = 1e-9
ENUM_LIMIT = 2 ** 20


@dataclass
class Posterior:
    probs: np.ndarray
    n_updates: int = 0

    def copy(self):
        return Posterior(probs=self.probs.copy(), n_updates=self.n_updates)


@dataclass
class EpisodeLog:
    true_model: int
    sampled_model: int
    realized_return: float
    steps: list = field(default_factory=list)  # (t, state, action, reward)


@dataclass
class RegretReport:
    horizons: list
    regret: list
    slope: float
    markov_best_return: list
    history_best_return: list
    achieved_return: list
    bound: list

    def to_csv(self):
        lines = ["T,markov_best,history_best,regret,bound"]
        for i, T in enumerate(self.horizons):
            lines.append(f"{T},{self.markov_best_return[i]:.9g},"
                         f"{self.history_best_return[i]:.9g},"
                         f"{self.regret[i]:.9g},{self.bound[i]:.9g}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {"horizons": self.horizons, "regret": self.regret,
                "slope": self.slope,
                "markov_best_return": self.markov_best_return,
                "history_best_return": self.history_best_return,
                "achieved_return": self.achieved_return, "bound": self.bound}


def counterexample_mmdp(lam, horizon):
    """Two deterministic 4-state models under which no Markov policy achieves
    sublinear regret.

    States (0-based): 0 is initial; action 0 in state 0 moves to state 1 with
    reward 2 in both models; action 1 moves to state 2 (reward 0) in model 0
    and to state 3 (reward 3) in model 1. States 1-3 bounce back to state 0
    except the model-specific absorbing state.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("model weight must lie strictly inside (0, 1)")
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    S, A = 4, 2
    P = np.zeros((2, S, A, S))
    Rt = np.zeros((2, S, A, S))  # transition-attached rewards

    # model 0: 0-(a0)->1, 0-(a1)->2, 1->0, 2->0, 3 absorbing; reward 2 on entering 1
    P[0, 0, 0, 1] = 1.0
    P[0, 0, 1, 2] = 1.0
    P[0, 1, :, 0] = 1.0
    P[0, 2, :, 0] = 1.0
    P[0, 3, :, 3] = 1.0
    Rt[0, 0, 0, 1] = 2.0

    # model 1: 0-(a0)->1 (reward 2), 0-(a1)->3 (reward 3), 1->0, 3->0, 2 absorbing
    P[1, 0, 0, 1] = 1.0
    P[1, 0, 1, 3] = 1.0
    P[1, 1, :, 0] = 1.0
    P[1, 3, :, 0] = 1.0
    P[1, 2, :, 2] = 1.0
    Rt[1, 0, 0, 1] = 2.0
    Rt[1, 0, 1, 3] = 3.0

    R = (P * Rt).sum(axis=3)
    mu = np.zeros(S)
    mu[0] = 1.0
    return Mmdp(horizon=horizon, transitions=P, rewards=R, initial_dist=mu,
                model_weights=np.array([lam, 1.0 - lam]))


def is_counterexample(mmdp):
    probe = counterexample_mmdp(float(mmdp.model_weights[0]), max(mmdp.horizon, 2)) \
        if 0.0 < mmdp.model_weights[0] < 1.0 and mmdp.n_models == 2 else None
    return (probe is not None and mmdp.n_states == 4 and mmdp.n_actions == 2
            and np.array_equal(mmdp.transitions, probe.transitions)
            and np.array_equal(mmdp.rewards, probe.rewards)
            and np.array_equal(mmdp.initial_dist, probe.initial_dist))


def mixts_run(mmdp, episodes, seed, likelihood_floor=1e-6, likelihood="rewards",
              true_model=None):
    """Adapted episodic Thompson sampling.

    The true model is drawn once from the model weights (or fixed via
    ``true_model``); each episode samples a candidate model from the
    posterior, follows that model's optimal Markov policy, and updates the
    posterior per step from the observed reward (optionally also the
    observed transition). Deterministic given the seed.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if not 0.0 <= likelihood_floor < 1.0:
        raise ValueError("likelihood floor must lie in [0, 1)")
    if likelihood not in ("rewards", "rewards+transitions"):
        raise ValueError(f"unknown likelihood model {likelihood!r}")
    folded = fold_discount(mmdp)
    M, T = folded.n_models, folded.horizon
    _, policies = per_model_optimum(folded)
    harness_rng = np.random.default_rng([seed, 0])
    if true_model is None:
        true_model = int(harness_rng.choice(M, p=folded.model_weights))
    posterior = Posterior(probs=folded.model_weights.copy())
    logs = []
    trace = [posterior.copy()]
    floor = likelihood_floor
    for episode in range(episodes):
        rng = np.random.default_rng([seed, episode + 1])
        sampled = int(rng.choice(M, p=posterior.probs))
        pi = policies[sampled].actions
        state = int(rng.choice(folded.n_states, p=folded.initial_dist))
        ep_return = 0.0
        log = EpisodeLog(true_model=true_model, sampled_model=sampled,
                         realized_return=0.0)
        for t in range(T):
            action = int(pi[t, state])
            reward = folded.rewards[true_model, state, action] * folded.reward_scale[t]
            ep_return += reward
            next_state = int(rng.choice(
                folded.n_states, p=folded.transitions[true_model, state, action]))
            match = np.abs(folded.rewards[:, state, action] * folded.reward_scale[t]
                           - reward) <= REWARD_MATCH_ATOL
            lik = floor + (1.0 - floor) * match.astype(float)
            if likelihood == "rewards+transitions":
                lik = lik * (floor + (1.0 - floor)
                             * folded.transitions[:, state, action, next_state])
            new = posterior.probs * lik
            total = new.sum()
            if total <= 0.0:
                raise DegeneratePosteriorError(
                    "all model likelihoods vanished with a zero floor")
            posterior = Posterior(probs=new / total,
                                  n_updates=posterior.n_updates + 1)
            log.steps.append((t, state, action, float(reward)))
            state = next_state
        log.realized_return = float(ep_return)
        logs.append(log)
        trace.append(posterior.copy())
    mean_return = float(np.mean([log.realized_return for log in logs]))
    return logs, trace, mean_return


def _counterexample_markov_best(lam, horizon):
    """Exhaustive search over the reduced decision set of the linear-regret
    example: only the state-0 action at odd epochs matters; each of the
    2^(T/2) candidates is evaluated exactly."""
    cycles = horizon // 2
    if 2 ** cycles > ENUM_LIMIT:
        raise IntractableError(f"2^{cycles} candidates exceed the enumeration limit")
    # Per-cycle exact expected reward: action 0 earns 2 in both models,
    # action 1 earns 3 only in model 1.
    masks = np.arange(2 ** cycles, dtype=np.uint64)
    k = np.zeros(masks.shape, dtype=np.int64)  # number of action-1 cycles
    tmp = masks.copy()
    for _ in range(cycles):
        k += (tmp & np.uint64(1)).astype(np.int64)
        tmp >>= np.uint64(1)
    returns = 2.0 * (cycles - k) + 3.0 * (1.0 - lam) * k
    best = int(returns.argmax())
    actions = np.zeros((horizon, 4), dtype=np.int64)
    for c in range(cycles):
        actions[2 * c, 0] = (best >> c) & 1
    return Policy.deterministic(actions), float(returns.max())


def _general_markov_best(mmdp):
    from .bench import brute_force_best
    count = float(mmdp.n_actions) ** (mmdp.n_states * mmdp.horizon)
    if count > ENUM_LIMIT:
        raise IntractableError(f"{count:.3g} candidate Markov policies exceed "
                               f"the enumeration limit {ENUM_LIMIT}")
    return brute_force_best(mmdp)


def regret_scan(mmdp, policy_source, horizons):
    """Regret of a policy family against the model-aware comparator across
    horizons.

    The comparator (``history_best_return``) is the weighted mean of each
    model's optimal value, which upper-bounds every history-dependent
    policy. ``markov_best_return`` comes from exhaustive search; for the
    linear-regret example the search is reduced to the state-0 odd-epoch
    actions.
    """
    structured = is_counterexample(mmdp)
    lam = float(mmdp.model_weights[0])
    horizons = list(horizons)
    markov_best, history_best, achieved, regrets, bounds = [], [], [], [], []
    for T in horizons:
        inst = mmdp.with_horizon(T)
        values, _ = per_model_optimum(inst)
        hist = float(inst.model_weights @ values)
        if structured:
            if T % 2:
                raise ValueError("the linear-regret example needs an even horizon")
            _, mb = _counterexample_markov_best(lam, T)
            bounds.append(min(2.0 * lam, 1.0 - lam) / 2.0 * T)
        else:
            _, mb = _general_markov_best(inst)
            bounds.append(float("nan"))
        if policy_source in ("markov-best", "best"):
            value = mb
        elif policy_source == "mvp":
            value = solve_mvp(inst).return_value
        elif policy_source == "wsu":
            value = solve_wsu(inst).return_value
        elif policy_source == "cadp":
            value = solve_cadp(inst).return_value
        else:
            raise ValueError(f"unknown policy source {policy_source!r}")
        markov_best.append(mb)
        history_best.append(hist)
        achieved.append(value)
        regrets.append(hist - value)
    slope = _tail_slope(horizons, regrets)
    return RegretReport(horizons=horizons, regret=regrets, slope=slope,
                        markov_best_return=markov_best,
                        history_best_return=history_best,
                        achieved_return=achieved, bound=bounds)


def _tail_slope(horizons, regrets):
    n = len(horizons)
    tail = slice(n // 2, n) if n >= 4 else slice(0, n)
    xs = np.asarray(horizons, dtype=float)[tail]
    ys = np.asarray(regrets, dtype=float)[tail]
    if len(xs) < 2:
        return float("nan")
    return float(np.polyfit(xs, ys, 1)[0])
