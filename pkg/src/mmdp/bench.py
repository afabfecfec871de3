"""Policy evaluation, oracles, random instances, and the comparison harness."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import dp
from .dp import exact_return, per_model_optimum
from .errors import IntractableError
from .model import Mmdp, Policy

BRUTE_FORCE_LIMIT = 2 ** 24


@dataclass
class EvalResult:
    mean_return: float
    mc_mean: float
    mc_std: float
    episodes: int
    seed: int


@dataclass
class ComparisonRow:
    algorithm: str
    mean_return: float = np.nan
    std_return: float = np.nan
    wall_time_s: float = np.nan
    failed: bool = False
    error: str = ""


@dataclass
class ComparisonTable:
    rows: list = field(default_factory=list)

    def to_csv(self):
        lines = ["algorithm,mean_return,std_return,wall_time_s"]
        for r in self.rows:
            if r.failed:
                lines.append(f"{r.algorithm},--,--,--")
            else:
                lines.append(f"{r.algorithm},{r.mean_return:.6g},"
                             f"{r.std_return:.6g},{r.wall_time_s:.4g}")
        return "\n".join(lines) + "\n"

    def to_markdown(self):
        lines = ["| Algorithm | Mean return | Std return | Wall time (s) |",
                 "|---|---:|---:|---:|"]
        for r in self.rows:
            if r.failed:
                lines.append(f"| {r.algorithm} | -- | -- | -- |")
            else:
                lines.append(f"| {r.algorithm} | {r.mean_return:.6g} | "
                             f"{r.std_return:.6g} | {r.wall_time_s:.4g} |")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return json.dumps([r.__dict__ for r in self.rows], indent=2)

    def __getitem__(self, algorithm):
        for r in self.rows:
            if r.algorithm == algorithm:
                return r
        raise KeyError(algorithm)


def simulate_episodes(mmdp, policy, episodes, rng, count_visits=False):
    """Roll out a policy; returns per-episode returns, the sampled model per
    episode, and (optionally) joint (t, m, s) visit counts.

    Rewards accrue as expected immediate rewards of the visited (s, a) pairs;
    transitions are sampled, matching the collapsed-reward representation.
    """
    folded = dp.fold_discount(mmdp)
    policy.check_dims(folded)
    T, M, S, A = folded.horizon, folded.n_models, folded.n_states, folded.n_actions
    pi = policy.as_probs(A)
    P_cdf = np.cumsum(folded.transitions, axis=3)
    models = rng.choice(M, size=episodes, p=folded.model_weights)
    states = rng.choice(S, size=episodes, p=folded.initial_dist)
    returns = np.zeros(episodes)
    visits = np.zeros((T, M, S)) if count_visits else None
    ep = np.arange(episodes)
    for t in range(T):
        if count_visits:
            np.add.at(visits, (t, models, states), 1.0)
        row = pi[t, states]  # (episodes, A)
        u = rng.random(episodes)
        actions = (np.cumsum(row, axis=1) > u[:, None]).argmax(axis=1)
        returns += folded.rewards[models, states, actions] * folded.reward_scale[t]
        u = rng.random(episodes)
        cdf = P_cdf[models, states, actions]  # (episodes, S)
        states = (cdf > u[:, None]).argmax(axis=1)
    if count_visits:
        visits /= episodes
    return returns, models, visits


def monte_carlo_eval(mmdp, policy, episodes, seed):
    """Monte-Carlo estimate of the mean return; ``mc_std`` is the sample
    standard deviation of episode returns."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    rng = np.random.default_rng(seed)
    returns, _, _ = simulate_episodes(mmdp, policy, episodes, rng)
    std = float(returns.std(ddof=1)) if episodes > 1 else 0.0
    return EvalResult(mean_return=exact_return(mmdp, policy),
                      mc_mean=float(returns.mean()), mc_std=std,
                      episodes=episodes, seed=seed)


def solve_oracle(mmdp):
    """Weighted mean of each model's individually optimal value; an upper
    bound on the best achievable multi-model return."""
    values, _ = per_model_optimum(mmdp)
    return float(mmdp.model_weights @ values)


def brute_force_best(mmdp):
    """Exhaustive search over all deterministic Markov policies."""
    T, S, A = mmdp.horizon, mmdp.n_states, mmdp.n_actions
    count = float(A) ** (S * T)
    if count > BRUTE_FORCE_LIMIT:
        raise IntractableError(f"{count:.3g} candidate policies exceed the "
                               f"brute-force limit {BRUTE_FORCE_LIMIT}")
    best_value = -np.inf
    best_actions = None
    for flat in np.ndindex(*([A] * (S * T))):
        actions = np.asarray(flat, dtype=np.int64).reshape(T, S)
        value = exact_return(mmdp, Policy.deterministic(actions))
        if value > best_value:
            best_value = value
            best_actions = actions
    return Policy.deterministic(best_actions), float(best_value)


def random_instance(s, a, m, t, seed, sparsity=1.0):
    """Random valid instance: sparse-support normalized-uniform transition
    rows, rewards uniform in [-1, 1], normalized-uniform model weights."""
    if min(s, a, m, t) < 1:
        raise ValueError("all dimensions must be >= 1")
    if not 0.0 < sparsity <= 1.0:
        raise ValueError("sparsity must be in (0, 1]")
    rng = np.random.default_rng(seed)
    P = np.zeros((m, s, a, s))
    for mi in range(m):
        for si in range(s):
            for ai in range(a):
                support = rng.random(s) < sparsity
                if not support.any():
                    support[rng.integers(s)] = True
                row = np.where(support, rng.random(s), 0.0)
                row[support] += 1e-12  # support rows stay strictly positive
                P[mi, si, ai] = row / row.sum()
    R = rng.uniform(-1.0, 1.0, size=(m, s, a))
    mu = rng.random(s) + 1e-12
    lam = rng.random(m) + 1e-12
    return Mmdp(horizon=t, transitions=P, rewards=R,
                initial_dist=mu / mu.sum(), model_weights=lam / lam.sum())


def compare(bundle, algorithms, horizon, episodes=10_000, seed=0):
    """Solve on the training instance, evaluate on the test instance.

    Mean returns are exact; std columns come from Monte-Carlo episode
    returns. Failed rows are marked and the run continues.
    """
    from .bandit import mixts_run

    bundle = bundle.with_horizon(horizon)
    train, test = bundle.training, bundle.test
    table = ComparisonTable()
    for name in algorithms:
        row = ComparisonRow(algorithm=name)
        start = time.perf_counter()
        try:
            if name == "oracle":
                row.mean_return = solve_oracle(test)
                row.wall_time_s = time.perf_counter() - start
                row.std_return = _oracle_std(test, episodes, seed)
            elif name == "mixts":
                logs, _, mean_ret = mixts_run(test, episodes=max(episodes // 100, 10),
                                              seed=seed, likelihood_floor=1e-6)
                row.mean_return = mean_ret
                row.wall_time_s = time.perf_counter() - start
                ep_returns = np.array([log.realized_return for log in logs])
                row.std_return = float(ep_returns.std(ddof=1)) if len(logs) > 1 else 0.0
            else:
                policy = _solve_one(name, train, seed)
                row.wall_time_s = time.perf_counter() - start
                result = monte_carlo_eval(test, policy, episodes, seed)
                row.mean_return = result.mean_return
                row.std_return = result.mc_std
        except Exception as exc:  # noqa: BLE001 - per-row failures are reported
            row.failed = True
            row.error = f"{type(exc).__name__}: {exc}"
        table.rows.append(row)
    return table


def _solve_one(name, mmdp, seed):
    if name == "mvp":
        return dp.solve_mvp(mmdp).policy
    if name == "wsu":
        return dp.solve_wsu(mmdp).policy
    if name == "cadp":
        return dp.solve_cadp(mmdp).policy
    if name in ("mirror", "gradient"):
        from .gradient import FirstOrderConfig, solve_first_order
        variant = "mirror" if name == "mirror" else "projected"
        step = 0.1 if variant == "mirror" else 0.01
        cfg = FirstOrderConfig(step_size=step, seed=seed, variant=variant)
        return solve_first_order(mmdp, cfg).policy
    raise ValueError(f"unknown algorithm {name!r}")


def _oracle_std(mmdp, episodes, seed):
    """Episode-return std of a model-aware agent: sample a model, run its own
    optimal policy in it."""
    values, policies = per_model_optimum(mmdp)
    rng = np.random.default_rng(seed)
    M = mmdp.n_models
    counts = rng.multinomial(episodes, mmdp.model_weights)
    returns = []
    for m in range(M):
        if counts[m] == 0:
            continue
        single = Mmdp(horizon=mmdp.horizon, transitions=mmdp.transitions[m:m + 1],
                      rewards=mmdp.rewards[m:m + 1], initial_dist=mmdp.initial_dist,
                      model_weights=np.ones(1), discount=mmdp.discount)
        r, _, _ = simulate_episodes(single, policies[m], int(counts[m]), rng)
        returns.append(r)
    returns = np.concatenate(returns)
    return float(returns.std(ddof=1)) if len(returns) > 1 else 0.0
