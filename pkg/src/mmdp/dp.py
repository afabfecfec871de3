"""Dynamic-programming machinery and the MVP / WSU / CADP solvers.

All solvers fold the discount into time-indexed rewards on entry, break
action ties toward the lowest index, and are deterministic pure functions
of their inputs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NonMonotoneError, StaleWeightsError
from .model import Mmdp, Policy, fold_discount

# Guard threshold for the coordinate-ascent monotonicity assertion.
MONOTONE_GUARD = 1e-7


@dataclass
class ValueTable:
    """Per-model values ``v[t, m, s]`` (t = 0..T, v[T] = 0) and q-values
    ``q[t, m, s, a]`` under a fixed policy."""

    v: np.ndarray  # (T+1, M, S)
    q: np.ndarray  # (T, M, S, A)


@dataclass
class WeightTable:
    """Adjustable model weights ``b[t, m, s]``: joint probability that model
    m is the true model and the state at epoch t is s."""

    b: np.ndarray  # (T, M, S)


@dataclass
class SolveReport:
    policy: Policy
    return_value: float
    iterate_returns: list
    iterations: int
    wall_time: float
    termination: str = "done"
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "return_value": self.return_value,
            "iterations": self.iterations,
            "wall_time_s": self.wall_time,
            "termination": self.termination,
            "iterate_returns": [float(r) for r in self.iterate_returns],
            "policy": self.policy.argmax_rounding().actions.tolist(),
        }
        out.update(self.extra)
        return out


def backward_values(mmdp, policy):
    """Per-model value and q tables for a fixed policy, by backward induction."""
    policy.check_dims(mmdp)
    mmdp = fold_discount(mmdp)
    T, M, S, A = mmdp.horizon, mmdp.n_models, mmdp.n_states, mmdp.n_actions
    pi = policy.as_probs(A)
    P = mmdp.transitions
    v = np.zeros((T + 1, M, S))
    q = np.zeros((T, M, S, A))
    for t in range(T - 1, -1, -1):
        q[t] = mmdp.reward_at(t) + np.einsum("msaz,mz->msa", P, v[t + 1])
        v[t] = np.einsum("sa,msa->ms", pi[t], q[t])
    return ValueTable(v=v, q=q)


def forward_weights(mmdp, policy):
    """Adjustable model weights by the forward recursion.

    ``b[0, m, s] = model_weights[m] * initial_dist[s]`` and each step pushes
    the joint (model, state) mass through the policy and that model's kernel.
    """
    policy.check_dims(mmdp)
    T, M, S, A = mmdp.horizon, mmdp.n_models, mmdp.n_states, mmdp.n_actions
    pi = policy.as_probs(A)
    P = mmdp.transitions
    b = np.zeros((T, M, S))
    b[0] = np.outer(mmdp.model_weights, mmdp.initial_dist)
    for t in range(T - 1):
        b[t + 1] = np.einsum("ms,sa,msaz->mz", b[t], pi[t], P)
    return WeightTable(b=b)


def exact_return(mmdp, policy):
    """Exact weighted mean return of a policy across models."""
    table = backward_values(mmdp, policy)
    return float(mmdp.model_weights @ table.v[0] @ mmdp.initial_dist)


def _greedy_backward(horizon, P, rewards, scale, weights):
    """Backward pass over one weighted family of models; returns (actions, v).

    ``weights`` is either a (M,) vector (static weighting, WSU) or a
    (T, M, S) tensor (adjustable weighting). Ties go to the lowest action.
    """
    T = horizon
    M, S, A = rewards.shape
    v = np.zeros((T + 1, M, S))
    actions = np.zeros((T, S), dtype=np.int64)
    for t in range(T - 1, -1, -1):
        q = rewards * scale[t] + np.einsum("msaz,mz->msa", P, v[t + 1])
        if weights.ndim == 1:
            score = np.einsum("m,msa->sa", weights, q)
        else:
            score = np.einsum("ms,msa->sa", weights[t], q)
        actions[t] = np.argmax(score, axis=1)
        v[t] = q[np.arange(M)[:, None], np.arange(S)[None, :], actions[t][None, :]]
    return actions, v


def per_model_optimum(mmdp):
    """Optimal policy and initial value of every model solved in isolation.

    Returns ``(values, policies)`` where ``values[m]`` is model m's optimal
    expected return from the initial distribution.
    """
    folded = fold_discount(mmdp)
    values = np.zeros(folded.n_models)
    policies = []
    for m in range(folded.n_models):
        actions, v = _greedy_backward(folded.horizon,
                                      folded.transitions[m:m + 1],
                                      folded.rewards[m:m + 1],
                                      folded.reward_scale, np.ones(1))
        values[m] = v[0, 0] @ folded.initial_dist
        policies.append(Policy.deterministic(actions))
    return values, policies


def solve_mvp(mmdp):
    """Mean Value Problem: solve the single weight-averaged MDP.

    The reported return is the exact multi-model return of the resulting
    policy, not the averaged-MDP value.
    """
    start = time.perf_counter()
    folded = fold_discount(mmdp)
    lam = folded.model_weights
    p_bar = np.einsum("m,msaz->saz", lam, folded.transitions)[None]
    r_bar = np.einsum("m,msa->sa", lam, folded.rewards)[None]
    actions, _ = _greedy_backward(folded.horizon, p_bar, r_bar,
                                  folded.reward_scale, np.ones(1))
    policy = Policy.deterministic(actions)
    value = exact_return(mmdp, policy)
    return SolveReport(policy=policy, return_value=value, iterate_returns=[value],
                       iterations=1, wall_time=time.perf_counter() - start)


def solve_wsu(mmdp):
    """Weight-Select-Update: backward pass maximizing the statically weighted
    sum of per-model q-values under the partially built suffix policy."""
    start = time.perf_counter()
    folded = fold_discount(mmdp)
    actions, _ = _greedy_backward(folded.horizon, folded.transitions, folded.rewards,
                                  folded.reward_scale, folded.model_weights)
    policy = Policy.deterministic(actions)
    value = exact_return(mmdp, policy)
    return SolveReport(policy=policy, return_value=value, iterate_returns=[value],
                       iterations=1, wall_time=time.perf_counter() - start)


def optimize_policy(mmdp, weights, warm_start):
    """One coordinate-ascent sweep: backward pass improving the policy under
    fixed adjustable weights.

    The weights come from the previous iterate; q-values use the already
    updated suffix policy. On exact score ties the warm-start action wins if
    it participates, otherwise the lowest action index is chosen.
    """
    if warm_start.kind != "deterministic":
        raise StaleWeightsError("warm start must be a deterministic policy")
    warm_start.check_dims(mmdp)
    folded = fold_discount(mmdp)
    T, M, S, A = folded.horizon, folded.n_models, folded.n_states, folded.n_actions
    b = weights.b if isinstance(weights, WeightTable) else np.asarray(weights)
    if b.shape != (T, M, S):
        raise StaleWeightsError(f"weight table shape {b.shape} does not match "
                                f"instance ({T}, {M}, {S})")
    P = folded.transitions
    v = np.zeros((T + 1, M, S))
    actions = warm_start.actions.copy()
    m_idx = np.arange(M)[:, None]
    s_idx = np.arange(S)[None, :]
    for t in range(T - 1, -1, -1):
        q = folded.reward_at(t) + np.einsum("msaz,mz->msa", P, v[t + 1])
        score = np.einsum("ms,msa->sa", b[t], q)
        best = np.argmax(score, axis=1)
        incumbent = actions[t]
        keep = score[np.arange(S), incumbent] == score[np.arange(S), best]
        actions[t] = np.where(keep, incumbent, best)
        v[t] = q[m_idx, s_idx, actions[t][None, :]]
    return Policy.deterministic(actions)


def _initial_policy(mmdp, init, seed=None):
    if isinstance(init, Policy):
        init.check_dims(mmdp)
        return init.argmax_rounding()
    if init == "wsu":
        return solve_wsu(mmdp).policy
    if init == "mvp":
        return solve_mvp(mmdp).policy
    if init == "random":
        rng = np.random.default_rng(seed)
        return Policy.deterministic(
            rng.integers(0, mmdp.n_actions, size=(mmdp.horizon, mmdp.n_states)))
    raise ValueError(f"unknown initial policy {init!r}")


def solve_cadp(mmdp, init="wsu", max_iters=100, tol=1e-9, seed=None,
               monotone_guard=True):
    """Coordinate Ascent Dynamic Programming.

    Alternates between the forward weight recursion under the previous
    iterate and a backward improvement sweep, until the policy is a fixed
    point, the return improvement drops below ``tol``, or ``max_iters``.
    """
    start = time.perf_counter()
    policy = _initial_policy(mmdp, init, seed)
    value = exact_return(mmdp, policy)
    trace = [value]
    termination = "max_iters"
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        weights = forward_weights(mmdp, policy)
        new_policy = optimize_policy(mmdp, weights, policy)
        new_value = exact_return(mmdp, new_policy)
        if monotone_guard and new_value < value - MONOTONE_GUARD:
            raise NonMonotoneError(
                f"iteration {iterations} decreased the return from "
                f"{value:.12g} to {new_value:.12g}")
        trace.append(new_value)
        unchanged = np.array_equal(new_policy.actions, policy.actions)
        improvement = new_value - value
        policy, value = new_policy, new_value
        if unchanged:
            termination = "fixed_point"
            break
        if improvement < tol:
            termination = "tol"
            break
    return SolveReport(policy=policy, return_value=value, iterate_returns=trace,
                       iterations=iterations,
                       wall_time=time.perf_counter() - start,
                       termination=termination)
