"""Core data model: multi-model MDP instances, policies, and validation.

Conventions used throughout the package:

- arrays are 0-based; decision epochs are ``t = 0 .. T-1`` (epoch ``t``
  corresponds to the t+1-th decision),
- transitions are stationary per model, shape ``(M, S, A, S)``,
- rewards are expected immediate rewards, shape ``(M, S, A)``, with an
  optional per-epoch scale vector so that discounting can be folded into a
  time-dependent reward without materializing a ``(T, M, S, A)`` tensor.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatchError

PROB_ATOL = 1e-9


def _frozen(a, dtype=float):
    out = np.ascontiguousarray(np.asarray(a, dtype=dtype))
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Mmdp:
    """A finite-horizon multi-model MDP instance.

    ``reward_scale[t]`` multiplies the stationary reward at epoch ``t``;
    it is all-ones until :func:`fold_discount` is applied.
    """

    horizon: int
    transitions: np.ndarray   # (M, S, A, S)
    rewards: np.ndarray       # (M, S, A), expected immediate reward
    initial_dist: np.ndarray  # (S,)
    model_weights: np.ndarray  # (M,)
    discount: float = 1.0
    reward_scale: np.ndarray = None  # (T,)

    def __post_init__(self):
        object.__setattr__(self, "transitions", _frozen(self.transitions))
        object.__setattr__(self, "rewards", _frozen(self.rewards))
        object.__setattr__(self, "initial_dist", _frozen(self.initial_dist))
        object.__setattr__(self, "model_weights", _frozen(self.model_weights))
        scale = self.reward_scale
        if scale is None:
            scale = np.ones(self.horizon)
        object.__setattr__(self, "reward_scale", _frozen(scale))
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if self.transitions.ndim != 4 or self.transitions.shape[1] != self.transitions.shape[3]:
            raise DimensionMismatchError(
                f"transitions must be (M, S, A, S), got {self.transitions.shape}")
        if self.rewards.shape != self.transitions.shape[:3]:
            raise DimensionMismatchError(
                f"rewards shape {self.rewards.shape} does not match transitions")
        if self.initial_dist.shape != (self.n_states,):
            raise DimensionMismatchError("initial_dist length must equal n_states")
        if self.model_weights.shape != (self.n_models,):
            raise DimensionMismatchError("model_weights length must equal n_models")
        if self.reward_scale.shape != (self.horizon,):
            raise DimensionMismatchError("reward_scale length must equal horizon")

    @property
    def n_models(self):
        return self.transitions.shape[0]

    @property
    def n_states(self):
        return self.transitions.shape[1]

    @property
    def n_actions(self):
        return self.transitions.shape[2]

    def reward_at(self, t):
        """Time-indexed expected reward tensor ``(M, S, A)`` at epoch ``t``."""
        return self.rewards * self.reward_scale[t]

    def with_horizon(self, horizon):
        """Same instance re-cut to a different horizon (undoes any folding)."""
        return replace(self, horizon=horizon, reward_scale=None)

    def with_model_weights(self, weights):
        return replace(self, model_weights=np.asarray(weights, dtype=float))


@dataclass(frozen=True)
class Policy:
    """Markov policy, either deterministic (``actions``) or randomized (``probs``)."""

    actions: np.ndarray = None  # (T, S) int
    probs: np.ndarray = None    # (T, S, A)

    def __post_init__(self):
        if (self.actions is None) == (self.probs is None):
            raise ValueError("exactly one of actions/probs must be given")
        if self.actions is not None:
            object.__setattr__(self, "actions", _frozen(self.actions, dtype=np.int64))
            if self.actions.ndim != 2:
                raise DimensionMismatchError("deterministic policy must be (T, S)")
        else:
            object.__setattr__(self, "probs", _frozen(self.probs))
            if self.probs.ndim != 3:
                raise DimensionMismatchError("randomized policy must be (T, S, A)")

    @classmethod
    def deterministic(cls, actions):
        return cls(actions=actions)

    @classmethod
    def randomized(cls, probs):
        return cls(probs=probs)

    @classmethod
    def uniform(cls, horizon, n_states, n_actions):
        return cls(probs=np.full((horizon, n_states, n_actions), 1.0 / n_actions))

    @property
    def kind(self):
        return "deterministic" if self.actions is not None else "randomized"

    @property
    def horizon(self):
        return (self.actions if self.actions is not None else self.probs).shape[0]

    @property
    def n_states(self):
        return (self.actions if self.actions is not None else self.probs).shape[1]

    def as_probs(self, n_actions=None):
        """Randomized view; deterministic policies become one-hot rows."""
        if self.probs is not None:
            return self.probs
        if n_actions is None:
            n_actions = int(self.actions.max()) + 1
        T, S = self.actions.shape
        probs = np.zeros((T, S, n_actions))
        t_idx, s_idx = np.meshgrid(np.arange(T), np.arange(S), indexing="ij")
        probs[t_idx, s_idx, self.actions] = 1.0
        return probs

    def argmax_rounding(self):
        """Deterministic policy taking the most likely action per (t, s)."""
        if self.actions is not None:
            return self
        return Policy.deterministic(np.argmax(self.probs, axis=2))

    def check_dims(self, mmdp):
        if self.horizon != mmdp.horizon or self.n_states != mmdp.n_states:
            raise DimensionMismatchError(
                f"policy shape ({self.horizon}, {self.n_states}) does not match "
                f"instance ({mmdp.horizon}, {mmdp.n_states})")
        if self.probs is not None and self.probs.shape[2] != mmdp.n_actions:
            raise DimensionMismatchError("policy action dimension mismatch")
        if self.actions is not None and (self.actions.min() < 0
                                         or self.actions.max() >= mmdp.n_actions):
            raise DimensionMismatchError("policy action index out of range")


@dataclass(frozen=True)
class DomainBundle:
    """Training/test instance pair sharing states, actions, horizon and discount."""

    training: Mmdp
    test: Mmdp

    def __post_init__(self):
        a, b = self.training, self.test
        if (a.n_states, a.n_actions, a.horizon) != (b.n_states, b.n_actions, b.horizon):
            raise DimensionMismatchError("training/test disagree on S, A, or T")
        if not np.array_equal(a.initial_dist, b.initial_dist):
            raise DimensionMismatchError("training/test disagree on the initial distribution")
        if a.discount != b.discount:
            raise DimensionMismatchError("training/test disagree on the discount factor")

    def with_horizon(self, horizon):
        return DomainBundle(self.training.with_horizon(horizon),
                            self.test.with_horizon(horizon))


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, message):
        self.violations.append(message)

    def __str__(self):
        return "ok" if self.ok else "\n".join(self.violations)


def fold_discount(mmdp):
    """Fold the discount factor into a time-dependent reward scale.

    Returns an equivalent instance whose epoch-``t`` reward is
    ``discount**t * reward`` and whose discount field is 1. Identity when
    the discount is already 1.
    """
    gamma = mmdp.discount
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"discount must be in [0, 1], got {gamma}")
    scale = mmdp.reward_scale * gamma ** np.arange(mmdp.horizon)
    return replace(mmdp, reward_scale=scale, discount=1.0)


def validate(mmdp):
    """Check all instance invariants; violations become report entries."""
    report = ValidationReport()
    P, mu, lam = mmdp.transitions, mmdp.initial_dist, mmdp.model_weights
    if (P < 0).any():
        for m, s, a, s2 in zip(*np.nonzero(P < 0)):
            report.add(f"negative transition probability at (m={m}, s={s}, a={a}, s'={s2})")
    sums = P.sum(axis=3)
    bad = np.abs(sums - 1.0) > PROB_ATOL
    for m, s, a in zip(*np.nonzero(bad)):
        report.add(f"transition probabilities for (m={m}, s={s}, a={a}) "
                   f"sum to {sums[m, s, a]:.12g}")
    if (mu < 0).any():
        for (s,) in zip(*np.nonzero(mu < 0)):
            report.add(f"negative initial probability at state {s}")
    if abs(mu.sum() - 1.0) > PROB_ATOL:
        report.add(f"initial distribution sums to {mu.sum():.12g}")
    if (lam <= 0).any():
        for (m,) in zip(*np.nonzero(lam <= 0)):
            report.add(f"non-positive model weight for model {m}")
    if abs(lam.sum() - 1.0) > PROB_ATOL:
        report.add(f"model weights sum {lam.sum():.12g}")
    if not 0.0 <= mmdp.discount <= 1.0:
        report.add(f"discount {mmdp.discount} outside [0, 1]")
    if not np.isfinite(mmdp.rewards).all():
        report.add("non-finite reward entries")
    return report
