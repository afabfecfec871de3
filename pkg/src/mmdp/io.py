"""CSV domain loading and serialization.

Domain directories contain four files: ``training.csv`` and ``test.csv``
with columns ``idstatefrom, idaction, idstateto, idoutcome, probability,
reward`` (one row per transition, ``idoutcome`` is the model id),
``initial.csv`` with columns ``idstate, probability``, and
``parameters.csv`` with columns ``parameter, value``.
"""

from __future__ import annotations

import os
import warnings

import numpy as np
import pandas as pd

from .errors import IdIndexError, MissingFileError, ProbabilityError, SchemaError
from .model import DomainBundle, Mmdp, Policy

MODEL_COLUMNS = ["idstatefrom", "idaction", "idstateto", "idoutcome", "probability", "reward"]
INITIAL_COLUMNS = ["idstate", "probability"]
PARAMETER_COLUMNS = ["parameter", "value"]

LOAD_PROB_ATOL = 1e-6


def _read_csv(path, columns):
    if not os.path.isfile(path):
        raise MissingFileError(f"missing domain file: {path}")
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise SchemaError(f"{path}: cannot parse CSV: {exc}") from exc
    got = [c.strip() for c in df.columns]
    df.columns = got
    missing = [c for c in columns if c not in got]
    unknown = [c for c in got if c not in columns]
    if missing or unknown:
        raise SchemaError(f"{path}: expected columns {columns}, "
                          f"missing {missing}, unknown {unknown}")
    return df


def _check_ids(path, name, values, expected_count=None):
    values = np.asarray(values)
    if values.size == 0:
        raise SchemaError(f"{path}: no rows")
    if (values < 0).any():
        raise IdIndexError(f"{path}: negative {name} id")
    present = np.unique(values)
    count = int(present[-1]) + 1 if expected_count is None else expected_count
    if len(present) != count or present[-1] != count - 1:
        raise IdIndexError(f"{path}: non-contiguous {name} ids "
                           f"(saw {len(present)} ids, max {present[-1]})")
    return count


def _load_model_file(path, n_states, n_actions):
    """Build dense (M, S, A, S) transitions and (M, S, A) expected rewards."""
    df = _read_csv(path, MODEL_COLUMNS)
    for col in ["idstatefrom", "idaction", "idstateto", "idoutcome"]:
        if not np.issubdtype(df[col].dtype, np.integer):
            raise SchemaError(f"{path}: column {col} must be integer")
    n_models = _check_ids(path, "model", df["idoutcome"].to_numpy())
    sf = df["idstatefrom"].to_numpy()
    st = df["idstateto"].to_numpy()
    ac = df["idaction"].to_numpy()
    mo = df["idoutcome"].to_numpy()
    if max(sf.max(), st.max()) >= n_states:
        raise IdIndexError(f"{path}: state id exceeds state count {n_states}")
    if ac.max() >= n_actions:
        raise IdIndexError(f"{path}: action id exceeds action count {n_actions}")
    prob = df["probability"].to_numpy(dtype=float)
    rew = df["reward"].to_numpy(dtype=float)
    if (prob < 0).any():
        raise ProbabilityError(f"{path}: negative probability entry")

    P = np.zeros((n_models, n_states, n_actions, n_states))
    np.add.at(P, (mo, sf, ac, st), prob)
    # Expected immediate reward: transition-attached rewards collapse by linearity.
    R = np.zeros((n_models, n_states, n_actions))
    np.add.at(R, (mo, sf, ac), prob * rew)

    sums = P.sum(axis=3)
    bad = np.abs(sums - 1.0) > LOAD_PROB_ATOL
    if bad.any():
        m, s, a = [int(i[0]) for i in np.nonzero(bad)]
        raise ProbabilityError(
            f"{path}: probabilities for (model={m}, state={s}, action={a}) "
            f"sum to {sums[m, s, a]:.9g}, expected 1")
    return P, R


def _load_initial(path, n_states):
    df = _read_csv(path, INITIAL_COLUMNS)
    ids = df["idstate"].to_numpy()
    if (ids < 0).any():
        raise IdIndexError(f"{path}: negative state id")
    if ids.max() >= n_states:
        raise IdIndexError(f"{path}: state id exceeds state count {n_states}")
    mu = np.zeros(n_states)
    np.add.at(mu, ids, df["probability"].to_numpy(dtype=float))
    if (mu < 0).any():
        raise ProbabilityError(f"{path}: negative initial probability")
    if abs(mu.sum() - 1.0) > LOAD_PROB_ATOL:
        raise ProbabilityError(f"{path}: initial distribution sums to {mu.sum():.9g}")
    return mu


def _load_parameters(path):
    df = _read_csv(path, PARAMETER_COLUMNS)
    discount = 1.0
    for name, value in zip(df["parameter"], df["value"]):
        if str(name).strip() == "discount":
            discount = float(value)
            if not 0.0 <= discount <= 1.0:
                raise SchemaError(f"{path}: discount {discount} outside [0, 1]")
        else:
            warnings.warn(f"{path}: ignoring unknown parameter {name!r}")
    return discount


def load_domain(directory, horizon):
    """Load a CSV domain directory into a validated :class:`DomainBundle`.

    Model weights default to uniform; training and test model ids live in
    independent namespaces but share the state and action spaces.
    """
    if horizon < 1:
        raise ValueError("horizon must be positive")
    train_path = os.path.join(directory, "training.csv")
    test_path = os.path.join(directory, "test.csv")
    init_path = os.path.join(directory, "initial.csv")
    param_path = os.path.join(directory, "parameters.csv")

    frames = [_read_csv(p, MODEL_COLUMNS) for p in (train_path, test_path)]
    all_states = np.concatenate([np.r_[f["idstatefrom"], f["idstateto"]] for f in frames])
    all_actions = np.concatenate([f["idaction"].to_numpy() for f in frames])
    n_states = _check_ids(directory, "state", all_states)
    n_actions = _check_ids(directory, "action", all_actions)

    discount = _load_parameters(param_path)
    mu = _load_initial(init_path, n_states)

    def build(path):
        P, R = _load_model_file(path, n_states, n_actions)
        weights = np.full(P.shape[0], 1.0 / P.shape[0])
        return Mmdp(horizon=horizon, transitions=P, rewards=R,
                    initial_dist=mu, model_weights=weights, discount=discount)

    return DomainBundle(training=build(train_path), test=build(test_path))


def write_mmdp_csv(mmdp, path):
    """Write one instance's transitions as a model CSV (per-transition rewards
    set so that their expectation reproduces the stored expected rewards)."""
    P, R = mmdp.transitions, mmdp.rewards
    mo, sf, ac, st = np.nonzero(P)
    prob = P[mo, sf, ac, st]
    # Attach the full expected reward to every outgoing transition of (s, a).
    rew = R[mo, sf, ac]
    pd.DataFrame({
        "idstatefrom": sf, "idaction": ac, "idstateto": st,
        "idoutcome": mo, "probability": prob, "reward": rew,
    }).to_csv(path, index=False)


def write_domain(bundle, directory):
    """Write a DomainBundle as a loadable CSV domain directory."""
    os.makedirs(directory, exist_ok=True)
    write_mmdp_csv(bundle.training, os.path.join(directory, "training.csv"))
    write_mmdp_csv(bundle.test, os.path.join(directory, "test.csv"))
    mu = bundle.training.initial_dist
    states = np.nonzero(mu)[0]
    pd.DataFrame({"idstate": states, "probability": mu[states]}).to_csv(
        os.path.join(directory, "initial.csv"), index=False)
    pd.DataFrame({"parameter": ["discount"], "value": [bundle.training.discount]}).to_csv(
        os.path.join(directory, "parameters.csv"), index=False)


def write_policy_csv(policy, path):
    det = policy.argmax_rounding()
    t_idx, s_idx = np.meshgrid(np.arange(det.horizon), np.arange(det.n_states),
                               indexing="ij")
    pd.DataFrame({
        "idtime": t_idx.ravel(), "idstate": s_idx.ravel(),
        "idaction": det.actions.ravel(),
    }).to_csv(path, index=False)


def read_policy_csv(path):
    df = _read_csv(path, ["idtime", "idstate", "idaction"])
    T = int(df["idtime"].max()) + 1
    S = int(df["idstate"].max()) + 1
    actions = np.zeros((T, S), dtype=np.int64)
    actions[df["idtime"], df["idstate"]] = df["idaction"]
    return Policy.deterministic(actions)
