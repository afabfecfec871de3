import numpy as np
import pytest

from mmdp import DomainBundle, Mmdp


def make_e1():
    """Two-state, two-action, two-model worked example.

    Model 0: (s0,a0)->s0 reward 1, (s0,a1)->s1 reward 0, s1 absorbing.
    Model 1: (s0,a0)->s0 reward 0, (s0,a1)->s1 reward 1.8, s1 absorbing.
    Best deterministic Markov policy: a0 then a1, return 1.4.
    """
    P = np.zeros((2, 2, 2, 2))
    R = np.zeros((2, 2, 2))
    P[0, 0, 0, 0] = 1.0
    P[0, 0, 1, 1] = 1.0
    P[0, 1, :, 1] = 1.0
    R[0, 0, 0] = 1.0
    P[1, 0, 0, 0] = 1.0
    P[1, 0, 1, 1] = 1.0
    P[1, 1, :, 1] = 1.0
    R[1, 0, 1] = 1.8
    return Mmdp(horizon=2, transitions=P, rewards=R, initial_dist=[1.0, 0.0],
                model_weights=[0.5, 0.5])


@pytest.fixture
def e1():
    return make_e1()


@pytest.fixture
def e1_bundle():
    return DomainBundle(training=make_e1(), test=make_e1())


def random_interior_policy(mmdp, rng):
    probs = rng.random((mmdp.horizon, mmdp.n_states, mmdp.n_actions)) + 0.2
    return probs / probs.sum(axis=2, keepdims=True)
