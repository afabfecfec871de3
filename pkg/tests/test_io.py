import numpy as np
import pytest

from mmdp import DomainBundle, load_domain, validate, write_domain
from mmdp.bench import random_instance
from mmdp.errors import IdIndexError, MissingFileError, ProbabilityError, SchemaError

MODEL_HEADER = "idstatefrom,idaction,idstateto,idoutcome,probability,reward\n"


def write_files(tmp_path, training, test=None, initial="idstate,probability\n0,1.0\n",
                parameters="parameter,value\ndiscount,1.0\n"):
    (tmp_path / "training.csv").write_text(MODEL_HEADER + training)
    (tmp_path / "test.csv").write_text(MODEL_HEADER + (test or training))
    (tmp_path / "initial.csv").write_text(initial)
    (tmp_path / "parameters.csv").write_text(parameters)
    return tmp_path


def test_degenerate_single_row_domain(tmp_path):
    d = write_files(tmp_path, "0,0,0,0,1.0,5.0\n")
    bundle = load_domain(d, horizon=3)
    m = bundle.training
    assert (m.n_models, m.n_states, m.n_actions) == (1, 1, 1)
    assert m.rewards[0, 0, 0] == 5.0
    assert m.initial_dist[0] == 1.0


def test_probability_violation_names_group(tmp_path):
    d = write_files(tmp_path, "0,0,0,0,0.5,0.0\n0,0,1,0,0.4,0.0\n"
                              "1,0,0,0,1.0,0.0\n1,1,0,0,1.0,0.0\n0,1,0,0,1.0,0.0\n1,1,1,0,0.0,0.0\n")
    with pytest.raises(ProbabilityError, match=r"model=0, state=0, action=0"):
        load_domain(d, horizon=1)


def test_missing_file(tmp_path):
    d = write_files(tmp_path, "0,0,0,0,1.0,0.0\n")
    (d / "parameters.csv").unlink()
    with pytest.raises(MissingFileError):
        load_domain(d, horizon=1)


def test_unknown_column_rejected(tmp_path):
    d = write_files(tmp_path, "0,0,0,0,1.0,0.0\n")
    (d / "training.csv").write_text(
        "idstatefrom,idaction,idstateto,idoutcome,probability,reward,bogus\n"
        "0,0,0,0,1.0,0.0,1\n")
    with pytest.raises(SchemaError, match="bogus"):
        load_domain(d, horizon=1)


def test_non_contiguous_model_ids(tmp_path):
    d = write_files(tmp_path, "0,0,0,0,1.0,0.0\n0,0,0,2,1.0,0.0\n")
    with pytest.raises(IdIndexError, match="model"):
        load_domain(d, horizon=1)


def test_negative_state_id(tmp_path):
    d = write_files(tmp_path, "-1,0,0,0,1.0,0.0\n0,0,0,0,1.0,0.0\n")
    with pytest.raises(IdIndexError):
        load_domain(d, horizon=1)


def test_unknown_parameter_warns_not_fails(tmp_path):
    d = write_files(tmp_path, "0,0,0,0,1.0,3.0\n",
                    parameters="parameter,value\ndiscount,0.9\nmystery,7\n")
    with pytest.warns(UserWarning, match="mystery"):
        bundle = load_domain(d, horizon=2)
    assert bundle.training.discount == 0.9


def test_transition_rewards_collapse_to_expectation(tmp_path):
    # 0.5 chance of reward 10, 0.5 chance of reward 0 -> expected 5
    d = write_files(tmp_path, "0,0,0,0,0.5,10.0\n0,0,1,0,0.5,0.0\n"
                              "1,0,0,0,1.0,0.0\n0,1,1,0,1.0,0.0\n1,1,1,0,1.0,0.0\n")
    m = load_domain(d, horizon=1).training
    assert m.rewards[0, 0, 0] == pytest.approx(5.0)


def test_uniform_default_model_weights(tmp_path):
    rows = "".join(f"0,0,0,{k},1.0,1.0\n" for k in range(4))
    d = write_files(tmp_path, rows)
    m = load_domain(d, horizon=1).training
    assert np.allclose(m.model_weights, 0.25)


def test_round_trip_preserves_tensors(tmp_path):
    inst = random_instance(4, 2, 3, 5, seed=11, sparsity=0.8)
    write_domain(DomainBundle(training=inst, test=inst), tmp_path / "dom")
    back = load_domain(tmp_path / "dom", horizon=5).training
    assert np.allclose(back.transitions, inst.transitions, atol=1e-12, rtol=0)
    assert np.allclose(back.rewards, inst.rewards, atol=1e-12, rtol=0)
    assert np.allclose(back.initial_dist, inst.initial_dist, atol=1e-12, rtol=0)


def test_loaded_domain_passes_validation(tmp_path):
    inst = random_instance(3, 2, 2, 4, seed=5)
    write_domain(DomainBundle(training=inst, test=inst), tmp_path / "dom")
    bundle = load_domain(tmp_path / "dom", horizon=4)
    assert validate(bundle.training).ok
    assert validate(bundle.test).ok
