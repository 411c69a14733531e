import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpdpgan import classifier, dataset
from cpdpgan.classifier import NbModel
from cpdpgan.dataset import DatasetError, Label

F, C = Label.FAULTY, Label.CLEAN


def ds(x, labels):
    x = np.asarray(x, dtype=np.float64).reshape(len(labels), -1)
    return dataset.ProjectDataset("d", [f"m{k}" for k in range(x.shape[1])], x, labels=labels)


def oracle(prior, mean, var, x):
    # explicit product of Gaussian densities, in plain Python
    joint = []
    for c in range(2):
        p = prior[c]
        for f, v in enumerate(x):
            p *= np.exp(-(v - mean[c][f]) ** 2 / (2 * var[c][f])) / np.sqrt(2 * np.pi * var[c][f])
        joint.append(p)
    total = joint[0] + joint[1]
    return joint[0] / total, joint[1] / total


def test_hand_dataset_parameters():
    m = classifier.fit(ds([1.0, 3.0, -1.0, -3.0], [F, F, C, C]))
    assert m.mean[0, 0] == 2.0 and m.mean[1, 0] == -2.0
    assert m.var[0, 0] == 1.0 and m.var[1, 0] == 1.0
    np.testing.assert_array_equal(np.exp(m.log_prior), [0.5, 0.5])


def test_constant_feature_gets_floor():
    m = classifier.fit(ds([[1.0, 5.0], [2.0, 5.0], [0.0, 7.0], [3.0, 9.0]], [F, F, C, C]),
                       variance_floor=1e-3)
    assert m.var[0, 1] == 1e-3
    assert np.all(m.var >= 1e-3)


def test_fit_errors():
    with pytest.raises(DatasetError):
        classifier.fit(ds([1.0, 2.0], [F, F]))
    with pytest.raises(DatasetError):
        classifier.fit(ds([1.0, 2.0], [F, None]))


def symmetric():
    return NbModel(np.log([0.5, 0.5]), np.array([[1.0], [-1.0]]), np.ones((2, 1)))


def test_symmetric_model_midpoint_is_a_tie_broken_to_faulty():
    assert classifier.predict_proba(symmetric(), [0.0]) == (0.5, 0.5)
    assert classifier.predict(symmetric(), [0.0]) is F


def test_likelihood_dominance():
    p_f, _ = classifier.predict_proba(symmetric(), [1.0])
    assert p_f > 0.5
    assert classifier.predict(symmetric(), [-1.0]) is C


def test_width_mismatch():
    with pytest.raises(DatasetError):
        classifier.predict_proba(symmetric(), [0.0, 1.0])


def test_matches_oracle_on_random_models():
    rng = np.random.default_rng(0)
    for _ in range(50):
        f = int(rng.integers(1, 4))
        prior = rng.dirichlet([1.0, 1.0])
        mean = rng.normal(size=(2, f))
        var = rng.uniform(0.2, 3.0, size=(2, f))
        x = rng.normal(size=f)
        model = NbModel(np.log(prior), mean, var)
        got = classifier.predict_proba(model, x)
        want = oracle(prior, mean.tolist(), var.tolist(), x.tolist())
        assert abs(got[0] - want[0]) < 1e-9 and abs(got[1] - want[1]) < 1e-9


@settings(max_examples=50, deadline=None)
@given(x=st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=2),
       seed=st.integers(0, 10_000))
def test_posteriors_sum_to_one_and_stay_finite(x, seed):
    rng = np.random.default_rng(seed)
    model = NbModel(np.log(rng.dirichlet([1, 1])), rng.normal(size=(2, 2)),
                    rng.uniform(1e-6, 2.0, size=(2, 2)))
    p = classifier.predict_proba(model, x)
    assert np.all(np.isfinite(p)) and abs(sum(p) - 1.0) < 1e-12


def test_shift_invariance():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(30, 2))
    labels = [F if k % 3 == 0 else C for k in range(30)]
    a = classifier.fit(ds(x, labels))
    b = classifier.fit(ds(x + 100.0, labels))
    probe = rng.normal(size=(10, 2))
    assert classifier.predict_dataset(a, ds(probe, [None] * 10)) == \
        classifier.predict_dataset(b, ds(probe + 100.0, [None] * 10))


def test_well_separated_classes_are_perfect():
    d = dataset.synthesize(200, 2, [(6.0, 6.0), (0.0, 0.0)], 1.0 / 1.0, 0.5, seed=1)
    m = classifier.fit(d)
    assert classifier.predict_dataset(m, d) == list(d.labels)


def test_model_json_roundtrip(tmp_path):
    m = classifier.fit(ds([1.0, 3.0, -1.0, -3.0], [F, F, C, C]))
    back = NbModel.from_dict(m.to_dict())
    np.testing.assert_allclose(back.log_prior, m.log_prior, rtol=1e-15)
    np.testing.assert_array_equal(back.mean, m.mean)
    m.save(tmp_path / "nb.json")
    assert (tmp_path / "nb.json").exists()
