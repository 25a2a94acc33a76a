import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from colluscan.dac import (CLASSES, DacConfig, DacModel, corrupt_input,
                           dac_predict, encode_labels, init_params,
                           loss_and_grads, train_dac, train_mlp)
from colluscan.nn import Standardizer, grad_check, softmax


def separable_features(n_per_class=60, seed=0, dim=7):
    rng = np.random.default_rng(seed)
    pos = rng.normal(loc=3.0, scale=0.5, size=(n_per_class, dim))
    neg = rng.normal(loc=-3.0, scale=0.5, size=(n_per_class, dim))
    x = np.vstack([pos, neg])
    labels = ["collusive"] * n_per_class + ["other"] * n_per_class
    return x, labels


FAST = DacConfig(ae_epochs=5, clf_epochs=20, batch_size=16,
                 learning_rate=3e-3, seed=1)


def test_parameter_count_is_18697_at_dim_7():
    params = init_params(DacConfig(input_dim=7), np.random.default_rng(0))
    assert sum(v.size for v in params.values()) == 18697


def test_probabilities_sum_to_one():
    x, labels = separable_features(20)
    model = train_dac(x, labels, FAST)
    rng = np.random.default_rng(3)
    probs = model.predict_proba(rng.uniform(-10, 10, size=(1000, 7)))
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(probs >= 0)


def test_corrupt_identity_at_zero(rng):
    x = np.arange(12.0).reshape(3, 4)
    np.testing.assert_array_equal(corrupt_input(x, 0.0, rng), x)


def test_corrupt_range(rng):
    x = np.full((200,), 100.0)
    out = corrupt_input(x, 0.1, rng)
    assert np.all(out >= 90.0) and np.all(out <= 110.0)
    assert out.std() > 0


def test_corrupt_deterministic_per_seed():
    x = np.linspace(1, 5, 10)
    a = corrupt_input(x, 0.1, np.random.default_rng(7))
    b = corrupt_input(x, 0.1, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)


def test_corrupt_negative_amount_rejected(rng):
    with pytest.raises(ValueError):
        corrupt_input(np.ones(3), -0.1, rng)


def test_gradcheck_stage1():
    cfg = DacConfig(input_dim=5, hidden=16, latent=12)
    rng = np.random.default_rng(11)
    params = init_params(cfg, rng)
    clean = rng.standard_normal((6, 5))
    corrupt = corrupt_input(clean, 0.1, rng)
    worst = grad_check(
        lambda p: loss_and_grads(p, clean, corrupt, labels=None,
                                 recon_weight=1.0, train_head=False),
        params, rng, n_coords=35, step=1e-5)
    assert worst < 1e-4


def test_gradcheck_stage2_joint_loss():
    cfg = DacConfig(input_dim=5, hidden=16, latent=12)
    rng = np.random.default_rng(13)
    params = init_params(cfg, rng)
    clean = rng.standard_normal((6, 5))
    corrupt = corrupt_input(clean, 0.1, rng)
    labels = np.array([0, 1, 0, 1, 1, 0])
    worst = grad_check(
        lambda p: loss_and_grads(p, clean, corrupt, labels=labels,
                                 recon_weight=1.0, train_head=True),
        params, rng, n_coords=35, step=1e-5)
    assert worst < 1e-4


def test_cross_entropy_never_reaches_decoder():
    cfg = DacConfig(input_dim=4, hidden=8, latent=8)
    rng = np.random.default_rng(5)
    params = init_params(cfg, rng)
    clean = rng.standard_normal((5, 4))
    _, grads = loss_and_grads(params, clean, clean,
                              labels=np.array([0, 1, 1, 0, 1]),
                              recon_weight=0.0, train_head=True)
    np.testing.assert_array_equal(grads["dec.W"], np.zeros_like(grads["dec.W"]))
    np.testing.assert_array_equal(grads["dec.b"], np.zeros_like(grads["dec.b"]))
    # while the encoder does receive classification gradient
    assert np.abs(grads["enc1.W"]).max() > 0


def test_stage1_head_frozen():
    cfg = DacConfig(input_dim=4, hidden=8, latent=8)
    rng = np.random.default_rng(5)
    params = init_params(cfg, rng)
    clean = rng.standard_normal((5, 4))
    _, grads = loss_and_grads(params, clean, clean, labels=None,
                              recon_weight=1.0, train_head=False)
    np.testing.assert_array_equal(grads["head.W"],
                                  np.zeros_like(grads["head.W"]))


def test_stage1_loss_improves_with_epochs():
    x, labels = separable_features(40, seed=9)
    short = train_dac(x, labels, DacConfig(**{**FAST.__dict__, "ae_epochs": 1}))
    full = train_dac(x, labels, DacConfig(**{**FAST.__dict__, "ae_epochs": 25}))
    assert full.ae_losses[-1] < short.ae_losses[-1]


def test_separable_clusters_high_training_accuracy():
    x, labels = separable_features(50, seed=2)
    model = train_dac(x, labels, FAST)
    probs = model.predict_proba(x)
    predicted = probs.argmax(axis=1)
    truth = encode_labels(labels)
    assert (predicted == truth).mean() >= 0.95


def test_training_deterministic():
    x, labels = separable_features(25, seed=4)
    m1 = train_dac(x, labels, FAST)
    m2 = train_dac(x, labels, FAST)
    for key in m1.params:
        np.testing.assert_array_equal(m1.params[key], m2.params[key])


def test_inference_deterministic():
    x, labels = separable_features(25, seed=4)
    model = train_dac(x, labels, FAST)
    out1 = dac_predict(model, x[0])
    out2 = dac_predict(model, x[0])
    assert out1 == out2
    assert set(out1) == set(CLASSES)


def test_single_class_labels_rejected():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(10, 7))
    with pytest.raises(ValueError):
        train_dac(x, ["collusive"] * 10, FAST)


def test_arity_mismatch_rejected():
    x, labels = separable_features(10)
    model = train_dac(x, labels, FAST)
    with pytest.raises(ValueError):
        model.predict_proba(np.zeros((1, 5)))


def test_unlabeled_rows_join_stage_one_only():
    x, labels = separable_features(20, seed=6)
    labels = list(labels)
    labels[0] = None
    labels[25] = None
    model = train_dac(x, labels, FAST)
    assert model.predict_proba(x).shape == (40, 2)


@given(shift=st.floats(min_value=-50, max_value=50,
                       allow_nan=False, allow_infinity=False),
       scores=arrays(np.float64, (4, 2),
                     elements=st.floats(-30, 30, allow_nan=False)))
@settings(max_examples=60, deadline=None)
def test_softmax_shift_invariance(shift, scores):
    np.testing.assert_allclose(softmax(scores + shift), softmax(scores),
                               atol=1e-12)


def test_serialization_round_trip():
    x, labels = separable_features(15, seed=8)
    model = train_dac(x, labels, FAST)
    clone = DacModel.from_obj(model.to_obj())
    np.testing.assert_allclose(model.predict_proba(x),
                               clone.predict_proba(x), atol=1e-12)


def test_mlp_baseline_learns_separable_data():
    x, labels = separable_features(40, seed=3)
    model = train_mlp(x, labels, FAST)
    predicted = model.predict_proba(x).argmax(axis=1)
    assert (predicted == encode_labels(labels)).mean() >= 0.95
