import numpy as np
import pytest

from elmkit.elm import predict_labels
from elmkit.numerics import Rng
from elmkit.sit2 import (
    STAGE_INITIALIZED,
    STAGE_REFINED,
    Sit2Model,
    _product_ridge,
    _with_bias,
    sit2_predict,
    sit2_train,
)
from elmkit.type_reduction import It2RuleBase, firing_batch


def two_blobs(n_per_class=40, seed=60):
    gen = Rng(seed).generator()
    a = gen.normal([0.2, 0.2], 0.08, (n_per_class, 2))
    b = gen.normal([0.8, 0.8], 0.08, (n_per_class, 2))
    x = np.vstack([a, b])
    labels = np.repeat([0, 1], n_per_class)
    t = np.eye(2)[labels]
    return x, t, labels


def test_separable_blobs_high_training_accuracy():
    x, t, labels = two_blobs()
    model = sit2_train(x, t, n_rules=2, rng=Rng(1), c=1e6)
    assert model.stage == STAGE_REFINED
    pred = predict_labels(sit2_predict(model, x))
    assert (pred == labels).mean() >= 0.99


def test_rejects_single_column_targets():
    x, _, _ = two_blobs()
    with pytest.raises(ValueError, match="2 classes"):
        sit2_train(x, np.ones((x.shape[0], 1)), 2, Rng(0))


def test_rejects_too_few_rules():
    x, t, _ = two_blobs()
    with pytest.raises(ValueError, match="n_rules"):
        sit2_train(x, t, 1, Rng(0))


def test_collapsed_width_interval_skips_nothing_but_changes_nothing():
    # sigma_lower == sigma_upper: the refinement pass rebuilds the very same
    # hidden rows, so refined consequents match the initial ones
    x, t, _ = two_blobs()
    refined = sit2_train(x, t, 3, Rng(5), c=1e4, width_ratio_range=(1.0, 1.0))
    initial = sit2_train(
        x, t, 3, Rng(5), c=1e4, width_ratio_range=(1.0, 1.0), refine=False
    )
    assert refined.stage == STAGE_REFINED and initial.stage == STAGE_INITIALIZED
    denom = np.abs(initial.consequents).max()
    assert np.abs(refined.consequents - initial.consequents).max() <= 1e-6 * denom


def test_collapsed_width_prediction_is_type1_weighted_mean():
    x, t, _ = two_blobs()
    model = sit2_train(x, t, 3, Rng(5), c=1e4, width_ratio_range=(1.0, 1.0))
    scores = sit2_predict(model, x)
    lower, upper, _ = firing_batch(model.rules, x)
    np.testing.assert_array_equal(lower, upper)
    xb = _with_bias(x)
    for i in range(2):
        w = xb @ model.consequents[:, i].reshape(model.n_rules, -1).T
        ref = (upper * w).sum(axis=1) / upper.sum(axis=1)
        assert np.abs(scores[:, i] - ref).max() < 1e-9


def test_single_rule_model_predicts_its_consequent():
    rules = It2RuleBase(np.array([[0.5, 0.5]]), [0.4], [0.8])
    q = np.array([[1.0, -2.0], [0.5, 0.0], [0.0, 3.0]])  # (n+1) x outputs
    model = Sit2Model(rules, q, STAGE_INITIALIZED)
    x = np.array([[0.2, 0.6], [0.9, 0.1]])
    scores = sit2_predict(model, x)
    expected = _with_bias(x) @ q
    np.testing.assert_allclose(scores, expected, rtol=1e-12)


def test_ekm_and_sc_predictions_agree():
    x, t, _ = two_blobs(30)
    model = sit2_train(x, t, 5, Rng(9), c=1e5)
    test_x = Rng(10).generator().uniform(0, 1, (25, 2))
    a = sit2_predict(model, test_x, reducer="sc")
    b = sit2_predict(model, test_x, reducer="ekm")
    assert np.abs(a - b).max() < 1e-9


def test_unknown_reducer_rejected():
    x, t, _ = two_blobs(10)
    model = sit2_train(x, t, 2, Rng(0))
    with pytest.raises(ValueError, match="reducer"):
        sit2_predict(model, x, reducer="km")


def test_determinism():
    x, t, _ = two_blobs(20)
    a = sit2_train(x, t, 4, Rng(33), c=1e5)
    b = sit2_train(x, t, 4, Rng(33), c=1e5)
    assert a.consequents.tobytes() == b.consequents.tobytes()
    assert a.rules.centers.tobytes() == b.rules.centers.tobytes()


def test_predict_feature_mismatch():
    x, t, _ = two_blobs(10)
    model = sit2_train(x, t, 2, Rng(0))
    with pytest.raises(ValueError, match="feature mismatch"):
        sit2_predict(model, np.zeros((3, 5)))


def test_predict_empty_batch():
    x, t, _ = two_blobs(10)
    model = sit2_train(x, t, 2, Rng(0))
    assert sit2_predict(model, np.zeros((0, 2))).shape == (0, 2)


def test_product_ridge_structured_matches_explicit():
    gen = Rng(71).generator()
    p, m_rules, k, outs = 12, 6, 5, 3  # m = 30 > p forces the dual route
    phi = gen.uniform(0.1, 1.0, (p, m_rules))
    xb = gen.uniform(-1.0, 1.0, (p, k))
    t = gen.uniform(-1.0, 1.0, (p, outs))
    h = (phi[:, :, None] * xb[:, None, :]).reshape(p, m_rules * k)
    from elmkit.numerics import ridge_solve

    expected = ridge_solve(h, t, 50.0)
    got = _product_ridge(phi, xb, t, 50.0)
    np.testing.assert_allclose(got, expected, rtol=1e-8, atol=1e-10)


def test_product_ridge_blocked_tall_matches_explicit():
    gen = Rng(72).generator()
    p, m_rules, k, outs = 40, 3, 4, 2  # m = 12 <= p takes the primal route
    phi = gen.uniform(0.1, 1.0, (p, m_rules))
    xb = gen.uniform(-1.0, 1.0, (p, k))
    t = gen.uniform(-1.0, 1.0, (p, outs))
    h = (phi[:, :, None] * xb[:, None, :]).reshape(p, m_rules * k)
    from elmkit.numerics import ridge_solve

    expected = ridge_solve(h, t, 50.0)
    got = _product_ridge(phi, xb, t, 50.0)
    np.testing.assert_allclose(got, expected, rtol=1e-8, atol=1e-10)


def test_refinement_does_not_hurt_separable_fit():
    x, t, labels = two_blobs(50, seed=61)
    refined = sit2_train(x, t, 4, Rng(2), c=1e6)
    initial = sit2_train(x, t, 4, Rng(2), c=1e6, refine=False)
    acc_ref = (predict_labels(sit2_predict(refined, x)) == labels).mean()
    acc_init = (predict_labels(sit2_predict(initial, x)) == labels).mean()
    assert acc_ref >= acc_init - 0.02
