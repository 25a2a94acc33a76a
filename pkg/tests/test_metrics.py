import numpy as np
import pytest

from colluscan.metrics import (Metrics, auc_score, evaluate,
                               feature_importance, mean_metrics)


def test_perfect_predictions():
    scores = [0.9, 0.8, 0.1, 0.2]
    predicted = [True, True, False, False]
    truth = [True, True, False, False]
    m = evaluate(scores, predicted, truth)
    assert (m.tpr, m.fpr, m.accuracy, m.auc) == (1.0, 0.0, 1.0, 1.0)


def test_all_positive_predictor_on_balanced_set():
    scores = [0.5] * 4
    predicted = [True] * 4
    truth = [True, True, False, False]
    m = evaluate(scores, predicted, truth)
    assert m.tpr == 1.0
    assert m.fpr == 1.0
    assert m.accuracy == 0.5


def test_auc_hand_rank_count():
    # pairs: (0.9+,0.8-) ok, (0.9+,0.1-) ok, (0.7+,0.8-) wrong, (0.7+,0.1-) ok
    scores = [0.9, 0.8, 0.7, 0.1]
    truth = [True, False, True, False]
    m = evaluate(scores, [s >= 0.5 for s in scores], truth)
    assert m.auc == pytest.approx(0.75)


def test_auc_ties_half_credit():
    assert auc_score([0.5, 0.5], [True, False]) == pytest.approx(0.5)
    assert auc_score([0.5, 0.5, 0.9], [True, False, True]) == pytest.approx(0.75)


def test_tpr_only_mode_single_class_truth():
    m = evaluate([0.9, 0.2, 0.8], [True, False, True], [True, True, True])
    assert m.tpr == pytest.approx(2 / 3)
    assert m.fpr is None and m.accuracy is None and m.auc is None


def test_one_class_tpr_equals_inlier_fraction_exactly():
    rng = np.random.default_rng(0)
    inlier = rng.random(200) > 0.3
    m = evaluate(rng.random(200), inlier, np.ones(200, dtype=bool))
    assert m.tpr == float(inlier.mean())


def test_length_mismatch_is_error():
    with pytest.raises(ValueError):
        evaluate([0.5], [True, False], [True, False])


def test_mean_metrics():
    folds = [Metrics(tpr=1.0, fpr=0.0, accuracy=1.0, auc=1.0),
             Metrics(tpr=0.5, fpr=0.5, accuracy=0.5, auc=0.5)]
    m = mean_metrics(folds)
    assert m.tpr == pytest.approx(0.75)
    assert m.auc == pytest.approx(0.75)
    tpr_only = mean_metrics([Metrics(tpr=1.0), Metrics(tpr=0.0)])
    assert tpr_only.tpr == pytest.approx(0.5)
    assert tpr_only.fpr is None


# --- feature importance -------------------------------------------------------

def test_label_feature_has_largest_importance():
    rng = np.random.default_rng(1)
    n = 200
    labels = rng.random(n) > 0.5
    x = np.column_stack([
        labels.astype(float),          # perfectly informative
        rng.random(n),                 # pure noise
        rng.random(n),                 # pure noise
    ])

    def trainer(matrix):
        # simple deterministic stump-like metric: correlation of the best
        # column with the labels, a stand-in for a retrained model score
        best = 0.0
        for col in matrix.T:
            best = max(best, abs(np.corrcoef(col, labels)[0, 1]))
        return best

    ranked = feature_importance(trainer, x, ("label_copy", "noise1", "noise2"))
    assert ranked[0][0] == "label_copy"
    assert ranked[0][1] > 0.5
    for name, value in ranked[1:]:
        assert abs(value) <= 0.05


def test_importance_one_entry_per_feature():
    x = np.random.default_rng(2).random((50, 4))
    ranked = feature_importance(lambda m: float(m.shape[1]), x,
                                ("a", "b", "c", "d"))
    assert len(ranked) == 4
    assert sorted(name for name, _ in ranked) == ["a", "b", "c", "d"]
    assert all(v == pytest.approx(1.0) for _, v in ranked)


def test_importance_needs_two_features():
    with pytest.raises(ValueError):
        feature_importance(lambda m: 0.0, np.zeros((5, 1)), ("only",))
