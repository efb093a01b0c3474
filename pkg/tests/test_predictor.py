import math

import numpy as np
import pytest

from adaptivq.history import AttemptOutcome, StudentFeatures
from adaptivq.predictor import (
    LogisticModel,
    PredictorError,
    TrainConfig,
    TrainingPoint,
    accuracy,
    build_training_set,
    load_model,
    loss,
    loss_gradient,
    model_hash,
    predict,
    save_model,
    sigmoid,
    split_by_student,
    train,
)

from conftest import log_from, make_event

A, R, S = AttemptOutcome.ACCEPTED, AttemptOutcome.REJECTED, AttemptOutcome.SKIPPED


def point(ts, tk, label, student="s1", prior=1):
    return TrainingPoint(
        features=StudentFeatures(ts, tk, prior),
        label=label,
        student_id=student,
        topic_id="t1",
        exercise_id="e1",
        first_seq=0,
    )


def toy_separable():
    return [point(1.0, 0.0, True, student=f"a{i}") for i in range(50)] + [
        point(0.0, 1.0, False, student=f"b{i}") for i in range(50)
    ]


def finite_difference_gradient(model, points, l2, step=1e-5):
    grads = []
    for name in ("bias", "w_success", "w_skip"):
        base = getattr(model, name)
        hi = LogisticModel(**{**_params(model), name: base + step})
        lo = LogisticModel(**{**_params(model), name: base - step})
        grads.append((loss(hi, points, l2) - loss(lo, points, l2)) / (2 * step))
    return np.array(grads)


def _params(model):
    return {"bias": model.bias, "w_success": model.w_success, "w_skip": model.w_skip}


class TestBuildTrainingSet:
    def test_single_encounter_cold_start(self):
        log = log_from([make_event(0, outcome=A)])
        (pt,) = build_training_set(log)
        assert pt.features == StudentFeatures(0.5, 0.0, 0)
        assert pt.label is True

    def test_second_point_sees_first_success(self):
        log = log_from(
            [
                make_event(0, exercise_id="e1", outcome=A),
                make_event(1, exercise_id="e2", outcome=A),
            ]
        )
        points = sorted(build_training_set(log), key=lambda p: p.first_seq)
        assert points[1].features.topic_success == 1.0
        assert points[1].features.prior_encounters == 1

    def test_skipped_encounter_labeled_false(self):
        log = log_from([make_event(0, outcome=S)])
        (pt,) = build_training_set(log)
        assert pt.label is False

    def test_one_point_per_encounter(self):
        log = log_from(
            [
                make_event(0, exercise_id="e1", outcome=R),
                make_event(1, exercise_id="e1", outcome=A),
                make_event(2, exercise_id="e2", outcome=R),
            ]
        )
        assert len(build_training_set(log)) == 2


class TestTrain:
    def test_symmetric_balanced_data_predicts_half(self):
        points = [point(0.5, 0.0, i % 2 == 0, student=f"s{i}") for i in range(40)]
        model = train(points)
        assert predict(model, StudentFeatures(0.5, 0.0, 1)) == pytest.approx(0.5, abs=1e-6)

    def test_separable_toy_set_perfect_accuracy(self):
        model = train(toy_separable())
        assert accuracy(model, toy_separable()) == 1.0

    def test_deterministic(self):
        points = toy_separable()
        m1, m2 = train(points), train(points)
        assert (m1.bias, m1.w_success, m1.w_skip) == (m2.bias, m2.w_success, m2.w_skip)
        assert m1.final_loss == m2.final_loss

    def test_single_class_rejected(self):
        with pytest.raises(PredictorError, match="degenerate"):
            train([point(0.5, 0.0, True) for _ in range(5)])

    def test_empty_rejected(self):
        with pytest.raises(PredictorError):
            train([])

    def test_monotone_loss_on_fixture_dataset(self):
        rng = np.random.default_rng(5)
        points = [
            point(rng.uniform(), rng.uniform(), bool(rng.integers(2)), student=f"s{i}")
            for i in range(200)
        ]
        model = train(points, TrainConfig(max_iterations=500), track_loss=True)
        diffs = np.diff(model.loss_history)
        assert (diffs <= 1e-15).all()

    def test_stops_on_tolerance(self):
        points = toy_separable()
        model = train(points, TrainConfig(tolerance=1e-3))
        assert model.iterations < 5000

    def test_config_validation(self):
        with pytest.raises(PredictorError):
            TrainConfig(learning_rate=-1)
        with pytest.raises(PredictorError):
            TrainConfig(max_iterations=0)
        with pytest.raises(PredictorError):
            TrainConfig(l2_penalty=-0.1)


class TestPredict:
    def test_zero_model_gives_half(self):
        model = LogisticModel(0.0, 0.0, 0.0)
        assert predict(model, StudentFeatures(0.3, 0.9, 2)) == 0.5

    def test_known_logistic_values(self):
        assert predict(
            LogisticModel(0.0, 4.0, 0.0), StudentFeatures(0.5, 0.0, 1)
        ) == pytest.approx(0.8807970779778823, abs=1e-12)
        assert predict(
            LogisticModel(0.0, 0.0, -4.0), StudentFeatures(0.0, 1.0, 1)
        ) == pytest.approx(0.01798620996209156, abs=1e-12)

    def test_nonfinite_feature_rejected(self):
        with pytest.raises(PredictorError):
            predict(LogisticModel(0, 1, 1), StudentFeatures(float("nan"), 0.0, 1))

    def test_nonfinite_model_rejected(self):
        with pytest.raises(PredictorError):
            LogisticModel(float("inf"), 0.0, 0.0)

    def test_monotone_in_success_feature(self):
        model = LogisticModel(0.0, 2.0, -2.0)
        grid = np.linspace(0, 1, 11)
        preds = [predict(model, StudentFeatures(ts, 0.5, 1)) for ts in grid]
        assert all(a < b for a, b in zip(preds, preds[1:]))
        preds_skip = [predict(model, StudentFeatures(0.5, tk, 1)) for tk in grid]
        assert all(a > b for a, b in zip(preds_skip, preds_skip[1:]))

    def test_sigmoid_extremes_stay_in_unit_interval(self):
        assert 0.0 <= sigmoid(-1000.0) < 1e-12
        assert 1.0 - 1e-12 < sigmoid(1000.0) <= 1.0


class TestAccuracy:
    def test_tie_counts_as_positive(self):
        model = LogisticModel(0.0, 0.0, 0.0)  # predicts exactly 0.5
        points = [point(0.1, 0.1, True, student="a"), point(0.2, 0.2, False, student="b")]
        # both classified positive -> only the true-labeled point is a hit
        assert accuracy(model, points) == 0.5

    def test_balanced_base_rate(self):
        model = LogisticModel(0.0, 0.0, 0.0)
        points = [point(0.5, 0.5, i < 3, student=f"s{i}") for i in range(10)]
        assert accuracy(model, points) == 0.3


class TestLossGradient:
    def test_zero_model_on_balanced_symmetric_data(self):
        points = [point(0.5, 0.5, True), point(0.5, 0.5, False)]
        grad = loss_gradient(LogisticModel(0, 0, 0), points)
        assert np.allclose(grad, 0.0, atol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            model = LogisticModel(*rng.uniform(-3, 3, size=3))
            points = [
                point(rng.uniform(), rng.uniform(), bool(rng.integers(2)), student=f"s{i}")
                for i in range(30)
            ]
            l2 = float(rng.choice([0.0, 0.1]))
            analytic = loss_gradient(model, points, l2)
            numeric = finite_difference_gradient(model, points, l2)
            rel = np.linalg.norm(analytic - numeric) / max(1.0, np.linalg.norm(numeric))
            assert rel < 1e-6

    def test_l2_touches_weights_not_bias(self):
        rng = np.random.default_rng(1)
        model = LogisticModel(0.3, -0.7, 1.2)
        points = [
            point(rng.uniform(), rng.uniform(), bool(rng.integers(2)), student=f"s{i}")
            for i in range(20)
        ]
        g0 = loss_gradient(model, points, 0.0)
        g1 = loss_gradient(model, points, 0.5)
        assert g1[0] == g0[0]
        assert g1[1] == pytest.approx(g0[1] + 0.5 * model.w_success)
        assert g1[2] == pytest.approx(g0[2] + 0.5 * model.w_skip)


class TestSplit:
    def test_no_student_straddles(self):
        points = [point(0.5, 0.0, i % 2 == 0, student=f"s{i % 7}") for i in range(70)]
        train_pts, test_pts = split_by_student(points, seed=3)
        assert {p.student_id for p in train_pts}.isdisjoint({p.student_id for p in test_pts})
        assert len(train_pts) + len(test_pts) == 70

    def test_deterministic(self):
        points = [point(0.5, 0.0, True, student=f"s{i}") for i in range(20)]
        a = split_by_student(points, seed=9)
        b = split_by_student(points, seed=9)
        assert [p.student_id for p in a[0]] == [p.student_id for p in b[0]]

    def test_bad_fraction(self):
        with pytest.raises(PredictorError):
            split_by_student([point(0.5, 0, True)], seed=0, train_fraction=1.5)


class TestModelFile:
    def test_roundtrip_exact(self, tmp_path):
        model = LogisticModel(
            bias=-0.12345678901234567,
            w_success=3.0000000000000004,
            w_skip=-2.2250738585072014e-308,
            iterations=321,
            final_loss=0.4361283,
        )
        config = TrainConfig(l2_penalty=0.01)
        path = tmp_path / "model.json"
        save_model(model, path, config)
        loaded, loaded_config = load_model(path)
        assert loaded.bias == model.bias
        assert loaded.w_success == model.w_success
        assert loaded.w_skip == model.w_skip
        assert loaded.iterations == model.iterations
        assert loaded.final_loss == model.final_loss
        assert loaded_config == config

    def test_missing_file(self, tmp_path):
        with pytest.raises(PredictorError, match="not found"):
            load_model(tmp_path / "nope.json")

    def test_hash_stable_and_sensitive(self):
        m1 = LogisticModel(0.1, 0.2, 0.3)
        m2 = LogisticModel(0.1, 0.2, 0.3)
        m3 = LogisticModel(0.1, 0.2, 0.30000001)
        assert model_hash(m1) == model_hash(m2)
        assert model_hash(m1) != model_hash(m3)


def test_loss_decreases_under_training():
    points = toy_separable()
    untrained = LogisticModel(0, 0, 0)
    trained = train(points, TrainConfig(max_iterations=200))
    assert loss(trained, points) < loss(untrained, points)


def test_train_meta_records_final_loss():
    points = toy_separable()
    model = train(points, TrainConfig(max_iterations=50))
    assert model.final_loss == pytest.approx(loss(model, points), abs=1e-12)
    assert model.iterations == 50
    assert math.isfinite(model.final_loss)
