import numpy as np
import pytest

from slidebench.learn import (
    AdaBoostModel,
    BoostParams,
    ForestParams,
    LabeledSet,
    load_model,
    save_model,
    train_adaboost,
    train_random_forest,
)


class TestRandomForest:
    def test_single_full_depth_tree_memorizes(self, rng):
        # bootstrap off so the tree sees every training point
        x = rng.normal(size=(10, 3))
        y = np.array([1, 2, 3, 4, 1, 2, 3, 4, 1, 2])
        model = train_random_forest(LabeledSet(x, y), ForestParams(n_estimators=1, bootstrap=False, seed=0))
        assert np.array_equal(model.predict(x), y)

    def test_defaults_learn_separated_clusters(self, rng):
        x = np.vstack([rng.normal(0, 0.3, size=(30, 4)) + c for c in (0, 3, 6)])
        y = np.array([1] * 30 + [2] * 30 + [3] * 30)
        model = train_random_forest(LabeledSet(x, y), ForestParams(seed=5))
        assert np.mean(model.predict(x) == y) >= 0.95

    def test_same_seed_same_predictions(self, rng):
        x = rng.normal(size=(40, 3))
        y = rng.integers(1, 4, size=40)
        y[:3] = [1, 2, 3]
        a = train_random_forest(LabeledSet(x, y), ForestParams(seed=9))
        b = train_random_forest(LabeledSet(x, y), ForestParams(seed=9))
        probe = rng.normal(size=(60, 3))
        assert np.array_equal(a.predict(probe), b.predict(probe))

    def test_serialization_bit_identical(self, rng, tmp_path):
        x = rng.normal(size=(25, 3))
        y = rng.integers(1, 4, size=25)
        y[:3] = [1, 2, 3]
        model = train_random_forest(LabeledSet(x, y), ForestParams(n_estimators=3, seed=2))
        save_model(model, tmp_path / "forest.json")
        again = load_model(tmp_path / "forest.json")
        probe = rng.normal(size=(80, 3))
        assert np.array_equal(model.predict(probe), again.predict(probe))


class TestAdaBoost:
    def test_single_stump_nails_threshold_separable_data(self, rng):
        x = np.concatenate([rng.uniform(0, 1, 12), rng.uniform(2, 3, 12)])[:, None]
        y = np.array([1] * 12 + [2] * 12)
        model = train_adaboost(LabeledSet(x, y), BoostParams(n_estimators=1, learning_rate=0.5))
        assert np.array_equal(model.predict(x), y)

    def test_training_error_non_increasing_on_separable_toy(self, rng):
        x = np.vstack([rng.normal(0, 0.6, size=(25, 2)) + [1.2, 0], rng.normal(0, 0.6, size=(25, 2)) - [1.2, 0]])
        y = np.array([1] * 25 + [2] * 25)
        data = LabeledSet(x, y)
        model = train_adaboost(data, BoostParams(n_estimators=30, learning_rate=0.5))
        errors = model.staged_training_error(data)
        assert errors[-1] <= errors[0]
        # allow no sustained climbs: the running minimum is hit again and again
        running_min = np.minimum.accumulate(errors)
        assert errors[-1] == running_min[-1]

    def test_multiclass_boosting(self, rng):
        x = np.vstack([rng.normal(0, 0.4, size=(20, 2)) + c for c in ((0, 0), (3, 0), (0, 3))])
        y = np.array([1] * 20 + [2] * 20 + [3] * 20)
        model = train_adaboost(LabeledSet(x, y), BoostParams(n_estimators=80, learning_rate=0.5))
        assert np.mean(model.predict(x) == y) >= 0.9

    def test_stage_weights_scaled_by_learning_rate(self, rng):
        x = np.concatenate([rng.uniform(0, 1, 10), rng.uniform(2, 3, 10)])[:, None]
        y = np.array([1] * 10 + [2] * 10)
        lo = train_adaboost(LabeledSet(x, y), BoostParams(n_estimators=1, learning_rate=0.5))
        hi = train_adaboost(LabeledSet(x, y), BoostParams(n_estimators=1, learning_rate=1.0))
        assert hi.stage_weights[0] == pytest.approx(2.0 * lo.stage_weights[0])

    def test_serialization_bit_identical(self, rng, tmp_path):
        x = rng.normal(size=(30, 2))
        y = rng.integers(1, 3, size=30)
        y[:2] = [1, 2]
        model = train_adaboost(LabeledSet(x, y), BoostParams(n_estimators=10))
        save_model(model, tmp_path / "boost.json")
        again = load_model(tmp_path / "boost.json")
        probe = rng.normal(size=(40, 2))
        assert np.array_equal(model.predict(probe), again.predict(probe))
