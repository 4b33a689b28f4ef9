import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from scanmix import (
    CountingPredictor,
    PointCloud,
    PredictorContractError,
    RigidAugmentation,
    ValidationError,
    argmax_labels,
    canonical_views,
    random_views,
    tta_predict,
)
from scanmix.tta import check_score_map


class ConstantPredictor:
    """Geometry-blind predictor: same fixed rows for every view."""

    def __init__(self, rows):
        self.rows = np.asarray(rows, dtype=np.float64)

    @property
    def class_count(self):
        return self.rows.shape[1]

    def predict(self, cloud):
        return self.rows[: cloud.n]


class SequencePredictor:
    """Replays a fixed list of score maps, one per call."""

    def __init__(self, maps):
        self.maps = [np.asarray(m, dtype=np.float64) for m in maps]
        self.i = 0

    @property
    def class_count(self):
        return self.maps[0].shape[1]

    def predict(self, cloud):
        out = self.maps[self.i % len(self.maps)]
        self.i += 1
        return out


def tiny_cloud(n=2):
    rng = np.random.default_rng(0)
    return PointCloud(coords=rng.uniform(-1, 1, (n, 3)), intensity=rng.random(n, dtype=np.float32))


# ---------------------------------------------------------------------------
# View grids
# ---------------------------------------------------------------------------


def test_single_view_is_identity():
    assert canonical_views(1) == [RigidAugmentation.identity()]


def test_eight_view_grid():
    views = canonical_views(8)
    assert len(views) == 8
    assert views[0] == RigidAugmentation.identity()
    assert len(set(views)) == 8
    yaws = {v.yaw for v in views}
    assert yaws == {0.0, np.pi / 2, np.pi, 3 * np.pi / 2}
    assert {v.flip_x for v in views} == {False, True}
    assert all(v.scale == 1.0 and v.shift == (0.0, 0.0, 0.0) for v in views)


def test_sixteen_views_extend_eight_with_scales():
    views = canonical_views(16)
    assert len(views) == 16
    assert len(set(views)) == 16
    assert {v.scale for v in views} == {0.95, 1.05}
    base = {(v.yaw, v.flip_x) for v in canonical_views(8)}
    assert {(v.yaw, v.flip_x) for v in views} == base


def test_unsupported_view_count_rejected():
    for bad in (0, 3, 5, 7, 9, 32):
        with pytest.raises(ValidationError):
            canonical_views(bad)


def test_random_views_are_seeded():
    a = random_views(8, np.random.default_rng(9))
    b = random_views(8, np.random.default_rng(9))
    assert a == b
    assert len(set(a)) == 8


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def test_identity_view_equals_direct_prediction():
    pred = ConstantPredictor([[0.8, 0.2], [0.3, 0.7]])
    cloud = tiny_cloud(2)
    out = tta_predict(pred, cloud, canonical_views(1))
    assert out.tobytes() == pred.predict(cloud).tobytes()


def test_constant_predictor_unchanged_by_aggregation():
    rows = [[0.8, 0.2], [0.3, 0.7]]
    out = tta_predict(ConstantPredictor(rows), tiny_cloud(2), canonical_views(8))
    assert_allclose(out, rows, atol=1e-12)


def test_two_view_hand_mean():
    maps = [
        [[0.8, 0.2], [0.2, 0.8]],
        [[0.6, 0.4], [0.4, 0.6]],
    ]
    out = tta_predict(
        SequencePredictor(maps), tiny_cloud(2), canonical_views(2)
    )
    assert_allclose(out, [[0.7, 0.3], [0.3, 0.7]], atol=1e-12)


def test_view_order_does_not_matter():
    pred = ConstantPredictor(np.full((4, 3), 1.0 / 3.0))
    cloud = tiny_cloud(4)
    views = canonical_views(8)
    fwd = tta_predict(pred, cloud, views)
    rev = tta_predict(pred, cloud, views[::-1])
    assert_array_equal(fwd, rev)


def test_empty_views_rejected():
    with pytest.raises(ValidationError):
        tta_predict(ConstantPredictor([[1.0]]), tiny_cloud(1), [])


def test_rows_sum_to_one():
    rng = np.random.default_rng(1)
    raw = rng.random((50, 22))
    rows = raw / raw.sum(axis=1, keepdims=True)
    out = tta_predict(ConstantPredictor(rows), tiny_cloud(50), canonical_views(4))
    assert np.abs(out.sum(axis=1) - 1.0).max() < 1e-5


def test_contract_violations_are_reported():
    cloud = tiny_cloud(3)

    class WrongRows(ConstantPredictor):
        def predict(self, cloud):
            return np.full((cloud.n + 1, 2), 0.5)

    class Negative(ConstantPredictor):
        def predict(self, cloud):
            return np.array([[1.2, -0.2]] * cloud.n)

    class NotNormalized(ConstantPredictor):
        def predict(self, cloud):
            return np.array([[0.9, 0.9]] * cloud.n)

    for predictor in (WrongRows([[1.0, 0.0]]), Negative([[1.0, 0.0]]), NotNormalized([[1.0, 0.0]])):
        with pytest.raises(PredictorContractError):
            tta_predict(predictor, cloud, canonical_views(1))


def test_counting_predictor_counts():
    pred = CountingPredictor(ConstantPredictor([[0.5, 0.5]] * 4))
    tta_predict(pred, tiny_cloud(4), canonical_views(8))
    assert pred.calls == 8


# ---------------------------------------------------------------------------
# Argmax
# ---------------------------------------------------------------------------


def test_argmax_rows_and_ties():
    labels = argmax_labels(np.array([[0.1, 0.9], [0.5, 0.5]]))
    assert labels.dtype == np.uint32
    assert_array_equal(labels, [1, 0])


def test_argmax_matches_brute_force():
    rng = np.random.default_rng(2)
    scores = rng.random((1000, 22))
    got = argmax_labels(scores)
    expected = np.array([max(range(22), key=lambda c: scores[i, c]) for i in range(1000)])
    assert_array_equal(got, expected.astype(np.uint32))
