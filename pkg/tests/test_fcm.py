import numpy as np
import pytest

from dwspectral.classifiers import FcmModel, assign_by_roi, classify, fcm_cluster, fcm_memberships
from dwspectral.errors import DegenerateDataError, InvalidParameterError
from dwspectral.volume import Volume


def _two_blobs(seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 1e-4, 500)
    b = rng.normal(1.0, 1e-4, 700)
    return a, b


def test_single_cluster_is_the_mean(rng):
    x = rng.random(200)
    model, labels = fcm_cluster(x, c=1)
    assert model.centroids[0, 0] == pytest.approx(x.mean(), rel=1e-12)
    assert np.all(model.memberships(x) == 1.0)
    assert np.all(labels == 1)


def test_two_delta_groups_exact():
    x = np.r_[np.full(30, 2.0), np.full(50, 7.0)]
    model, _ = fcm_cluster(x, c=2)
    assert sorted(model.centroids[:, 0]) == [2.0, 7.0]


def test_two_blobs_converge_to_means():
    a, b = _two_blobs()
    model, labels = fcm_cluster(np.r_[a, b], c=2)
    got = np.sort(model.centroids[:, 0])
    np.testing.assert_allclose(got, [a.mean(), b.mean()], atol=1e-6)
    # higher centroid maps to class 1
    assert labels[:500].tolist() == [2] * 500 and labels[500:].tolist() == [1] * 700


def test_objective_and_memberships(rng):
    x = np.r_[rng.normal(-1e-3, 5e-4, 3000), rng.normal(8e-4, 2e-4, 3000), rng.normal(3e-3, 4e-4, 500)]
    model, _ = fcm_cluster(x, c=3, tol=0.0, max_iters=60)
    j = np.array(model.objective)
    assert np.all(j[1:] <= j[:-1] * (1 + 1e-12))
    assert max(model.membership_error) <= 1e-12
    assert model.iterations == 60


def test_membership_sharing_on_centroid():
    u = fcm_memberships(np.array([[1.0], [2.0]]), np.array([[1.0], [1.0], [3.0]]), 2.0)
    assert u[0].tolist() == [0.5, 0.5, 0.0]
    assert u[1].sum() == pytest.approx(1.0)


def test_replicated_features_match_scalar(rng):
    x = np.r_[rng.normal(0, 0.1, 300), rng.normal(2, 0.1, 300), rng.normal(5, 0.1, 300)]
    scalar, ls = fcm_cluster(x, c=3)
    triple, lt = fcm_cluster(x, c=3, replicate=3)
    np.testing.assert_allclose(triple.centroids, np.repeat(scalar.centroids, 3, axis=1), rtol=1e-9)
    assert np.array_equal(ls, lt)


def test_class_map_by_centroid_order(rng):
    x = np.r_[rng.normal(3e-3, 1e-5, 10), rng.normal(0.0, 1e-5, 10), rng.normal(8e-4, 1e-5, 10)]
    vol = Volume(x.reshape(30, 1, 1), kind="adc")
    model, labels = fcm_cluster(vol)
    assert labels.kind == "labels"
    assert labels.data[:10, 0, 0].tolist() == [1] * 10
    assert labels.data[10:20, 0, 0].tolist() == [3] * 10
    assert labels.data[20:, 0, 0].tolist() == [2] * 10
    assert np.array_equal(classify(model, vol).data, labels.data)


def test_roi_vote_overrides_mapping():
    x = np.r_[np.zeros(5), np.ones(5), np.full(5, 2.0)]
    vol = Volume(x.reshape(15, 1, 1), kind="adc")
    model, _ = fcm_cluster(vol)
    roi = np.zeros(15, np.uint8)
    roi[:2], roi[5:7], roi[10:12] = 1, 3, 2
    assign_by_roi(model, vol, Volume(roi.reshape(15, 1, 1), kind="labels"))
    assert classify(model, vol).data.ravel().tolist() == [1] * 5 + [3] * 5 + [2] * 5


def test_degenerate_inputs():
    with pytest.raises(DegenerateDataError):
        fcm_cluster(np.full(10, 3.0), c=2)
    with pytest.raises(InvalidParameterError):
        fcm_cluster(np.arange(2.0), c=3)
    with pytest.raises(InvalidParameterError):
        fcm_cluster(np.arange(10.0), fuzzifier=1.0)
