from itertools import islice

import numpy as np
import pytest

from hcsp.errors import ConfigurationError
from src.services.collocation_service import iter_minibatches, sample_collocation


class CollocationSuite:
    def test_points_lie_in_window_and_domain(self):
        points = sample_collocation((0.25, 0.5), (0.0, 2 * np.pi), 500, seed=7)
        assert len(points) == 500
        assert points.t.min() >= 0.25 and points.t.max() <= 0.5
        assert points.x.min() >= 0.0 and points.x.max() <= 2 * np.pi

    def test_same_seed_same_points(self):
        a = sample_collocation((0.0, 1.0), (-1.0, 1.0), 10, seed=3)
        b = sample_collocation((0.0, 1.0), (-1.0, 1.0), 10, seed=3)
        np.testing.assert_array_equal(a.t, b.t)
        np.testing.assert_array_equal(a.x, b.x)

    def test_ode_points_have_no_space(self):
        assert sample_collocation((0.0, 5.0), None, 4, seed=0).x is None

    def test_at_least_one_point(self):
        with pytest.raises(ConfigurationError):
            sample_collocation((0.0, 1.0), None, 0, seed=0)


class MinibatchSuite:
    def test_each_epoch_is_a_permutation(self):
        points = sample_collocation((0.0, 1.0), (0.0, 1.0), 12, seed=0)
        epoch = list(islice(iter_minibatches(points, 4, seed=1), 3))
        assert [len(batch) for batch in epoch] == [4, 4, 4]
        np.testing.assert_array_equal(np.sort(np.concatenate([b.t for b in epoch])), np.sort(points.t))

    def test_last_batch_of_an_epoch_may_be_short(self):
        points = sample_collocation((0.0, 1.0), None, 10, seed=0)
        sizes = [len(batch) for batch in islice(iter_minibatches(points, 4, seed=1), 4)]
        assert sizes == [4, 4, 2, 4]

    def test_full_batch_repeats_all_points(self):
        points = sample_collocation((0.0, 1.0), None, 6, seed=0)
        for batch in islice(iter_minibatches(points, 6, seed=1), 3):
            assert batch is points
