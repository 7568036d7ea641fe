"""Tests for seeded Lipschitz and sparse targets."""

import numpy as np
import pytest

from deepnets.exceptions import InvalidArgumentError
from deepnets.targets import (
    TargetKind,
    make_constant_target,
    make_lipschitz_target,
    make_sparse_target,
    target_from_document,
    verify_lipschitz,
)
from deepnets.verify import grid_points


class TestLipschitzTarget:
    """Test suite for the anchor construction."""

    def test_zero_at_anchor(self):
        """Test that the target vanishes at each of its anchors."""
        f = make_lipschitz_target(11, 1.0, 1.0, 2)
        assert np.all(f(f.anchors) == 0.0)

    def test_single_anchor_value(self):
        """Test c0 |x - a|^r with a = 0, c0 = 2, x = 0.3."""
        f = make_lipschitz_target(0, 1.0, 2.0, 1, anchors=[[0.0]])
        assert f(0.3)[0] == pytest.approx(0.6)

    def test_deterministic(self):
        """Test that equal seeds give identical targets."""
        pts = grid_points(2, 17)
        a = make_lipschitz_target(42, 0.5, 1.0, 2)
        b = make_lipschitz_target(42, 0.5, 1.0, 2)
        np.testing.assert_array_equal(a(pts), b(pts))

    def test_anchors_frozen(self):
        """Test that anchors cannot be edited in place."""
        f = make_lipschitz_target(1, 1.0, 1.0, 1)
        with pytest.raises(ValueError):
            f.anchors[0, 0] = 0.5

    @pytest.mark.parametrize("r", [0.0, -0.5, 1.5])
    def test_smoothness_range(self, r):
        """Test that r outside (0, 1] is rejected."""
        with pytest.raises(InvalidArgumentError):
            make_lipschitz_target(0, r, 1.0, 1)

    def test_sup_bound_dominates(self):
        """Test ‖f‖∞ <= c0 d^{r/2} on a grid."""
        f = make_lipschitz_target(5, 1.0, 1.5, 2)
        assert f.sup_norm() <= f.sup_bound


class TestSparseTarget:
    """Test suite for targets supported on coarse cells."""

    def test_distance_to_complement(self):
        """Test S = [0, 1/2] with x = 0.25."""
        f = make_sparse_target(0, 2, 1, 1.0, 1.0, 1, indices=[(1,)])
        assert f(0.25)[0] == pytest.approx(0.25)

    def test_zero_off_support_and_on_boundary(self):
        """Test that the target vanishes outside S and on its boundary."""
        f = make_sparse_target(0, 2, 1, 1.0, 1.0, 1, indices=[(1,)])
        np.testing.assert_array_equal(f([0.5, 0.75, 1.0]), [0.0, 0.0, 0.0])

    def test_vanishes_off_support_2d(self, rng):
        """Test f = 0 at random points outside the seeded support."""
        f = make_sparse_target(3, 4, 4, 1.0, 1.0, 2)
        pts = rng.uniform(size=(4000, 2))
        outside = ~f.support.contains(pts)
        assert outside.any()
        assert np.all(f(pts[outside]) == 0.0)
        assert f.s == 4 and f.N == 4

    def test_too_sparse(self):
        """Test that s > N^d is rejected."""
        with pytest.raises(InvalidArgumentError):
            make_sparse_target(0, 2, 5, 1.0, 1.0, 2)

    def test_full_support_uses_anchors(self):
        """Test that s = N^d falls back to the anchor construction."""
        f = make_sparse_target(9, 2, 2, 1.0, 1.0, 1)
        assert f.kind is TargetKind.SPARSE
        assert f.anchors is not None
        assert f.s == 2

    def test_document(self):
        """Test that the JSON description rebuilds the same function."""
        f = make_sparse_target(21, 3, 2, 0.5, 2.0, 2)
        g = target_from_document(f.to_document().model_dump_json())
        pts = grid_points(2, 13)
        np.testing.assert_array_equal(f(pts), g(pts))


class TestConstantTarget:
    """Test suite for the constant target."""

    def test_value_everywhere(self):
        """Test the level and its sup norm."""
        f = make_constant_target(-1.5, 3)
        np.testing.assert_array_equal(f(grid_points(3, 3)), np.full(27, -1.5))
        assert f.sup_norm() == 1.5

    def test_non_finite(self):
        """Test that a non-finite level is rejected."""
        with pytest.raises(InvalidArgumentError):
            make_constant_target(float("nan"), 1)


class TestVerifyLipschitz:
    """Test suite for the sampled Hölder check."""

    def test_constant_passes(self):
        """Test that a constant has ratio 0."""
        report = verify_lipschitz(make_constant_target(2.0, 2), 1.0, 1.0, 1000, 0)
        assert report.max_ratio == 0.0
        assert report.passed

    def test_steep_line_fails(self):
        """Test f(x) = 2x against c0 = 1."""
        report = verify_lipschitz(lambda x: 2.0 * x[:, 0], 1.0, 1.0, 1000, 0, d=1)
        assert report.max_ratio == pytest.approx(2.0, rel=1e-6)
        assert not report.passed

    @pytest.mark.parametrize("seed", range(5))
    def test_sparse_targets_pass(self, seed):
        """Test that sparse targets satisfy their own (r, c0)."""
        f = make_sparse_target(seed, 3, 4, 0.5, 1.0, 2)
        assert verify_lipschitz(f, 0.5, 1.0, 4000, seed).passed

    def test_lipschitz_target_passes(self):
        """Test the anchor construction against its own constant."""
        f = make_lipschitz_target(8, 1.0, 3.0, 2)
        assert verify_lipschitz(f, 1.0, 3.0, 4000, 1).passed

    def test_plain_callable_needs_dimension(self):
        """Test that d is required when f carries none."""
        with pytest.raises(InvalidArgumentError):
            verify_lipschitz(lambda x: x[:, 0], 1.0, 1.0, 10, 0)
