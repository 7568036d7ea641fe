"""Tests for localizers, sparse approximants and the Φ parameterization."""

import math

import numpy as np
import pytest

from deepnets.activation import level_for_learning, threshold_for
from deepnets.exceptions import InvalidArgumentError, OutOfDomainError
from deepnets.netcore import (
    LocalizerNet,
    PhiBounds,
    PhiNetParams,
    ShallowNetParams,
    SparseApproximant,
    build_approximant,
    encode_approximant,
    encode_localizer,
    eval_localizer,
    eval_phi_net,
    eval_shallow,
    eval_sparse_approximant,
    localizer_features,
    phi_params_from_json,
    phi_params_to_json,
    project_clip,
    validate_params,
)
from deepnets.partition import make_partition
from deepnets.verify import check_localization, grid_points


def _unit_params(logistic, **overrides):
    fields = dict(
        n=2, d=1, c=[0.5, -0.5], b=[0.0, 0.0], alpha=[[1.0], [1.0]], alpha_p=[[1.0], [1.0]],
        beta=[[0.0], [-0.5]], gamma=[[0.0], [0.0]], bounds=PhiBounds(1.0, 1.0, 2.0),
        sigma=logistic,
    )
    fields.update(overrides)
    return PhiNetParams(**fields)


class TestLocalizer:
    """Test suite for the single-cell localizer."""

    def test_plateau_at_center(self, grid_4x4, logistic):
        """Test the value at the center with K = 10000."""
        net = LocalizerNet(grid_4x4, (2, 3), 10_000.0, logistic)
        assert eval_localizer(net, grid_4x4.center((2, 3))) >= 1.0 - 1e-9

    def test_sharp_gain_on_full_grid(self, grid_4x4, logistic):
        """Test every cell of the 4 x 4 grid at K = 10000 on 41 x 41 points."""
        for j in grid_4x4.indices():
            report = check_localization(grid_4x4, j, 1e-9, logistic, 41, gain=10_000.0)
            assert report.passed, j
            assert report.max_inside_deficit < 1e-9
            assert report.max_outside_value < 1e-9

    def test_vanishes_away_from_cell(self, grid_4x4, logistic):
        """Test the value at distance 0.1 outside the cell."""
        net = LocalizerNet(grid_4x4, (1, 1), 10_000.0, logistic)
        assert eval_localizer(net, [0.35, 0.1]) <= 1e-9
        assert eval_localizer(net, [0.9, 0.9]) <= 1e-9

    def test_closed_boundary_counts_as_inside(self, logistic):
        """Test a point on the cell's face with K = ln 99."""
        net = LocalizerNet(make_partition(2, 1), (1,), np.log(99.0), logistic)
        assert eval_localizer(net, 0.5) >= 0.99 - 1e-12

    def test_vectorized_shape(self, grid_4x4, logistic):
        """Test that an array of points gives one value per point."""
        net = LocalizerNet(grid_4x4, (1, 1), 5.0, logistic)
        assert eval_localizer(net, grid_points(2, 11)).shape == (121,)

    def test_out_of_domain(self, grid_4x4, logistic):
        """Test that a point outside the cube is rejected."""
        net = LocalizerNet(grid_4x4, (1, 1), 5.0, logistic)
        with pytest.raises(OutOfDomainError):
            eval_localizer(net, [1.2, 0.5])

    def test_bad_gain_and_index(self, grid_4x4, logistic):
        """Test that K <= 0 and an index off the grid are rejected."""
        with pytest.raises(InvalidArgumentError):
            LocalizerNet(grid_4x4, (1, 1), 0.0, logistic)
        with pytest.raises(InvalidArgumentError):
            LocalizerNet(grid_4x4, (5, 1), 1.0, logistic)

    def test_features_match_single_localizers(self, grid_4x4, logistic):
        """Test that the batched features agree with each localizer."""
        pts = grid_points(2, 9)
        features = localizer_features(grid_4x4, pts, 7.0, logistic)
        for pos, j in enumerate(grid_4x4.indices()):
            net = LocalizerNet(grid_4x4, j, 7.0, logistic)
            np.testing.assert_allclose(features[:, pos], net(pts), rtol=0, atol=1e-15)

    @pytest.mark.parametrize("d", [1, 2])
    @pytest.mark.parametrize("n", [2, 3, 4, 6, 8])
    def test_sum_bound(self, any_sigmoid, n, d):
        """Test Σ_j |N*_j(x)| <= 2^d + 1 at the learning level on a grid through the faces."""
        part = make_partition(n, d)
        level = level_for_learning(any_sigmoid, n, 1, 1, 1.0, d)
        features = localizer_features(part, grid_points(d, 4 * n + 1), level, any_sigmoid)
        assert np.abs(features).sum(axis=1).max() <= 2**d + 1


class TestSparseApproximant:
    """Test suite for sums of localizers."""

    def test_zero_coefficients(self, grid_4x4, logistic):
        """Test that zero coefficients give the zero function."""
        net = SparseApproximant(grid_4x4, np.zeros(16), grid_4x4.centers(), 5.0, logistic)
        assert np.all(eval_sparse_approximant(net, grid_points(2, 21)) == 0.0)

    def test_single_coefficient_reduces_to_localizer(self, grid_4x4, logistic):
        """Test that one unit coefficient reproduces its localizer."""
        c = np.zeros(16)
        c[grid_4x4.flat((3, 2))] = 1.0
        net = SparseApproximant(grid_4x4, c, grid_4x4.centers(), 50.0, logistic)
        center = grid_4x4.center((3, 2))
        assert eval_sparse_approximant(net, center) == pytest.approx(1.0, abs=1e-12)
        assert net.coefficient((3, 2)) == 1.0

    def test_partition_of_unity_off_faces(self, rng, logistic):
        """Test that all-ones coefficients stay near 1 away from the cell faces."""
        part = make_partition(4, 2)
        k = threshold_for(logistic, 1e-6)
        net = SparseApproximant(part, np.ones(16), part.centers(), k, logistic)
        values = net(rng.uniform(size=(2000, 2)))
        assert values.min() >= 1.0 - 2e-2
        assert values.max() <= 1.0 + 4 * 1e-6 + 1e-2

    def test_arrays_are_frozen(self, grid_4x4, logistic):
        """Test that coefficients and anchors are read-only copies."""
        c = np.ones(16)
        net = SparseApproximant(grid_4x4, c, grid_4x4.centers(), 5.0, logistic)
        c[0] = 7.0
        assert net.coefficients[0] == 1.0
        with pytest.raises(ValueError):
            net.coefficients[0] = 2.0

    def test_coefficient_map(self, logistic):
        """Test the multi-index view of the coefficients."""
        part = make_partition(2, 1)
        net = SparseApproximant(part, [3.0, 4.0], part.centers(), 5.0, logistic)
        assert net.coefficient_map() == {(1,): 3.0, (2,): 4.0}

    def test_sum_is_correctly_rounded(self, rng, logistic):
        """Test that mixed-magnitude coefficients sum to the correctly rounded value."""
        part = make_partition(4, 2)
        c = rng.normal(size=16) * 10.0 ** rng.uniform(-12, 12, size=16)
        net = SparseApproximant(part, c, part.centers(), 0.3, logistic)
        x = rng.uniform(size=(50, 2))
        expected = [math.fsum(row) for row in net.features(x) * net.coefficients]
        assert list(net(x)) == expected

    def test_cancellation_keeps_small_terms(self, logistic):
        """Test that opposite large coefficients on equal features leave the small term intact."""
        part = make_partition(4, 1)
        net = SparseApproximant(part, [1e16, 1.0, 3.0, -1e16], part.centers(), 0.3, logistic)
        x = 0.375
        features = net.features(x)[0]
        assert features[0] == features[2] == features[3]
        assert eval_sparse_approximant(net, x) == math.fsum([features[1], 3.0 * features[2]])


class TestBuildApproximant:
    """Test suite for sampling a target at anchors."""

    def test_identity_at_centers(self, logistic):
        """Test f(x) = x on two cells."""
        part = make_partition(2, 1)
        net = build_approximant(lambda x: x[:, 0], part, "center", 5.0, logistic)
        np.testing.assert_allclose(net.coefficients, [0.25, 0.75])

    def test_constant(self, grid_4x4, logistic):
        """Test that a constant target gives constant coefficients."""
        net = build_approximant(lambda x: np.full(len(x), 2.5), grid_4x4, "center", 5.0, logistic)
        assert np.all(net.coefficients == 2.5)

    def test_anchor_mapping(self, logistic):
        """Test anchors given per multi-index."""
        part = make_partition(2, 1)
        anchors = {(1,): [0.0], (2,): [1.0]}
        net = build_approximant(lambda x: x[:, 0], part, anchors, 5.0, logistic)
        np.testing.assert_allclose(net.coefficients, [0.0, 1.0])

    def test_anchor_outside_cell(self, logistic):
        """Test that an anchor outside its cell is rejected before f runs."""
        part = make_partition(2, 1)
        calls = []

        def f(x):
            calls.append(x)
            return x[:, 0]

        with pytest.raises(InvalidArgumentError):
            build_approximant(f, part, np.array([[0.9], [0.75]]), 5.0, logistic)
        assert calls == []

    def test_unknown_rule(self, grid_4x4, logistic):
        """Test that an unknown anchor rule name is rejected."""
        with pytest.raises(InvalidArgumentError):
            build_approximant(lambda x: x[:, 0], grid_4x4, "corner", 5.0, logistic)


class TestPhiNet:
    """Test suite for the Φ parameterization."""

    def test_zero_outer_weights(self, logistic):
        """Test that c = 0 gives 0."""
        params = _unit_params(logistic, c=[0.0, 0.0])
        assert eval_phi_net(params, 0.3) == 0.0

    def test_single_constant_unit(self, logistic):
        """Test one unit with zero weights: the constant σ(0)."""
        params = PhiNetParams(
            n=1, d=1, c=[1.0], b=[0.0], alpha=[[0.0]], alpha_p=[[0.0]], beta=[[0.0]],
            gamma=[[0.0]], bounds=PhiBounds(1.0, 1.0, 1.0), sigma=logistic,
        )
        assert eval_phi_net(params, 0.3) == 0.5
        np.testing.assert_array_equal(eval_phi_net(params, [0.0, 0.5, 1.0]), [0.5, 0.5, 0.5])

    def test_encoded_localizer_agrees(self, grid_4x4, logistic, rng):
        """Test the Φ encoding of a localizer at 10^3 random points."""
        net = LocalizerNet(grid_4x4, (2, 4), threshold_for(logistic, 1e-3), logistic)
        params = encode_localizer(net)
        assert validate_params(params) == []
        pts = rng.uniform(size=(1000, 2))
        np.testing.assert_allclose(eval_phi_net(params, pts), net(pts), rtol=0, atol=1e-12)

    def test_encoded_approximant_agrees_on_faces(self, logistic):
        """Test the Φ encoding of a sum on a grid through the faces."""
        part = make_partition(3, 2)
        c = np.linspace(-1.0, 1.0, 9)
        net = SparseApproximant(part, c, part.centers(), 4.0, logistic)
        params = encode_approximant(net)
        assert params.bounds.C == 1.0
        assert params.bounds.Xi == 8.0
        pts = grid_points(2, 13)
        np.testing.assert_allclose(eval_phi_net(params, pts), net(pts), rtol=0, atol=1e-12)

    def test_violations_reported(self, logistic):
        """Test the c and α' breaches with their 1-based units."""
        params = _unit_params(logistic, c=[1.1, 0.0], alpha_p=[[1.0], [-3.0]])
        found = validate_params(params)
        assert [(v.unit, v.field) for v in found] == [(1, "c"), (2, "alpha_p")]
        assert found[0].bound == 1.0

    def test_within_bounds(self, logistic):
        """Test that admissible parameters report nothing."""
        assert validate_params(_unit_params(logistic)) == []

    def test_eval_rejects_violations(self, logistic):
        """Test that evaluation refuses out-of-bound parameters."""
        with pytest.raises(InvalidArgumentError):
            eval_phi_net(_unit_params(logistic, b=[0.0, 5.0]), 0.5)

    def test_wrong_shapes(self, logistic):
        """Test that a missing unit is rejected."""
        with pytest.raises((InvalidArgumentError, ValueError)):
            _unit_params(logistic, c=[1.0])

    def test_json_document(self, grid_4x4, logistic):
        """Test that the JSON form restores an equivalent net."""
        params = encode_localizer(LocalizerNet(grid_4x4, (1, 2), 6.0, logistic))
        restored = phi_params_from_json(phi_params_to_json(params))
        pts = grid_points(2, 7)
        np.testing.assert_array_equal(eval_phi_net(restored, pts), eval_phi_net(params, pts))
        assert restored.gamma_reflect.all()

    def test_json_unit_count_checked(self, logistic):
        """Test that a document with too few units is rejected."""
        text = phi_params_to_json(_unit_params(logistic)).replace('"n":2', '"n":3')
        with pytest.raises(InvalidArgumentError):
            phi_params_from_json(text)


class TestProjectClip:
    """Test suite for π_M."""

    @pytest.mark.parametrize("v, expected", [(1.5, 1.0), (-2.0, -1.0), (0.3, 0.3)])
    def test_scalars(self, v, expected):
        """Test the three clipping cases."""
        assert project_clip(v, 1.0) == expected

    def test_array(self):
        """Test elementwise clipping."""
        np.testing.assert_array_equal(project_clip([-3.0, 0.0, 3.0], 2.0), [-2.0, 0.0, 2.0])

    @pytest.mark.parametrize("M", [0.0, -1.0])
    def test_nonpositive_bound(self, M):
        """Test that M <= 0 is rejected."""
        with pytest.raises(InvalidArgumentError):
            project_clip(0.5, M)


class TestShallow:
    """Test suite for the shallow baseline."""

    def test_zero(self, logistic):
        """Test that c = 0 gives 0."""
        params = ShallowNetParams([0.0], [[1.0]], [0.0], 1.0, logistic)
        assert eval_shallow(params, 0.7) == 0.0

    def test_constant_half(self, logistic):
        """Test w = 0, θ = 0, c = 1."""
        params = ShallowNetParams([1.0], [[0.0, 0.0]], [0.0], 1.0, logistic)
        np.testing.assert_allclose(eval_shallow(params, grid_points(2, 5)), 0.5)

    def test_sharp_step(self, logistic):
        """Test that a steep unit approximates a step at 1/2."""
        params = ShallowNetParams([1.0], [[1e4, 0.0]], [-5e3], 1.0, logistic)
        assert eval_shallow(params, [0.4, 0.3]) < 1e-12
        assert eval_shallow(params, [0.6, 0.3]) > 1.0 - 1e-12

    def test_outer_bound(self, logistic):
        """Test that |c| > Γ is rejected."""
        with pytest.raises(InvalidArgumentError):
            ShallowNetParams([2.0], [[1.0]], [0.0], 1.0, logistic)
