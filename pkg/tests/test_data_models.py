# -*- coding: utf-8 -*-
"""
Domain types: validation at construction and layout conventions.
"""

import numpy as np
import pytest

from src.data.data_models import (
    Cluster, ConformalFactor, FourierTerm, Framing, FramingReport, Grid, GridMismatchError,
    InvariantViolationError, Lattice, OperatorSpec, SpinStructure, SpinorField, VectorField, VolumeWeight
)


class TestLattice:

    def test_volume_is_determinant(self, stretched_lattice):
        assert stretched_lattice.volume == pytest.approx(2.0)

    def test_dual_pairs_with_basis(self, stretched_lattice):
        np.testing.assert_allclose(stretched_lattice.dual.T @ stretched_lattice.matrix, np.eye(3), atol=1e-15)

    def test_rejects_negative_orientation(self):
        with pytest.raises(InvariantViolationError):
            Lattice.diagonal(1.0, 1.0, -1.0)

    def test_rejects_degenerate_basis(self):
        with pytest.raises(InvariantViolationError):
            Lattice.from_row_major([1, 0, 0, 1, 0, 0, 0, 0, 1])

    def test_row_major_needs_nine_values(self):
        with pytest.raises(InvariantViolationError):
            Lattice.from_row_major([1.0] * 8)

    def test_orthogonality_flag(self):
        assert Lattice.diagonal(1.0, 2.0, 3.0).is_orthogonal
        assert not Lattice.from_row_major([1, 0.5, 0, 0, 1, 0, 0, 0, 1]).is_orthogonal


class TestSpinStructure:

    def test_enumerates_eight_structures(self):
        structures = SpinStructure.all()
        assert len(structures) == 8
        assert structures[0].eps == (0, 0, 0)
        assert structures[-1].eps == (1, 1, 1)

    def test_shift_is_half_flags(self):
        np.testing.assert_array_equal(SpinStructure((1, 0, 1)).shift, [0.5, 0.0, 0.5])

    def test_rejects_invalid_flag(self):
        with pytest.raises(InvariantViolationError):
            SpinStructure((2, 0, 0))


class TestGrid:

    def test_rejects_odd_dimension(self):
        with pytest.raises(InvariantViolationError, match="grid dimensions must be even"):
            Grid((4, 5, 4))

    def test_rejects_small_dimension(self):
        with pytest.raises(InvariantViolationError):
            Grid((2, 4, 4))

    def test_dimension_counts_both_components(self, grid4):
        assert grid4.size == 64
        assert grid4.dimension == 128

    def test_signed_indices_in_fft_order(self, grid4):
        np.testing.assert_array_equal(grid4.signed_indices()[0], [0, 1, -2, -1])

    def test_positions_follow_lattice(self, stretched_lattice, grid4):
        positions = grid4.positions(stretched_lattice)
        assert positions.shape == (3, 4, 4, 4)
        assert positions[2, 0, 0, 3] == pytest.approx(1.5)


class TestSpinorField:

    def test_vector_layout_is_node_major_x_fastest(self, grid4, rng):
        data = rng.standard_normal((2,) + grid4.shape) + 0j
        f = SpinorField(grid4, data)
        vector = f.to_vector()
        assert vector[1] == data[1, 0, 0, 0]
        assert vector[2] == data[0, 1, 0, 0]
        assert vector[2 * 4] == data[0, 0, 1, 0]
        np.testing.assert_array_equal(SpinorField.from_vector(grid4, vector).data, data)

    def test_rejects_wrong_shape(self, grid4):
        with pytest.raises(InvariantViolationError):
            SpinorField(grid4, np.zeros((2, 4, 4, 2)))

    def test_rejects_non_finite(self, grid4):
        data = np.zeros((2,) + grid4.shape, dtype=complex)
        data[0, 0, 0, 0] = np.nan
        with pytest.raises(InvariantViolationError):
            SpinorField(grid4, data)

    def test_samples_are_read_only(self, grid4):
        f = SpinorField.zeros(grid4)
        with pytest.raises(ValueError):
            f.data[0, 0, 0, 0] = 1.0

    def test_arithmetic_checks_grids(self, grid4, grid8):
        with pytest.raises(GridMismatchError):
            SpinorField.zeros(grid4) + SpinorField.zeros(grid8)

    def test_constant_field_norm(self, grid4):
        f = SpinorField.constant(grid4, 3.0, 4.0j)
        np.testing.assert_allclose(f.pointwise_norm_sq(), 25.0)


class TestConformalFactor:

    def test_rejects_non_positive_factor(self):
        with pytest.raises(InvariantViolationError):
            ConformalFactor(0.3, (FourierTerm((1, 0, 0), 0.5),))

    def test_bandlimit_on_small_grid(self, bump_factor, grid4, grid8):
        with pytest.raises(InvariantViolationError):
            bump_factor.check_admissible(grid4)
        bump_factor.check_admissible(grid8)

    def test_samples(self, bump_factor, grid8):
        samples = bump_factor.samples(grid8)
        assert samples[0, 0, 0] == pytest.approx(1.9)
        assert samples[4, 3, 1] == pytest.approx(1.1)

    def test_product_is_exact(self, bump_factor, grid8):
        other = ConformalFactor(1.3, (FourierTerm((0, 1, 0), 0.25, -np.pi / 2),))
        product = bump_factor * other
        np.testing.assert_allclose(
            product.samples(grid8), bump_factor.samples(grid8) * other.samples(grid8), atol=1e-14
        )

    def test_dict_round_trip(self, bump_factor):
        assert ConformalFactor.from_dict(bump_factor.to_dict()) == bump_factor

    def test_constant_detection(self, bump_factor):
        assert ConformalFactor.constant(2.0).is_constant
        assert not bump_factor.is_constant

    def test_operator_spec_checks_bandlimit(self, unit_lattice, periodic, grid4, bump_factor):
        with pytest.raises(InvariantViolationError):
            OperatorSpec(unit_lattice, periodic, grid4, bump_factor)


class TestVolumeWeight:

    def test_defaults_to_unit_cube(self, grid4):
        weight = VolumeWeight.unit(grid4)
        assert weight.covolume == pytest.approx(1.0)
        np.testing.assert_array_equal(weight.values, np.ones(grid4.shape))

    def test_carries_lattice_covolume(self, grid4, stretched_lattice):
        assert VolumeWeight.unit(grid4, stretched_lattice).covolume == pytest.approx(2.0)

    def test_weight_is_cube_of_factor(self, bump_factor, grid8):
        weight = VolumeWeight.from_factor(bump_factor, grid8)
        np.testing.assert_allclose(weight.values, bump_factor.samples(grid8) ** 3)

    def test_rejects_non_positive(self, grid4):
        with pytest.raises(InvariantViolationError):
            VolumeWeight(grid4, np.zeros(grid4.shape))


class TestFramingTypes:

    def test_zero_framing_is_degenerate(self, unit_lattice, grid4):
        zero = VectorField.zeros(grid4)
        framing = Framing(zero, zero, zero, unit_lattice)
        assert framing.degenerate
        assert framing.min_length == 0.0

    def test_fields_must_share_grid(self, unit_lattice, grid4, grid8):
        with pytest.raises(GridMismatchError):
            Framing(VectorField.zeros(grid4), VectorField.zeros(grid8), VectorField.zeros(grid4), unit_lattice)

    def test_report_fails_when_degenerate(self):
        report = FramingReport(0.0, 0.0, 0.0, 0.0, 0.0, True, {'divergence': 1.0})
        assert not report.passed

    def test_report_compares_against_thresholds(self):
        report = FramingReport(1e-9, 0.0, 0.0, 0.5, 0.5, False, {'divergence': 1e-10})
        assert not report.passed
        assert report.to_dict()['passed'] is False

    def test_cluster_simplicity(self):
        assert Cluster(1.0, 2).simple_over_h
        assert not Cluster(1.0, 6).simple_over_h
