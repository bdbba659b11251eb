# -*- coding: utf-8 -*-
"""
Numerical certificates.
"""

import numpy as np
import pytest

from src.data.data_models import (
    Cluster, ConformalFactor, FourierTerm, Framing, Grid, GridMismatchError, InvariantViolationError,
    OperatorSpec, SpinorField, SpinStructure, VectorField, VolumeWeight
)


ADMISSIBLE_FACTORS = [
    ConformalFactor(1.5, (FourierTerm((1, 0, 0), 0.4),)),
    ConformalFactor(1.3, (FourierTerm((0, 1, 0), 0.25, -np.pi / 2),)),
    ConformalFactor(2.0, (FourierTerm((1, 1, 0), 0.3), FourierTerm((0, 0, 1), 0.2, 1.0))),
    ConformalFactor(1.2, (FourierTerm((0, 0, 1), 0.4, 0.3),)),
    ConformalFactor(1.8, (FourierTerm((1, -1, 1), 0.35), FourierTerm((0, 1, 0), 0.3, 2.0))),
]
FACTOR_IDS = ["cos-x", "sin-y", "mixed", "deep-z", "diagonal"]


class TestDivergence:

    def test_constant_field(self, verification_service, grid4):
        x = VectorField(grid4, np.ones((3,) + grid4.shape))
        np.testing.assert_allclose(verification_service.divergence(x, VolumeWeight.unit(grid4)), 0.0, atol=1e-14)

    def test_sine_field(self, verification_service, grid8):
        u = grid8.fractional_coordinates()[0]
        zeros = np.zeros(grid8.shape)
        x = VectorField(grid8, np.array([np.sin(2 * np.pi * u), zeros, zeros]))
        np.testing.assert_allclose(
            verification_service.divergence(x, VolumeWeight.unit(grid8)), 2 * np.pi * np.cos(2 * np.pi * u),
            atol=1e-12
        )

    def test_transverse_field(self, verification_service, grid8):
        u = grid8.fractional_coordinates()[0]
        x = VectorField(grid8, np.array([np.zeros(grid8.shape), -np.sin(4 * np.pi * u), np.cos(4 * np.pi * u)]))
        np.testing.assert_allclose(verification_service.divergence(x, VolumeWeight.unit(grid8)), 0.0, atol=1e-12)

    def test_weight_enters(self, verification_service, grid8, bump_factor):
        x = VectorField(grid8, np.concatenate([np.ones((1,) + grid8.shape), np.zeros((2,) + grid8.shape)]))
        weight = VolumeWeight.from_factor(bump_factor, grid8)
        u = grid8.fractional_coordinates()[0]
        h = bump_factor.samples(grid8)
        # ∂ₓ(h³)/h³ = 3h'/h
        expected = 3 * (-0.4 * 2 * np.pi * np.sin(2 * np.pi * u)) / h
        np.testing.assert_allclose(verification_service.divergence(x, weight), expected, atol=1e-10)

    def test_grid_mismatch(self, verification_service, grid4, grid8):
        with pytest.raises(GridMismatchError):
            verification_service.divergence(VectorField.zeros(grid4), VolumeWeight.unit(grid8))


class TestFramingReport:

    def test_plane_wave_passes(self, framing_service, verification_service, unit_lattice, periodic, grid8):
        framing = framing_service.framing_from_plane_wave(unit_lattice, periodic, grid8, (1, 0, 1), -1)
        report = verification_service.framing_report(framing)
        assert report.passed
        assert report.min_length == pytest.approx(0.5)
        assert report.thresholds['divergence'] == 1e-10

    def test_rescaled_flat_framing_keeps_flat_limits(self, framing_service, verification_service,
                                                     unit_lattice, periodic, grid8, bump_factor):
        framing = framing_service.framing_from_plane_wave(unit_lattice, periodic, grid8, (0, 1, 0), 1)
        rescaled = framing_service.conformal_rescale(framing, bump_factor)
        report = verification_service.framing_report(rescaled)
        assert rescaled.provenance['source_metric'] == 'flat'
        assert report.thresholds == {'divergence': 1e-10, 'orthogonality': 1e-12, 'length_spread': 1e-12}
        assert report.passed, report.to_dict()

    def test_conformal_source_gets_conformal_limits(self, framing_service, verification_service, unit_lattice,
                                                    periodic, grid8, bump_factor):
        spec = OperatorSpec(unit_lattice, periodic, grid8, bump_factor)
        framing = framing_service.framing_from_eigenspinor(SpinorField.constant(grid8, 1.0, 0.0), spec)
        assert verification_service.framing_report(framing).thresholds['divergence'] == 1e-6

    def test_zero_framing_is_degenerate(self, verification_service, unit_lattice, grid4):
        zero = VectorField.zeros(grid4)
        report = verification_service.framing_report(Framing(zero, zero, zero, unit_lattice))
        assert report.degenerate
        assert not report.passed
        assert report.max_orthogonality_defect == 0.0

    def test_non_orthogonal_triple_fails(self, verification_service, unit_lattice, grid4):
        e1 = np.zeros((3,) + grid4.shape)
        e1[0] = 1.0
        x = VectorField(grid4, e1)
        report = verification_service.framing_report(Framing(x, x, x, unit_lattice))
        assert report.max_orthogonality_defect == pytest.approx(1.0)
        assert not report.passed

    def test_threshold_override(self, framing_service, verification_service, unit_lattice, periodic, grid4):
        framing = framing_service.framing_from_plane_wave(unit_lattice, periodic, grid4, (1, 0, 0), 1)
        report = verification_service.framing_report(framing, {'divergence': 0.5})
        assert report.thresholds['divergence'] == 0.5
        assert report.thresholds['orthogonality'] == 1e-12


class TestQuaternionicSymmetry:

    @pytest.mark.parametrize("eps", [(0, 0, 0), (1, 0, 0), (0, 1, 1), (1, 1, 1)])
    def test_flat_operator_commutes_with_j(self, verification_service, stretched_lattice, grid4, eps):
        spec = OperatorSpec(stretched_lattice, SpinStructure(eps), grid4)
        assert verification_service.quaternionic_commutation_check(spec, 10, seed=1) <= 1e-12

    @pytest.mark.parametrize("eps", [(0, 0, 0), (0, 1, 0)])
    def test_conformal_operator_commutes_with_j(self, verification_service, unit_lattice, grid8, bump_factor, eps):
        spec = OperatorSpec(unit_lattice, SpinStructure(eps), grid8, bump_factor)
        assert verification_service.quaternionic_commutation_check(spec, 10, seed=2) <= 1e-12

    def test_symmetry_defect(self, verification_service, unit_lattice, grid8, bump_factor):
        spec = OperatorSpec(unit_lattice, SpinStructure((1, 1, 0)), grid8, bump_factor)
        assert verification_service.symmetry_defect(spec, 5, seed=3) <= 1e-12

    def test_rejects_zero_trials(self, verification_service, unit_lattice, periodic, grid4):
        with pytest.raises(InvariantViolationError):
            verification_service.quaternionic_commutation_check(OperatorSpec(unit_lattice, periodic, grid4), 0)


class TestEvenness:

    def test_even_multiplicities(self, verification_service):
        assert verification_service.evenness_check([Cluster(-2 * np.pi, 6), Cluster(0.0, 2), Cluster(2 * np.pi, 6)])

    def test_odd_multiplicity(self, verification_service):
        assert not verification_service.evenness_check([Cluster(1.0, 3)])

    def test_empty(self, verification_service):
        assert verification_service.evenness_check([])

    def test_clusters_at_cut_are_dropped(self, verification_service):
        top = 2 * np.pi * np.sqrt(1.25)
        clusters = [Cluster(-top, 5), Cluster(-np.pi, 2), Cluster(np.pi, 2), Cluster(top, 5)]
        complete = verification_service.complete_clusters(clusters, top)
        assert complete == [Cluster(-np.pi, 2), Cluster(np.pi, 2)]
        assert verification_service.evenness_check(complete)
        assert not verification_service.evenness_check(clusters)

    def test_odd_cluster_below_cut_still_fails(self, verification_service):
        clusters = [Cluster(-1.0, 3), Cluster(1.0, 2), Cluster(4.0, 1)]
        assert not verification_service.evenness_check(verification_service.complete_clusters(clusters, 4.0))

    def test_no_cut_keeps_everything(self, verification_service):
        clusters = [Cluster(0.0, 2), Cluster(3.0, 1)]
        assert verification_service.complete_clusters(clusters, None) == clusters

    def test_twisted_default_count_is_even_below_cut(self, verification_service, dirac_service, unit_lattice, grid8):
        spec = OperatorSpec(unit_lattice, SpinStructure((1, 0, 0)), grid8)
        pairs = dirac_service.eigensolve(spec, 14, tol=1e-8, seed=0)
        clusters = dirac_service.cluster_multiplicities(pairs, relative=True)
        cut = max(abs(p.eigenvalue) for p in pairs)
        complete = verification_service.complete_clusters(clusters, cut)
        assert [c.multiplicity for c in complete] == [2, 2]
        assert verification_service.evenness_check(complete)

    def test_eigensolver_clusters_are_even(self, verification_service, dirac_service, unit_lattice, grid8,
                                           bump_factor):
        spec = OperatorSpec(unit_lattice, SpinStructure((0, 0, 1)), grid8, bump_factor)
        pairs = dirac_service.eigensolve(spec, 4, tol=1e-8, seed=0)
        assert verification_service.evenness_check(dirac_service.cluster_multiplicities(pairs, relative=True))


class TestKernelDimension:

    def test_flat_periodic(self, verification_service, unit_lattice, periodic, grid8):
        assert verification_service.kernel_dimension(OperatorSpec(unit_lattice, periodic, grid8)) == 2

    def test_flat_twisted(self, verification_service, unit_lattice, grid8):
        assert verification_service.kernel_dimension(OperatorSpec(unit_lattice, SpinStructure((1, 0, 0)), grid8)) == 0

    @pytest.mark.parametrize("factor", ADMISSIBLE_FACTORS, ids=FACTOR_IDS)
    def test_conformally_invariant(self, verification_service, unit_lattice, grid8, factor):
        periodic_spec = OperatorSpec(unit_lattice, SpinStructure((0, 0, 0)), grid8, factor)
        twisted_spec = OperatorSpec(unit_lattice, SpinStructure((1, 0, 0)), grid8, factor)
        assert verification_service.kernel_dimension(periodic_spec) == 2
        assert verification_service.kernel_dimension(twisted_spec) == 0

    def test_forwards_seed_and_iteration_limit(self, verification_service, dirac_service, unit_lattice,
                                                periodic, grid4, monkeypatch):
        calls = []
        solve = dirac_service.eigensolve

        def recording_solve(spec, count, **kwargs):
            calls.append(kwargs)
            return solve(spec, count, **kwargs)

        monkeypatch.setattr(dirac_service, 'eigensolve', recording_solve)
        spec = OperatorSpec(unit_lattice, periodic, grid4)
        assert verification_service.kernel_dimension(spec, 1e-8, seed=7, max_iter=300) == 2
        assert len(calls) == 1
        assert calls[0]['tol'] == pytest.approx(1e-9)
        assert (calls[0]['seed'], calls[0]['max_iter']) == (7, 300)

    def test_rejects_non_positive_tol(self, verification_service, unit_lattice, periodic, grid4):
        with pytest.raises(InvariantViolationError):
            verification_service.kernel_dimension(OperatorSpec(unit_lattice, periodic, grid4), tol=0.0)


class TestOracleEquivalence:

    @pytest.mark.parametrize("eps", [(0, 0, 0), (1, 1, 1)])
    def test_dense_agrees_with_grid_oracle(self, verification_service, stretched_lattice, grid4, eps):
        spec = OperatorSpec(stretched_lattice, SpinStructure(eps), grid4)
        assert verification_service.oracle_equivalence(spec) <= 1e-10

    def test_uses_flat_operator_of_conformal_spec(self, verification_service, unit_lattice, periodic):
        grid = Grid((6, 6, 6))
        spec = OperatorSpec(unit_lattice, periodic, grid, ConformalFactor(1.5, (FourierTerm((1, 0, 0), 0.4),)))
        assert verification_service.oracle_equivalence(spec) <= 1e-10


class TestGenericityReport:

    def test_flat_clusters_are_not_simple(self, verification_service, dirac_service, unit_lattice, periodic, grid8):
        spec = OperatorSpec(unit_lattice, periodic, grid8)
        pairs = dirac_service.eigensolve(spec, 14, tol=1e-8, seed=0)
        clusters = dirac_service.cluster_multiplicities(pairs, relative=True)
        report = verification_service.genericity_report(pairs, clusters)
        assert not report['all_nonzero_simple']
        assert [c['multiplicity'] for c in report['clusters']] == [6, 2, 6]
        assert len(report['min_spinor_norms']) == 14

    def test_plane_wave_is_nowhere_vanishing(self, verification_service, dirac_service, unit_lattice, grid8):
        spec = OperatorSpec(unit_lattice, SpinStructure((1, 0, 0)), grid8)
        pairs = dirac_service.eigensolve(spec, 4, tol=1e-8, seed=0)
        report = verification_service.genericity_report(pairs, dirac_service.cluster_multiplicities(pairs))
        assert report['all_nonzero_simple']
        assert report['nowhere_vanishing']
