# -*- coding: utf-8 -*-
"""
Verification service for spinframe.
Numerical certificates: divergence, framing reports, quaternionic symmetry,
multiplicity evenness, kernel dimension and oracle agreement.
"""

from typing import Any, Dict, List, Optional, Sequence
import logging

import numpy as np

from src.business.clifford import apply_j_field
from src.business.dirac_service import DiracService
from src.data.data_models import (
    Cluster, EigenPair, Framing, FramingReport, GridMismatchError, InvariantViolationError,
    OperatorSpec, VectorField, VolumeWeight
)
from src.utils.config import config


class VerificationService:
    """Service for certifying operator, spectrum and framing properties."""

    def __init__(self, dirac_service: Optional[DiracService] = None):
        """Initialize verification service."""
        self.dirac_service = dirac_service or DiracService()
        self.geometry = self.dirac_service.geometry
        self.logger = logging.getLogger(__name__)

    def divergence(self, x: VectorField, w: VolumeWeight) -> np.ndarray:
        """
        Divergence w⁻¹·Σᵢ ∂ᵢ(w·Xⁱ) with spectral derivatives.

        Args:
            x: Vector field (Euclidean components)
            w: Volume weight on the same grid

        Returns:
            Scalar samples of shape (n1, n2, n3)
        """
        if w.grid != x.grid:
            raise GridMismatchError(f"Weight grid {w.grid.n} does not match field grid {x.grid.n}")
        flux = w.values * x.data
        return self.geometry.spectral_divergence(flux, w.lattice, x.grid) / w.values

    def framing_report(self, fr: Framing, thresholds: Optional[Dict[str, float]] = None) -> FramingReport:
        """
        Certify a framing.

        Args:
            fr: Framing to check
            thresholds: Overrides for 'divergence', 'orthogonality', 'length_spread'

        Returns:
            FramingReport with divergence (absolute), orthogonality defect and
            length spread (relative to the largest g-length)
        """
        # Limits follow the operator the spinor came from
        source_metric = fr.provenance.get('source_metric', 'flat' if fr.metric_h is None else 'conformal')
        limits = config.get_report_thresholds(conformal=source_metric == 'conformal')
        limits.update(thresholds or {})

        # Divergence of each field
        weight = fr.weight()
        max_divergence = max(float(np.max(np.abs(self.divergence(x, weight)))) for x in fr.fields)

        # Pointwise g-inner products
        h_sq = fr.metric_samples() ** 2
        lengths = fr.g_lengths()
        max_length = float(np.max(lengths))
        defect = 0.0
        spread = 0.0
        if max_length > 0:
            for a, b in ((0, 1), (0, 2), (1, 2)):
                inner = h_sq * np.sum(fr.fields[a].data * fr.fields[b].data, axis=0)
                defect = max(defect, float(np.max(np.abs(inner))) / max_length ** 2)
            spread = float(np.max(np.max(lengths, axis=0) - np.min(lengths, axis=0))) / max_length

        report = FramingReport(
            max_divergence=max_divergence,
            max_orthogonality_defect=defect,
            max_length_spread=spread,
            min_length=float(np.min(lengths)),
            max_length=max_length,
            degenerate=fr.degenerate,
            thresholds=limits
        )
        # Log result
        log = self.logger.info if report.passed else self.logger.warning
        log(f"Framing report: div {max_divergence:.3e}, orth {defect:.3e}, "
            f"spread {spread:.3e}, passed={report.passed}")
        return report

    def quaternionic_commutation_check(self, spec: OperatorSpec, trials: int, seed: Optional[int] = None) -> float:
        """
        Max over random fields of ‖Op(f·j) − (Op f)·j‖/‖f‖.

        Op is the flat operator or the symmetrized conformal one; j acts on the
        physical field.
        """
        if trials < 1:
            raise InvariantViolationError(f"trials must be at least 1, got {trials}")
        rng = np.random.default_rng(config.SOLVER_SEED if seed is None else seed)
        worst = 0.0
        for _ in range(trials):
            f = self.geometry.random_spinor_field(spec.grid, rng)
            lhs = self.dirac_service.symmetric_apply(apply_j_field(f, spec.spin), spec)
            rhs = apply_j_field(self.dirac_service.symmetric_apply(f, spec), spec.spin)
            worst = max(worst, float(np.linalg.norm(lhs.data - rhs.data) / np.linalg.norm(f.data)))
        self.logger.debug(f"Quaternionic commutation defect over {trials} trials: {worst:.3e}")
        return worst

    def symmetry_defect(self, spec: OperatorSpec, trials: int, seed: Optional[int] = None) -> float:
        """Max of |⟨Op f, g⟩ − ⟨f, Op g⟩| / (‖Op f‖·‖g‖) over random pairs, unweighted."""
        if trials < 1:
            raise InvariantViolationError(f"trials must be at least 1, got {trials}")
        rng = np.random.default_rng(config.SOLVER_SEED if seed is None else seed)
        worst = 0.0
        for _ in range(trials):
            f = self.geometry.random_spinor_field(spec.grid, rng)
            g = self.geometry.random_spinor_field(spec.grid, rng)
            op_f = self.dirac_service.symmetric_apply(f, spec).data
            op_g = self.dirac_service.symmetric_apply(g, spec).data
            difference = abs(np.vdot(op_f, g.data) - np.vdot(f.data, op_g))
            worst = max(worst, float(difference / (np.linalg.norm(op_f) * np.linalg.norm(g.data))))
        return worst

    def evenness_check(self, clusters: Sequence[Cluster]) -> bool:
        """Whether every cluster has even complex multiplicity."""
        return all(cluster.multiplicity % 2 == 0 for cluster in clusters)

    def complete_clusters(self, clusters: Sequence[Cluster], cut: Optional[float],
                          gap_tol: Optional[float] = None) -> List[Cluster]:
        """
        Clusters that lie strictly inside the computed part of the spectrum.

        The eigensolver returns the pairs of smallest |λ|, so a cluster whose
        magnitude reaches the largest computed |λ| may continue past the cut.

        Args:
            clusters: Clusters of the computed eigenvalues
            cut: Largest computed |λ|, or None when the whole spectrum was computed
            gap_tol: Relative gap used for clustering (default config.CLUSTER_GAP_TOL)

        Returns:
            Clusters whose multiplicity is known to be complete
        """
        if cut is None:
            return list(clusters)
        gap_tol = config.CLUSTER_GAP_TOL if gap_tol is None else gap_tol
        reach = gap_tol * max(1.0, cut)
        complete = [c for c in clusters if cut - abs(c.lambda_mean) > reach * c.multiplicity]
        if len(complete) < len(clusters):
            self.logger.debug(f"{len(clusters) - len(complete)} cluster(s) at |λ| = {cut:.6f} may be cut")
        return complete

    def kernel_dimension(self, spec: OperatorSpec, tol: Optional[float] = None, seed: Optional[int] = None,
                         max_iter: Optional[int] = None) -> int:
        """
        Number of computed eigenvalues with |λ| < tol.

        The solver runs at tol/10 so kernel Ritz values land well inside the
        threshold.
        """
        tol = config.KERNEL_TOL if tol is None else float(tol)
        if not tol > 0:
            raise InvariantViolationError(f"tol must be positive, got {tol}")
        count = min(config.KERNEL_SOLVE_COUNT, spec.grid.dimension)
        pairs = self.dirac_service.eigensolve(spec, count, tol=tol / 10.0, seed=seed, max_iter=max_iter)
        dimension = sum(1 for pair in pairs if abs(pair.eigenvalue) < tol)
        self.logger.info(f"Kernel dimension for eps={spec.spin.eps}: {dimension}")
        return dimension

    def oracle_equivalence(self, spec: OperatorSpec, max_dimension: Optional[int] = None) -> float:
        """
        Max deviation between the dense flat spectrum and the grid oracle.

        The flat operator on the lattice, spin structure and grid of `spec` is used.
        """
        flat = OperatorSpec(spec.lattice, spec.spin, spec.grid)
        dense = np.array(self.dirac_service.dense_spectrum(flat, max_dimension))
        oracle = self.dirac_service.grid_spectrum_oracle(spec.lattice, spec.spin, spec.grid)
        return float(np.max(np.abs(dense - oracle)))

    def genericity_report(self, pairs: Sequence[EigenPair], clusters: Sequence[Cluster]) -> Dict[str, Any]:
        """
        Detect simplicity over ℍ and nowhere-vanishing eigenspinors.

        Nothing here is asserted; flat tori are expected to fail simplicity.
        """
        # Kernel clusters are exempt from simplicity
        nonzero = [c for c in clusters if abs(c.lambda_mean) >= config.KERNEL_TOL]
        min_norms: List[float] = [float(np.sqrt(np.min(p.field.pointwise_norm_sq()))) for p in pairs]
        return {
            'clusters': [
                {'lambda_mean': c.lambda_mean, 'multiplicity': c.multiplicity, 'simple_over_h': c.simple_over_h}
                for c in clusters
            ],
            'all_nonzero_simple': all(c.simple_over_h for c in nonzero),
            'min_spinor_norms': min_norms,
            'nowhere_vanishing': all(n > 0 for n in min_norms)
        }
