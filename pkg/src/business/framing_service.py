# -*- coding: utf-8 -*-
"""
Framing service for spinframe.
Turns eigenspinors into framings by divergence-free vector fields and
rescales them across conformal changes of the metric.
"""

from typing import Any, Dict, Optional, Sequence
import copy
import logging

import numpy as np

from src.business.clifford import frame_triple_array, twist_phase
from src.business.dirac_service import DiracService
from src.data.data_models import (
    ConformalFactor, EigenPair, Framing, Grid, InvariantViolationError, Lattice,
    OperatorSpec, SpinStructure, SpinorField, VectorField
)
from src.utils.config import config


HARMONIC_SOURCE_WARNING = (
    "harmonic source: Lemma requires eigenspinor; "
    "framing still divergence-free for λ=0 by the same computation"
)


class FramingService:
    """
    Service for building framings X₁, X₂, X₃ from spinors.

    The triple comes from Φ, Φ·(1+k)/√2 and Φ·(1+j)/√2 under the quadratic
    map; its components live in the g-orthonormal frame h⁻¹∂ᵢ and are
    converted to Euclidean components by one division by h.
    """

    def __init__(self, dirac_service: Optional[DiracService] = None):
        """Initialize framing service."""
        self.dirac_service = dirac_service or DiracService()
        self.logger = logging.getLogger(__name__)

    def framing_from_eigenspinor(self, phi: SpinorField, spec: OperatorSpec,
                                 provenance: Optional[Dict[str, Any]] = None) -> Framing:
        """
        Build the framing of a (physical) eigenspinor.

        Args:
            phi: Eigenspinor of the Dirac operator of `spec`
            spec: Operator specification the spinor belongs to
            provenance: Extra provenance entries

        Returns:
            Framing adapted to h²·flat (flat when spec has no conformal factor)
        """
        # Validate input
        if phi.grid != spec.grid:
            raise InvariantViolationError(f"Spinor grid {phi.grid.n} does not match operator grid {spec.grid.n}")
        if not np.any(phi.data):
            raise InvariantViolationError("Cannot build a framing from the zero spinor field")

        # Quadratic map of the physical spinor, then Euclidean components
        physical = twist_phase(spec.spin, spec.grid.fractional_coordinates()) * phi.data
        triple = frame_triple_array(physical)
        if spec.conformal is not None:
            triple = triple / spec.conformal.samples(spec.grid)

        # Record provenance
        record = {
            'path': 'eigenspinor',
            'spin': list(spec.spin.eps),
            'source_metric': 'flat' if spec.is_flat else 'conformal',
            'rescale_factors': []
        }
        record.update(provenance or {})
        framing = Framing(
            VectorField(spec.grid, triple[0]),
            VectorField(spec.grid, triple[1]),
            VectorField(spec.grid, triple[2]),
            spec.lattice,
            spec.conformal,
            record
        )
        self.logger.info(f"Framing built on grid {spec.grid.n}: min g-length {framing.min_length:.6e}")
        if framing.degenerate:
            self.logger.warning(f"Framing is degenerate: min length {framing.min_length:.3e} "
                                f"vs mean {framing.mean_length:.3e}")
        return framing

    def framing_from_eigenpair(self, pair: EigenPair, spec: OperatorSpec) -> Framing:
        """Framing of an eigensolver result, recording the pair in the provenance."""
        provenance = {
            'eigenvalue': pair.eigenvalue,
            'residual': pair.residual,
            'cluster_id': pair.cluster_id,
            'multiplicity': pair.multiplicity,
            'warnings': []
        }
        # Flag harmonic sources
        if abs(pair.eigenvalue) < config.KERNEL_TOL:
            self.logger.warning(HARMONIC_SOURCE_WARNING)
            provenance['warnings'].append(HARMONIC_SOURCE_WARNING)
        return self.framing_from_eigenspinor(pair.field, spec, provenance)

    def framing_from_plane_wave(self, lattice: Lattice, spin: SpinStructure, grid: Grid,
                                k_index: Sequence[int], sign: int) -> Framing:
        """Flat framing of a closed-form plane-wave eigenspinor."""
        eigenvalue, field = self.dirac_service.plane_wave_eigenspinor(lattice, spin, grid, k_index, sign)
        provenance = {
            'path': 'plane_wave',
            'eigenvalue': eigenvalue,
            'k_index': [int(k) for k in k_index],
            'sign': int(sign)
        }
        return self.framing_from_eigenspinor(field, OperatorSpec(lattice, spin, grid), provenance)

    def conformal_rescale(self, fr: Framing, f: ConformalFactor) -> Framing:
        """
        Rescale Xᵢ ↦ f⁻³Xᵢ for the metric f²·g.

        Divergence-freeness with respect to the old weight w carries over to
        f³w; orthogonality and equal length are preserved.
        """
        f.check_admissible(fr.grid)
        inverse_cube = f.samples(fr.grid) ** -3
        metric_h = f if fr.metric_h is None else fr.metric_h * f

        # Update provenance
        provenance = copy.deepcopy(fr.provenance)
        provenance['path'] = 'rescaled'
        provenance.setdefault('rescale_factors', []).append(f.to_dict())

        fields = [VectorField(fr.grid, x.data * inverse_cube) for x in fr.fields]
        self.logger.info(f"Framing rescaled by factor with offset {f.offset}")
        return Framing(fields[0], fields[1], fields[2], fr.lattice, metric_h, provenance)

    def min_pointwise_norm(self, fr: Framing) -> float:
        """Minimum g-length of X₁ over the nodes (nowhere-vanishing certificate)."""
        return fr.min_length
