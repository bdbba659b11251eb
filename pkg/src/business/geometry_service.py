# -*- coding: utf-8 -*-
"""
Geometry service for spinframe.
Momenta of the twisted Fourier basis, weighted quadrature, spectral
derivatives and seeded random fields on the sampled torus.
"""

from typing import Iterable
import logging

import numpy as np

from src.business.clifford import Vec3
from src.data.cache_manager import get_cache_manager
from src.data.data_models import (
    Grid, InvariantViolationError, Lattice, SpinStructure, SpinorField, VolumeWeight
)


class GeometryService:
    """
    Service for Fourier-side geometry of ℝ³/Λ.
    Every array it hands out is laid out in FFT order on the grid axes.
    """

    def __init__(self):
        """Initialize geometry service."""
        self.cache = get_cache_manager()
        self.logger = logging.getLogger(__name__)

    def dual_coordinates(self, spin: SpinStructure, grid: Grid) -> np.ndarray:
        """
        Dual coordinates k + ε̂ of every Fourier mode.

        Returns:
            Array of shape (3, n1, n2, n3)
        """
        indices = np.meshgrid(*grid.signed_indices(), indexing='ij')
        return np.array([k + s for k, s in zip(indices, spin.shift)], dtype=float)

    def momentum_set(self, lattice: Lattice, spin: SpinStructure, grid: Grid) -> np.ndarray:
        """
        Physical momenta ξ = B⁻ᵀ(k + ε̂) of the discrete Fourier modes.

        Args:
            lattice: Torus lattice
            spin: Spin structure selecting the half shifts
            grid: Sampling grid

        Returns:
            Array of shape (3, n1, n2, n3); entry [:, a, b, c] is the momentum of
            the mode stored at FFT position (a, b, c)
        """
        return np.einsum('ij,j...->i...', lattice.dual, self.dual_coordinates(spin, grid))

    def momentum_at(self, lattice: Lattice, spin: SpinStructure, k_index: Iterable[int]) -> Vec3:
        """Momentum B⁻ᵀ(k + ε̂) of a single signed index."""
        coordinates = np.asarray(tuple(k_index), dtype=float) + spin.shift
        return Vec3.from_array(lattice.dual @ coordinates)

    def symbol_momenta(self, lattice: Lattice, spin: SpinStructure, grid: Grid) -> np.ndarray:
        """
        Momenta used by first-order operator symbols (cached, read-only).

        Identical to `momentum_set` except that on periodic axes the dual
        coordinate of the Nyquist index -n/2 is zero.
        """
        key = (lattice.to_dict(), spin.to_dict(), grid.to_dict())
        cached = self.cache.get('symbol_momenta', *key)
        if cached is not None:
            return cached

        coordinates = self.dual_coordinates(spin, grid)
        for axis, (n, eps) in enumerate(zip(grid.n, spin.eps)):
            if eps == 0:
                nyquist = [slice(None)] * 3
                nyquist[axis] = n // 2
                coordinates[(axis,) + tuple(nyquist)] = 0.0
        momenta = np.einsum('ij,j...->i...', lattice.dual, coordinates)
        momenta.setflags(write=False)

        self.cache.set('symbol_momenta', momenta, *key)
        self.logger.debug(f"Built symbol momenta for eps={spin.eps}, grid={grid.n}")
        return momenta

    def nyquist_mask(self, spin: SpinStructure, grid: Grid) -> np.ndarray:
        """Modes whose index is -n/2 on at least one periodic axis, shape (n1, n2, n3)."""
        mask = np.zeros(grid.shape, dtype=bool)
        for axis, (n, eps) in enumerate(zip(grid.n, spin.eps)):
            if eps == 0:
                index = [slice(None)] * 3
                index[axis] = n // 2
                mask[tuple(index)] = True
        return mask

    def max_momentum(self, lattice: Lattice, spin: SpinStructure, grid: Grid) -> float:
        """Largest |ξ| over the discrete modes."""
        return float(np.max(np.linalg.norm(self.momentum_set(lattice, spin, grid), axis=0)))

    def weighted_inner(self, a: SpinorField, b: SpinorField, w: VolumeWeight) -> complex:
        """
        Weighted L² inner product (vol(Λ)/N)·Σ w·⟨a, b⟩, antilinear in `a`.

        Args:
            a: First field
            b: Second field
            w: Volume weight on the same grid, carrying vol(Λ)

        Returns:
            Complex inner product
        """
        # Validate grids
        a.check_grid(b)
        if w.grid != a.grid:
            raise InvariantViolationError(f"Weight grid {w.grid.n} does not match field grid {a.grid.n}")
        fiber = np.sum(np.conj(a.data) * b.data, axis=0)
        return complex(w.covolume / a.grid.size * np.sum(w.values * fiber))

    def weighted_norm(self, f: SpinorField, w: VolumeWeight) -> float:
        """‖f‖_w."""
        return float(np.sqrt(max(self.weighted_inner(f, f, w).real, 0.0)))

    def random_spinor_field(self, grid: Grid, rng: np.random.Generator) -> SpinorField:
        """Component-wise standard complex Gaussian per node."""
        shape = (2,) + grid.shape
        data = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
        return SpinorField(grid, data)

    def gradient_symbol(self, lattice: Lattice, grid: Grid) -> np.ndarray:
        """2πi·ξ for periodic real data, Nyquist zeroed; shape (3, n1, n2, n3)."""
        return 2j * np.pi * self.symbol_momenta(lattice, SpinStructure((0, 0, 0)), grid)

    def spectral_divergence(self, components: np.ndarray, lattice: Lattice, grid: Grid) -> np.ndarray:
        """
        Σᵢ ∂ᵢ Vⁱ for periodic real components of shape (3, n1, n2, n3).

        Derivatives are Euclidean; the lattice enters through ξ = B⁻ᵀk.
        """
        spectrum = np.fft.fftn(components, axes=(1, 2, 3))
        derivative = np.sum(self.gradient_symbol(lattice, grid) * spectrum, axis=0)
        return np.fft.ifftn(derivative).real

