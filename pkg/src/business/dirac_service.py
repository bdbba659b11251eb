# -*- coding: utf-8 -*-
"""
Dirac service for spinframe.
Applies the spin Dirac operator of flat and conformally flat tori, provides
plane-wave and dense spectral oracles, and computes certified eigenpairs
with a two-stage block eigensolver.
"""

from typing import List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from scipy import linalg

from src.business.clifford import clifford_matrix, clifford_mul_array
from src.business.geometry_service import GeometryService
from src.data.cache_manager import get_cache_manager
from src.data.data_models import (
    Cluster, EigenPair, GridMismatchError, InvariantViolationError, Lattice,
    OperatorSpec, SpinFrameError, SpinStructure, SpinorField, Grid
)
from src.utils.config import config


class DenseOracleLimitError(SpinFrameError):
    """Raised when a dense assembly exceeds the configured dimension."""
    pass


class EigensolverConvergenceError(SpinFrameError):
    """Raised when the eigensolver misses its tolerance within the iteration limit."""

    def __init__(self, message: str, residuals: Sequence[float], iterations: int):
        super().__init__(message)
        self.residuals = [float(r) for r in residuals]
        self.iterations = iterations


FFT_AXES = (-3, -2, -1)


class DiracService:
    """
    Service for the Dirac operator and its spectrum.

    Operators act on batches laid out as (2, ..., n1, n2, n3); the eigensolver
    works on column matrices whose columns are `SpinorField.to_vector()`.
    """

    # Shift of the (4π²|ξ|² + σ)⁻¹ preconditioner
    PRECONDITIONER_SHIFT = 1.0

    def __init__(self, geometry: Optional[GeometryService] = None):
        """Initialize Dirac service."""
        self.geometry = geometry or GeometryService()
        self.cache = get_cache_manager()
        self.logger = logging.getLogger(__name__)

    # Operator application

    def unresolved_mass(self, lattice: Lattice, spin: SpinStructure, grid: Grid) -> float:
        """
        Scalar symbol of the Nyquist modes of periodic axes.

        Those modes are their own images under j, where a Clifford symbol
        would have to vanish; a real multiple of the identity commutes with j
        and at 2π·max|ξ| sits at the top of the spectrum.
        """
        return 2.0 * np.pi * self.geometry.max_momentum(lattice, spin, grid)

    def _flat_batch(self, data: np.ndarray, lattice: Lattice, spin: SpinStructure, grid: Grid) -> np.ndarray:
        xi = self.geometry.symbol_momenta(lattice, spin, grid)
        nyquist = self.geometry.nyquist_mask(spin, grid)
        spectrum = np.fft.fftn(data, axes=FFT_AXES)
        symbol = 2j * np.pi * clifford_mul_array(xi, spectrum)
        symbol = np.where(nyquist, self.unresolved_mass(lattice, spin, grid) * spectrum, symbol)
        return np.fft.ifftn(symbol, axes=FFT_AXES)

    def _symmetric_batch(self, data: np.ndarray, spec: OperatorSpec) -> np.ndarray:
        if spec.conformal is None:
            return self._flat_batch(data, spec.lattice, spec.spin, spec.grid)
        root = spec.conformal.samples(spec.grid) ** -0.5
        return root * self._flat_batch(root * data, spec.lattice, spec.spin, spec.grid)

    def _check_field(self, f: SpinorField, spec: OperatorSpec, conformal_required: bool = False) -> None:
        if f.grid != spec.grid:
            raise GridMismatchError(f"Field grid {f.grid.n} does not match operator grid {spec.grid.n}")
        if conformal_required and spec.conformal is None:
            raise InvariantViolationError("Operator spec has no conformal factor")

    def flat_dirac_apply(self, f: SpinorField, lattice: Lattice, spin: SpinStructure) -> SpinorField:
        """
        Flat Dirac operator: Fourier symbol 2πi·Σ ξᵢσᵢ.

        Args:
            f: Periodic representative of a spinor field
            lattice: Torus lattice
            spin: Spin structure

        Returns:
            D f as a periodic representative
        """
        return SpinorField(f.grid, self._flat_batch(f.data, lattice, spin, f.grid))

    def conformal_dirac_apply_symmetrized(self, f: SpinorField, spec: OperatorSpec) -> SpinorField:
        """
        S f = h^(-1/2)·D(h^(-1/2)·f).

        S is symmetric for the unweighted inner product and isospectral to the
        Dirac operator of g = h²·flat.
        """
        self._check_field(f, spec, conformal_required=True)
        return SpinorField(f.grid, self._symmetric_batch(f.data, spec))

    def symmetric_apply(self, f: SpinorField, spec: OperatorSpec) -> SpinorField:
        """The unweighted-symmetric operator of `spec` (S, or D when flat)."""
        self._check_field(f, spec)
        return SpinorField(f.grid, self._symmetric_batch(f.data, spec))

    def conformal_dirac_apply(self, f: SpinorField, spec: OperatorSpec) -> SpinorField:
        """Physical Dirac operator of g = h²·flat: h⁻²·D(h·f)."""
        self._check_field(f, spec)
        if spec.conformal is None:
            return self.flat_dirac_apply(f, spec.lattice, spec.spin)
        h = spec.conformal.samples(spec.grid)
        return SpinorField(f.grid, self._flat_batch(h * f.data, spec.lattice, spec.spin, spec.grid) / h ** 2)

    def desymmetrize(self, theta: SpinorField, spec: OperatorSpec) -> SpinorField:
        """Φ = h^(-3/2)·θ, turning an S-eigenspinor into a physical one."""
        self._check_field(theta, spec, conformal_required=True)
        return SpinorField(theta.grid, theta.data * spec.conformal.samples(spec.grid) ** -1.5)

    def symmetrize(self, phi: SpinorField, spec: OperatorSpec) -> SpinorField:
        """θ = h^(3/2)·Φ (inverse of `desymmetrize`)."""
        self._check_field(phi, spec, conformal_required=True)
        return SpinorField(phi.grid, phi.data * spec.conformal.samples(spec.grid) ** 1.5)

    # Oracles

    def flat_spectrum_oracle(self, lattice: Lattice, spin: SpinStructure, lambda_max: float) -> List[Cluster]:
        """
        Closed-form flat spectrum: ±2π|ξ| for every ξ = B⁻ᵀ(k + ε̂), k ∈ ℤ³.

        Args:
            lattice: Torus lattice
            spin: Spin structure
            lambda_max: Largest |λ| to enumerate

        Returns:
            Clusters (λ, complex multiplicity) sorted ascending
        """
        if not lambda_max > 0:
            raise InvariantViolationError(f"lambda_max must be positive, got {lambda_max}")

        # |k + ε̂| ≤ σ_max(B)·|ξ| bounds the enumeration box
        radius = int(np.ceil(lambda_max * np.linalg.norm(lattice.matrix, 2) / (2.0 * np.pi))) + 1
        axis = np.arange(-radius, radius + 1)
        indices = np.array(np.meshgrid(axis, axis, axis, indexing='ij')).reshape(3, -1)
        momenta = lattice.dual @ (indices + spin.shift[:, None])
        magnitudes = 2.0 * np.pi * np.linalg.norm(momenta, axis=0)
        magnitudes = magnitudes[magnitudes <= lambda_max * (1.0 + 1e-12)]

        zero = magnitudes <= 1e-12 * lambda_max
        nonzero = magnitudes[~zero]
        values = np.sort(np.concatenate([-nonzero, np.zeros(2 * int(np.sum(zero))), nonzero]))
        return self.cluster_multiplicities(values, config.CLUSTER_GAP_TOL, relative=True)

    def grid_spectrum_oracle(self, lattice: Lattice, spin: SpinStructure, grid: Grid) -> np.ndarray:
        """
        All 2N eigenvalues of the discrete flat operator on `grid`, sorted.

        Resolved modes give ±2π|ξ|; every Nyquist mode gives the unresolved
        mass twice.
        """
        nyquist = self.geometry.nyquist_mask(spin, grid)
        momenta = self.geometry.symbol_momenta(lattice, spin, grid)
        magnitudes = 2.0 * np.pi * np.linalg.norm(momenta, axis=0)[~nyquist]
        mass = np.full(2 * int(np.sum(nyquist)), self.unresolved_mass(lattice, spin, grid))
        return np.sort(np.concatenate([-magnitudes, magnitudes, mass]))

    def plane_wave_eigenspinor(self, lattice: Lattice, spin: SpinStructure, grid: Grid,
                               k_index: Sequence[int], sign: int) -> Tuple[float, SpinorField]:
        """
        Closed-form eigenspinor e^{2πi⟨ξ, x⟩}ψ₀ of the flat operator.

        Args:
            lattice: Torus lattice
            spin: Spin structure
            grid: Sampling grid; k must be a resolved mode of it
            k_index: Signed integer index k (ξ = B⁻ᵀ(k + ε̂))
            sign: +1 or -1, selecting λ = sign·2π|ξ|

        Returns:
            (λ, field) with |field| ≡ 1
        """
        k = np.asarray(tuple(k_index), dtype=int)
        # Validate index and sign
        if k.shape != (3,) or sign not in (1, -1):
            raise InvariantViolationError(f"Expected a 3-index and sign ±1, got {tuple(k_index)}, {sign}")
        for axis, (n, eps) in enumerate(zip(grid.n, spin.eps)):
            lower = -n // 2 if eps else -n // 2 + 1
            if not lower <= k[axis] < n // 2:
                raise InvariantViolationError(f"Index {k[axis]} on axis {axis} is not resolved by grid {grid.n}")

        xi = lattice.dual @ (k + spin.shift)
        magnitude = float(np.linalg.norm(xi))
        if magnitude == 0.0:
            raise InvariantViolationError("Zero momentum has no nonzero eigenvalue")

        # i·Σξᵢσᵢ is hermitian with eigenvalues ∓|ξ|
        _, vectors = np.linalg.eigh(1j * clifford_matrix(xi))
        psi = vectors[:, 1] if sign > 0 else vectors[:, 0]
        lead = psi[np.argmax(np.abs(psi))]
        psi = psi * (abs(lead) / lead)
        psi = psi / np.linalg.norm(psi)

        # Periodic representative
        phase = np.exp(2j * np.pi * np.einsum('i,i...->...', k.astype(float), grid.fractional_coordinates()))
        field = SpinorField(grid, psi[:, None, None, None] * phase)
        return sign * 2.0 * np.pi * magnitude, field

    def assemble_matrix(self, spec: OperatorSpec, max_dimension: Optional[int] = None) -> np.ndarray:
        """
        Dense matrix of the symmetric operator, one column per basis field.

        Raises:
            DenseOracleLimitError: if 2·n1·n2·n3 exceeds `max_dimension`
        """
        limit = config.DENSE_MAX_DIMENSION if max_dimension is None else int(max_dimension)
        dimension = spec.grid.dimension
        if dimension > limit:
            raise DenseOracleLimitError(f"Dense assembly of dimension {dimension} exceeds limit {limit}")
        return self._apply(np.eye(dimension, dtype=complex), spec)

    @staticmethod
    def hermiticity_defect(matrix: np.ndarray) -> float:
        """max |M - M*|."""
        return float(np.max(np.abs(matrix - matrix.conj().T)))

    def dense_spectrum(self, spec: OperatorSpec, max_dimension: Optional[int] = None) -> List[float]:
        """
        Brute-force spectrum of the symmetric operator.

        Args:
            spec: Operator specification
            max_dimension: Dense threshold on 2·n1·n2·n3 (default from config)

        Returns:
            All eigenvalues, ascending
        """
        matrix = self.assemble_matrix(spec, max_dimension)
        # Validate hermiticity
        defect = self.hermiticity_defect(matrix)
        if defect > config.HERMITICITY_TOL * max(1.0, float(np.max(np.abs(matrix)))):
            raise InvariantViolationError(f"Assembled operator is not hermitian: defect {defect:.3e}")
        self.logger.debug(f"Dense assembly {matrix.shape}, hermiticity defect {defect:.3e}")
        values = linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
        return [float(v) for v in values]

    # Clusters

    def cluster_multiplicities(self, pairs: Sequence[Union[EigenPair, float]], gap_tol: Optional[float] = None,
                               relative: bool = False) -> List[Cluster]:
        """
        Group sorted eigenvalues whose consecutive gaps are below `gap_tol`.

        Args:
            pairs: EigenPairs or eigenvalues
            gap_tol: Gap threshold (default config.CLUSTER_GAP_TOL)
            relative: Compare gaps against gap_tol·max(1, |λ|)

        Returns:
            Clusters (mean, complex multiplicity); multiplicity 2 is simple over ℍ
        """
        values = np.sort(np.array([p.eigenvalue if isinstance(p, EigenPair) else p for p in pairs], dtype=float))
        labels = self._cluster_labels(values, config.CLUSTER_GAP_TOL if gap_tol is None else gap_tol, relative)
        return [
            Cluster(float(np.mean(values[labels == label])), int(np.sum(labels == label)))
            for label in range(int(labels.max()) + 1 if labels.size else 0)
        ]

    @staticmethod
    def _cluster_labels(values: np.ndarray, gap_tol: float, relative: bool) -> np.ndarray:
        labels = np.zeros(values.size, dtype=int)
        for i in range(1, values.size):
            scale = max(1.0, abs(values[i - 1]), abs(values[i])) if relative else 1.0
            new_cluster = values[i] - values[i - 1] >= gap_tol * scale
            labels[i] = labels[i - 1] + int(new_cluster)
        return labels

    # Eigensolver

    def _to_batch(self, columns: np.ndarray, grid: Grid) -> np.ndarray:
        batch = np.reshape(columns, (2,) + grid.shape + (columns.shape[1],), order='F')
        return np.moveaxis(batch, -1, 1)

    def _from_batch(self, batch: np.ndarray) -> np.ndarray:
        return np.reshape(np.moveaxis(batch, 1, -1), (-1, batch.shape[1]), order='F')

    def _apply(self, columns: np.ndarray, spec: OperatorSpec) -> np.ndarray:
        return self._from_batch(self._symmetric_batch(self._to_batch(columns, spec.grid), spec))

    def _precondition(self, columns: np.ndarray, spec: OperatorSpec) -> np.ndarray:
        xi = self.geometry.symbol_momenta(spec.lattice, spec.spin, spec.grid)
        squared = np.where(
            self.geometry.nyquist_mask(spec.spin, spec.grid),
            self.unresolved_mass(spec.lattice, spec.spin, spec.grid) ** 2,
            4.0 * np.pi ** 2 * np.sum(xi ** 2, axis=0)
        )
        inverse = 1.0 / (squared + self.PRECONDITIONER_SHIFT)
        spectrum = np.fft.fftn(self._to_batch(columns, spec.grid), axes=FFT_AXES)
        return self._from_batch(np.fft.ifftn(inverse * spectrum, axes=FFT_AXES))

    @staticmethod
    def _orthonormal_basis(columns: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(columns, axis=0)
        keep = norms > 0
        return linalg.orth(columns[:, keep] / norms[keep])

    def _rayleigh_ritz(self, basis: np.ndarray, spec: OperatorSpec,
                       block: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        s_basis = self._apply(basis, spec)
        gram = s_basis.conj().T @ s_basis
        theta, coefficients = linalg.eigh(0.5 * (gram + gram.conj().T))
        coefficients = coefficients[:, :block]
        x = basis @ coefficients
        sx = s_basis @ coefficients
        return x, sx, self._apply(sx, spec), np.maximum(theta[:block], 0.0)

    def _split_branches(self, x: np.ndarray, sx: np.ndarray, theta: np.ndarray, spec: OperatorSpec,
                        count: int, tol: float) -> Optional[List[EigenPair]]:
        """Diagonalize S on span{X, S·X}; None when fewer than `count` Ritz pairs meet `tol`."""
        magnitudes = np.sqrt(theta)
        lifted = magnitudes > 100.0 * tol
        basis = self._orthonormal_basis(np.hstack([x, sx[:, lifted] / magnitudes[lifted]]))
        s_basis = self._apply(basis, spec)
        projected = basis.conj().T @ s_basis
        values, coefficients = linalg.eigh(0.5 * (projected + projected.conj().T))
        vectors = basis @ coefficients
        residuals = np.linalg.norm(s_basis @ coefficients - vectors * values, axis=0)

        # Keep the smallest |λ| that meet tol
        accepted = np.flatnonzero(residuals <= tol)
        if accepted.size < count:
            return None
        chosen = accepted[np.argsort(np.abs(values[accepted]), kind='stable')][:count]
        chosen = chosen[np.argsort(values[chosen], kind='stable')]

        pairs = []
        weight = spec.weight()
        for index in chosen:
            field = SpinorField.from_vector(spec.grid, vectors[:, index])
            if spec.conformal is not None:
                field = self.desymmetrize(field, spec)
            field = field * (1.0 / self.geometry.weighted_norm(field, weight))
            defect = self.conformal_dirac_apply(field, spec) - field * values[index]
            residual = self.geometry.weighted_norm(defect, weight)
            if residual > tol:
                return None
            pairs.append((float(values[index]), field, residual))

        labels = self._cluster_labels(np.array([p[0] for p in pairs]), config.CLUSTER_GAP_TOL, relative=True)
        sizes = np.bincount(labels)
        return [
            EigenPair(value, field, residual, int(label), int(sizes[label]))
            for (value, field, residual), label in zip(pairs, labels)
        ]

    def eigensolve(self, spec: OperatorSpec, count: int, tol: Optional[float] = None, seed: Optional[int] = None,
                   max_iter: Optional[int] = None) -> List[EigenPair]:
        """
        Eigenpairs of smallest |λ|.

        Stage one runs a preconditioned block iteration with full
        reorthogonalization on S², which is positive semidefinite. Stage two
        diagonalizes S on span{X, S·X} to split the ±√μ branches.

        Args:
            spec: Operator specification
            count: Number of eigenpairs
            tol: Residual tolerance (default config.SOLVER_TOL)
            seed: Seed of the start block (default config.SOLVER_SEED)
            max_iter: Iteration limit (default config.SOLVER_MAX_ITER)

        Returns:
            EigenPairs sorted by eigenvalue, fields normalized in the h³-weighted norm

        Raises:
            EigensolverConvergenceError: if the tolerance is not met in time
        """
        tol = config.SOLVER_TOL if tol is None else float(tol)
        seed = config.SOLVER_SEED if seed is None else int(seed)
        max_iter = config.SOLVER_MAX_ITER if max_iter is None else int(max_iter)
        dimension = spec.grid.dimension
        if count < 1:
            raise InvariantViolationError(f"count must be at least 1, got {count}")
        if not tol > 0:
            raise InvariantViolationError(f"tol must be positive, got {tol}")
        if count > dimension:
            raise InvariantViolationError(f"count {count} exceeds the grid dimension {dimension}")

        # Check cache first
        key = (spec.to_dict(), count, tol, seed, max_iter)
        cached = self.cache.get('eigenpairs', *key)
        if cached is not None:
            return list(cached)

        self.logger.info(f"Eigensolve: count={count}, tol={tol:g}, grid={spec.grid.n}, "
                         f"eps={spec.spin.eps}, conformal={not spec.is_flat}")
        # Random start block
        block = min(count + config.SOLVER_PADDING, dimension)
        rng = np.random.default_rng(seed)
        start = rng.standard_normal((dimension, block)) + 1j * rng.standard_normal((dimension, block))
        x, sx, ax, theta = self._rayleigh_ritz(self._orthonormal_basis(start), spec, block)

        directions = None
        stage_tol = tol / 10.0
        residuals = np.full(block, np.inf)
        for iteration in range(1, max_iter + 1):
            r = ax - x * theta
            residuals = np.linalg.norm(r, axis=0)
            scale = np.maximum(1.0, np.sqrt(theta))
            if iteration % 10 == 0:
                self.logger.debug(f"Iteration {iteration}: max residual {np.max(residuals[:count]):.3e}")

            if np.all(residuals[:count] <= stage_tol * scale[:count]):
                pairs = self._split_branches(x[:, :count], sx[:, :count], theta[:count], spec, count, tol)
                if pairs is not None:
                    self.logger.info(f"Eigensolve converged in {iteration} iterations; "
                                     f"max residual {max(p.residual for p in pairs):.3e}")
                    self.cache.set('eigenpairs', tuple(pairs), *key)
                    return pairs
                stage_tol /= 10.0
                self.logger.debug(f"Branch split missed tol; tightening stage one to {stage_tol:.1e}")

            # Expand the search space
            w = self._precondition(r, spec)
            for _ in range(2):
                w = w - x @ (x.conj().T @ w)
            blocks = [x, w] if directions is None else [x, w, directions]
            basis = self._orthonormal_basis(np.hstack(blocks))
            x_new, sx, ax, theta = self._rayleigh_ritz(basis, spec, block)
            directions = x_new - x @ (x.conj().T @ x_new)
            x = x_new

        self.logger.error(f"Eigensolve did not converge in {max_iter} iterations")
        raise EigensolverConvergenceError(
            f"Eigensolver did not reach tol={tol:g} in {max_iter} iterations "
            f"(max residual {np.max(residuals[:count]):.3e})",
            residuals[:count],
            max_iter
        )
