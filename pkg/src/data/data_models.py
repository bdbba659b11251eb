# -*- coding: utf-8 -*-
"""
Data models for spinframe.
Defines dataclasses for torus geometry, sampled fields, conformal factors,
operator specifications, eigenpairs and framings.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Tuple, Optional, Dict, Any, List, NamedTuple, Sequence

import numpy as np

from src.data.cache_manager import get_cache_manager
from src.utils.config import config


class SpinFrameError(Exception):
    """Base exception for spinframe."""
    pass


class InvariantViolationError(SpinFrameError, ValueError):
    """Raised when a value violates a documented invariant or precondition."""
    pass


class GridMismatchError(SpinFrameError, ValueError):
    """Raised when fields on different grids are combined."""
    pass


def _read_only(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Lattice:
    """Lattice Λ ⊂ ℝ³; the columns of `basis` generate it (units: length)."""

    basis: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        """Validate orientation, nondegeneracy and the dual pairing."""
        matrix = np.asarray(self.basis, dtype=float)
        if matrix.shape != (3, 3) or not np.all(np.isfinite(matrix)):
            raise InvariantViolationError(f"Lattice basis must be a finite 3x3 matrix, got {matrix.shape}")
        det = np.linalg.det(matrix)
        if not det > 0:
            raise InvariantViolationError(f"Lattice basis must have positive determinant, got {det}")
        pairing = np.linalg.inv(matrix) @ matrix
        if np.max(np.abs(pairing - np.eye(3))) > 1e-12:
            raise InvariantViolationError("Lattice basis is too ill-conditioned for an exact dual basis")
        object.__setattr__(self, 'basis', tuple(tuple(float(v) for v in row) for row in matrix))

    @classmethod
    def cubic(cls, side: float = 1.0) -> 'Lattice':
        """Cubic lattice with the given side length."""
        return cls.diagonal(side, side, side)

    @classmethod
    def diagonal(cls, a: float, b: float, c: float) -> 'Lattice':
        """Orthorhombic lattice diag(a, b, c)."""
        return cls(tuple(tuple(row) for row in np.diag([a, b, c]).tolist()))

    @classmethod
    def from_row_major(cls, values: Sequence[float]) -> 'Lattice':
        """Create a lattice from 9 reals in row-major order."""
        if len(values) != 9:
            raise InvariantViolationError(f"Lattice basis needs 9 values, got {len(values)}")
        return cls(tuple(tuple(float(v) for v in values[3 * r:3 * r + 3]) for r in range(3)))

    @property
    def matrix(self) -> np.ndarray:
        """Basis matrix B (columns are generators)."""
        return np.array(self.basis, dtype=float)

    @property
    def dual(self) -> np.ndarray:
        """Dual basis B⁻ᵀ (columns are dual generators)."""
        return np.linalg.inv(self.matrix).T

    @property
    def volume(self) -> float:
        """Covolume vol(Λ) = det(B)."""
        return float(np.linalg.det(self.matrix))

    @property
    def is_orthogonal(self) -> bool:
        """Whether the generators are pairwise orthogonal."""
        gram = self.matrix.T @ self.matrix
        return bool(np.max(np.abs(gram - np.diag(np.diag(gram)))) <= 1e-14 * np.max(np.abs(gram)))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format (row-major basis)."""
        return {'basis': [v for row in self.basis for v in row]}


@dataclass(frozen=True)
class SpinStructure:
    """Spin structure on T³: one periodic (0) / antiperiodic (1) flag per generator."""

    eps: Tuple[int, int, int]

    def __post_init__(self):
        """Validate the flags."""
        eps = tuple(self.eps)
        if len(eps) != 3 or any(e not in (0, 1) for e in eps):
            raise InvariantViolationError(f"Spin structure flags must be three values in {{0, 1}}, got {self.eps}")
        object.__setattr__(self, 'eps', tuple(int(e) for e in eps))

    @classmethod
    def all(cls) -> List['SpinStructure']:
        """All 8 spin structures in lexicographic order."""
        return [cls(eps) for eps in product((0, 1), repeat=3)]

    @property
    def shift(self) -> np.ndarray:
        """Momentum shift ε̂ = eps/2 in dual coordinates."""
        return np.array(self.eps, dtype=float) / 2.0

    @property
    def is_periodic(self) -> bool:
        """Whether all three flags are periodic."""
        return not any(self.eps)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format."""
        return {'eps': list(self.eps)}


@dataclass(frozen=True)
class Grid:
    """Uniform grid with n_i samples per lattice direction."""

    n: Tuple[int, int, int]

    def __post_init__(self):
        """Validate the sample counts."""
        n = tuple(self.n)
        if len(n) != 3 or any(int(v) != v for v in n):
            raise InvariantViolationError(f"Grid needs three integer dimensions, got {self.n}")
        if any(v % 2 for v in n):
            raise InvariantViolationError("grid dimensions must be even")
        if any(v < 4 for v in n):
            raise InvariantViolationError(f"grid dimensions must be at least 4, got {n}")
        object.__setattr__(self, 'n', tuple(int(v) for v in n))

    @property
    def shape(self) -> Tuple[int, int, int]:
        """Array shape (n1, n2, n3)."""
        return self.n

    @property
    def size(self) -> int:
        """Number of nodes N = n1 n2 n3."""
        return int(np.prod(self.n))

    @property
    def dimension(self) -> int:
        """Complex dimension of the spinor sample space (2N)."""
        return 2 * self.size

    def signed_indices(self) -> List[np.ndarray]:
        """Signed frequency indices per axis, in FFT order, covering [-n/2, n/2)."""
        return [np.fft.fftfreq(n, d=1.0 / n).round().astype(int) for n in self.n]

    def fractional_coordinates(self) -> np.ndarray:
        """Node coordinates u = B⁻¹x in [0, 1)³, shape (3, n1, n2, n3)."""
        axes = [np.arange(n) / n for n in self.n]
        return np.array(np.meshgrid(*axes, indexing='ij'))

    def positions(self, lattice: Lattice) -> np.ndarray:
        """Euclidean node positions x = B u, shape (3, n1, n2, n3)."""
        return np.einsum('ij,j...->i...', lattice.matrix, self.fractional_coordinates())

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format."""
        return {'n': list(self.n)}


@dataclass(frozen=True, eq=False)
class SpinorField:
    """
    Grid-sampled section of the spinor bundle.

    `data` has shape (2, n1, n2, n3) and holds the periodic representative;
    the antiperiodic twist lives in the momentum shift of the spin structure.
    """

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        """Validate shape and finiteness."""
        data = np.array(self.data, dtype=complex)
        if data.shape != (2,) + self.grid.shape:
            raise InvariantViolationError(f"Spinor data shape {data.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(data)):
            raise InvariantViolationError("Spinor field has non-finite entries")
        object.__setattr__(self, 'data', _read_only(data))

    @classmethod
    def zeros(cls, grid: Grid) -> 'SpinorField':
        """Zero field."""
        return cls(grid, np.zeros((2,) + grid.shape, dtype=complex))

    @classmethod
    def constant(cls, grid: Grid, alpha: complex, beta: complex) -> 'SpinorField':
        """Constant field (alpha, beta)."""
        data = np.empty((2,) + grid.shape, dtype=complex)
        data[0] = alpha
        data[1] = beta
        return cls(grid, data)

    @classmethod
    def from_vector(cls, grid: Grid, vector: np.ndarray) -> 'SpinorField':
        """Inverse of `to_vector`."""
        return cls(grid, np.reshape(vector, (2,) + grid.shape, order='F'))

    def to_vector(self) -> np.ndarray:
        """Flatten node-major with x fastest (Fortran order)."""
        return np.reshape(self.data, -1, order='F')

    def pointwise_norm_sq(self) -> np.ndarray:
        """|alpha|² + |beta|² at every node."""
        return np.sum(np.abs(self.data) ** 2, axis=0)

    def check_grid(self, other: 'SpinorField') -> None:
        """Raise if `other` lives on a different grid."""
        if self.grid != other.grid:
            raise GridMismatchError(f"Grid mismatch: {self.grid.n} vs {other.grid.n}")

    def __add__(self, other: 'SpinorField') -> 'SpinorField':
        self.check_grid(other)
        return SpinorField(self.grid, self.data + other.data)

    def __sub__(self, other: 'SpinorField') -> 'SpinorField':
        self.check_grid(other)
        return SpinorField(self.grid, self.data - other.data)

    def __mul__(self, scalar: complex) -> 'SpinorField':
        return SpinorField(self.grid, self.data * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    """Grid-sampled vector field; components in the Euclidean frame ∂1, ∂2, ∂3."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        """Validate shape and finiteness."""
        data = np.array(self.data, dtype=float)
        if data.shape != (3,) + self.grid.shape:
            raise InvariantViolationError(f"Vector data shape {data.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(data)):
            raise InvariantViolationError("Vector field has non-finite entries")
        object.__setattr__(self, 'data', _read_only(data))

    @classmethod
    def zeros(cls, grid: Grid) -> 'VectorField':
        """Zero field."""
        return cls(grid, np.zeros((3,) + grid.shape))

    def euclidean_norm(self) -> np.ndarray:
        """Pointwise Euclidean length."""
        return np.sqrt(np.sum(self.data ** 2, axis=0))

    def check_grid(self, other: 'VectorField') -> None:
        """Raise if `other` lives on a different grid."""
        if self.grid != other.grid:
            raise GridMismatchError(f"Grid mismatch: {self.grid.n} vs {other.grid.n}")


@dataclass(frozen=True)
class FourierTerm:
    """One term a·cos(2π⟨m, u⟩ + φ) of a conformal factor."""

    m: Tuple[int, int, int]
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        """Validate the wavevector."""
        m = tuple(self.m)
        if len(m) != 3 or any(int(v) != v for v in m):
            raise InvariantViolationError(f"Wavevector must be three integers, got {self.m}")
        object.__setattr__(self, 'm', tuple(int(v) for v in m))
        object.__setattr__(self, 'amplitude', float(self.amplitude))
        object.__setattr__(self, 'phase', float(self.phase))


@dataclass(frozen=True)
class ConformalFactor:
    """
    Strictly positive trigonometric polynomial h defining g = h²·(flat).

    h(u) = offset + Σ a·cos(2π⟨m, u⟩ + φ), with u the fractional coordinates,
    so h is periodic on the torus for any lattice.
    """

    offset: float
    terms: Tuple[FourierTerm, ...] = ()

    def __post_init__(self):
        """Validate positivity on a grid that resolves the factor."""
        object.__setattr__(self, 'offset', float(self.offset))
        object.__setattr__(self, 'terms', tuple(self.terms))
        reference = Grid(tuple(max(8, 4 * k + 4) for k in self.max_wavenumbers()))
        minimum = float(np.min(self._evaluate(reference)))
        if not minimum > 0:
            raise InvariantViolationError(f"Conformal factor must be positive, minimum sample is {minimum}")

    @classmethod
    def constant(cls, value: float = 1.0) -> 'ConformalFactor':
        """Constant factor."""
        return cls(value)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ConformalFactor':
        """Create a ConformalFactor from {'offset', 'terms': [{'m', 'amplitude', 'phase'}]}."""
        terms = tuple(
            FourierTerm(tuple(term['m']), term['amplitude'], term.get('phase', 0.0))
            for term in data.get('terms', [])
        )
        return cls(data['offset'], terms)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format."""
        return {
            'offset': self.offset,
            'terms': [{'m': list(t.m), 'amplitude': t.amplitude, 'phase': t.phase} for t in self.terms]
        }

    @property
    def is_constant(self) -> bool:
        """Whether all terms vanish."""
        return all(t.amplitude == 0.0 or t.m == (0, 0, 0) for t in self.terms)

    def max_wavenumbers(self) -> Tuple[int, int, int]:
        """Largest |m_i| per axis."""
        if not self.terms:
            return (0, 0, 0)
        return tuple(int(max(abs(t.m[i]) for t in self.terms)) for i in range(3))

    def _evaluate(self, grid: Grid) -> np.ndarray:
        u = grid.fractional_coordinates()
        values = np.full(grid.shape, self.offset)
        for term in self.terms:
            angle = 2.0 * np.pi * np.einsum('i,i...->...', np.array(term.m, dtype=float), u)
            values = values + term.amplitude * np.cos(angle + term.phase)
        return values

    def samples(self, grid: Grid) -> np.ndarray:
        """
        Sample h on the grid (cached, read-only).

        Args:
            grid: Sampling grid

        Returns:
            Array of shape (n1, n2, n3)
        """
        cache = get_cache_manager()
        cached = cache.get('conformal_samples', self.to_dict(), grid.n)
        if cached is not None:
            return cached
        values = self._evaluate(grid)
        minimum = float(np.min(values))
        if not minimum > 0:
            raise InvariantViolationError(f"Conformal factor must be positive, minimum sample is {minimum}")
        values = _read_only(values)
        cache.set('conformal_samples', values, self.to_dict(), grid.n)
        return values

    def check_admissible(self, grid: Grid) -> None:
        """
        Check the bandlimit |m_i| < n_i/4 and positivity on `grid`.

        Raises:
            InvariantViolationError: if the factor cannot be resolved on the grid
        """
        for axis, (k, n) in enumerate(zip(self.max_wavenumbers(), grid.n)):
            if not 4 * k < n:
                raise InvariantViolationError(
                    f"Conformal factor wavenumber {k} on axis {axis} exceeds the bandlimit of grid {grid.n}"
                )
        self.samples(grid)

    def __mul__(self, other: 'ConformalFactor') -> 'ConformalFactor':
        """Exact product of two factors (product-to-sum expansion)."""
        terms: List[FourierTerm] = []
        terms.extend(FourierTerm(t.m, other.offset * t.amplitude, t.phase) for t in self.terms)
        terms.extend(FourierTerm(t.m, self.offset * t.amplitude, t.phase) for t in other.terms)
        for a in self.terms:
            for b in other.terms:
                half = 0.5 * a.amplitude * b.amplitude
                terms.append(FourierTerm(tuple(p + q for p, q in zip(a.m, b.m)), half, a.phase + b.phase))
                terms.append(FourierTerm(tuple(p - q for p, q in zip(a.m, b.m)), half, a.phase - b.phase))
        return ConformalFactor(self.offset * other.offset, tuple(terms))


@dataclass(frozen=True, eq=False)
class VolumeWeight:
    """
    Grid samples of a positive volume density w (w = h³ for g = h²·flat).

    The lattice fixes vol(Λ) for quadrature and the Euclidean derivatives;
    it defaults to the unit cube.
    """

    grid: Grid
    values: np.ndarray
    lattice: Optional[Lattice] = None

    def __post_init__(self):
        """Validate shape and positivity."""
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise InvariantViolationError(f"Weight shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(values > 0):
            raise InvariantViolationError("Volume weight must be strictly positive")
        if self.lattice is None:
            object.__setattr__(self, 'lattice', Lattice.cubic())
        object.__setattr__(self, 'values', _read_only(values))

    @classmethod
    def unit(cls, grid: Grid, lattice: Optional[Lattice] = None) -> 'VolumeWeight':
        """w ≡ 1."""
        return cls(grid, np.ones(grid.shape), lattice)

    @classmethod
    def from_factor(cls, factor: Optional[ConformalFactor], grid: Grid,
                    lattice: Optional[Lattice] = None) -> 'VolumeWeight':
        """w = h³ (or 1 when no factor is given)."""
        if factor is None:
            return cls.unit(grid, lattice)
        return cls(grid, factor.samples(grid) ** 3, lattice)

    @property
    def covolume(self) -> float:
        """vol(Λ)."""
        return self.lattice.volume


@dataclass(frozen=True)
class OperatorSpec:
    """Specification of a Dirac operator on a flat or conformally flat torus."""

    lattice: Lattice
    spin: SpinStructure
    grid: Grid
    conformal: Optional[ConformalFactor] = None

    def __post_init__(self):
        """Validate the conformal factor against the grid."""
        if self.conformal is not None:
            self.conformal.check_admissible(self.grid)

    @property
    def is_flat(self) -> bool:
        """Whether the metric is flat (no conformal factor)."""
        return self.conformal is None

    def weight(self) -> VolumeWeight:
        """Volume weight h³ of the metric."""
        return VolumeWeight.from_factor(self.conformal, self.grid, self.lattice)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format."""
        return {
            'lattice': self.lattice.to_dict(),
            'spin': self.spin.to_dict(),
            'grid': self.grid.to_dict(),
            'conformal': None if self.conformal is None else self.conformal.to_dict()
        }


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Eigenvalue, normalised physical eigenspinor and its certified residual."""

    eigenvalue: float
    field: SpinorField
    residual: float
    cluster_id: int = 0
    multiplicity: int = 0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format (without the field samples)."""
        return {
            'eigenvalue': self.eigenvalue,
            'residual': self.residual,
            'cluster_id': self.cluster_id,
            'multiplicity': self.multiplicity,
            'min_spinor_norm': float(np.sqrt(np.min(self.field.pointwise_norm_sq())))
        }


class Cluster(NamedTuple):
    """Eigenvalue cluster: mean value and complex multiplicity."""

    lambda_mean: float
    multiplicity: int

    @property
    def simple_over_h(self) -> bool:
        """Whether the eigenspace is one dimensional over the quaternions."""
        return self.multiplicity == 2


@dataclass(frozen=True, eq=False)
class Framing:
    """
    Three grid-sampled vector fields adapted to the metric g = h²·flat.

    Components are Euclidean; g-lengths are h·(Euclidean length).
    """

    x1: VectorField
    x2: VectorField
    x3: VectorField
    lattice: Lattice
    metric_h: Optional[ConformalFactor] = None
    provenance: Dict[str, Any] = field(default_factory=dict)
    min_length: float = field(init=False, default=0.0)
    mean_length: float = field(init=False, default=0.0)
    degenerate: bool = field(init=False, default=True)

    def __post_init__(self):
        """Validate the grids and record the nowhere-vanishing certificate."""
        self.x1.check_grid(self.x2)
        self.x1.check_grid(self.x3)
        lengths = self.g_lengths()[0]
        min_length = float(np.min(lengths))
        mean_length = float(np.mean(lengths))
        object.__setattr__(self, 'min_length', min_length)
        object.__setattr__(self, 'mean_length', mean_length)
        object.__setattr__(self, 'degenerate', not min_length >= config.DEGENERACY_RATIO * mean_length or mean_length == 0.0)

    @property
    def grid(self) -> Grid:
        """Common grid of the three fields."""
        return self.x1.grid

    @property
    def fields(self) -> Tuple[VectorField, VectorField, VectorField]:
        """The three vector fields."""
        return (self.x1, self.x2, self.x3)

    def metric_samples(self) -> np.ndarray:
        """Samples of h (ones for the flat metric)."""
        if self.metric_h is None:
            return np.ones(self.grid.shape)
        return self.metric_h.samples(self.grid)

    def g_lengths(self) -> np.ndarray:
        """Pointwise g-lengths of X1, X2, X3, shape (3, n1, n2, n3)."""
        h = self.metric_samples()
        return np.array([h * x.euclidean_norm() for x in self.fields])

    def weight(self) -> VolumeWeight:
        """Volume weight h³ of the adapted metric."""
        return VolumeWeight.from_factor(self.metric_h, self.grid, self.lattice)


@dataclass(frozen=True)
class FramingReport:
    """Numerical certificate for a framing."""

    max_divergence: float
    max_orthogonality_defect: float
    max_length_spread: float
    min_length: float
    max_length: float
    degenerate: bool
    thresholds: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """Whether every metric is within its threshold and the framing is nondegenerate."""
        if self.degenerate:
            return False
        checks = {
            'divergence': self.max_divergence,
            'orthogonality': self.max_orthogonality_defect,
            'length_spread': self.max_length_spread
        }
        return all(value <= self.thresholds.get(name, np.inf) for name, value in checks.items())

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format."""
        return {
            'max_divergence': self.max_divergence,
            'max_orthogonality_defect': self.max_orthogonality_defect,
            'max_length_spread': self.max_length_spread,
            'min_length': self.min_length,
            'max_length': self.max_length,
            'degenerate': self.degenerate,
            'thresholds': dict(self.thresholds),
            'passed': self.passed
        }
