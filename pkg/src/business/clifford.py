# -*- coding: utf-8 -*-
"""
Pointwise spinor algebra for spinframe.
Pauli matrices, Clifford multiplication, the quadratic map and the right
quaternionic action on C² ≡ ℍ, (v, w) ↦ v + jw.

Scalar operations work on the `Spinor`, `Vec3` and `UnitQuaternion` value
types; the `*_array` variants act on stacked arrays of shape (2, ...) and
(3, ...) and are what the field-level services use.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.data.data_models import InvariantViolationError, SpinStructure, SpinorField
from src.utils.config import config


# Clifford images of e1, e2, e3. Sign convention: σ1σ2 = -σ3.
SIGMA = np.array([
    [[1j, 0], [0, -1j]],
    [[0, -1], [1, 0]],
    [[0, 1j], [1j, 0]],
], dtype=complex)

SQRT_HALF = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class Spinor:
    """A pair of complex numbers (alpha, beta)."""

    alpha: complex
    beta: complex

    @classmethod
    def from_array(cls, values: np.ndarray) -> 'Spinor':
        """Create a Spinor from a length-2 array."""
        return cls(complex(values[0]), complex(values[1]))

    def as_array(self) -> np.ndarray:
        """Components as a complex array of shape (2,)."""
        return np.array([self.alpha, self.beta], dtype=complex)

    @property
    def norm_sq(self) -> float:
        """|alpha|² + |beta|²."""
        return abs(self.alpha) ** 2 + abs(self.beta) ** 2

    def __mul__(self, scalar: complex) -> 'Spinor':
        return Spinor(self.alpha * scalar, self.beta * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Vec3:
    """Real components in an oriented orthonormal frame (e1, e2, e3)."""

    c1: float
    c2: float
    c3: float

    @classmethod
    def from_array(cls, values: np.ndarray) -> 'Vec3':
        """Create a Vec3 from a length-3 array."""
        return cls(float(values[0]), float(values[1]), float(values[2]))

    def as_array(self) -> np.ndarray:
        """Components as a real array of shape (3,)."""
        return np.array([self.c1, self.c2, self.c3], dtype=float)

    @property
    def norm(self) -> float:
        """Euclidean norm."""
        return float(np.linalg.norm(self.as_array()))

    def dot(self, other: 'Vec3') -> float:
        """Euclidean inner product."""
        return float(self.as_array() @ other.as_array())


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion w + xi + yj + zk."""

    w: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        """Validate the unit norm."""
        norm_sq = self.w ** 2 + self.x ** 2 + self.y ** 2 + self.z ** 2
        if abs(norm_sq - 1.0) > config.QUATERNION_UNIT_TOL:
            raise InvariantViolationError(f"Quaternion must have unit norm, |q|² = {norm_sq}")

    def as_array(self) -> np.ndarray:
        """Components (w, x, y, z)."""
        return np.array([self.w, self.x, self.y, self.z], dtype=float)

    def __mul__(self, other: 'UnitQuaternion') -> 'UnitQuaternion':
        """Hamilton product self·other."""
        w0, x0, y0, z0 = self.w, self.x, self.y, self.z
        w1, x1, y1, z1 = other.w, other.x, other.y, other.z
        return UnitQuaternion(
            w0 * w1 - x0 * x1 - y0 * y1 - z0 * z1,
            w0 * x1 + x0 * w1 + y0 * z1 - z0 * y1,
            w0 * y1 - x0 * z1 + y0 * w1 + z0 * x1,
            w0 * z1 + x0 * y1 - y0 * x1 + z0 * w1
        )


IDENTITY = UnitQuaternion(1.0)
QUAT_I = UnitQuaternion(0.0, 1.0)
QUAT_J = UnitQuaternion(0.0, 0.0, 1.0)
QUAT_K = UnitQuaternion(0.0, 0.0, 0.0, 1.0)
# Rotations taking Ψ to the second and third spinor of the framing triple
ONE_PLUS_K = UnitQuaternion(SQRT_HALF, 0.0, 0.0, SQRT_HALF)
ONE_PLUS_J = UnitQuaternion(SQRT_HALF, 0.0, SQRT_HALF, 0.0)


def clifford_matrix(v: np.ndarray) -> np.ndarray:
    """2x2 matrix Σ v_i σ_i for a real 3-vector."""
    return np.einsum('i,ijk->jk', np.asarray(v, dtype=float), SIGMA)


def clifford_mul_array(v: np.ndarray, s: np.ndarray) -> np.ndarray:
    """
    (Σ v_i σ_i)·s for stacked vectors (3, ...) and spinors (2, ...).

    Written out so it stays exact: σ entries are 0, ±1, ±i.
    """
    alpha, beta = s[0], s[1]
    return np.array([
        1j * v[0] * alpha - v[1] * beta + 1j * v[2] * beta,
        -1j * v[0] * beta + v[1] * alpha + 1j * v[2] * alpha,
    ])


def quadratic_map_array(s: np.ndarray) -> np.ndarray:
    """(½(|α|²-|β|²), Im(αβ̄), Re(αβ̄)) for stacked spinors (2, ...)."""
    alpha, beta = s[0], s[1]
    cross = alpha * np.conj(beta)
    return np.array([
        0.5 * (np.abs(alpha) ** 2 - np.abs(beta) ** 2),
        cross.imag,
        cross.real,
    ])


def apply_j_array(s: np.ndarray) -> np.ndarray:
    """(α, β)·j = (-β̄, ᾱ) for stacked spinors (2, ...)."""
    return np.array([-np.conj(s[1]), np.conj(s[0])])


def quat_act_array(q: UnitQuaternion, s: np.ndarray) -> np.ndarray:
    """
    Right action s·q for stacked spinors.

    s·q = (w + xi)·s + (y - zi)·(s·j), using s·k = (s·i)·j = -i·(s·j).
    """
    return (q.w + 1j * q.x) * s + (q.y - 1j * q.z) * apply_j_array(s)


def frame_triple_array(s: np.ndarray) -> np.ndarray:
    """Quadratic maps of s, s·(1+k)/√2 and s·(1+j)/√2, shape (3, 3, ...)."""
    return np.array([
        quadratic_map_array(s),
        quadratic_map_array(quat_act_array(ONE_PLUS_K, s)),
        quadratic_map_array(quat_act_array(ONE_PLUS_J, s)),
    ])


def clifford_mul(v: Vec3, s: Spinor) -> Spinor:
    """Clifford multiplication (Σ v_i σ_i)·s."""
    return Spinor.from_array(clifford_mul_array(v.as_array(), s.as_array()))


def quadratic_map(s: Spinor) -> Vec3:
    """The quadratic map ρ⁻¹(i(ΨΨ*)₀); its norm is ½(|α|²+|β|²)."""
    return Vec3.from_array(quadratic_map_array(s.as_array()))


def apply_j(s: Spinor) -> Spinor:
    """Quaternionic structure (α, β) ↦ (-β̄, ᾱ); antilinear, squares to -1."""
    return Spinor.from_array(apply_j_array(s.as_array()))


def quat_act(q: UnitQuaternion, s: Spinor) -> Spinor:
    """
    Right action of a unit quaternion.

    Satisfies quat_act(q2, quat_act(q1, s)) == quat_act(q1 * q2, s).
    """
    if not isinstance(q, UnitQuaternion):
        raise InvariantViolationError(f"Expected a UnitQuaternion, got {type(q).__name__}")
    return Spinor.from_array(quat_act_array(q, s.as_array()))


def frame_triple(s: Spinor) -> Tuple[Vec3, Vec3, Vec3]:
    """
    Vectors of s, s·(1+k)/√2 and s·(1+j)/√2 under the quadratic map.

    The three are pairwise orthogonal with common norm ½|s|².
    """
    triple = frame_triple_array(s.as_array())
    return Vec3.from_array(triple[0]), Vec3.from_array(triple[1]), Vec3.from_array(triple[2])


def twist_phase(spin: SpinStructure, grid_coordinates: np.ndarray) -> np.ndarray:
    """exp(2πi⟨ε̂, u⟩) at fractional coordinates u of shape (3, ...)."""
    return np.exp(2j * np.pi * np.einsum('i,i...->...', spin.shift, grid_coordinates))


def quat_act_field(q: UnitQuaternion, f: SpinorField, spin: SpinStructure) -> SpinorField:
    """
    Right action on the physical field, returned as its periodic representative.

    The physical field is exp(2πi⟨ε̂, u⟩)·f; j conjugates that phase, so the
    j-part picks up exp(-2πi⟨eps, u⟩) and momentum ξ goes to -ξ.
    """
    phase_sq = twist_phase(spin, f.grid.fractional_coordinates()) ** 2
    data = (q.w + 1j * q.x) * f.data + (q.y - 1j * q.z) * np.conj(phase_sq) * apply_j_array(f.data)
    return SpinorField(f.grid, data)


def apply_j_field(f: SpinorField, spin: SpinStructure) -> SpinorField:
    """Field-level Ψ ↦ Ψ·j."""
    return quat_act_field(QUAT_J, f, spin)
