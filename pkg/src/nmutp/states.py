"""Density matrices and the parametrisations used to build them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .linalg import DEFAULT_TOL, IDENTITY2, PAULIS, Tolerances, as_square, is_hermitian

__all__ = [
    "BlochVector",
    "DensityMatrix",
    "ProbVector",
    "SimplexAngles",
    "UnitaryMatrix",
    "bloch_to_density",
    "bloch_batch_to_density",
    "density_to_bloch",
    "simplex_from_angles",
    "density_from_spectrum",
    "density_from_spectrum_batch",
    "maximally_mixed",
    "pure_state",
    "purity",
    "validate_density_batch",
]

_RANGE_SLACK = 1e-12


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BlochVector:
    """Spherical coordinates of a qubit Bloch vector.

    ``norm`` is the Euclidean length in [0, 1], ``theta`` the polar angle in
    [0, pi] and ``phi`` the azimuth in [0, 2 pi].
    """

    norm: float
    theta: float
    phi: float

    def __post_init__(self):
        checks = (
            ("norm", self.norm, 1.0),
            ("theta", self.theta, math.pi),
            ("phi", self.phi, 2.0 * math.pi),
        )
        for name, value, hi in checks:
            if not (-_RANGE_SLACK <= value <= hi + _RANGE_SLACK):
                raise ValidationError(f"{name}={value!r} outside [0, {hi}]")

    @property
    def cartesian(self):
        st = math.sin(self.theta)
        return np.array([
            self.norm * st * math.cos(self.phi),
            self.norm * st * math.sin(self.phi),
            self.norm * math.cos(self.theta),
        ])

    @classmethod
    def from_cartesian(cls, vec):
        x, y, z = (float(v) for v in vec)
        norm = math.sqrt(x * x + y * y + z * z)
        if norm > 1.0 + _RANGE_SLACK:
            raise ValidationError(f"Bloch vector norm {norm} exceeds 1")
        norm = min(norm, 1.0)
        theta = math.atan2(math.hypot(x, y), z) if norm > 0 else 0.0
        phi = math.atan2(y, x) % (2.0 * math.pi)
        return cls(norm, theta, phi)


@dataclass(frozen=True)
class DensityMatrix:
    """A validated density operator (Hermitian, unit trace, PSD).

    Pure states are rank-one instances; there is no separate ket type.
    """

    mat: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False, repr=False)

    def __post_init__(self):
        mat = as_square(self.mat, "density matrix")
        if not is_hermitian(mat):
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(mat)
        if abs(tr - 1.0) > 1e-12:
            raise ValidationError(f"density matrix has trace {tr.real:.15g}, expected 1")
        lam_min = float(np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0])
        if lam_min < -self.tol.psd_tol:
            raise ValidationError(f"density matrix has negative eigenvalue {lam_min:.3e}")
        object.__setattr__(self, "mat", _frozen(mat))

    @property
    def dim(self):
        return self.mat.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.mat.shape == other.mat.shape and bool(np.array_equal(self.mat, other.mat))

    def __hash__(self):
        return hash(self.mat.tobytes())


@dataclass(frozen=True)
class ProbVector:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValidationError("probability vector must be 1-D and non-empty")
        if np.any(p < 0.0) or not np.all(np.isfinite(p)):
            raise ValidationError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError(f"probabilities sum to {p.sum():.15g}, expected 1")
        object.__setattr__(self, "probs", _frozen(p))

    @property
    def dim(self):
        return self.probs.size


@dataclass(frozen=True)
class SimplexAngles:
    """Angles ``theta_1 .. theta_{d-1}`` in [0, pi/2]; ``theta_0 = pi/2`` is implicit."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        if a.ndim != 1 or a.size < 1:
            raise ValidationError("need at least one angle (d >= 2)")
        if np.any(a < -_RANGE_SLACK) or np.any(a > math.pi / 2 + _RANGE_SLACK):
            raise ValidationError("simplex angles must lie in [0, pi/2]")
        object.__setattr__(self, "angles", _frozen(a))

    @property
    def dim(self):
        return self.angles.size + 1


@dataclass(frozen=True)
class UnitaryMatrix:
    mat: np.ndarray

    def __post_init__(self):
        u = as_square(self.mat, "unitary")
        err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
        if err > 1e-12:
            raise ValidationError(f"matrix is not unitary (max deviation {err:.3e})")
        object.__setattr__(self, "mat", _frozen(u))

    @property
    def dim(self):
        return self.mat.shape[0]


def bloch_batch_to_density(vectors):
    """Map cartesian Bloch vectors of shape (N, 3) to (N, 2, 2) density matrices."""
    vectors = np.asarray(vectors, dtype=float)
    return 0.5 * (IDENTITY2 + np.einsum("zi,ijk->zjk", vectors, PAULIS))


def bloch_to_density(b: BlochVector) -> DensityMatrix:
    """Qubit state ``(I + x.sigma) / 2`` for the Bloch vector ``b``."""
    return DensityMatrix(bloch_batch_to_density(b.cartesian[None])[0])


def density_to_bloch(x) -> BlochVector:
    """Inverse of :func:`bloch_to_density`: ``x_j = Tr(x sigma_j)``."""
    mat = x.mat if isinstance(x, DensityMatrix) else as_square(x)
    if mat.shape != (2, 2):
        raise ValidationError("Bloch coordinates exist only for qubits")
    vec = np.einsum("ij,kji->k", mat, PAULIS).real
    return BlochVector.from_cartesian(vec)


def simplex_from_angles(a: SimplexAngles) -> ProbVector:
    """Probabilities ``x_j = sin^2(theta_{j-1}) * prod_{k>=j} cos^2(theta_k)``."""
    theta = np.concatenate([[math.pi / 2], a.angles])
    sin2 = np.sin(theta) ** 2
    cos2 = np.cos(theta) ** 2
    d = a.dim
    probs = np.empty(d)
    tail = 1.0
    # x_j for j = d..1, accumulating the product of cos^2 from the top
    for j in range(d, 0, -1):
        probs[j - 1] = sin2[j - 1] * tail
        if j - 1 >= 1:
            tail *= cos2[j - 1]
    return ProbVector(probs / probs.sum())


def density_from_spectrum_batch(probs, unitaries):
    """``sum_j p_j U|j><j|U^dagger`` for stacks (N, d) and (N, d, d)."""
    probs = np.asarray(probs, dtype=float)
    u = np.asarray(unitaries, dtype=complex)
    if probs.ndim != 2 or u.shape != (probs.shape[0], probs.shape[1], probs.shape[1]):
        raise ValidationError(f"shape mismatch: probs {probs.shape}, unitaries {u.shape}")
    return np.einsum("zij,zj,zkj->zik", u, probs, u.conj())


def density_from_spectrum(p: ProbVector, u: UnitaryMatrix) -> DensityMatrix:
    if p.dim != u.dim:
        raise ValidationError(f"dimension mismatch: {p.dim} probabilities, unitary of size {u.dim}")
    return DensityMatrix(density_from_spectrum_batch(p.probs[None], u.mat[None])[0])


def maximally_mixed(d) -> DensityMatrix:
    if int(d) != d or d < 2:
        raise ValidationError(f"dimension must be an integer >= 2, got {d!r}")
    return DensityMatrix(np.eye(int(d), dtype=complex) / d)


def pure_state(ket) -> DensityMatrix:
    """Projector onto the normalised vector ``ket``."""
    ket = np.asarray(ket, dtype=complex).ravel()
    norm = np.linalg.norm(ket)
    if norm == 0.0:
        raise ValidationError("zero vector has no associated state")
    ket = ket / norm
    return DensityMatrix(np.outer(ket, ket.conj()))


def purity(x: DensityMatrix) -> float:
    """``Tr(x^2)``."""
    return float(np.sum(np.abs(x.mat) ** 2))


def validate_density_batch(mats, tol=DEFAULT_TOL):
    """Raise :class:`ValidationError` unless every matrix in the stack is a state."""
    mats = np.asarray(mats)
    if not is_hermitian(mats):
        raise ValidationError("batch contains non-Hermitian matrices")
    traces = np.trace(mats, axis1=1, axis2=2)
    if np.any(np.abs(traces - 1.0) > 1e-12):
        raise ValidationError("batch contains matrices without unit trace")
    lam_min = np.linalg.eigvalsh(mats)[:, 0]
    if np.any(lam_min < -tol.psd_tol):
        raise ValidationError(f"batch contains a matrix with eigenvalue {lam_min.min():.3e}")
