"""Trace distance, its closed forms for special state classes, and the
cross-validation between the numeric and analytic routes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError
from .linalg import kron_batch, trace_norm, trace_norm_batch
from .sampling import spherical_to_cartesian
from .states import DensityMatrix, bloch_batch_to_density

__all__ = [
    "CollinearPairSpec",
    "trace_distance",
    "trace_distance_batch",
    "tensor_square_distance_batch",
    "trace_distance_pure",
    "trace_distance_pure_tensor",
    "trace_distance_collinear",
    "collinear_pair_matrices",
    "collinear_pair_batch",
    "pure_pair_batch",
    "crosscheck_precision",
    "PRECISION_TOL",
]

PRECISION_TOL = 1e-12


@dataclass(frozen=True)
class CollinearPairSpec:
    """Two qubit states with Bloch vectors ``r n`` and ``sign * z n``."""

    direction: tuple
    r: float
    z: float
    sign: int = 1

    def __post_init__(self):
        n = np.asarray(self.direction, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-14:
            raise ValidationError("direction must be a unit 3-vector")
        if not (0.0 <= self.r <= 1.0 and 0.0 <= self.z <= 1.0):
            raise ValidationError("r and z must lie in [0, 1]")
        if self.sign not in (1, -1):
            raise ValidationError("sign must be +1 or -1")
        object.__setattr__(self, "direction", tuple(float(v) for v in n))


def trace_distance(x: DensityMatrix, y: DensityMatrix, backend="jacobi") -> float:
    """``||x - y||_1``, a number in [0, 2]."""
    if x.dim != y.dim:
        raise ValidationError(f"dimension mismatch: {x.dim} vs {y.dim}")
    return trace_norm(x.mat - y.mat, backend=backend)


def trace_distance_batch(x, y, backend="auto"):
    """Row-wise trace distances between two (N, d, d) stacks."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape:
        raise ValidationError(f"shape mismatch: {x.shape} vs {y.shape}")
    return trace_norm_batch(x - y, backend=backend, check=False)


def tensor_square_distance_batch(x, y, backend="auto", max_elements=1 << 21):
    """Row-wise ``||x⊗x - y⊗y||_1``.

    Work is chunked so that at most ``max_elements`` tensor entries live at
    once; every row is solved independently, so chunking never changes results.
    """
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape or x.ndim != 3:
        raise ValidationError(f"shape mismatch: {x.shape} vs {y.shape}")
    step = max(1, max_elements // x.shape[1] ** 4)
    out = np.empty(x.shape[0])
    for lo in range(0, x.shape[0], step):
        xs, ys = x[lo:lo + step], y[lo:lo + step]
        out[lo:lo + step] = trace_norm_batch(kron_batch(xs, xs) - kron_batch(ys, ys),
                                             backend=backend, check=False)
    return out


def _check_overlap(c):
    if not (0.0 <= c <= 1.0):
        raise ValidationError(f"overlap must lie in [0, 1], got {c!r}")


def trace_distance_pure(c):
    """Distance between pure states with overlap ``Tr(xy) = c``: ``2 sqrt(1 - c)``."""
    _check_overlap(c)
    return 2.0 * math.sqrt(1.0 - c)


def trace_distance_pure_tensor(c):
    """Distance between the tensor squares of pure states: ``2 sqrt(1 - c**2)``."""
    _check_overlap(c)
    return 2.0 * math.sqrt(1.0 - c * c)


def trace_distance_collinear(spec: CollinearPairSpec):
    """Closed-form ``(base, tensor)`` distances for a collinear qubit pair."""
    base = abs(spec.r - spec.sign * spec.z)
    tensor = base * (2.0 + abs(spec.r + spec.sign * spec.z)) / 2.0
    return base, tensor


def collinear_pair_matrices(direction, r, z, sign):
    """Density matrices for stacks of collinear pairs; ``direction`` is (N, 3)."""
    direction = np.asarray(direction, dtype=float)
    r = np.asarray(r, dtype=float)[:, None]
    zs = (np.asarray(sign, dtype=float) * np.asarray(z, dtype=float))[:, None]
    return bloch_batch_to_density(r * direction), bloch_batch_to_density(zs * direction)


def collinear_pair_batch(s, n):
    """``n`` random collinear qubit pairs and their closed-form distances.

    The shared direction is uniform on the sphere, ``r`` and ``z`` are
    uniform on [0, 1] and the relative sign is a fair coin.  Returns
    ``(x, y, base, tensor)``.
    """
    t = s.uniform((2, n))
    direction = spherical_to_cartesian(np.ones(n), np.arccos(-1.0 + 2.0 * t[0]), 2.0 * np.pi * t[1])
    r, z = s.uniform(n), s.uniform(n)
    sign = np.where(s.uniform(n) < 0.5, -1.0, 1.0)
    x, y = collinear_pair_matrices(direction, r, z, sign)
    base = np.abs(r - sign * z)
    return x, y, base, base * (2.0 + np.abs(r + sign * z)) / 2.0


def pure_pair_batch(d, s, n):
    """``n`` pairs of Haar-random pure states plus their exact overlaps.

    The overlap ``|<psi|phi>|^2`` is computed from the kets, never from the
    density matrices, so it stays independent of the matrix route.
    """
    kets = []
    for _ in range(2):
        psi = s.gen.standard_normal((n, d)) + 1j * s.gen.standard_normal((n, d))
        kets.append(psi / np.linalg.norm(psi, axis=1, keepdims=True))
    psi, phi = kets
    overlap = np.abs(np.einsum("zi,zi->z", psi.conj(), phi)) ** 2
    x = np.einsum("zi,zj->zij", psi, psi.conj())
    y = np.einsum("zi,zj->zij", phi, phi.conj())
    return x, y, np.clip(overlap, 0.0, 1.0)


def crosscheck_precision(kind, s, n, d=2, tensor=None, backend="jacobi", chunk=16384):
    """Worst absolute gap between eigensolver and closed-form trace distances.

    Parameters
    ----------
    kind : {"collinear", "pure"}
        Class of analytically solvable pairs to draw.
    s : RngStream
    n : int
        Number of random pairs.
    d : int
        Dimension for the pure class (collinear pairs are always qubits).
    tensor : bool, optional
        Also compare tensor-square distances.  Defaults to on for collinear
        pairs and for pure pairs with ``d <= 4``.
    backend : str
        Eigensolver used on the numeric side.

    Returns
    -------
    dict
        ``worst_error``, ``worst_error_base``, ``worst_error_tensor`` and ``n``.
    """
    if kind not in ("collinear", "pure"):
        raise ValidationError(f"unknown pair class {kind!r}")
    if kind == "collinear":
        d = 2
    if tensor is None:
        tensor = kind == "collinear" or d <= 4
    worst_base = 0.0
    worst_tensor = 0.0
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        if kind == "collinear":
            x, y, base_exact, tensor_exact = collinear_pair_batch(s, m)
        else:
            x, y, c = pure_pair_batch(d, s, m)
            base_exact = 2.0 * np.sqrt(1.0 - c)
            tensor_exact = 2.0 * np.sqrt(1.0 - c * c)
        base_num = trace_distance_batch(x, y, backend=backend)
        worst_base = max(worst_base, float(np.max(np.abs(base_num - base_exact))))
        if tensor:
            tensor_num = tensor_square_distance_batch(x, y, backend=backend)
            worst_tensor = max(worst_tensor, float(np.max(np.abs(tensor_num - tensor_exact))))
    return {
        "kind": kind,
        "d": d,
        "n": n,
        "tensor_checked": bool(tensor),
        "worst_error_base": worst_base,
        "worst_error_tensor": worst_tensor if tensor else None,
        "worst_error": max(worst_base, worst_tensor),
    }
