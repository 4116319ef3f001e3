"""Dense complex linear algebra: Hermitian spectra, Kronecker products,
partial traces and trace norms.

Matrices are plain ``numpy`` arrays of shape ``(n, n)``; the ``*_batch``
variants take stacks of shape ``(N, n, n)`` and work elementwise over the
leading axis.  The eigensolver is a cyclic complex Jacobi method, vectorised
across the batch so that millions of small matrices can be diagonalised
without a Python-level loop per matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, SizeLimitError, ValidationError

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "MAX_DIM",
    "IDENTITY2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULIS",
    "as_square",
    "is_hermitian",
    "kron",
    "kron_batch",
    "hermitian_eigenvalues",
    "eigvalsh_batch",
    "trace_norm",
    "trace_norm_batch",
    "partial_trace_second",
    "trace_product",
]

MAX_DIM = 1024
JACOBI_REL_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
HERMITIAN_ATOL = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
for _m in (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z, PAULIS):
    _m.setflags(write=False)


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds used for validation and strict-inequality tests.

    Attributes
    ----------
    eig_tol : float
        Scale of the absolute eigenvalue error accepted from the solver.
    psd_tol : float
        Most negative eigenvalue still accepted for a density matrix.
    tie_tol : float
        Differences of distances at or below this are treated as ties.
    """

    eig_tol: float = 1e-12
    psd_tol: float = 1e-12
    tie_tol: float = 1e-12

    def __post_init__(self):
        for name in ("eig_tol", "psd_tol", "tie_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-6):
                raise ValidationError(f"{name} must lie in (0, 1e-6), got {value!r}")


DEFAULT_TOL = Tolerances()


def as_square(a, name="matrix"):
    """Return ``a`` as a finite complex square 2-D array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def _as_square_batch(a, name="matrices"):
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[1] == 0:
        raise ValidationError(f"{name} must have shape (N, n, n), got {arr.shape}")
    return arr


def is_hermitian(a, atol=HERMITIAN_ATOL):
    a = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    return bool(np.all(np.abs(a - np.conj(np.swapaxes(a, -1, -2))) <= atol * scale))


def _check_size(dim, max_dim):
    if dim > max_dim:
        raise SizeLimitError(f"dimension {dim} exceeds the configured maximum {max_dim}")


def kron(a, b, max_dim=MAX_DIM):
    """Kronecker product ``a ⊗ b``; entry ``(i*n+k, j*n+l)`` is ``a[i,j]*b[k,l]``."""
    a = as_square(a, "a")
    b = as_square(b, "b")
    _check_size(a.shape[0] * b.shape[0], max_dim)
    return np.kron(a, b)


def kron_batch(a, b, max_dim=MAX_DIM):
    """Pairwise Kronecker products of two equally long stacks."""
    a = _as_square_batch(a, "a")
    b = _as_square_batch(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ValidationError(f"batch lengths differ: {a.shape[0]} vs {b.shape[0]}")
    m, n = a.shape[1], b.shape[1]
    _check_size(m * n, max_dim)
    out = np.einsum("zij,zkl->zikjl", a, b)
    return out.reshape(a.shape[0], m * n, m * n)


def _jacobi_sweeps(a, rel_tol, max_sweeps):
    """Diagonalise the Hermitian stack ``a`` in place; return eigenvalues."""
    count, n = a.shape[0], a.shape[1]
    if n == 1:
        return a[:, :, 0].real.copy()
    iu, ju = np.triu_indices(n, 1)
    fro = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    threshold = rel_tol * fro
    pairs = list(zip(iu.tolist(), ju.tolist()))
    active = np.arange(count)
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(2.0 * np.sum(np.abs(a[active][:, iu, ju]) ** 2, axis=1))
        still = off > threshold[active]
        active, off = active[still], off[still]
        if active.size == 0:
            return np.sort(np.diagonal(a, axis1=1, axis2=2).real, axis=1)
        if sweep == max_sweeps:
            worst = float(off.max())
            raise ConvergenceError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
                f"(off-diagonal residual {worst:.3e})",
                residual=worst,
            )
        sub = a[active]
        for p, q in pairs:
            apq = sub[:, p, q]
            mag = np.abs(apq)
            nonzero = mag > 0.0
            safe = np.where(nonzero, mag, 1.0)
            phase = np.where(nonzero, apq / safe, 1.0)
            tau = (sub[:, q, q].real - sub[:, p, p].real) / (2.0 * safe)
            sign = np.where(tau >= 0.0, 1.0, -1.0)
            t = np.where(nonzero, sign / (np.abs(tau) + np.sqrt(1.0 + tau * tau)), 0.0)
            c = (1.0 / np.sqrt(1.0 + t * t))[:, None]
            s = (t * c[:, 0] * phase)[:, None]
            col_p = sub[:, :, p].copy()
            col_q = sub[:, :, q].copy()
            sub[:, :, p] = c * col_p - np.conj(s) * col_q
            sub[:, :, q] = s * col_p + c * col_q
            row_p = sub[:, p, :].copy()
            row_q = sub[:, q, :].copy()
            sub[:, p, :] = c * row_p - s * row_q
            sub[:, q, :] = np.conj(s) * row_p + c * row_q
            sub[:, p, q] = 0.0
            sub[:, q, p] = 0.0
        a[active] = sub


def eigvalsh_batch(h, backend="jacobi", check=True, rel_tol=JACOBI_REL_TOL,
                   max_sweeps=JACOBI_MAX_SWEEPS):
    """Ascending eigenvalues of a stack of Hermitian matrices.

    Parameters
    ----------
    h : array_like, shape (N, n, n)
        Hermitian matrices.
    backend : {"jacobi", "lapack", "auto"}
        ``"jacobi"`` runs the cyclic Jacobi solver of this module,
        ``"lapack"`` defers to ``numpy.linalg.eigvalsh`` and ``"auto"`` picks
        Jacobi for ``n <= 4`` and LAPACK otherwise.
    check : bool
        Verify Hermiticity before solving.

    Returns
    -------
    ndarray, shape (N, n)
    """
    h = _as_square_batch(h)
    if check and not is_hermitian(h):
        raise ValidationError("input is not Hermitian within tolerance")
    # symmetrise so rounding in construction cannot leak into the spectrum
    a = 0.5 * (h + np.conj(np.swapaxes(h, 1, 2)))
    if backend == "auto":
        backend = "jacobi" if a.shape[1] <= 4 else "lapack"
    if backend == "jacobi":
        return _jacobi_sweeps(a, rel_tol, max_sweeps)
    if backend == "lapack":
        return np.linalg.eigvalsh(a)
    raise ValidationError(f"unknown eigensolver backend {backend!r}")


def hermitian_eigenvalues(h, backend="jacobi"):
    """Spectrum of a single Hermitian matrix, ascending."""
    h = as_square(h, "h")
    return eigvalsh_batch(h[None], backend=backend)[0]


def trace_norm(h, backend="jacobi"):
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(hermitian_eigenvalues(h, backend=backend))))


def trace_norm_batch(h, backend="auto", check=True):
    return np.sum(np.abs(eigvalsh_batch(h, backend=backend, check=check)), axis=1)


def partial_trace_second(x, m, n):
    """Trace out the second factor of an ``(m*n)``-dimensional operator."""
    x = as_square(x, "x")
    if m < 1 or n < 1 or x.shape[0] != m * n:
        raise ValidationError(f"matrix of size {x.shape[0]} does not factor as {m}*{n}")
    return np.einsum("ikjk->ij", x.reshape(m, n, m, n))


def trace_product(a, b):
    """``Tr(a b)`` for Hermitian ``a`` and ``b``, returned as a real number."""
    a = as_square(a, "a")
    b = as_square(b, "b")
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    value = np.sum(a * b.T)
    if abs(value.imag) > 1e-12:
        raise ValidationError(f"Tr(ab) has imaginary part {value.imag:.3e}; inputs not Hermitian?")
    return float(value.real)
