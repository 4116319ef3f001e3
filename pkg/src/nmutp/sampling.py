"""Seeded random generation of every state class used in the experiments.

Randomness is organised in *streams*: an :class:`RngStream` is identified by a
master seed, a ``family`` tuple naming the experiment it belongs to and a
``stream_id``.  Its generator state is derived by hashing all three through
:class:`numpy.random.SeedSequence`, so any stream can be rebuilt on any
worker without coordination.

Every sampler comes in a scalar flavour returning a validated object and a
``*_batch`` flavour returning stacked arrays for the Monte Carlo loops.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError
from .states import (
    BlochVector,
    DensityMatrix,
    ProbVector,
    SimplexAngles,
    UnitaryMatrix,
    bloch_batch_to_density,
    bloch_to_density,
    density_from_spectrum,
    density_from_spectrum_batch,
    maximally_mixed,
    simplex_from_angles,
    validate_density_batch,
)

__all__ = [
    "BIT_GENERATORS",
    "RngStream",
    "StreamPlan",
    "SlotKind",
    "SPECTRUM_METHODS",
    "stable_key",
    "bloch_from_uniforms",
    "spherical_to_cartesian",
    "sample_bloch_ball",
    "sample_bloch_ball_batch",
    "sample_bloch_sphere",
    "sample_bloch_sphere_batch",
    "sample_simplex",
    "sample_simplex_batch",
    "sample_haar_unitary",
    "hurwitz_unitaries",
    "ginibre_unitaries",
    "sample_pure",
    "sample_pure_batch",
    "sample_state",
    "sample_states",
]

BIT_GENERATORS = {"pcg64": np.random.PCG64, "mt19937": np.random.MT19937}
SPECTRUM_METHODS = ("uniform", "trigonometric")
_UINT64 = (1 << 64) - 1


def stable_key(text):
    """32-bit integer derived from ``text``; used to name stream families."""
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "little")


class RngStream:
    """A reproducible, independently seeded source of random numbers.

    Parameters
    ----------
    seed : int
        Master seed (non-negative, < 2**64).
    stream_id : int
        Index of this stream inside ``family``.
    family : tuple of int
        Extra key components separating experiments that share a seed.
    bitgen : {"pcg64", "mt19937"}
        Underlying bit generator.
    """

    def __init__(self, seed, stream_id=0, family=(), bitgen="pcg64"):
        seed, stream_id = int(seed), int(stream_id)
        if not (0 <= seed <= _UINT64 and 0 <= stream_id <= _UINT64):
            raise ValidationError("seed and stream_id must be 64-bit unsigned integers")
        if bitgen not in BIT_GENERATORS:
            raise ValidationError(f"unknown bit generator {bitgen!r}")
        self.seed = seed
        self.stream_id = stream_id
        self.family = tuple(int(f) for f in family)
        self.bitgen = bitgen
        seq = np.random.SeedSequence(seed, spawn_key=(*self.family, stream_id))
        self.gen = np.random.Generator(BIT_GENERATORS[bitgen](seq))

    def __repr__(self):
        return (f"RngStream(seed={self.seed}, stream_id={self.stream_id}, "
                f"family={self.family}, bitgen={self.bitgen!r})")

    def uniform(self, size=None):
        return self.gen.random(size)


@dataclass(frozen=True)
class StreamPlan:
    """How a run of ``n`` draws is cut into fixed-size, independently seeded blocks.

    Block ``b`` always covers draws ``b*block_size`` up to the next block and
    always uses stream ``b``.  Work can therefore be spread over any number
    of workers without changing a single sample.
    """

    seed: int
    block_size: int = 8192
    bitgen: str = "pcg64"

    def __post_init__(self):
        if self.block_size < 1:
            raise ValidationError("block_size must be >= 1")
        if self.bitgen not in BIT_GENERATORS:
            raise ValidationError(f"unknown bit generator {self.bitgen!r}")

    def stream(self, family, block_id):
        return RngStream(self.seed, block_id, family, self.bitgen)

    def blocks(self, n):
        """Yield ``(block_id, start, count)`` covering ``range(n)``."""
        for block_id, start in enumerate(range(0, n, self.block_size)):
            yield block_id, start, min(self.block_size, n - start)


class SlotKind(enum.Enum):
    """State class occupying one position of a quartet."""

    MIXED_BALL = "mixed-ball"
    MIXED_SPECTRAL = "mixed-spectral"
    PURE = "pure"
    MAX_MIXED = "max-mixed"

    @classmethod
    def parse(cls, text):
        key = text.strip().lower().replace("_", "-")
        aliases = {"m": cls.MIXED_BALL, "mixed": cls.MIXED_BALL, "ball": cls.MIXED_BALL,
                   "s": cls.MIXED_SPECTRAL, "spectral": cls.MIXED_SPECTRAL,
                   "p": cls.PURE, "i": cls.MAX_MIXED, "maxmixed": cls.MAX_MIXED}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(f"unknown slot kind {text!r}") from None

    def check_dim(self, d):
        if int(d) != d or d < 2:
            raise ValidationError(f"dimension must be an integer >= 2, got {d!r}")
        if self is SlotKind.MIXED_BALL and d != 2:
            raise ValidationError("mixed-ball sampling exists only for qubits (d = 2)")


def _check_dim(d):
    if int(d) != d or d < 2:
        raise ValidationError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def bloch_from_uniforms(t1, t2, t3):
    """Ball coordinates from three uniform draws: ``(t1**(1/3), arccos(2 t2 - 1), 2 pi t3)``."""
    t1, t2, t3 = np.asarray(t1, float), np.asarray(t2, float), np.asarray(t3, float)
    return np.cbrt(t1), np.arccos(-1.0 + 2.0 * t2), 2.0 * np.pi * t3


def spherical_to_cartesian(norm, theta, phi):
    st = np.sin(theta)
    return np.stack([norm * st * np.cos(phi), norm * st * np.sin(phi), norm * np.cos(theta)], axis=-1)


def sample_bloch_ball_batch(s, n):
    """``n`` points uniform in the unit ball, as (norm, theta, phi) arrays."""
    t = s.uniform((3, n))
    return bloch_from_uniforms(t[0], t[1], t[2])


def sample_bloch_sphere_batch(s, n):
    """Same angular law as the ball sampler with the norm pinned to one."""
    t = s.uniform((3, n))
    _, theta, phi = bloch_from_uniforms(t[0], t[1], t[2])
    return np.ones(n), theta, phi


def _one_bloch(arrays):
    norm, theta, phi = (float(a[0]) for a in arrays)
    return BlochVector(min(norm, 1.0), theta, phi)


def sample_bloch_ball(s) -> BlochVector:
    return _one_bloch(sample_bloch_ball_batch(s, 1))


def sample_bloch_sphere(s) -> BlochVector:
    return _one_bloch(sample_bloch_sphere_batch(s, 1))


def _trig_probabilities(theta):
    """Geometric simplex map applied row-wise to angles of shape (N, d-1)."""
    n = theta.shape[0]
    cos2 = np.cos(theta) ** 2
    sin2 = np.concatenate([np.ones((n, 1)), np.sin(theta) ** 2], axis=1)
    # tail[:, j] = prod_{k >= j+1} cos^2(theta_k) for the 1-based angle index
    tail = np.cumprod(cos2[:, ::-1], axis=1)[:, ::-1]
    tail = np.concatenate([tail, np.ones((n, 1))], axis=1)
    return sin2 * tail


def sample_simplex_batch(d, s, n, method="uniform"):
    """Random probability vectors, shape (n, d).

    ``"uniform"`` draws from the flat Dirichlet law by normalising i.i.d.
    unit exponentials.  ``"trigonometric"`` draws each simplex angle uniformly
    in [0, pi/2], maps through the geometric parametrisation and shuffles the
    components so that no coordinate is favoured.  The two laws differ for
    every ``d``.
    """
    d = _check_dim(d)
    if method == "uniform":
        p = s.gen.standard_exponential((n, d))
    elif method == "trigonometric":
        theta = s.uniform((n, d - 1)) * (0.5 * np.pi)
        p = s.gen.permuted(_trig_probabilities(theta), axis=1)
    else:
        raise ValidationError(f"unknown spectrum method {method!r}; choose from {SPECTRUM_METHODS}")
    return p / p.sum(axis=1, keepdims=True)


def sample_simplex(d, s, method="uniform") -> ProbVector:
    if method == "trigonometric":
        d = _check_dim(d)
        angles = s.uniform(d - 1) * (0.5 * np.pi)
        probs = simplex_from_angles(SimplexAngles(angles)).probs
        return ProbVector(s.gen.permutation(probs))
    return ProbVector(sample_simplex_batch(d, s, 1, method)[0])


def hurwitz_unitaries(d, s, n):
    """Haar unitaries built from Euler-angle two-level rotations.

    ``U = exp(i alpha) E_1 E_2 ... E_{d-1}`` where ``E_k`` is a product of
    ``k`` rotations on adjacent levels, counted from the bottom of the matrix.
    The rotation with inner index ``r`` (0-based) takes
    ``phi = arcsin(xi**(1/(2r+2)))`` with ``xi`` uniform; all phases are
    uniform on [0, 2 pi) and only the ``r = 0`` rotation carries ``chi``.
    """
    d = _check_dim(d)
    u = np.broadcast_to(np.eye(d, dtype=complex), (n, d, d)).copy()
    two_pi = 2.0 * np.pi
    for k in range(1, d):
        for r in range(k - 1, -1, -1):
            i, j = d - r - 2, d - r - 1
            xi = s.uniform(n)
            psi = two_pi * s.uniform(n)
            chi = two_pi * s.uniform(n) if r == 0 else np.zeros(n)
            phi = np.arcsin(xi ** (1.0 / (2 * r + 2)))
            a = (np.cos(phi) * np.exp(1j * psi))[:, None]
            b = (np.sin(phi) * np.exp(1j * chi))[:, None]
            col_i = u[:, :, i].copy()
            col_j = u[:, :, j].copy()
            u[:, :, i] = col_i * a - col_j * np.conj(b)
            u[:, :, j] = col_i * b + col_j * np.conj(a)
    alpha = two_pi * s.uniform(n)
    return u * np.exp(1j * alpha)[:, None, None]


def ginibre_unitaries(d, s, n):
    """Haar unitaries from the QR decomposition of complex Gaussian matrices.

    Columns of ``Q`` are rephased so that ``R`` has a positive real diagonal,
    which makes the law exactly Haar.
    """
    d = _check_dim(d)
    z = (s.gen.standard_normal((n, d, d)) + 1j * s.gen.standard_normal((n, d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def sample_haar_unitary(d, s, method="hurwitz") -> UnitaryMatrix:
    if method == "hurwitz":
        return UnitaryMatrix(hurwitz_unitaries(d, s, 1)[0])
    if method == "ginibre":
        return UnitaryMatrix(ginibre_unitaries(d, s, 1)[0])
    raise ValidationError(f"unknown unitary sampler {method!r}")


def sample_pure_batch(d, s, n):
    """Projectors onto Haar-random unit vectors, shape (n, d, d).

    Qubits go through the Bloch sphere; larger ``d`` normalises complex
    Gaussian vectors.  Both give the unitarily invariant law.
    """
    d = _check_dim(d)
    if d == 2:
        return bloch_batch_to_density(spherical_to_cartesian(*sample_bloch_sphere_batch(s, n)))
    psi = s.gen.standard_normal((n, d)) + 1j * s.gen.standard_normal((n, d))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    return np.einsum("zi,zj->zij", psi, psi.conj())


def sample_pure(d, s) -> DensityMatrix:
    return DensityMatrix(sample_pure_batch(d, s, 1)[0])


def sample_states(kind, d, s, n, spectrum="uniform", unitary="hurwitz", validate=True):
    """Draw ``n`` states of one slot kind as a (n, d, d) array."""
    kind = SlotKind(kind)
    kind.check_dim(d)
    d = int(d)
    if kind is SlotKind.MAX_MIXED:
        return np.broadcast_to(np.eye(d, dtype=complex) / d, (n, d, d)).copy()
    if kind is SlotKind.MIXED_BALL:
        mats = bloch_batch_to_density(spherical_to_cartesian(*sample_bloch_ball_batch(s, n)))
    elif kind is SlotKind.PURE:
        mats = sample_pure_batch(d, s, n)
    else:
        probs = sample_simplex_batch(d, s, n, spectrum)
        sampler = {"hurwitz": hurwitz_unitaries, "ginibre": ginibre_unitaries}.get(unitary)
        if sampler is None:
            raise ValidationError(f"unknown unitary sampler {unitary!r}")
        mats = density_from_spectrum_batch(probs, sampler(d, s, n))
    if validate:
        validate_density_batch(mats)
    return mats


def sample_state(kind, d, s, spectrum="uniform") -> DensityMatrix:
    kind = SlotKind(kind)
    kind.check_dim(d)
    if kind is SlotKind.MAX_MIXED:
        return maximally_mixed(d)
    if kind is SlotKind.MIXED_BALL:
        return bloch_to_density(sample_bloch_ball(s))
    if kind is SlotKind.PURE:
        return sample_pure(d, s)
    return density_from_spectrum(sample_simplex(d, s, spectrum), sample_haar_unitary(d, s))
