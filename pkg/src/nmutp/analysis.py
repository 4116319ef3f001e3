"""Quartet evaluation: the non-monotonicity predicate, its strength, case
studies and counterexample search."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .linalg import DEFAULT_TOL, Tolerances
from .distance import tensor_square_distance_batch, trace_distance_batch
from .sampling import SlotKind, StreamPlan, sample_states, stable_key
from .states import DensityMatrix

__all__ = [
    "CaseStudy",
    "TABLE1_CASES",
    "TABLE1_REFERENCE",
    "Quartet",
    "QuartetMetrics",
    "MetricsBlock",
    "ScanRecord",
    "FoundExample",
    "classify",
    "evaluate_quartet",
    "evaluate_batch",
    "generate_quartet",
    "generate_quartet_batch",
    "case_block",
    "scan",
    "find_example",
]

M, P, I = SlotKind.MIXED_BALL, SlotKind.PURE, SlotKind.MAX_MIXED


@dataclass(frozen=True)
class CaseStudy:
    """Slot kinds for ``(rho, zeta, xi, eta)`` plus the Hilbert-space dimension."""

    slots: tuple
    dim: int = 2
    spectrum: str = "uniform"
    label: str = ""

    def __post_init__(self):
        slots = tuple(SlotKind(s) if not isinstance(s, str) else SlotKind.parse(s) for s in self.slots)
        if len(slots) != 4:
            raise ValidationError(f"a case study needs exactly 4 slots, got {len(slots)}")
        for kind in slots:
            kind.check_dim(self.dim)
        object.__setattr__(self, "slots", slots)
        if not self.label:
            object.__setattr__(self, "label", _default_label(slots, self.dim))

    @classmethod
    def parse(cls, text, dim=2, spectrum="uniform"):
        """Build from a comma separated list such as ``"mixed,pure,mixed,max-mixed"``."""
        parts = [p for p in text.split(",") if p.strip()]
        return cls(tuple(SlotKind.parse(p) for p in parts), dim, spectrum)

    @property
    def key(self):
        """Stable integer used to separate the random streams of different cases."""
        text = f"{self.dim}|{self.spectrum}|" + ",".join(k.value for k in self.slots)
        return stable_key(text)


def _default_label(slots, dim):
    names = ["rho", "zeta", "xi", "eta"]
    out = []
    for name, kind in zip(names, slots):
        if kind is SlotKind.PURE:
            out.append(f"|{name}>")
        elif kind is SlotKind.MAX_MIXED:
            out.append(f"I/{dim}")
        else:
            out.append(name)
    return f"({out[0]},{out[1]}),({out[2]},{out[3]})"


# Table 1 rows, top to bottom; the qubit mixed slots are uniform in the Bloch ball.
TABLE1_CASES = [
    CaseStudy((M, M, M, M)),
    CaseStudy((M, M, M, P)),
    CaseStudy((M, P, M, P)),
    CaseStudy((M, M, P, P)),
    CaseStudy((M, P, P, P)),
    CaseStudy((M, M, M, I)),
    CaseStudy((M, M, P, I)),
    CaseStudy((M, P, M, I)),
    CaseStudy((M, P, P, I)),
    CaseStudy((P, P, M, I)),
    CaseStudy((P, P, P, I)),
]

# Reference (percentage, mean G, std G, max G) per row at 10**6 quartets.
TABLE1_REFERENCE = [
    (7.28, 0.161, 0.083, 0.475),
    (7.86, 0.186, 0.091, 0.486),
    (3.16, 0.071, 0.038, 0.190),
    (4.06, 0.134, 0.072, 0.333),
    (3.00, 0.083, 0.044, 0.194),
    (8.49, 0.192, 0.098, 0.488),
    (20.75, 0.226, 0.096, 0.500),
    (3.20, 0.101, 0.045, 0.248),
    (7.67, 0.123, 0.037, 0.177),
    (2.63, 0.107, 0.043, 0.177),
    (8.85, 0.169, 0.004, 0.177),
]


@dataclass(frozen=True)
class Quartet:
    rho: DensityMatrix
    zeta: DensityMatrix
    xi: DensityMatrix
    eta: DensityMatrix

    def __post_init__(self):
        dims = {x.dim for x in self.states}
        if len(dims) != 1:
            raise ValidationError(f"quartet states have mixed dimensions {sorted(dims)}")

    @property
    def states(self):
        return (self.rho, self.zeta, self.xi, self.eta)

    @property
    def dim(self):
        return self.rho.dim

    def swapped(self):
        """The quartet with the two pairs exchanged."""
        return Quartet(self.xi, self.eta, self.rho, self.zeta)


@dataclass(frozen=True)
class QuartetMetrics:
    """The four distances of a quartet, its flag and (only if flagged) its strength."""

    d1: float
    d2: float
    dt1: float
    dt2: float
    nmutp: bool
    g: float | None = None

    @property
    def distances(self):
        return (self.d1, self.d2, self.dt1, self.dt2)


@dataclass
class MetricsBlock:
    """Vectorised metrics for a run of quartets; ``g`` is NaN where not flagged."""

    d1: np.ndarray
    d2: np.ndarray
    dt1: np.ndarray
    dt2: np.ndarray
    nmutp: np.ndarray
    g: np.ndarray

    def __len__(self):
        return self.d1.shape[0]

    def record(self, i) -> QuartetMetrics:
        flag = bool(self.nmutp[i])
        return QuartetMetrics(float(self.d1[i]), float(self.d2[i]), float(self.dt1[i]),
                              float(self.dt2[i]), flag, float(self.g[i]) if flag else None)


def classify(d1, d2, dt1, dt2, tie_tol=DEFAULT_TOL.tie_tol):
    """Flag strict order reversals between single-copy and two-copy distances.

    Returns ``(nmutp, g)`` arrays; ``g`` holds ``|d1-d2| + |dt1-dt2|`` on
    flagged entries and NaN elsewhere.  Differences within ``tie_tol`` count
    as ties and are never flagged.
    """
    gap = np.asarray(d1, float) - np.asarray(d2, float)
    gap_t = np.asarray(dt1, float) - np.asarray(dt2, float)
    flag = (gap * gap_t < 0.0) & (np.abs(gap) > tie_tol) & (np.abs(gap_t) > tie_tol)
    g = np.where(flag, np.abs(gap) + np.abs(gap_t), np.nan)
    return flag, g


def evaluate_batch(rho, zeta, xi, eta, tol=DEFAULT_TOL, backend="auto") -> MetricsBlock:
    """Metrics for stacks of quartets given as four (N, d, d) arrays."""
    shapes = {np.shape(x) for x in (rho, zeta, xi, eta)}
    if len(shapes) != 1:
        raise ValidationError(f"quartet stacks have mismatched shapes {sorted(shapes)}")
    d1 = trace_distance_batch(rho, zeta, backend)
    d2 = trace_distance_batch(xi, eta, backend)
    dt1 = tensor_square_distance_batch(rho, zeta, backend)
    dt2 = tensor_square_distance_batch(xi, eta, backend)
    flag, g = classify(d1, d2, dt1, dt2, tol.tie_tol)
    return MetricsBlock(d1, d2, dt1, dt2, flag, g)


def evaluate_quartet(q: Quartet, tol: Tolerances = DEFAULT_TOL, backend="jacobi") -> QuartetMetrics:
    stacks = [x.mat[None] for x in q.states]
    return evaluate_batch(*stacks, tol=tol, backend=backend).record(0)


def generate_quartet_batch(case: CaseStudy, s, n, validate=True):
    """Four (n, d, d) stacks drawn slot by slot from ``s``."""
    return tuple(
        sample_states(kind, case.dim, s, n, spectrum=case.spectrum, validate=validate)
        for kind in case.slots
    )


def generate_quartet(case: CaseStudy, s) -> Quartet:
    return Quartet(*(DensityMatrix(m[0]) for m in generate_quartet_batch(case, s, 1)))


def case_block(case, plan, block_id, count, rep=0, tol=DEFAULT_TOL, backend="auto",
               return_states=False):
    """Evaluate one block of a stream plan.

    Block ``block_id`` of repetition ``rep`` always draws from the same
    stream, so this is the unit shared by scanning, summaries and search.
    """
    s = plan.stream((case.key, rep), block_id)
    states = generate_quartet_batch(case, s, count)
    metrics = evaluate_batch(*states, tol=tol, backend=backend)
    return (metrics, states) if return_states else metrics


@dataclass(frozen=True)
class ScanRecord:
    index: int
    stream_id: int
    metrics: QuartetMetrics

    def as_dict(self):
        m = self.metrics
        return {"d1": m.d1, "d2": m.d2, "dt1": m.dt1, "dt2": m.dt2, "nmutp": m.nmutp,
                "g": m.g, "stream_id": self.stream_id, "index": self.index}


def scan(case: CaseStudy, n, plan: StreamPlan, rep=0, tol=DEFAULT_TOL, backend="auto"):
    """Yield a :class:`ScanRecord` for each of ``n`` random quartets, in index order."""
    if n < 1:
        raise ValidationError("scan needs n >= 1")
    for block_id, start, count in plan.blocks(n):
        block = case_block(case, plan, block_id, count, rep, tol, backend)
        for i in range(count):
            yield ScanRecord(start + i, block_id, block.record(i))


@dataclass(frozen=True)
class FoundExample:
    quartet: Quartet
    metrics: QuartetMetrics
    index: int
    stream_id: int
    draws: int = field(default=0)


def find_example(case: CaseStudy, target, l_inf_tol, plan: StreamPlan, max_draws=10**7,
                 tol=DEFAULT_TOL, backend="auto"):
    """First flagged quartet whose four distances lie within ``l_inf_tol`` of ``target``.

    Returns a :class:`FoundExample`, or ``None`` once ``max_draws`` quartets
    have been examined without a match.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != (4,) or np.any(target < 0.0) or np.any(target > 2.0):
        raise ValidationError("target must be four distances in [0, 2]")
    for block_id, start, count in plan.blocks(int(max_draws)):
        block, states = case_block(case, plan, block_id, count, rep=0, tol=tol,
                                   backend=backend, return_states=True)
        dist = np.stack([block.d1, block.d2, block.dt1, block.dt2], axis=1)
        hit = block.nmutp & np.all(np.abs(dist - target) <= l_inf_tol, axis=1)
        if hit.any():
            i = int(np.argmax(hit))
            quartet = Quartet(*(DensityMatrix(m[i]) for m in states))
            return FoundExample(quartet, block.record(i), start + i, block_id, start + i + 1)
    return None

