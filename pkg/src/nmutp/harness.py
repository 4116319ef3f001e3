"""Experiment orchestration: case summaries, the dimension sweep, distance
histograms, strength samples and the precision validation.

All Monte Carlo work is cut into fixed-size blocks by a
:class:`~nmutp.sampling.StreamPlan`.  Each block produces a small partial
aggregate; partials are always folded in block order, so a summary does not
depend on how many workers (``n_streams``) computed the blocks.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .analysis import TABLE1_CASES, CaseStudy, case_block
from .analysis import evaluate_batch
from .distance import PRECISION_TOL, collinear_pair_batch, crosscheck_precision, trace_distance_batch
from .exceptions import ValidationError
from .linalg import DEFAULT_TOL
from .sampling import SlotKind, StreamPlan, sample_states, stable_key

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "CasePartial",
    "CaseSummary",
    "SweepPoint",
    "Histogram",
    "HistogramResult",
    "StrengthSamples",
    "run_case",
    "run_table1",
    "run_dimension_sweep",
    "default_sweep_size",
    "run_td_histogram",
    "emit_strength_samples",
    "run_precision_validation",
    "run_collinear_control",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Description of a seeded Monte Carlo run.

    ``n_streams`` is the number of logical workers the blocks are dealt to;
    ``jobs`` is how many processes execute them.  Neither changes results.
    """

    case: CaseStudy | None = None
    n_quartets: int = 10**6
    n_repetitions: int = 1
    seed: int = 0
    n_streams: int = 1
    dims: tuple = ()
    histogram_bins: int = 200
    block_size: int = 8192
    bitgen: str = "pcg64"
    backend: str = "auto"
    jobs: int = 1
    spectrum: str = "trigonometric"

    def __post_init__(self):
        for name in ("n_quartets", "n_repetitions", "n_streams", "histogram_bins", "block_size", "jobs"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims) or list(dims) != sorted(set(dims)):
            raise ValidationError("dims must be strictly ascending integers >= 2")
        object.__setattr__(self, "dims", dims)
        if not (0 <= int(self.seed) < 2**64):
            raise ValidationError("seed must be a 64-bit unsigned integer")

    @property
    def plan(self):
        return StreamPlan(int(self.seed), int(self.block_size), self.bitgen)

    def to_dict(self):
        out = asdict(self)
        if self.case is not None:
            out["case"] = {"slots": [k.value for k in self.case.slots], "dim": self.case.dim,
                           "spectrum": self.case.spectrum, "label": self.case.label}
        out["dims"] = list(self.dims)
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        case = data.pop("case", None)
        if isinstance(case, dict):
            case = CaseStudy(tuple(case["slots"]), int(case.get("dim", 2)),
                             case.get("spectrum", "uniform"))
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        if "dims" in data:
            data["dims"] = tuple(data["dims"])
        return cls(case=case, **data)


@dataclass(frozen=True)
class CasePartial:
    """Mergeable aggregate: counts plus running mean, M2 and max of G."""

    n_total: int = 0
    n_flagged: int = 0
    g_mean: float = 0.0
    g_m2: float = 0.0
    g_max: float = -math.inf

    @classmethod
    def from_block(cls, block):
        g = block.g[block.nmutp]
        if g.size == 0:
            return cls(len(block), 0)
        mean = float(np.mean(g))
        return cls(len(block), int(g.size), mean, float(np.sum((g - mean) ** 2)), float(np.max(g)))

    def merge(self, other):
        n = self.n_flagged + other.n_flagged
        if n == 0:
            return CasePartial(self.n_total + other.n_total, 0)
        delta = other.g_mean - self.g_mean
        mean = self.g_mean + delta * other.n_flagged / n
        m2 = self.g_m2 + other.g_m2 + delta * delta * self.n_flagged * other.n_flagged / n
        return CasePartial(self.n_total + other.n_total, n, mean, m2, max(self.g_max, other.g_max))


@dataclass(frozen=True)
class CaseSummary:
    """Flagged percentage and strength statistics for one case study.

    ``g_std`` is the population standard deviation over flagged quartets.
    The strength fields are ``None`` when nothing was flagged.
    """

    label: str
    dim: int
    n_total: int
    n_flagged: int
    percentage: float
    g_mean: float | None
    g_std: float | None
    g_max: float | None
    seed: int

    @classmethod
    def from_partial(cls, case, partial, seed):
        flagged = partial.n_flagged
        pct = 100.0 * flagged / partial.n_total
        if flagged == 0:
            return cls(case.label, case.dim, partial.n_total, 0, pct, None, None, None, seed)
        std = math.sqrt(partial.g_m2 / flagged)
        return cls(case.label, case.dim, partial.n_total, flagged, pct,
                   partial.g_mean, std, partial.g_max, seed)

    @property
    def fraction(self):
        return self.n_flagged / self.n_total

    def as_dict(self):
        return asdict(self)


def _worker(args):
    case, plan, rep, blocks, tol, backend = args
    return [(block_id, CasePartial.from_block(case_block(case, plan, block_id, count, rep, tol, backend)))
            for block_id, _, count in blocks]


def _case_partials(case, n, plan, rep, n_streams, jobs, tol, backend):
    blocks = list(plan.blocks(n))
    tasks = [(case, plan, rep, blocks[w::n_streams], tol, backend) for w in range(n_streams)]
    tasks = [t for t in tasks if t[3]]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]
    partials = sorted((item for res in results for item in res), key=lambda item: item[0])
    total = CasePartial()
    for _, part in partials:
        total = total.merge(part)
    return total


def run_case(cfg: ExperimentConfig, case=None, rep=0, tol=DEFAULT_TOL) -> CaseSummary:
    """Sample ``cfg.n_quartets`` quartets of ``case`` and summarise them."""
    case = case or cfg.case
    if case is None:
        raise ValidationError("run_case needs a case study")
    log.info("case %s d=%d n=%d rep=%d", case.label, case.dim, cfg.n_quartets, rep)
    partial = _case_partials(case, int(cfg.n_quartets), cfg.plan, rep, int(cfg.n_streams),
                             int(cfg.jobs), tol, cfg.backend)
    return CaseSummary.from_partial(case, partial, int(cfg.seed))


def run_table1(cfg: ExperimentConfig, rows=None, tol=DEFAULT_TOL):
    """Summaries for the requested 1-based Table 1 rows (all by default)."""
    rows = list(range(1, len(TABLE1_CASES) + 1)) if rows is None else list(rows)
    for r in rows:
        if not 1 <= r <= len(TABLE1_CASES):
            raise ValidationError(f"Table 1 row {r} outside 1..{len(TABLE1_CASES)}")
    return [(r, run_case(cfg, TABLE1_CASES[r - 1], tol=tol)) for r in rows]


def default_sweep_size(d):
    """Desk-scale quartet count per repetition for dimension ``d``."""
    return 10**5 if d <= 5 else 2 * 10**4


@dataclass(frozen=True)
class SweepPoint:
    d: int
    n_per_rep: int
    reps: int
    fraction_min: float
    fraction_mean: float
    fraction_max: float
    fraction_se: float
    g_mean: float | None
    g_mean_se: float | None
    fractions: tuple = field(default=())
    g_mean_per_rep: tuple = field(default=())

    def as_dict(self):
        return asdict(self)


def run_dimension_sweep(cfg: ExperimentConfig, sizes=None, tol=DEFAULT_TOL):
    """Flagged fraction and mean strength versus dimension.

    All four slots are spectral mixed states drawn with ``cfg.spectrum``.
    ``sizes`` maps ``d`` to a per-repetition quartet count; missing entries
    fall back to ``cfg.n_quartets``.

    The reported ``fraction_se`` is the binomial standard error of the
    pooled fraction; ``g_mean_se`` is the standard error of the pooled mean
    strength.
    """
    if not cfg.dims:
        raise ValidationError("the sweep needs at least one dimension")
    sizes = dict(sizes or {})
    points = []
    for d in cfg.dims:
        n = int(sizes.get(d, cfg.n_quartets))
        case = CaseStudy((SlotKind.MIXED_SPECTRAL,) * 4, d, cfg.spectrum)
        per_rep = []
        pooled = CasePartial()
        for rep in range(int(cfg.n_repetitions)):
            part = _case_partials(case, n, cfg.plan, rep, int(cfg.n_streams), int(cfg.jobs),
                                  tol, cfg.backend)
            per_rep.append(CaseSummary.from_partial(case, part, int(cfg.seed)))
            pooled = pooled.merge(part)
        fractions = tuple(s.fraction for s in per_rep)
        p = pooled.n_flagged / pooled.n_total
        if pooled.n_flagged:
            g_mean = pooled.g_mean
            g_se = math.sqrt(pooled.g_m2 / pooled.n_flagged) / math.sqrt(pooled.n_flagged)
        else:
            g_mean = g_se = None
        points.append(SweepPoint(
            d=d, n_per_rep=n, reps=int(cfg.n_repetitions),
            fraction_min=min(fractions), fraction_mean=sum(fractions) / len(fractions),
            fraction_max=max(fractions), fraction_se=math.sqrt(p * (1.0 - p) / pooled.n_total),
            g_mean=g_mean, g_mean_se=g_se, fractions=fractions,
            g_mean_per_rep=tuple(s.g_mean for s in per_rep),
        ))
        log.info("sweep d=%d fraction=%.5f g_mean=%s", d, points[-1].fraction_mean, g_mean)
    return points


@dataclass(frozen=True)
class Histogram:
    lo: float
    hi: float
    counts: tuple
    total: int

    @property
    def edges(self):
        return np.linspace(self.lo, self.hi, len(self.counts) + 1)

    def rows(self):
        edges = self.edges
        return [(float(edges[i]), float(edges[i + 1]), int(c)) for i, c in enumerate(self.counts)]


@dataclass(frozen=True)
class HistogramResult:
    pair: tuple
    histogram: Histogram
    mean: float
    stderr: float
    n: int
    seed: int

    def as_dict(self):
        return {"pair": list(self.pair), "n": self.n, "mean": self.mean, "stderr": self.stderr,
                "bins": len(self.histogram.counts), "lo": self.histogram.lo,
                "hi": self.histogram.hi, "seed": self.seed}


HISTOGRAM_PAIRS = {
    ("mixed-ball", "mixed-ball"),
    ("mixed-ball", "pure"),
    ("pure", "pure"),
}


def run_td_histogram(pair, n_pairs, cfg: ExperimentConfig, d=2):
    """Distribution of trace distances between independent qubit pairs.

    Returns a :class:`HistogramResult` over ``[0, 2]`` with
    ``cfg.histogram_bins`` bins plus the sample mean and its standard error.
    """
    kinds = tuple(SlotKind.parse(k) if isinstance(k, str) else SlotKind(k) for k in pair)
    if tuple(k.value for k in kinds) not in HISTOGRAM_PAIRS:
        raise ValidationError(f"unsupported pair classes {pair!r}")
    plan = cfg.plan
    family = (stable_key("hist|" + ",".join(k.value for k in kinds) + f"|{d}"), 0)
    bins = int(cfg.histogram_bins)
    counts = np.zeros(bins, dtype=np.int64)
    total = 0.0
    total_sq = 0.0
    for block_id, _, count in plan.blocks(int(n_pairs)):
        s = plan.stream(family, block_id)
        x = sample_states(kinds[0], d, s, count)
        y = sample_states(kinds[1], d, s, count)
        td = trace_distance_batch(x, y, backend=cfg.backend)
        counts += np.histogram(np.clip(td, 0.0, 2.0), bins=bins, range=(0.0, 2.0))[0]
        total += math.fsum(td)
        total_sq += math.fsum(td * td)
    n = int(n_pairs)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    stderr = math.sqrt(var / n)
    hist = Histogram(0.0, 2.0, tuple(int(c) for c in counts), n)
    return HistogramResult(tuple(k.value for k in kinds), hist, mean, stderr, n, int(cfg.seed))


@dataclass(frozen=True)
class StrengthSamples:
    """Strength values of flagged quartets plus the one-sigma band."""

    records: tuple
    n_total: int
    n_flagged: int
    band: dict | None

    def fraction_in_band(self):
        if not self.records:
            return None
        g = np.array([r[2] for r in self.records])
        lo, hi = self.band["lo"], self.band["hi"]
        return float(np.mean((g >= lo) & (g <= hi)))


def emit_strength_samples(case: CaseStudy, n, cfg: ExperimentConfig, limit=None, tol=DEFAULT_TOL):
    """Collect ``(index, stream_id, g)`` for every flagged quartet among ``n``.

    The band statistics always use all flagged quartets; ``limit`` only caps
    how many samples are kept.
    """
    plan = cfg.plan
    records = []
    total = CasePartial()
    for block_id, start, count in plan.blocks(int(n)):
        block = case_block(case, plan, block_id, count, 0, tol, cfg.backend)
        total = total.merge(CasePartial.from_block(block))
        for i in np.flatnonzero(block.nmutp):
            if limit is None or len(records) < limit:
                records.append((start + int(i), block_id, float(block.g[i])))
    if total.n_flagged == 0:
        return StrengthSamples((), total.n_total, 0, None)
    std = math.sqrt(total.g_m2 / total.n_flagged)
    band = {"g_mean": total.g_mean, "g_std": std, "g_max": total.g_max,
            "lo": total.g_mean - std, "hi": total.g_mean + std}
    return StrengthSamples(tuple(records), total.n_total, total.n_flagged, band)


def run_precision_validation(seed=0, n_collinear=10**5, n_pure_qubit=10**5, n_pure_qudit=10**4,
                             d_max=8, backend="jacobi", tolerance=PRECISION_TOL, bitgen="pcg64"):
    """Worst-case gap between numeric and closed-form distances, per class.

    Collinear qubit pairs and pure pairs for every ``d`` in ``2..d_max`` are
    drawn and compared.  The report's ``passed`` is true when every class
    stays within ``tolerance``.
    """
    plan = StreamPlan(int(seed), bitgen=bitgen)
    classes = [("collinear", 2, n_collinear)]
    classes += [("pure", d, n_pure_qubit if d == 2 else n_pure_qudit) for d in range(2, d_max + 1)]
    entries = []
    for kind, d, n in classes:
        s = plan.stream((stable_key(f"precision|{kind}|{d}"),), 0)
        entry = crosscheck_precision(kind, s, int(n), d=d, backend=backend)
        entry["passed"] = entry["worst_error"] <= tolerance
        entries.append(entry)
        log.info("precision %s d=%d worst=%.3e", kind, d, entry["worst_error"])
    return {
        "seed": int(seed),
        "tolerance": tolerance,
        "backend": backend,
        "classes": entries,
        "worst_error": max(e["worst_error"] for e in entries),
        "passed": all(e["passed"] for e in entries),
    }


def run_collinear_control(cfg: ExperimentConfig, n=None, tol=DEFAULT_TOL) -> CaseSummary:
    """Quartets whose two pairs are each collinear (independent directions).

    The two-copy distance of a collinear pair is ``d (2 + |r +- z|) / 2``,
    which is not a function of ``d`` alone, so flagged quartets do occur.
    """
    n = int(cfg.n_quartets if n is None else n)
    plan = cfg.plan
    family = (stable_key("collinear-control"), 0)
    total = CasePartial()
    for block_id, _, count in plan.blocks(n):
        s = plan.stream(family, block_id)
        rho, zeta, _, _ = collinear_pair_batch(s, count)
        xi, eta, _, _ = collinear_pair_batch(s, count)
        block = evaluate_batch(rho, zeta, xi, eta, tol=tol, backend=cfg.backend)
        total = total.merge(CasePartial.from_block(block))
    label = CaseStudy((SlotKind.MIXED_BALL,) * 4, label="collinear (rho,zeta),(xi,eta)")
    return CaseSummary.from_partial(label, total, int(cfg.seed))


def with_overrides(cfg: ExperimentConfig, **kwargs):
    """Copy of ``cfg`` with the non-``None`` keyword values applied."""
    return replace(cfg, **{k: v for k, v in kwargs.items() if v is not None})
