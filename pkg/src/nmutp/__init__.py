"""Trace-distance tools and Monte Carlo probes of its (non-)monotonicity
under tensor products."""

from .exceptions import ConvergenceError, NmutpError, SizeLimitError, ValidationError
from .linalg import DEFAULT_TOL, Tolerances, hermitian_eigenvalues, kron, trace_norm
from .states import (
    BlochVector,
    DensityMatrix,
    ProbVector,
    SimplexAngles,
    UnitaryMatrix,
    bloch_to_density,
    maximally_mixed,
    purity,
)
from .sampling import RngStream, SlotKind, StreamPlan, sample_state
from .distance import trace_distance
from .analysis import TABLE1_CASES, CaseStudy, Quartet, QuartetMetrics, evaluate_quartet, find_example, scan
from .harness import ExperimentConfig, run_case, run_dimension_sweep

__version__ = "0.1.0"
