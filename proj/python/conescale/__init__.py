"""Cone-scaled transforms, pencil spectra and solvers."""

from ._core import (
    ConescaleError,
    HypothesisError,
    NumericalError,
    ValidationError,
    __version__,
    canonical_problem,
    cone_clearance,
    forward,
    frequency_nodes,
    inverse,
    parseval,
    run,
    set_thread_count,
    solve,
    spectrum,
)

__all__ = [
    "ConescaleError",
    "HypothesisError",
    "NumericalError",
    "ValidationError",
    "__version__",
    "canonical_problem",
    "cone_clearance",
    "forward",
    "frequency_nodes",
    "inverse",
    "parseval",
    "run",
    "set_thread_count",
    "solve",
    "spectrum",
]
