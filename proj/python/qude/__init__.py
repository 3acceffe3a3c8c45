"""Structure-preserving and neural source terms for qubit master equations."""

from ._qude import (
    BaseKind,
    DeviceModel,
    QudeError,
    SourceModel,
    __version__,
    characterize,
    effective_times,
    expected_energy,
    fit_twin,
    gell_mann_basis,
    lie_reconstruct,
    make_source,
    measurement_probs,
    rhs,
    run,
    simulate,
    spectral_filter,
    structure_preserving,
    trace_distance,
)

__all__ = [
    "BaseKind",
    "DeviceModel",
    "QudeError",
    "SourceModel",
    "__version__",
    "characterize",
    "effective_times",
    "expected_energy",
    "fit_twin",
    "gell_mann_basis",
    "lie_reconstruct",
    "make_source",
    "measurement_probs",
    "rhs",
    "run",
    "simulate",
    "spectral_filter",
    "structure_preserving",
    "trace_distance",
]
