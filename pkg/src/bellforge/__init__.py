"""Multipartite many-setting Bell inequalities: construction, LHV bounds, quantum violations."""

from .inequalities import (
    BellCoefficients,
    FamilyDescriptor,
    RecursiveSpec,
    build_composed_442,
    build_recursive,
    build_standard,
    enumerate_family,
    from_terms,
    reduce_settings,
)
from .lhv import DeterministicStrategy, lhv_bound, strategy_value, verify_identity
from .optimize import (
    OptimizationConfig,
    ViolationReport,
    critical_noise,
    family_violation,
    optimize_quantum_value,
    scan_generalized_ghz,
)
from .quantum import (
    MeasurementSettings,
    QuantumState,
    bell_value,
    correlation,
    correlation_tensor,
    make_state,
    mix_with_white_noise,
)
from .signs import ConstructionError, SignFunction

__version__ = "0.1.0"

__all__ = [
    "BellCoefficients",
    "ConstructionError",
    "DeterministicStrategy",
    "FamilyDescriptor",
    "MeasurementSettings",
    "OptimizationConfig",
    "QuantumState",
    "RecursiveSpec",
    "SignFunction",
    "ViolationReport",
    "bell_value",
    "build_composed_442",
    "build_recursive",
    "build_standard",
    "correlation",
    "correlation_tensor",
    "critical_noise",
    "enumerate_family",
    "family_violation",
    "from_terms",
    "lhv_bound",
    "make_state",
    "mix_with_white_noise",
    "optimize_quantum_value",
    "reduce_settings",
    "scan_generalized_ghz",
    "strategy_value",
    "verify_identity",
]
