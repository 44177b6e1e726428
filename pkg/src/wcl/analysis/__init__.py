"""Recovery, decomposition and extension algorithms."""

from .dp import (
    BijectiveRecovery,
    BlowupThresholds,
    Decomposition,
    decompose_dp,
    growth_exponents,
    inverse_operator,
    recover_bijective_dp,
)
from .extension import (
    ExtensionReport,
    TentLimits,
    attempt_extension,
    compactified_operator,
    contradiction_margin,
    limit_polynomial,
    mirror_product_test,
    reproduce_example9_numerics,
    tent_limits,
)
from .isometry import (
    IsometryRecovery,
    PeakSets,
    check_open_map,
    check_quotient,
    recover_isometry,
    representation_residuals,
)
from .support import FunctionalSupport, functional_support, functional_supports

__all__ = [
    "BijectiveRecovery", "BlowupThresholds", "Decomposition", "ExtensionReport",
    "FunctionalSupport", "IsometryRecovery", "PeakSets", "TentLimits",
    "attempt_extension", "check_open_map", "check_quotient", "compactified_operator",
    "contradiction_margin", "decompose_dp", "functional_support", "functional_supports",
    "growth_exponents", "inverse_operator", "limit_polynomial", "mirror_product_test",
    "recover_bijective_dp", "recover_isometry",
    "representation_residuals", "reproduce_example9_numerics", "tent_limits",
]
