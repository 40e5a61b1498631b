"""Exact symbolic workbench for coupling Dirac structures on fibered patches."""

from __future__ import annotations

from .constructions import (
    AbelianYMHSetup,
    CartanSetup,
    FatnessReport,
    cartan_data,
    chb_data,
    fat_check,
    yang_mills_data,
)
from .coupling import (
    CheckReport,
    ConditionReport,
    DecompositionResult,
    DiracPresentation,
    GeometricData,
    Witness,
    build_dirac,
    characteristic_kernel,
    check_casimir_complex,
    check_integrability,
    decompose_coupling,
    equivalent_data,
    extract_poisson,
    restrict_to_fiber,
    verify_closure,
    verify_isotropy,
)
from .errors import (
    AngleDisciplineError,
    DegenerateInputError,
    DegreeError,
    ExpressionError,
    ExpressionSyntaxError,
    MalformedDataError,
    ManifestError,
    NonCasimirError,
    PatchError,
    PatchMismatchError,
    UnknownCoordinateError,
)
from .fibered import BaseForm, Connection, FiberedPatch
from .fractionfield import RatExpr, determinant, inverse, null_space
from .symexpr import COS, SIN, Coordinate, Patch, ScalarExpr, parse
from .tensorcalc import (
    CourantSection,
    DiffForm,
    Multivector,
    courant_bracket,
    exterior_derivative,
    lie_bracket,
    lie_derivative,
    pairing_plus,
    poisson_bracket,
    schouten,
    sharp,
)

__all__ = [
    "AbelianYMHSetup",
    "AngleDisciplineError",
    "BaseForm",
    "COS",
    "CartanSetup",
    "CheckReport",
    "ConditionReport",
    "Connection",
    "Coordinate",
    "CourantSection",
    "DecompositionResult",
    "DegenerateInputError",
    "DegreeError",
    "DiffForm",
    "DiracPresentation",
    "ExpressionError",
    "ExpressionSyntaxError",
    "FatnessReport",
    "FiberedPatch",
    "GeometricData",
    "MalformedDataError",
    "ManifestError",
    "Multivector",
    "NonCasimirError",
    "Patch",
    "PatchError",
    "PatchMismatchError",
    "RatExpr",
    "SIN",
    "ScalarExpr",
    "UnknownCoordinateError",
    "Witness",
    "build_dirac",
    "cartan_data",
    "characteristic_kernel",
    "check_casimir_complex",
    "check_integrability",
    "chb_data",
    "courant_bracket",
    "decompose_coupling",
    "determinant",
    "equivalent_data",
    "exterior_derivative",
    "extract_poisson",
    "fat_check",
    "inverse",
    "lie_bracket",
    "lie_derivative",
    "null_space",
    "pairing_plus",
    "parse",
    "poisson_bracket",
    "restrict_to_fiber",
    "schouten",
    "sharp",
    "verify_closure",
    "verify_isotropy",
    "yang_mills_data",
]
