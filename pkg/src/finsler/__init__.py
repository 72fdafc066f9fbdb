"""Numerical Finsler geometry in local coordinates.

The package computes the canonical connections (Cartan, Berwald, Chern,
Hashiguchi) and their curvature tensors from a direction-dependent metric
via truncated Taylor-jet automatic differentiation, verifies how each
geometric object transforms under a position-dependent conformal rescaling
of the metric by evaluating both sides of each identity independently, and
classifies structures against a catalogue of special Finsler classes.
"""

from .classify import (FITTED_TOL, HYPOTHESES, PREDICATES, PROPOSITIONS,
                       STRUCTURAL_TOL, UNCONDITIONAL_INVARIANT, Verdict,
                       check_hypothesis, classify, default_tolerance,
                       fit_recurrence)
from .conformal import (THEOREM_IDS, ConformalChange, DeformationFields,
                        L_tensor, deformation_fields, lift, verify_theorem)
from .connection import (KINDS, RegularConnection, connection_at, cov_deriv,
                         spray_at)
from .curvature import curvature_at, curvature_defining, ricci_scalars
from .dsl import Expression, parse_expression
from .errors import (ConeTooThinError, ConvexityError, DegenerateTensorError,
                     DomainError, FinslerError, OrderError, ParseError,
                     SchemaError, SingularMetricError, UnknownIdError,
                     ValidationError)
from .harness import (RunConfig, VerificationReport, run_suite,
                      sample_points)
from .jets import (JetTensor, Point, VectorFieldTM, const_jet,
                   coordinate_jets, fd_oracle, jet_einsum, jet_matrix_inverse,
                   jt_stack, lie_bracket)
from .metric import (FinslerStructure, conformal_lift, metric_at,
                     parse_metric, strong_convexity_check)

__version__ = "0.1.0"

__all__ = [
    "ConeTooThinError", "ConformalChange", "ConvexityError",
    "DeformationFields", "DegenerateTensorError", "DomainError",
    "Expression", "FITTED_TOL", "FinslerError", "FinslerStructure",
    "HYPOTHESES", "JetTensor", "KINDS", "L_tensor", "OrderError",
    "PREDICATES", "PROPOSITIONS", "ParseError", "Point", "RegularConnection",
    "RunConfig", "STRUCTURAL_TOL", "SchemaError", "SingularMetricError",
    "THEOREM_IDS", "UNCONDITIONAL_INVARIANT", "UnknownIdError",
    "ValidationError", "VectorFieldTM", "Verdict", "VerificationReport",
    "check_hypothesis", "classify", "conformal_lift", "connection_at",
    "const_jet", "coordinate_jets", "cov_deriv", "curvature_at",
    "curvature_defining", "default_tolerance", "deformation_fields",
    "fd_oracle", "fit_recurrence", "jet_einsum", "jet_matrix_inverse",
    "jt_stack", "lie_bracket", "lift", "metric_at", "parse_expression",
    "parse_metric", "ricci_scalars", "run_suite", "sample_points",
    "spray_at", "strong_convexity_check", "verify_theorem", "__version__",
]
