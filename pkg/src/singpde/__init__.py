"""singpde: a verification lab for singular first-order equations
t * u_t = F(t, x, u, u_x).

Classifies equations by the vanishing pattern of the v-coefficient,
builds truncated formal series solutions with resonance detection,
traces complex characteristics into the singular time in log-time, and
audits the vanishing-double-limit uniqueness criterion on built-in and
user-supplied equations.
"""

from .core import (Disc, DomainError, Grid, PhiWeight, Sector, SingpdeError,
                   WeightFn, cauchy_derivative, phi_eval, sector_distance,
                   shrunk_sector, weight_eval)
from .expr import (EvalDomainError, ExprSyntaxError, PdeSpec, diff, eval_expr,
                   parse, subs, to_str)
from .classify import (A2Report, CaseClass, IndeterminateCaseError,
                       UnsupportedShapeError, check_A2, classify, rotate_x)
from .series import (DoubleSeries, ResonanceError, TruncatedPoly,
                     build_solution, residual, series_eval)
from .characteristics import (CharTrace, EscapeBudget, FieldSpec, escape_check,
                              nagumo_check, phi_factor, sector_reconstruct,
                              trace, transport, verify_decay, verify_position)
from .audit import (AuditReport, SolutionField, audit_disc, audit_sector,
                    hadamard_fields, sup_difference, verdict)
from . import gallery

__version__ = "0.1.0"

__all__ = [
    "Disc", "DomainError", "Grid", "PhiWeight", "Sector", "SingpdeError",
    "WeightFn", "cauchy_derivative", "phi_eval", "sector_distance",
    "shrunk_sector", "weight_eval",
    "EvalDomainError", "ExprSyntaxError", "PdeSpec", "diff", "eval_expr",
    "parse", "subs", "to_str",
    "A2Report", "CaseClass", "IndeterminateCaseError", "UnsupportedShapeError",
    "check_A2", "classify", "rotate_x",
    "DoubleSeries", "ResonanceError", "TruncatedPoly", "build_solution",
    "residual", "series_eval",
    "CharTrace", "EscapeBudget", "FieldSpec", "escape_check", "nagumo_check",
    "phi_factor", "sector_reconstruct", "trace", "transport", "verify_decay",
    "verify_position",
    "AuditReport", "SolutionField", "audit_disc", "audit_sector",
    "hadamard_fields", "sup_difference", "verdict",
    "gallery",
]
