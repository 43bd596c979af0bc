"""Case classification of t*u_t = F(t, x, u, v) and hypothesis checks.

The v-coefficient g(t, x) = dF/dv(t, x, 0, 0) is Taylor-expanded in x by
iterated symbolic differentiation at x = 0 (exact for polynomial
right-hand sides).  Writing g(t, x) = b(t) + x^(p+1) c(t, x):

  case 1: every x-coefficient beyond b(t) is negligible,
  case 2: the x^1 coefficient is the first non-negligible one (p = 0),
  case 3: the leading power is x^(p+1) with p >= 1.

With the Euler-derivative reading (v = x*u_x) the matched shape is
beta(t, x) + x^p c(t, x) instead; since beta vanishes with the weight as
t -> 0, p is found from the coefficient values *at* t = 0 there.  Plain
inputs whose leading power indicates p >= 1 are outside the supported
shape and are rejected (the irregular-singular machinery is wired to the
Euler form only).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, Grid, Disc, Sector, SingpdeError
from . import expr as ex


class IndeterminateCaseError(SingpdeError):
    """Coefficient magnitudes fall in the ambiguity band around tol."""


class UnsupportedShapeError(SingpdeError):
    """Input matches the irregular-singular pattern without the Euler flag."""


@dataclass(frozen=True)
class CaseClass:
    """Classification verdict plus the extracted coefficient fields.

    lam/b/c are evaluators for the u-linear coefficient, the x-free part
    of the v-coefficient, and the v-coefficient with its leading x power
    removed.  c_expr/beta_expr keep the symbolic (x-truncated) forms so
    later stages can differentiate them exactly.
    """

    case_id: int
    convention: str               # "plain" | "euler"
    p: int | None
    lam_expr: ex.Expr
    lambda00: complex
    b_expr: ex.Expr               # g(t, 0), a function of t
    c_expr: ex.Expr | None
    c00: complex | None
    beta_expr: ex.Expr | None     # euler case 3 only: sum_{j<p} g_j(t) x^j
    hypotheses: dict
    sector: Sector | None = None

    def __post_init__(self):
        if self.case_id == 3 and self.sector is not None:
            if not 0 < self.sector.theta < math.pi / (2 * self.p):
                raise DomainError(
                    f"sector opening {self.sector.theta} must lie in (0, pi/{2 * self.p})")

    def lam(self, t, x):
        return ex.eval_expr(self.lam_expr, t=t, x=x)

    def b(self, t):
        return ex.eval_expr(self.b_expr, t=t)

    def c(self, t, x):
        if self.c_expr is None:
            raise DomainError("case 1 has no c coefficient")
        return ex.eval_expr(self.c_expr, t=t, x=x)

    def beta(self, t, x):
        if self.beta_expr is None:
            return self.b(t)
        return ex.eval_expr(self.beta_expr, t=t, x=x)

    @property
    def hypotheses_ok(self) -> bool:
        return all(v for v in self.hypotheses.values() if v is not None)


def _eval_at_origin(e: ex.Expr, fallback_t: float = 1e-12) -> complex:
    # coefficients are continuous at t = 0; fall back slightly inside for
    # right-hand sides that cannot be evaluated exactly at 0 (log terms)
    try:
        return complex(ex.eval_expr(e, t=0.0, x=0j))
    except ex.EvalDomainError:
        return complex(ex.eval_expr(e, t=fallback_t, x=0j))


def _x_coefficients(g: ex.Expr, x_order: int) -> list:
    """Symbolic Taylor coefficients of g(t, x) in x at x = 0."""
    coeffs = []
    d = g
    fact = 1.0
    for j in range(x_order + 1):
        if j > 0:
            fact *= j
        at0 = ex.subs(d, {"x": 0.0})
        coeffs.append(ex.fmul(ex.Const(1.0 / fact), at0))
        d = ex.diff(d, "x")
    return coeffs


def classify(pde, x_order: int = 6, t_samples: int = 9, tol: float = 1e-9) -> CaseClass:
    """Decide case 1/2/3 and extract the coefficient fields."""
    if x_order < 2:
        raise DomainError("x_order must be at least 2")
    if tol <= 0:
        raise DomainError("tol must be positive")

    g = ex.subs(ex.diff(pde.rhs, "v"), {"u": 0.0, "v": 0.0})
    lam_expr = ex.subs(ex.diff(pde.rhs, "u"), {"u": 0.0, "v": 0.0})
    lambda00 = _eval_at_origin(lam_expr)
    coeff_exprs = _x_coefficients(g, x_order)

    ts = Grid.geometric_times(pde.T0, pde.T0 * 1e-4, t_samples)
    max_abs = []
    val_at0 = []
    for ce in coeff_exprs:
        vals = []
        for t in ts:
            try:
                vals.append(abs(complex(ex.eval_expr(ce, t=t))))
            except ex.EvalDomainError:
                continue
        max_abs.append(max(vals) if vals else 0.0)
        val_at0.append(abs(_eval_at_origin(ce)))

    if pde.euler_form:
        cc = _classify_euler(pde, coeff_exprs, max_abs, val_at0, tol,
                             lam_expr, lambda00, x_order)
    else:
        cc = _classify_plain(pde, coeff_exprs, max_abs, tol,
                             lam_expr, lambda00, x_order)
    return cc


def _ambiguity_check(candidates: list, tol: float):
    # every candidate sits inside [tol/10, tol]: refuse to call it
    if candidates and all(tol / 10 <= m <= tol for m in candidates):
        raise IndeterminateCaseError(
            f"all x-coefficient magnitudes fall in [{tol / 10:.1e}, {tol:.1e}]; "
            "tighten tol or rescale the equation")


def _hypotheses(pde, case_id, lambda00, c_expr, c00, tol) -> dict:
    flags = {"re_lambda_negative": lambda00.real < 0,
             "re_c_nonpositive": None,
             "c00_negative": None}
    if case_id == 2:
        ok = True
        pts = np.asarray(Grid.disc_points(Disc(pde.R0), 4, 16), dtype=complex)
        for t in Grid.geometric_times(pde.T0, pde.T0 * 1e-4, 7) + (0.0,):
            try:
                vals = ex.eval_expr(c_expr, t=t, x=pts)
            except ex.EvalDomainError:
                continue
            if np.max(np.real(vals)) > 1e-12:
                ok = False
                break
        flags["re_c_nonpositive"] = ok
    if case_id == 3:
        flags["c00_negative"] = (c00.real < 0
                                 and abs(c00.imag) <= tol * (1 + abs(c00)))
    return flags


def _classify_plain(pde, coeff_exprs, max_abs, tol, lam_expr, lambda00, x_order):
    lead = None
    for j in range(1, x_order + 1):
        if max_abs[j] > tol:
            lead = j
            break
    if lead is None:
        _ambiguity_check(max_abs[1:], tol)
        return CaseClass(1, "plain", None, lam_expr, lambda00, coeff_exprs[0],
                         None, None, None,
                         _hypotheses(pde, 1, lambda00, None, None, tol))
    p = lead - 1
    if p >= 1:
        raise UnsupportedShapeError(
            f"v-coefficient vanishes to order {lead} in x; rerun with the "
            "Euler-derivative form to use the irregular-singular machinery")
    c_expr = _shifted_sum(coeff_exprs, start=1, x_order=x_order)
    c00 = _eval_at_origin(c_expr)
    return CaseClass(2, "plain", 0, lam_expr, lambda00, coeff_exprs[0],
                     c_expr, c00, None,
                     _hypotheses(pde, 2, lambda00, c_expr, c00, tol))


def _classify_euler(pde, coeff_exprs, max_abs, val_at0, tol, lam_expr, lambda00,
                    x_order):
    lead = None
    for j in range(x_order + 1):
        if val_at0[j] > tol:
            lead = j
            break
    if lead is None:
        if all(m <= tol for m in max_abs):
            _ambiguity_check(max_abs, tol)
            return CaseClass(1, "euler", None, lam_expr, lambda00, coeff_exprs[0],
                             None, None, None,
                             _hypotheses(pde, 1, lambda00, None, None, tol))
        raise IndeterminateCaseError(
            "Euler-form v-coefficient vanishes at t = 0 but not identically; "
            "no x^p split with c(0,0) != 0 exists")
    p = lead
    c_expr = _shifted_sum(coeff_exprs, start=p, x_order=x_order)
    c00 = _eval_at_origin(c_expr)
    if p == 0:
        return CaseClass(2, "euler", 0, lam_expr, lambda00, coeff_exprs[0],
                         c_expr, c00, None,
                         _hypotheses(pde, 2, lambda00, c_expr, c00, tol))
    beta_expr = _beta_sum(coeff_exprs, stop=p)
    return CaseClass(3, "euler", p, lam_expr, lambda00, coeff_exprs[0],
                     c_expr, c00, beta_expr,
                     _hypotheses(pde, 3, lambda00, c_expr, c00, tol),
                     sector=pde.sector)


def _shifted_sum(coeff_exprs, start: int, x_order: int) -> ex.Expr:
    """sum_{j >= start} g_j(t) x^(j - start), truncated at x_order."""
    acc = ex.ZERO
    for j in range(start, x_order + 1):
        acc = ex.fadd(acc, ex.fmul(coeff_exprs[j], ex.fpow(ex.Var("x"), j - start)))
    return acc


def _beta_sum(coeff_exprs, stop: int) -> ex.Expr:
    acc = ex.ZERO
    for j in range(stop):
        acc = ex.fadd(acc, ex.fmul(coeff_exprs[j], ex.fpow(ex.Var("x"), j)))
    return acc


# ---------------------------------------------------------------------------
# weight-comparison report


@dataclass
class A2Report:
    """Ratios of the forcing and drift magnitudes against the weight.

    ratio_f[k]  = sup_x |F(t_k, x, 0, 0)| / mu(t_k)
    ratio_fv[k] = |dF/dv(t_k, 0, 0, 0)| / mu(t_k)

    The trend flag compares the smallest time decade against the rest:
    bounded means the ratios did not keep climbing as t -> 0.  This is a
    report, not a proof.
    """

    times: tuple
    ratio_f: tuple
    ratio_fv: tuple
    f_bounded: bool
    fv_bounded: bool

    def to_dict(self) -> dict:
        return {
            "times": list(self.times),
            "ratio_f": list(self.ratio_f),
            "ratio_fv": list(self.ratio_fv),
            "f_bounded": self.f_bounded,
            "fv_bounded": self.fv_bounded,
        }


def _bounded_trend(times, ratios, growth: float = 1.1) -> bool:
    last_decade = [r for t, r in zip(times, ratios) if t <= times[-1] * 10]
    rest = [r for t, r in zip(times, ratios) if t > times[-1] * 10]
    if not rest or not last_decade:
        return True
    hi, ref = max(last_decade), max(rest)
    return hi <= growth * ref + 1e-12


def check_A2(pde, cc: CaseClass, grid: Grid = None) -> A2Report:
    """Sample the weight-domination ratios along a time ladder toward 0."""
    if grid is None:
        grid = Grid.for_disc(Disc(pde.R0), pde.T0, pde.T0 * 1e-6, n_times=25)
    times = grid.times
    if any(t2 >= t1 for t1, t2 in zip(times, times[1:])):
        raise DomainError("grid times must descend toward 0")
    pts = np.asarray(grid.points, dtype=complex)
    f0 = ex.subs(pde.rhs, {"u": 0.0, "v": 0.0})
    ratio_f, ratio_fv = [], []
    for t in times:
        mu = pde.weight.mu(t) if t <= pde.weight.T0 else pde.weight.mu(pde.weight.T0)
        sup_f = float(np.max(np.abs(ex.eval_expr(f0, t=t, x=pts))))
        fv0 = abs(complex(ex.eval_expr(cc.b_expr, t=t)))
        ratio_f.append(sup_f / mu)
        ratio_fv.append(fv0 / mu)
    return A2Report(tuple(times), tuple(ratio_f), tuple(ratio_fv),
                    _bounded_trend(times, ratio_f), _bounded_trend(times, ratio_fv))


# ---------------------------------------------------------------------------
# rotation normalization for the irregular-singular case


def rotate_x(pde, cc: CaseClass):
    """Rotate x so the leading v-coefficient value at the origin is negative.

    Returns the transformed equation and the rotation angle theta; the
    substitution x -> e^{i theta} x leaves the Euler derivative x*u_x
    invariant, so only x occurrences in the right-hand side change.  The
    transformed c(0,0) equals -|c(0,0)|.
    """
    if cc.case_id != 3:
        raise DomainError("rotation applies to the irregular-singular case only")
    if cc.c00 is None or abs(cc.c00) < 1e-300:
        raise DomainError("c(0,0) = 0 contradicts the case-3 shape")
    p = cc.p
    theta = (math.pi - cmath.phase(cc.c00)) / p
    rot = ex.fmul(ex.Const(cmath.exp(1j * theta)), ex.Var("x"))
    new_rhs = ex.subs(pde.rhs, {"x": rot})
    from .expr import PdeSpec
    new_pde = PdeSpec(rhs=new_rhs, euler_form=pde.euler_form, weight=pde.weight,
                      T0=pde.T0, R0=pde.R0, rho0=pde.rho0, sector=pde.sector)
    return new_pde, theta
