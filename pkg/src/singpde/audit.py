"""Numerical estimation of the vanishing-double-limit uniqueness criterion,
plus the integral decomposition that turns a solution pair into the
coefficient fields the characteristic machinery consumes.

The criterion under audit is the double limit (outer in the space radius,
inner in the time window) of

    Q(R, sigma) = (1/R^2)  sup_{(0,sigma) x D_R} |u(t, x)|

(and its sector variant with 1/eta^2 over S(eta*theta, eta*R)).  A limsup
is not computable, so the audit evaluates Q on finite descending ladders
and classifies the trend; reports always carry the raw table.  Disc
suprema are sampled on the bounding circle |x| = R (for x-holomorphic u
the boundary dominates by the maximum principle) plus a mid circle as a
sanity row.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import (DomainError, Disc, Grid, Sector, SingpdeError,
                   cauchy_derivative)
from .characteristics import FieldSpec
from .classify import CaseClass
from . import expr as ex

VERDICT_UNIQUE = "uniqueness-applies"
VERDICT_CRITERION = "criterion-fails"
VERDICT_HYPOTHESES = "hypotheses-fail"
VERDICT_INCONCLUSIVE = "inconclusive"

TREND_ZERO = "tends-to-zero"
TREND_POSITIVE = "tends-to-positive"
TREND_DIVERGES = "diverges"


# ---------------------------------------------------------------------------
# solution fields


@dataclass
class SolutionField:
    """A candidate solution u(t, x) with its x-derivative evaluator.

    The derivative comes from symbolic differentiation (expression-backed
    fields), exact coefficient shifts (series-backed), or Cauchy-circle
    quadrature (bare callables).  All evaluators broadcast over numpy
    arrays of x.
    """

    u: callable
    ux: callable
    ut: callable | None
    provenance: str

    @classmethod
    def from_expr(cls, source) -> "SolutionField":
        e = ex.parse(source) if isinstance(source, str) else source
        bad = ex.free_vars(e) - {"t", "x"}
        if bad:
            raise DomainError(f"solution uses variables {sorted(bad)}")
        dx = ex.diff(e, "x")
        dt = ex.diff(e, "t")
        return cls(u=lambda t, x: ex.eval_expr(e, t=t, x=x),
                   ux=lambda t, x: ex.eval_expr(dx, t=t, x=x),
                   ut=lambda t, x: ex.eval_expr(dt, t=t, x=x),
                   provenance=f"expr:{ex.to_str(e)}")

    @classmethod
    def zero(cls) -> "SolutionField":
        return cls(u=lambda t, x: np.zeros_like(np.asarray(x, dtype=complex)) if isinstance(x, np.ndarray) else 0j,
                   ux=lambda t, x: np.zeros_like(np.asarray(x, dtype=complex)) if isinstance(x, np.ndarray) else 0j,
                   ut=lambda t, x: np.zeros_like(np.asarray(x, dtype=complex)) if isinstance(x, np.ndarray) else 0j,
                   provenance="zero")

    @classmethod
    def from_series(cls, ds) -> "SolutionField":
        return cls(u=ds.eval, ux=ds.eval_dx, ut=ds.eval_dt,
                   provenance=f"series:M={ds.M},N={ds.N}")

    @classmethod
    def from_callable(cls, fn, domain, deriv_frac: float = 0.25,
                      dt_rel: float = 1e-6, nodes: int = 32) -> "SolutionField":
        def ux(t, x):
            if isinstance(x, np.ndarray):
                return np.asarray([ux(t, complex(z)) for z in x.ravel()],
                                  dtype=complex).reshape(x.shape)
            margin = (domain.R - abs(x)) if isinstance(domain, Disc) else domain.euclid_margin(x)
            if margin <= 0:
                raise DomainError(f"{x} not interior to the domain")
            return cauchy_derivative(lambda z: fn(t, z), x, deriv_frac * margin, n=nodes)

        def ut(t, x):
            h = dt_rel * t
            return (fn(t + h, x) - fn(t - h, x)) / (2 * h)

        return cls(u=fn, ux=ux, ut=ut, provenance="callable")


# ---------------------------------------------------------------------------
# the audit estimator


@dataclass
class AuditReport:
    """Raw Q table plus trend classification and hypothesis flags.

    `verdict` is only set by `verdict()`; the estimator itself reports
    the criterion side.  `outer_estimate` is the max over the two
    smallest outer rungs of the per-rung inner limits (None when the
    table diverges).
    """

    kind: str                  # "disc" | "sector"
    outer_ladder: tuple        # R or eta, descending
    sigma_ladder: tuple        # descending
    Q: list                    # rows follow outer_ladder
    inner: tuple               # per-outer-rung value at the smallest sigma
    inner_monotone: tuple
    trend: str
    outer_estimate: float | None
    flags: dict = field(default_factory=dict)
    verdict: str | None = None
    sup_diff: float | None = None
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": "audit-v1",
            "kind": self.kind,
            "Q": self.Q,
            "ladders": {"outer": list(self.outer_ladder),
                        "sigma": list(self.sigma_ladder)},
            "inner": list(self.inner),
            "inner_monotone": list(self.inner_monotone),
            "trend": self.trend,
            "outer_estimate": self.outer_estimate,
            "flags": self.flags,
            "verdict": self.verdict,
            "sup_diff": self.sup_diff,
            "failures": [list(f) for f in self.failures],
        }


def _descending(ladder, name):
    ladder = tuple(float(v) for v in ladder)
    if len(ladder) < 4:
        raise DomainError(f"{name} ladder needs at least 4 rungs")
    if any(b >= a for a, b in zip(ladder, ladder[1:])) or ladder[-1] <= 0:
        raise DomainError(f"{name} ladder must be positive and strictly descending")
    return ladder


def _classify_trend(Q, zero_drop, div_growth):
    rows = np.asarray(Q, dtype=float)
    inner = rows[:, -1]
    diverges = bool(np.any(rows[:, -1] > div_growth * rows[:, 0] + 1e-300))
    zero_rows = rows[:, -1] <= rows[:, 0] / zero_drop + 1e-300
    if diverges:
        return TREND_DIVERGES, None, inner
    if np.all(zero_rows):
        return TREND_ZERO, float(np.max(inner[-2:])), inner
    if inner[-1] <= inner[0] / zero_drop + 1e-300:
        return TREND_ZERO, float(np.max(inner[-2:])), inner
    if inner[-1] > div_growth * inner[0] + 1e-300:
        return TREND_DIVERGES, None, inner
    return TREND_POSITIVE, float(np.max(inner[-2:])), inner


def _sup_over_window(u: SolutionField, times, pts) -> float:
    worst = 0.0
    for t in times:
        vals = u.u(t, pts)
        mags = np.abs(np.asarray(vals, dtype=complex))
        if not np.all(np.isfinite(mags)):
            raise ex.EvalDomainError(f"non-finite value at t={t}")
        worst = max(worst, float(np.max(mags)))
    return worst


def audit_disc(u: SolutionField, R_ladder=(0.08, 0.04, 0.02, 0.01),
               sigma_ladder=(0.1, 0.01, 0.001, 1e-4), n_times: int = 10,
               n_angles: int = 64, t_floor_ratio: float = 1e-3,
               zero_drop: float = 5.0, div_growth: float = 10.0) -> AuditReport:
    """Estimate the disc criterion table Q(R, sigma) = sup |u| / R^2."""
    R_ladder = _descending(R_ladder, "R")
    sigma_ladder = _descending(sigma_ladder, "sigma")
    angles = np.exp(2j * math.pi * np.arange(n_angles) / n_angles)
    Q, failures = [], []
    for R in R_ladder:
        pts = np.concatenate([R * angles, 0.5 * R * angles[:: max(1, n_angles // 16)]])
        row = []
        for sigma in sigma_ladder:
            times = Grid.geometric_times(sigma, sigma * t_floor_ratio, n_times)
            try:
                row.append(_sup_over_window(u, times, pts) / R ** 2)
            except (ex.EvalDomainError, OverflowError) as exc:
                failures.append((R, sigma, str(exc)))
                row.append(math.inf)
        Q.append(row)
    return _finish_report("disc", R_ladder, sigma_ladder, Q, failures,
                          zero_drop, div_growth)


def audit_sector(u: SolutionField, s: Sector, eta_ladder=(0.8, 0.4, 0.2, 0.1),
                 sigma_ladder=(0.1, 0.01, 0.001, 1e-4), n_radii: int = 10,
                 n_angles: int = 9, t_floor_ratio: float = 1e-3,
                 zero_drop: float = 5.0, div_growth: float = 10.0) -> AuditReport:
    """Sector variant: Q(eta, sigma) = sup over S(eta*theta, eta*R) |u| / eta^2."""
    eta_ladder = _descending(eta_ladder, "eta")
    sigma_ladder = _descending(sigma_ladder, "sigma")
    Q, failures = [], []
    for eta in eta_ladder:
        sub = Sector(eta * s.theta, eta * s.R)
        pts = list(Grid.sector_points(sub, n_radii=n_radii, n_angles=n_angles,
                                      r_lo_frac=0.02))
        # near-boundary arc; the sup lives there for monomial-like fields
        pts += [sub.R * 0.999 * cmath.exp(1j * a)
                for a in np.linspace(-sub.theta * 0.99, sub.theta * 0.99, n_angles)]
        pts = np.asarray(pts, dtype=complex)
        row = []
        for sigma in sigma_ladder:
            times = Grid.geometric_times(sigma, sigma * t_floor_ratio, 10)
            try:
                row.append(_sup_over_window(u, times, pts) / eta ** 2)
            except (ex.EvalDomainError, OverflowError) as exc:
                failures.append((eta, sigma, str(exc)))
                row.append(math.inf)
        Q.append(row)
    return _finish_report("sector", eta_ladder, sigma_ladder, Q, failures,
                          zero_drop, div_growth)


def _finish_report(kind, outer, sigma, Q, failures, zero_drop, div_growth):
    if failures:
        trend, est, inner = TREND_DIVERGES, None, tuple(row[-1] for row in Q)
        inner = np.asarray(inner)
    else:
        trend, est, inner = _classify_trend(Q, zero_drop, div_growth)
    mono = tuple(bool(all(a >= b - 1e-12 for a, b in zip(row, row[1:]))) for row in Q)
    clean_Q = [[(None if math.isinf(v) else v) for v in row] for row in Q]
    return AuditReport(kind, outer, sigma, clean_Q,
                       tuple(float(v) if math.isfinite(v) else None for v in inner),
                       mono, trend, est, failures=failures)


# ---------------------------------------------------------------------------
# integral decomposition of the nonlinearity


def _gauss01(n):
    nodes, weights = leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def hadamard_fields(pde, cc: CaseClass, u0: SolutionField, u: SolutionField,
                    n_gauss: int = 16, a_decay: float = None,
                    deriv_nodes: int = 8) -> FieldSpec:
    """Coefficient fields of the linear equation the difference w = u - u0
    satisfies.

    With H(t,x,w,q) = F(t,x,w+u0,q+v0) - F(t,x,u0,v0) and the averaged
    derivatives a1 = int_0^1 H_w(.., s w, s q) ds - lam and
    b1 = int_0^1 H_q(.., s w, s q) ds (fixed-order Gauss-Legendre in s,
    exact for polynomial F), the returned field carries

        a(t,x) = a1 at (w(t,x), q(t,x)),
        b(t,x) = b1 at (w(t,x), q(t,x)) minus the explicit x^p c part,

    assembled per case so that field.drift matches the w-transport drift.
    gamma and ell are the x-derivatives entering the q equation, computed
    by Cauchy circles on the composite fields (plus exact symbolic parts).
    """
    nodes, weights = _gauss01(n_gauss)
    rhs_u = ex.diff(pde.rhs, "u")
    rhs_v = ex.diff(pde.rhs, "v")
    lam_expr = cc.lam_expr
    dlam_expr = ex.diff(lam_expr, "x")
    euler = cc.case_id == 3
    p = cc.p if cc.p is not None else 0

    def wf(t, x):
        return u.u(t, x) - u0.u(t, x)

    def qf(t, x):
        d = u.ux(t, x) - u0.ux(t, x)
        return x * d if euler else d

    def v0f(t, x):
        d = u0.ux(t, x)
        return x * d if euler else d

    def a_field(t, x):
        wv, qv, u0v, v0v = wf(t, x), qf(t, x), u0.u(t, x), v0f(t, x)
        acc = 0.0
        for s, wgt in zip(nodes, weights):
            acc = acc + wgt * ex.eval_expr(rhs_u, t=t, x=x, u=s * wv + u0v, v=s * qv + v0v)
        return acc - ex.eval_expr(lam_expr, t=t, x=x)

    def b1tot(t, x):
        wv, qv, u0v, v0v = wf(t, x), qf(t, x), u0.u(t, x), v0f(t, x)
        acc = 0.0
        for s, wgt in zip(nodes, weights):
            acc = acc + wgt * ex.eval_expr(rhs_v, t=t, x=x, u=s * wv + u0v, v=s * qv + v0v)
        return acc

    if cc.case_id == 1:
        b_field = b1tot
        c_field = None
        form = "disc"
    elif cc.case_id == 2:
        def b_field(t, x):
            return b1tot(t, x) - x * cc.c(t, x)
        c_field = cc.c
        form = "radial"
    else:
        def b_field(t, x):
            return b1tot(t, x) - x ** p * cc.c(t, x)
        c_field = cc.c
        form = "euler"

    if isinstance(pde.sector, Sector) and euler:
        domain = pde.sector
    else:
        domain = Disc(pde.R0)

    def _radius(x):
        if isinstance(domain, Disc):
            margin = domain.R - abs(x)
        else:
            margin = domain.euclid_margin(x)
        if margin <= 0:
            raise DomainError(f"{x} not interior to the working domain")
        return 0.4 * margin

    def gamma(t, x):
        val = (ex.eval_expr(dlam_expr, t=t, x=x)
               + cauchy_derivative(lambda z: a_field(t, z), x, _radius(x), n=deriv_nodes))
        return x * val if euler else val

    if cc.case_id == 1:
        def ell(t, x):
            return cauchy_derivative(lambda z: b_field(t, z), x, _radius(x), n=deriv_nodes)
    elif cc.case_id == 2:
        dc_expr = ex.diff(cc.c_expr, "x")

        def ell(t, x):
            return (cauchy_derivative(lambda z: b_field(t, z), x, _radius(x), n=deriv_nodes)
                    + x * ex.eval_expr(dc_expr, t=t, x=x))
    else:
        xc_expr = ex.fmul(ex.fpow(ex.Var("x"), p), cc.c_expr)
        dxc_expr = ex.diff(xc_expr, "x")

        def ell(t, x):
            db = cauchy_derivative(lambda z: b_field(t, z), x, _radius(x), n=deriv_nodes)
            return x * db + x * ex.eval_expr(dxc_expr, t=t, x=x)

    if a_decay is None and cc.lambda00.real < 0:
        a_decay = 0.4 * (-cc.lambda00.real)

    return FieldSpec(b=b_field, lam=cc.lam, a=a_field, gamma=gamma, ell=ell,
                     a_decay=a_decay, form=form, c=c_field, p=p, domain=domain,
                     notes={"provenance": f"pair({u.provenance} vs {u0.provenance})"})


def transport_residual(pde, cc: CaseClass, fieldspec: FieldSpec,
                       u0: SolutionField, u: SolutionField, grid: Grid) -> float:
    """Max residual of the linear transport identity on the grid:

        t w_t - drift(t, x) * w_x - (lam + a) w = 0

    for w = u - u0.  An exact identity when both fields solve the
    equation and the averaged-derivative quadrature is exact; the
    observed residual certifies the assembled fields.
    """
    worst = 0.0
    for t in grid.times:
        for x in grid.points:
            wt = u.ut(t, x) - u0.ut(t, x)
            wx = u.ux(t, x) - u0.ux(t, x)
            wv = u.u(t, x) - u0.u(t, x)
            res = (t * wt - fieldspec.drift(t, x) * wx
                   - fieldspec.w_coeff(t, x) * wv)
            worst = max(worst, abs(res))
    return worst


# ---------------------------------------------------------------------------
# verdict assembly


def _comparison_grid(pde) -> Grid:
    if pde.sector is not None:
        return Grid.for_sector(pde.sector, pde.T0 * 0.9, pde.T0 * 1e-3,
                               n_times=8, n_radii=5, n_angles=5)
    return Grid.for_disc(Disc(pde.R0 * 0.8), pde.T0 * 0.9, pde.T0 * 1e-3,
                         n_times=8, n_circles=3, n_angles=8)


def sup_difference(u: SolutionField, u0: SolutionField, grid: Grid) -> float:
    pts = np.asarray(grid.points, dtype=complex)
    worst = 0.0
    for t in grid.times:
        d = np.abs(np.asarray(u.u(t, pts), dtype=complex)
                   - np.asarray(u0.u(t, pts), dtype=complex))
        worst = max(worst, float(np.max(d)))
    return worst


def verdict(pde, cc: CaseClass, u: SolutionField, u0: SolutionField,
            report: AuditReport = None, audit_tol: float = 1e-9,
            **audit_kwargs) -> AuditReport:
    """Combine hypothesis flags, the criterion trend and a direct
    comparison sup|u - u0| into a final verdict.

    Soundness guard: even when the hypotheses and criterion both pass,
    an observed sup|u - u0| above 10 * audit_tol downgrades the verdict
    to inconclusive rather than claiming agreement that is not there.
    """
    if report is None:
        if pde.sector is not None and cc.case_id == 3:
            report = audit_sector(u, pde.sector, **audit_kwargs)
        else:
            report = audit_disc(u, **audit_kwargs)
    report.flags = dict(cc.hypotheses)
    report.sup_diff = sup_difference(u, u0, _comparison_grid(pde))
    if not cc.hypotheses_ok:
        report.verdict = VERDICT_HYPOTHESES
    elif report.trend == TREND_ZERO:
        if report.sup_diff > 10 * audit_tol:
            report.verdict = VERDICT_INCONCLUSIVE
        else:
            report.verdict = VERDICT_UNIQUE
    elif report.trend in (TREND_POSITIVE, TREND_DIVERGES):
        report.verdict = VERDICT_CRITERION
    else:
        report.verdict = VERDICT_INCONCLUSIVE
    return report


def cond_vanishing_sup(u: SolutionField, R: float, t_hi: float = 0.1,
                       t_lo: float = 1e-5, n: int = 12,
                       drop: float = 0.6) -> bool:
    """Side flag: does sup_{|x|<R} |u(t, .)| appear to vanish as t -> 0?

    Heuristic ratio test between the smallest and largest sampled times;
    slow (logarithmic) decay still passes, constants do not.
    """
    angles = np.exp(2j * math.pi * np.arange(24) / 24)
    pts = R * angles
    sups = []
    for t in Grid.geometric_times(t_hi, t_lo, n):
        sups.append(float(np.max(np.abs(np.asarray(u.u(t, pts), dtype=complex)))))
    return sups[-1] <= drop * sups[0] + 1e-300
