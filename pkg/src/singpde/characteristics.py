"""Characteristic tracing toward the singular time and proof-estimate checks.

The characteristic ODE t*dx/dt = -drift(t, x) is integrated in log-time
s = log t (dx/ds = -drift(e^s, x)), which absorbs the singularity at
t = 0; integration runs from s0 = log t0 down to log t_min with an
embedded Dormand-Prince 5(4) pair under PI step control.  Per-step error
is kept below tol * (1 + |state|) componentwise; domain exit is localized
by bisection to 1e-12 in s; steps collapsing below 1e-12 report failure
with the last good state.

Transported values solve, along the trace,

    t dw*/dt = (lam + a) w*,
    t dq*/dt = gamma w* + (lam + a + ell [+ c]) q*,

(the extra c enters for the radially-degenerate drift form).  The
verify_* helpers re-check the decay, position, confinement, modulus and
reconstruction estimates that the uniqueness argument rests on, with
explicit slack; they return reports, never silently assume.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .core import (DomainError, Disc, Grid, PhiWeight, Sector, SingpdeError,
                   cauchy_derivative, sector_distance)

REACHED_TMIN = "reached_tmin"
EXITED_DOMAIN = "exited_domain"
STEP_FAILURE = "step_failure"

_S_FLOOR = 1e-12


def _as_field(value):
    if callable(value):
        return value
    const = complex(value)
    return lambda t, x, _c=const: _c


@dataclass
class FieldSpec:
    """Coefficient fields of a linearized transport problem.

    form selects how the drift is assembled from b and c:
      "disc":   drift = b(t, x)
      "radial": drift = b(t, x) + x * c(t, x)
      "euler":  drift = x * (b(t, x) + x^p * c(t, x))

    a_decay is the decay rate the transported values are expected to obey
    (positive; Re(lam + a) should stay below -a_decay on the working
    domain -- `check_decay_margin` samples that, it is not assumed).
    """

    b: callable
    lam: callable
    a: callable
    gamma: callable
    ell: callable
    a_decay: float | None = None
    form: str = "disc"
    c: callable | None = None
    p: int = 0
    domain: object | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.form not in ("disc", "radial", "euler"):
            raise DomainError(f"unknown drift form {self.form!r}")
        if self.form in ("radial", "euler") and self.c is None:
            raise DomainError(f"{self.form} drift needs a c field")
        if self.form == "euler" and self.p < 1:
            raise DomainError("euler drift needs p >= 1")
        if self.a_decay is not None and self.a_decay <= 0:
            raise DomainError("a_decay must be positive when given")

    @classmethod
    def synthetic(cls, b=0.0, lam=-1.0, a=0.0, gamma=0.0, ell=0.0, c=None,
                  p=0, form="disc", a_decay=None, domain=None) -> "FieldSpec":
        return cls(_as_field(b), _as_field(lam), _as_field(a), _as_field(gamma),
                   _as_field(ell), a_decay=a_decay, form=form,
                   c=None if c is None else _as_field(c), p=p, domain=domain)

    def drift(self, t, x):
        if self.form == "disc":
            return self.b(t, x)
        if self.form == "radial":
            return self.b(t, x) + x * self.c(t, x)
        return x * (self.b(t, x) + x ** self.p * self.c(t, x))

    def w_coeff(self, t, x):
        return self.lam(t, x) + self.a(t, x)

    def q_coeff(self, t, x):
        base = self.lam(t, x) + self.a(t, x) + self.ell(t, x)
        if self.form == "radial":
            base = base + self.c(t, x)
        return base

    def check_decay_margin(self, grid: Grid) -> dict:
        """Sample Re(lam + a) against -a_decay; recorded, not enforced."""
        if self.a_decay is None:
            return {"a_decay": None, "ok": None, "max_re": None}
        worst = -math.inf
        for t in grid.times:
            for x in grid.points:
                worst = max(worst, (self.lam(t, x) + self.a(t, x)).real)
        return {"a_decay": self.a_decay, "ok": worst < -self.a_decay, "max_re": worst}


@dataclass
class CharTrace:
    """A sampled characteristic with optionally transported values.

    ts descend from t0; xs[k] = x(ts[k]).  ws/qs are filled by
    `transport`.  t_xi reports the smallest reached time (the exit time
    when the trajectory left the domain).
    """

    ts: np.ndarray
    xs: np.ndarray
    status: str
    field: FieldSpec
    domain: object
    ws: np.ndarray | None = None
    qs: np.ndarray | None = None
    exit_point: complex | None = None

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def xi(self) -> complex:
        return complex(self.xs[0])

    @property
    def t_xi(self) -> float:
        return float(self.ts[-1])

    CSV_HEADER = "t,re(x),im(x),re(w*),im(w*),re(q*),im(q*)"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        n = len(self.ts)
        ws = self.ws if self.ws is not None else [complex("nan")] * n
        qs = self.qs if self.qs is not None else [complex("nan")] * n
        for k in range(n):
            w, q = complex(ws[k]), complex(qs[k])
            x = complex(self.xs[k])
            lines.append(",".join([repr(float(self.ts[k])),
                                   repr(x.real), repr(x.imag),
                                   repr(w.real), repr(w.imag),
                                   repr(q.real), repr(q.imag)]))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) in log-time

_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
          187 / 2100, 1 / 40)


class _StepError(Exception):
    pass


def _dp_step(rhs, s, y, h):
    """One embedded step; returns (y5, error_estimate)."""
    k = []
    for stage in range(7):
        ys = y.copy()
        for m, a in enumerate(_DP_A[stage]):
            if a:
                ys = ys + (h * a) * k[m]
        k.append(rhs(s + _DP_C[stage] * h, ys))
    y5 = y.copy()
    err = np.zeros_like(y)
    for m in range(7):
        if _DP_B5[m]:
            y5 = y5 + (h * _DP_B5[m]) * k[m]
        d = _DP_B5[m] - _DP_B4[m]
        if d:
            err = err + (h * d) * k[m]
    return y5, err


def _integrate(fieldspec: FieldSpec, t0: float, xi: complex, t_min: float,
               dom, tol: float, w0=None, q0=None, max_step: float = None):
    transport_on = w0 is not None

    def rhs(s, y):
        t = math.exp(s)
        x = y[0]
        try:
            dx = -fieldspec.drift(t, x)
            if transport_on:
                dw = fieldspec.w_coeff(t, x) * y[1]
                dq = fieldspec.gamma(t, x) * y[1] + fieldspec.q_coeff(t, x) * y[2]
                out = np.array([dx, dw, dq], dtype=complex)
            else:
                out = np.array([dx], dtype=complex)
        except (SingpdeError, OverflowError, ZeroDivisionError) as exc:
            raise _StepError(str(exc))
        if not np.all(np.isfinite(out.view(float))):
            raise _StepError("non-finite derivative")
        return out

    s0, s_min = math.log(t0), math.log(t_min)
    if transport_on:
        y = np.array([xi, w0, q0], dtype=complex)
    else:
        y = np.array([xi], dtype=complex)

    ts, states = [t0], [y.copy()]
    status = REACHED_TMIN
    exit_point = None

    span = s0 - s_min
    h = -min(0.05, span / 10.0, max_step or math.inf)
    s = s0
    while s > s_min + 1e-14:
        h = -min(-h, s - s_min)  # land exactly on s_min
        if max_step is not None:
            h = -min(-h, max_step)
        try:
            y_new, err = _dp_step(rhs, s, y, h)
            scale = 1.0 + np.abs(y)
            err_norm = float(np.max(np.abs(err) / scale))
        except _StepError:
            err_norm = math.inf
            y_new = None
        if err_norm <= tol:
            s_new = s + h
            x_new = complex(y_new[0])
            if not dom.contains(x_new):
                s_exit, y_exit = _bisect_exit(rhs, dom, s, y, h)
                ts.append(math.exp(s_exit))
                states.append(y_exit)
                status = EXITED_DOMAIN
                exit_point = complex(y_exit[0])
                break
            s, y = s_new, y_new
            ts.append(math.exp(s))
            states.append(y.copy())
            factor = 0.9 * (tol / err_norm) ** 0.2 if err_norm > 0 else 5.0
        else:
            factor = max(0.2, 0.9 * (tol / err_norm) ** 0.2) if math.isfinite(err_norm) else 0.5
        factor = min(5.0, max(0.2, factor))
        h = h * factor
        if max_step is not None and -h > max_step:
            h = -max_step
        if -h < _S_FLOOR:
            status = STEP_FAILURE
            break

    ts = np.asarray(ts, dtype=float)
    arr = np.asarray(states, dtype=complex)
    xs = arr[:, 0]
    ws = arr[:, 1] if transport_on else None
    qs = arr[:, 2] if transport_on else None
    return CharTrace(ts, xs, status, fieldspec, dom, ws=ws, qs=qs,
                     exit_point=exit_point)


def _bisect_exit(rhs, dom, s, y, h):
    """Localize the exit along a single step to 1e-12 in s."""
    lo, hi = 0.0, -h  # step sizes are negative
    y_hi, _ = _dp_step(rhs, s, y, h)
    for _ in range(64):
        if hi - lo <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        y_mid, _ = _dp_step(rhs, s, y, -mid)
        if dom.contains(complex(y_mid[0])):
            lo = mid
        else:
            hi, y_hi = mid, y_mid
    return s - hi, y_hi


def trace(fieldspec: FieldSpec, t0: float, xi: complex, t_min: float,
          dom=None, tol: float = 1e-9, max_step: float = None) -> CharTrace:
    """Integrate the characteristic from (t0, xi) backward to t_min."""
    if not 0 < t_min < t0:
        raise DomainError("need 0 < t_min < t0")
    dom = dom if dom is not None else fieldspec.domain
    if dom is None:
        raise DomainError("no domain given and the field declares none")
    if not dom.contains(xi):
        raise DomainError(f"initial point {xi} is not interior to the domain")
    return _integrate(fieldspec, t0, xi, t_min, dom, tol, max_step=max_step)


def transport(fieldspec: FieldSpec, tr: CharTrace, w0: complex, q0: complex,
              tol: float = 1e-9, max_step: float = None) -> CharTrace:
    """Carry w* and q* along the characteristic of tr.

    Re-integrates the coupled (x, w*, q*) system with the same log-time
    stepper and the trace's initial data, so the transported values see
    the same accuracy control as the trajectory itself.
    """
    if tr.field is not fieldspec:
        raise DomainError("trace was computed on a different field")
    return _integrate(fieldspec, tr.t0, tr.xi, max(tr.t_xi, 1e-300), tr.domain,
                      tol, w0=complex(w0), q0=complex(q0), max_step=max_step)


# ---------------------------------------------------------------------------
# decay estimates


@dataclass
class DecayReport:
    passed: bool
    n_pairs: int
    violations: list
    gamma_sup: float
    r1: float
    r2: float
    extrapolated_w_bound: float

    def to_dict(self):
        return {"passed": self.passed, "n_pairs": self.n_pairs,
                "violations": self.violations[:16], "gamma_sup": self.gamma_sup,
                "r1": self.r1, "r2": self.r2,
                "extrapolated_w_bound": self.extrapolated_w_bound}


def verify_decay(tr: CharTrace, a_decay: float = None, slack: float = 1e-9,
                 max_pairs: int = None) -> DecayReport:
    """Check the transported decay inequalities on sampled time pairs.

    For t1 < tau along the trace:
      |w*(tau)| <= (t1/tau)^a |w*(t1)|
      |q*(tau)| <= (t1/tau)^a (Gamma |w*(t1)| log(tau/t1) + |q*(t1)|)
    with multiplicative slack.  Also reports the forward bound
    (t_last/t0)^a * sup|w*|, which must shrink as the trace approaches
    the singular time.
    """
    if tr.ws is None:
        raise DomainError("transport the trace first")
    a = a_decay if a_decay is not None else tr.field.a_decay
    if a is None or a <= 0:
        raise DomainError("no positive decay rate available")
    gam = max(abs(tr.field.gamma(t, x)) for t, x in zip(tr.ts, tr.xs))
    n = len(tr.ts)
    pairs = [(l, k) for k in range(1, n) for l in range(k)]
    if max_pairs is not None and len(pairs) > max_pairs:
        stride = len(pairs) / max_pairs
        pairs = [pairs[int(m * stride)] for m in range(max_pairs)]
    violations = []
    for l, k in pairs:
        tau, t1 = tr.ts[l], tr.ts[k]
        ratio = (t1 / tau) ** a
        w_rhs = ratio * abs(tr.ws[k])
        if abs(tr.ws[l]) > w_rhs * (1 + slack) + 1e-300:
            violations.append(("w", float(t1), float(tau), abs(tr.ws[l]), w_rhs))
        q_rhs = ratio * (gam * abs(tr.ws[k]) * math.log(tau / t1) + abs(tr.qs[k]))
        if abs(tr.qs[l]) > q_rhs * (1 + slack) + 1e-300:
            violations.append(("q", float(t1), float(tau), abs(tr.qs[l]), q_rhs))
    r1 = float(np.max(np.abs(tr.ws)))
    r2 = float(np.max(np.abs(tr.qs)))
    bound = (tr.ts[-1] / tr.ts[0]) ** a * r1
    return DecayReport(not violations, len(pairs), violations, gam, r1, r2, bound)


# ---------------------------------------------------------------------------
# position bound


@dataclass
class PositionReport:
    passed: bool
    violations: list
    drift_bound_ok: bool
    integral_checks: list  # (a, t1, t0, quad_plain, bound_plain, quad_log, bound_log)

    def to_dict(self):
        return {"passed": self.passed, "violations": self.violations[:16],
                "drift_bound_ok": self.drift_bound_ok,
                "integral_checks": self.integral_checks}


def verify_position(tr: CharTrace, B0: float, B1: float, B2: float,
                    phi: PhiWeight, Gamma: float = None,
                    slack: float = 1e-9) -> PositionReport:
    """Check |x(t1)| against the drift-budget bound at every sample.

        |x(t1)| <= |xi| + B0 (phi(t0) - phi(t1))
                   + (B1/a + B2 Gamma / a^2) |w*(t1)| + (B2/a) |q*(t1)|

    Also verifies the two workhorse integrals by quadrature:
    int (t1/tau)^a dtau/tau <= 1/a and
    int (t1/tau)^a log(tau/t1) dtau/tau <= 1/a^2, and samples the
    premise |b| <= B0 mu + B1 |w| + B2 |q| along the trace.
    """
    if tr.ws is None:
        raise DomainError("transport the trace first")
    a = tr.field.a_decay
    if a is None:
        raise DomainError("field has no decay rate")
    gam = Gamma
    if gam is None:
        gam = max(abs(tr.field.gamma(t, x)) for t, x in zip(tr.ts, tr.xs))
    xi = abs(tr.xi)
    t0 = tr.t0
    phi_t0 = phi.value(min(t0, phi.weight.T0))
    violations = []
    drift_ok = True
    mu_T0 = phi.weight.T0
    for k in range(1, len(tr.ts)):
        t1 = float(tr.ts[k])
        bound = (xi + B0 * (phi_t0 - phi.value(min(t1, mu_T0)))
                 + (B1 / a + B2 * gam / a ** 2) * abs(tr.ws[k])
                 + (B2 / a) * abs(tr.qs[k]))
        if abs(tr.xs[k]) > bound * (1 + slack) + 1e-300:
            violations.append((t1, abs(tr.xs[k]), bound))
        mu = phi.weight.mu(min(t1, mu_T0))
        if abs(tr.field.b(t1, tr.xs[k])) > (B0 * mu + B1 * abs(tr.ws[k])
                                            + B2 * abs(tr.qs[k])) * (1 + slack) + 1e-300:
            drift_ok = False
    checks = []
    for k in (len(tr.ts) // 2, len(tr.ts) - 1):
        t1 = float(tr.ts[k])
        if t1 >= t0:
            continue
        q1, _ = quad(lambda tau: (t1 / tau) ** a / tau, t1, t0, limit=200)
        q2, _ = quad(lambda tau: (t1 / tau) ** a * math.log(tau / t1) / tau, t1, t0,
                     limit=200)
        checks.append((a, t1, t0, q1, 1.0 / a, q2, 1.0 / a ** 2))
    ints_ok = all(c[3] <= c[4] * (1 + 1e-9) and c[5] <= c[6] * (1 + 1e-9) for c in checks)
    return PositionReport(not violations and ints_ok, violations, drift_ok, checks)


# ---------------------------------------------------------------------------
# confinement


@dataclass(frozen=True)
class EscapeBudget:
    """The smallness data the confinement argument needs.

    lhs() = B0*phi_sigma + (B1/a + B2*Gamma/a^2) r1 + (B2/a) r2 must stay
    below R/2, and A + L < a.
    """

    B0: float
    B1: float
    B2: float
    Gamma: float
    r1: float
    r2: float
    A: float
    L: float
    a: float
    phi_sigma: float

    def lhs(self) -> float:
        return (self.B0 * self.phi_sigma
                + (self.B1 / self.a + self.B2 * self.Gamma / self.a ** 2) * self.r1
                + (self.B2 / self.a) * self.r2)


@dataclass
class EscapeReport:
    budget_radius_ok: bool
    budget_decay_ok: bool
    budget_lhs: float
    statuses: list
    all_confined: bool
    passed: bool

    def to_dict(self):
        return {"budget_radius_ok": self.budget_radius_ok,
                "budget_decay_ok": self.budget_decay_ok,
                "budget_lhs": self.budget_lhs, "statuses": self.statuses,
                "all_confined": self.all_confined, "passed": self.passed}


def escape_check(fieldspec: FieldSpec, dom: Disc, xi_set, t0: float,
                 t_min: float, budget: EscapeBudget, tol: float = 1e-9) -> EscapeReport:
    """Confinement surrogate: trajectories from the half disc should reach
    t_min inside the full disc whenever the budget inequalities hold.

    Budget violations are flagged first; confinement is still attempted
    and reported either way.
    """
    radius_ok = budget.lhs() < dom.R / 2
    decay_ok = budget.A + budget.L < budget.a
    statuses = []
    for xi in xi_set:
        if abs(xi) >= dom.R / 2:
            raise DomainError(f"start point {xi} outside the half disc")
        tr = trace(fieldspec, t0, xi, t_min, dom=dom, tol=tol)
        statuses.append(tr.status)
    confined = all(s == REACHED_TMIN for s in statuses)
    passed = radius_ok and decay_ok and confined
    return EscapeReport(radius_ok, decay_ok, budget.lhs(), statuses, confined, passed)


# ---------------------------------------------------------------------------
# modulus factor along sector traces


def _cumulative_b_integral(tr: CharTrace):
    """I_k = integral_{t_k}^{t0} b(tau, x(tau)) dtau/tau by trapezoid in s."""
    ss = np.log(tr.ts)
    bs = np.asarray([tr.field.b(float(t), complex(x)) for t, x in zip(tr.ts, tr.xs)],
                    dtype=complex)
    out = np.zeros(len(tr.ts), dtype=complex)
    for k in range(1, len(tr.ts)):
        out[k] = out[k - 1] + 0.5 * (bs[k - 1] + bs[k]) * (ss[k - 1] - ss[k])
    return out


@dataclass
class PhiFactorReport:
    phis: np.ndarray
    mod_ok: bool
    theta_phi: float
    theta_ok: bool | None
    max_integral: float
    delta: float | None

    @property
    def passed(self) -> bool:
        return self.mod_ok and (self.theta_ok is not False)

    def to_dict(self):
        return {"mod_ok": self.mod_ok, "theta_phi": self.theta_phi,
                "theta_ok": self.theta_ok, "max_integral": self.max_integral,
                "delta": self.delta, "passed": self.passed}


def phi_factor(tr: CharTrace, delta: float = None, slack: float = 1e-9) -> PhiFactorReport:
    """phi(t) = exp(-int_t^{t0} b dtau/tau) along the trace.

    Checks 1/2 <= |phi| <= 2 everywhere and, when a budget delta < log 2
    is supplied, sup |arg phi| <= arcsin(2 delta).
    """
    I = _cumulative_b_integral(tr)
    phis = np.exp(-I)
    mods = np.abs(phis)
    mod_ok = bool(np.all(mods >= 0.5 - slack) and np.all(mods <= 2.0 + slack))
    theta_phi = float(np.max(np.abs(np.angle(phis))))
    theta_ok = None
    if delta is not None and delta < math.log(2):
        theta_ok = theta_phi <= math.asin(min(1.0, 2 * delta)) + slack
    max_integral = float(np.max(np.abs(I)))
    return PhiFactorReport(phis, mod_ok, theta_phi, theta_ok, max_integral, delta)


def lemma_budget_integral(tr: CharTrace, B_plus_B0: float, B1: float, B2: float,
                          phi: PhiWeight, Gamma: float, r1: float, r2: float,
                          a: float) -> dict:
    """Compare max |int b dtau/tau| against its analytic budget."""
    I = _cumulative_b_integral(tr)
    observed = float(np.max(np.abs(I)))
    T0 = phi.weight.T0
    budget = (B_plus_B0 * (phi.value(min(tr.t0, T0)) - phi.value(min(tr.t_xi, T0)))
              + (B1 / a + B2 * Gamma / a ** 2) * r1 + (B2 / a) * r2)
    return {"observed": observed, "budget": budget, "ok": observed <= budget * (1 + 1e-9)}


# ---------------------------------------------------------------------------
# closed-form reconstruction on sectors


@dataclass
class ReconstructReport:
    max_rel_dev: float
    n_compared: int
    n_suppressed: int
    envelope_applicable: bool
    envelope_ok: bool | None
    C0: float
    eps1: float
    theta_phi: float

    @property
    def passed(self) -> bool:
        return self.envelope_ok is not False

    def to_dict(self):
        return {"max_rel_dev": self.max_rel_dev, "n_compared": self.n_compared,
                "n_suppressed": self.n_suppressed,
                "envelope_applicable": self.envelope_applicable,
                "envelope_ok": self.envelope_ok, "C0": self.C0,
                "eps1": self.eps1, "theta_phi": self.theta_phi}


def sector_reconstruct(tr: CharTrace, p: int = None, C0: float = None,
                       eps1: float = None, slack: float = 1e-9,
                       branch_margin: float = 0.1) -> ReconstructReport:
    """Rebuild x(t) from quadrature and compare with the integrated path.

        x(t1) = (xi / phi(t1)) / (1 - p xi^p J(t1))^(1/p),
        J(t1) = int_{t1}^{t0} c(tau, x(tau)) / phi(tau)^p dtau/tau,

    with the principal p-th root.  Samples whose radicand approaches the
    branch cut are flagged and excluded from the comparison.  When
    p|arg xi| + eps1 + p*theta_phi <= pi/2 the modulus/argument envelopes

        |xi|/2 * (1 + p |xi|^p C0 2^p log(t0/t1))^(-1/p) <= |x(t1)| <= 2|xi|
        |arg x(t1)| <= 2|arg xi| + 2 theta_phi + eps1/p

    are also checked.
    """
    if tr.field.form != "euler" or tr.field.c is None:
        raise DomainError("reconstruction applies to euler-form fields")
    p = p if p is not None else tr.field.p
    if np.any(np.abs(tr.xs) == 0.0):
        raise DomainError("trace passes through x = 0")
    xi = tr.xi
    ss = np.log(tr.ts)
    I = _cumulative_b_integral(tr)
    phis = np.exp(-I)
    cs = np.asarray([tr.field.c(float(t), complex(x)) for t, x in zip(tr.ts, tr.xs)],
                    dtype=complex)
    integrand = cs * np.exp(p * I)  # c / phi^p
    J = np.zeros(len(tr.ts), dtype=complex)
    for k in range(1, len(tr.ts)):
        J[k] = J[k - 1] + 0.5 * (integrand[k - 1] + integrand[k]) * (ss[k - 1] - ss[k])

    theta_phi = float(np.max(np.abs(np.angle(phis))))
    C0v = C0 if C0 is not None else float(np.max(np.abs(cs)))
    eps1v = eps1 if eps1 is not None else float(np.max(np.abs(np.angle(-cs))))

    worst = 0.0
    n_cmp = n_sup = 0
    for k in range(1, len(tr.ts)):
        rad = 1.0 - p * xi ** p * J[k]
        if abs(cmath.phase(rad)) > math.pi - branch_margin or abs(rad) == 0.0:
            n_sup += 1
            continue
        x_rec = (xi / phis[k]) / cmath.exp(cmath.log(rad) / p)
        worst = max(worst, abs(x_rec - tr.xs[k]) / abs(tr.xs[k]))
        n_cmp += 1

    applicable = p * abs(cmath.phase(xi)) + eps1v + p * theta_phi <= math.pi / 2
    env_ok = None
    if applicable:
        env_ok = True
        axi = abs(xi)
        for k in range(len(tr.ts)):
            t1 = float(tr.ts[k])
            lower = (axi / 2) / (1 + p * axi ** p * C0v * 2 ** p
                                 * math.log(tr.t0 / t1)) ** (1.0 / p)
            mod = abs(tr.xs[k])
            if mod < lower * (1 - slack) - 1e-300 or mod > 2 * axi * (1 + slack):
                env_ok = False
            if abs(cmath.phase(complex(tr.xs[k]))) > (2 * abs(cmath.phase(xi))
                                                      + 2 * theta_phi + eps1v / p) + slack:
                env_ok = False
    return ReconstructReport(worst, n_cmp, n_sup, applicable, env_ok, C0v, eps1v,
                             theta_phi)


# ---------------------------------------------------------------------------
# derivative bound on sectors


@dataclass
class NagumoReport:
    passed: bool
    n_checked: int
    violations: list
    sup_f: float

    def to_dict(self):
        return {"passed": self.passed, "n_checked": self.n_checked,
                "violations": self.violations[:16], "sup_f": self.sup_f}


def nagumo_check(fn, s: Sector, n_radii: int = 12, n_angles: int = 9,
                 slack: float = 0.05, d_min: float = 1e-3,
                 quad_nodes: int = 64) -> NagumoReport:
    """Pointwise derivative bound |x f'(x)| <= sup_S |f| / d_S(x).

    f' comes from Cauchy-circle quadrature on circles inside the sector;
    samples closer than d_min to the boundary are excluded; the stated
    slack absorbs quadrature and grid-sup error.
    """
    sup_pts = Grid.sector_points(s, n_radii=24, n_angles=17, r_lo_frac=0.01)
    near = [s.R * f * cmath.exp(1j * a) for f in (0.997, 0.999)
            for a in np.linspace(-s.theta * 0.999, s.theta * 0.999, 33)]
    sup_f = max(abs(fn(z)) for z in tuple(sup_pts) + tuple(near))

    pts = Grid.sector_points(s, n_radii=n_radii, n_angles=n_angles, r_lo_frac=0.05)
    violations = []
    n_checked = 0
    for z in pts:
        d = sector_distance(s, z)
        if d < d_min:
            continue
        radius = 0.5 * s.euclid_margin(z)
        if radius <= 0:
            continue
        deriv = cauchy_derivative(fn, z, radius, n=quad_nodes)
        lhs = abs(z * deriv)
        rhs = sup_f / d
        n_checked += 1
        if lhs > rhs * (1 + slack):
            violations.append((z, lhs, rhs))
    return NagumoReport(not violations, n_checked, violations, sup_f)


def shrunk_sup_euler_derivative(fn, s: Sector, eta: float, n_radii: int = 10,
                                n_angles: int = 7, quad_nodes: int = 64) -> float:
    """sup over S(eta*theta/2, eta*R/2) of |x f'(x)|, f' by Cauchy circles.

    Circle radii are chosen inside the larger sector S(eta*theta, eta*R),
    mirroring how the half-sector derivative bound is derived from sup on
    the full one.
    """
    inner = Sector(eta * s.theta / 2, eta * s.R / 2)
    outer = Sector(eta * s.theta, eta * s.R)
    worst = 0.0
    for z in Grid.sector_points(inner, n_radii=n_radii, n_angles=n_angles,
                                r_lo_frac=0.05):
        radius = 0.5 * outer.euclid_margin(z)
        deriv = cauchy_derivative(fn, z, radius, n=quad_nodes)
        worst = max(worst, abs(z * deriv))
    return worst
