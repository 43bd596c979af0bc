"""Truncated formal power-series solutions u0(t, x) = sum u_ij t^i x^j.

The builder determines coefficients order by order in the total degree
i + j.  Matching the t^i x^j coefficient of t*u_t against the right-hand
side leaves a single unknown per slot,

    (i - lam0 - j*c0) * u_ij = data from already-determined coefficients,

where lam0 is the u-linear coefficient of F at the base point and c0 the
x-linear part of its v-coefficient (0 when that part vanishes
identically).  A denominator below `res_tol` is a resonance and aborts
the build with the full list of offending (i, j); denominators in the
near-resonance band are solved through but logged as small divisors.

Right-hand-side composition is done in exact truncated-polynomial
arithmetic over the expression tree (no floating sampling), so builds on
polynomial equations carry no interpolation error.  The independent
correctness oracle is `residual`, which evaluates t*du/dt - F pointwise
on a grid through an entirely different code path.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from .core import Grid, SingpdeError
from . import expr as ex


class ResonanceError(SingpdeError):
    """A required denominator vanished; carries the resonance log."""

    def __init__(self, resonances):
        self.resonances = tuple(resonances)
        listing = ", ".join(f"(i={i}, j={j}, |den|={d:.3e})" for i, j, d in self.resonances)
        super().__init__(f"resonant coefficient slots: {listing}")


# ---------------------------------------------------------------------------
# truncated bivariate polynomial arithmetic


class TruncatedPoly:
    """Polynomial in (t, x) truncated to degrees (M, N) componentwise.

    coeffs[i, j] multiplies t^i x^j.  All operations are exact on the
    retained window; products simply drop out-of-window terms.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=np.complex128)

    @property
    def M(self):
        return self.coeffs.shape[0] - 1

    @property
    def N(self):
        return self.coeffs.shape[1] - 1

    @classmethod
    def zero(cls, M, N):
        return cls(np.zeros((M + 1, N + 1), dtype=np.complex128))

    @classmethod
    def const(cls, value, M, N):
        p = cls.zero(M, N)
        p.coeffs[0, 0] = value
        return p

    @classmethod
    def var_t(cls, M, N):
        # a window with no t^1 slot truncates the variable itself away
        p = cls.zero(M, N)
        if M >= 1:
            p.coeffs[1, 0] = 1.0
        return p

    @classmethod
    def var_x(cls, M, N):
        p = cls.zero(M, N)
        if N >= 1:
            p.coeffs[0, 1] = 1.0
        return p

    def copy(self):
        return TruncatedPoly(self.coeffs.copy())

    def _lift(self, other):
        if isinstance(other, TruncatedPoly):
            return other
        return TruncatedPoly.const(complex(other), self.M, self.N)

    def __add__(self, other):
        other = self._lift(other)
        return TruncatedPoly(self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        return TruncatedPoly(self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return TruncatedPoly(-self.coeffs)

    def __mul__(self, other):
        other = self._lift(other)
        full = convolve2d(self.coeffs, other.coeffs)
        return TruncatedPoly(full[: self.M + 1, : self.N + 1])

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative exponents are not representable")
        out = TruncatedPoly.const(1.0, self.M, self.N)
        for _ in range(k):
            out = out * self
        return out

    def inverse(self):
        c0 = self.coeffs[0, 0]
        if abs(c0) < 1e-300:
            raise ex.EvalDomainError("series inverse of a polynomial vanishing at the origin")
        rest = self * (1.0 / c0) - 1.0  # no constant term
        out = TruncatedPoly.const(1.0, self.M, self.N)
        term = TruncatedPoly.const(1.0, self.M, self.N)
        for _ in range(self.M + self.N):
            term = term * rest * (-1.0)
            out = out + term
        return out * (1.0 / c0)

    def __truediv__(self, other):
        other = self._lift(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def exp(self):
        c0 = self.coeffs[0, 0]
        rest = self - c0
        out = TruncatedPoly.const(1.0, self.M, self.N)
        term = TruncatedPoly.const(1.0, self.M, self.N)
        for n in range(1, self.M + self.N + 1):
            term = term * rest * (1.0 / n)
            out = out + term
        return out * np.exp(c0)

    def log(self):
        c0 = self.coeffs[0, 0]
        if abs(c0) < 1e-300:
            raise ex.EvalDomainError("series log of a polynomial vanishing at the origin")
        rest = self * (1.0 / c0) - 1.0
        out = TruncatedPoly.const(np.log(c0), self.M, self.N)
        term = TruncatedPoly.const(1.0, self.M, self.N)
        for n in range(1, self.M + self.N + 1):
            term = term * rest
            out = out + term * ((-1.0) ** (n + 1) / n)
        return out

    def diff_t(self):
        out = TruncatedPoly.zero(self.M, self.N)
        for i in range(1, self.M + 1):
            out.coeffs[i - 1, :] = i * self.coeffs[i, :]
        return out

    def diff_x(self):
        out = TruncatedPoly.zero(self.M, self.N)
        for j in range(1, self.N + 1):
            out.coeffs[:, j - 1] = j * self.coeffs[:, j]
        return out

    def eval(self, t, x):
        acc = 0j
        for i in range(self.M, -1, -1):
            row = 0j
            for j in range(self.N, -1, -1):
                row = row * x + self.coeffs[i, j]
            acc = acc * t + row
        return acc


def compose(e: ex.Expr, M: int, N: int, u_poly: TruncatedPoly,
            v_poly: TruncatedPoly) -> TruncatedPoly:
    """Evaluate the expression tree over truncated polynomials."""
    env = {
        "t": TruncatedPoly.var_t(M, N),
        "x": TruncatedPoly.var_x(M, N),
        "u": u_poly,
        "v": v_poly,
    }
    return _compose(e, env, M, N)


def _compose(e, env, M, N):
    kind = type(e)
    if kind is ex.Const:
        return TruncatedPoly.const(e.value, M, N)
    if kind is ex.Var:
        return env[e.name]
    if kind is ex.Add:
        return _compose(e.lhs, env, M, N) + _compose(e.rhs, env, M, N)
    if kind is ex.Sub:
        return _compose(e.lhs, env, M, N) - _compose(e.rhs, env, M, N)
    if kind is ex.Mul:
        return _compose(e.lhs, env, M, N) * _compose(e.rhs, env, M, N)
    if kind is ex.Div:
        return _compose(e.lhs, env, M, N) / _compose(e.rhs, env, M, N)
    if kind is ex.Pow:
        return _compose(e.base, env, M, N) ** e.exponent
    if kind is ex.Neg:
        return -_compose(e.arg, env, M, N)
    if kind is ex.Exp:
        return _compose(e.arg, env, M, N).exp()
    if kind is ex.Log:
        return _compose(e.arg, env, M, N).log()
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# the double series


@dataclass
class DoubleSeries:
    """Coefficient table u_ij for 1 <= i <= M, 0 <= j <= N.

    Row i = 0 is identically zero, so evaluation at t = 0 returns 0
    exactly.  `small_divisors` logs near-resonant slots that were solved
    through anyway.
    """

    coeffs: np.ndarray  # shape (M+1, N+1); row 0 zero
    small_divisors: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if np.any(self.coeffs[0, :] != 0):
            raise ValueError("constant-in-t row must vanish")

    @property
    def M(self):
        return self.coeffs.shape[0] - 1

    @property
    def N(self):
        return self.coeffs.shape[1] - 1

    def eval(self, t, x):
        acc = 0j
        for i in range(self.M, -1, -1):
            row = 0j
            for j in range(self.N, -1, -1):
                row = row * x + self.coeffs[i, j]
            acc = acc * t + row
        return acc

    def eval_dt(self, t, x):
        acc = 0j
        for i in range(self.M, 0, -1):
            row = 0j
            for j in range(self.N, -1, -1):
                row = row * x + i * self.coeffs[i, j]
            acc = acc * t + row
        return acc

    def eval_dx(self, t, x):
        acc = 0j
        for i in range(self.M, -1, -1):
            row = 0j
            for j in range(self.N, 0, -1):
                row = row * x + j * self.coeffs[i, j]
            acc = acc * t + row
        return acc

    def to_json_dict(self) -> dict:
        coeffs = []
        for i in range(1, self.M + 1):
            for j in range(self.N + 1):
                z = self.coeffs[i, j]
                coeffs.append([float(z.real), float(z.imag)])
        return {"schema": "series-v1", "M": self.M, "N": self.N, "coeffs": coeffs}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DoubleSeries":
        M, N = int(doc["M"]), int(doc["N"])
        table = np.zeros((M + 1, N + 1), dtype=np.complex128)
        flat = doc["coeffs"]
        if len(flat) != M * (N + 1):
            raise ValueError("coefficient list length does not match orders")
        k = 0
        for i in range(1, M + 1):
            for j in range(N + 1):
                re, im = flat[k]
                table[i, j] = complex(re, im)
                k += 1
        return cls(table)


def series_eval(s: DoubleSeries, t, x):
    """Horner evaluation in x then t."""
    return s.eval(t, x)


# ---------------------------------------------------------------------------
# builder and residual oracle


def build_solution(pde, cc, M: int = 8, N: int = 8, res_tol: float = 1e-8,
                   warn_tol: float = 1e-3) -> DoubleSeries:
    """Determine the truncated series solution with u(0, x) = 0.

    Only the disc-based classes (case 1 and 2) are supported; the
    irregular-singular class lives on sectors where these expansions can
    diverge, and is rejected.
    """
    if cc.case_id not in (1, 2):
        raise SingpdeError("series build supports case 1 and case 2 equations only")
    lam0 = cc.lambda00
    c0 = cc.c00 if cc.case_id == 2 else 0j

    resonant, small = [], []
    for i in range(1, M + 1):
        for j in range(N + 1):
            den = abs(i - lam0 - j * c0)
            if den < res_tol:
                resonant.append((i, j, den))
            elif den < warn_tol:
                small.append((i, j, den))
    if resonant:
        raise ResonanceError(resonant)
    if small:
        listing = ", ".join(f"({i},{j})" for i, j, _ in small)
        warnings.warn(f"small divisors at {listing}; solving through", stacklevel=2)

    table = np.zeros((M + 1, N + 1), dtype=np.complex128)
    for d in range(1, M + N + 1):
        # within a total degree, higher x-order slots feed lower ones
        for j in range(min(d - 1, N), -1, -1):
            i = d - j
            if not 1 <= i <= M:
                continue
            u_poly = TruncatedPoly(table)
            rhs = compose(pde.rhs, M, N, u_poly, u_poly.diff_x())
            known = rhs.coeffs[i, j]
            table[i, j] = known / (i - lam0 - j * c0)
    return DoubleSeries(table.copy(), small_divisors=tuple(small))


def residual(pde, s: DoubleSeries, grid: Grid) -> float:
    """Max |t * du/dt - F(t, x, u, u_x)| over the grid.

    Pointwise evaluation, independent of the polynomial composition used
    by the builder; this is the correctness oracle for `build_solution`.
    """
    pts = np.asarray(grid.points, dtype=np.complex128)
    worst = 0.0
    for t in grid.times:
        uv = s.eval(t, pts)
        ut = s.eval_dt(t, pts)
        ux = s.eval_dx(t, pts)
        if pde.euler_form:
            ux = pts * ux
        f = ex.eval_expr(pde.rhs, t=t, x=pts, u=uv, v=ux)
        worst = max(worst, float(np.max(np.abs(t * ut - f))))
    return worst
