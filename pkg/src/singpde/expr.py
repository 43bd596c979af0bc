"""Mini-language for equation right-hand sides F(t, x, u, v).

Grammar (whitespace insensitive)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := ('-' | '+') factor | power
    power   := atom ('^' INT)?          # INT a nonnegative integer literal
    atom    := NUMBER | VAR | 'exp' '(' expr ')' | 'log' '(' expr ')'
             | '(' expr ')'
    VAR     := 't' | 'x' | 'u' | 'v'
    NUMBER  := float literal, optional 'i' suffix for imaginary parts;
               bare 'i' is the imaginary unit

Complex literals are written like ``2+3i``.  Evaluation is over complex
scalars (or numpy arrays, which broadcast); ``log`` is the principal
branch.  Differentiation is exact and symbolic; the only simplification
applied anywhere is constant folding, so derivative trees may be
unsimplified.

Trees are immutable and hashable; structural equality is plain dataclass
equality.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import SingpdeError

VARIABLES = ("t", "x", "u", "v")
FUNCTIONS = ("exp", "log")

_DIV_FLOOR = 1e-300


class ExprSyntaxError(SingpdeError):
    """Malformed source text; carries the character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


class EvalDomainError(SingpdeError):
    """Evaluation hit a pole or a log of zero; names the offending node."""


# ---------------------------------------------------------------------------
# nodes


@dataclass(frozen=True, slots=True)
class Const:
    value: complex


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Add:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True, slots=True)
class Sub:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True, slots=True)
class Mul:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True, slots=True)
class Div:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True, slots=True)
class Pow:
    base: "Expr"
    exponent: int  # nonnegative


@dataclass(frozen=True, slots=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True, slots=True)
class Exp:
    arg: "Expr"


@dataclass(frozen=True, slots=True)
class Log:
    arg: "Expr"


Expr = Union[Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log]

ZERO = Const(0j)
ONE = Const(1 + 0j)


# ---------------------------------------------------------------------------
# tokenizer / parser


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            lit = text[i:j]
            try:
                val = float(lit)
            except ValueError:
                raise ExprSyntaxError(f"bad number literal {lit!r}", i)
            if j < n and text[j] == "i":
                tokens.append(("num", complex(0.0, val), i))
                j += 1
            else:
                tokens.append(("num", complex(val, 0.0), i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i:j]
            if name == "i":
                tokens.append(("num", 1j, i))
            else:
                tokens.append(("id", name, i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str):
        tok = self.advance()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            rhs = self.factor()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def factor(self) -> Expr:
        tok = self.peek()
        if tok[0] == "-":
            self.advance()
            return Neg(self.factor())
        if tok[0] == "+":
            self.advance()
            return self.factor()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            tok = self.advance()
            if tok[0] == "-":
                num = self.advance()
                pos = num[2]
                raise ExprSyntaxError("exponent must be a nonnegative integer", pos)
            if tok[0] != "num":
                raise ExprSyntaxError("exponent must be a nonnegative integer", tok[2])
            val = tok[1]
            if val.imag != 0 or val.real != int(val.real):
                raise ExprSyntaxError("exponent must be a nonnegative integer", tok[2])
            return Pow(base, int(val.real))
        return base

    def atom(self) -> Expr:
        tok = self.advance()
        if tok[0] == "num":
            return Const(tok[1])
        if tok[0] == "id":
            name = tok[1]
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Exp(arg) if name == "exp" else Log(arg)
            if name in VARIABLES:
                return Var(name)
            raise ExprSyntaxError(f"unknown identifier {name!r}", tok[2])
        if tok[0] == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ExprSyntaxError(f"expected a value, found {tok[1]!r}", tok[2])


def parse(text: str) -> Expr:
    """Parse source text into an expression tree."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# evaluation


def _eval(e: Expr, env: dict):
    kind = type(e)
    if kind is Const:
        return e.value
    if kind is Var:
        return env[e.name]
    if kind is Add:
        return _eval(e.lhs, env) + _eval(e.rhs, env)
    if kind is Sub:
        return _eval(e.lhs, env) - _eval(e.rhs, env)
    if kind is Mul:
        return _eval(e.lhs, env) * _eval(e.rhs, env)
    if kind is Div:
        den = _eval(e.rhs, env)
        if np.any(np.abs(den) < _DIV_FLOOR):
            raise EvalDomainError(f"division by zero in '{to_str(e)}'")
        return _eval(e.lhs, env) / den
    if kind is Pow:
        return _eval(e.base, env) ** e.exponent
    if kind is Neg:
        return -_eval(e.arg, env)
    if kind is Exp:
        a = _eval(e.arg, env)
        if isinstance(a, np.ndarray):
            return np.exp(a.astype(np.complex128, copy=False))
        return cmath.exp(a)
    if kind is Log:
        a = _eval(e.arg, env)
        if np.any(np.abs(a) == 0.0):
            raise EvalDomainError(f"log of zero in '{to_str(e)}'")
        if isinstance(a, np.ndarray):
            return np.log(a.astype(np.complex128, copy=False))
        return cmath.log(a)
    raise TypeError(f"not an expression node: {e!r}")


def eval_expr(e: Expr, t=0.0, x=0j, u=0j, v=0j):
    """Evaluate by structural recursion; arguments may be numpy arrays."""
    return _eval(e, {"t": t, "x": x, "u": u, "v": v})


# ---------------------------------------------------------------------------
# smart constructors (constant folding only)


def _is_const(e: Expr, value=None) -> bool:
    return type(e) is Const and (value is None or e.value == value)


def fadd(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Add(a, b)


def fsub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return fneg(b)
    return Sub(a, b)


def fmul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return Mul(a, b)


def fdiv(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b) and abs(b.value) >= _DIV_FLOOR:
        return Const(a.value / b.value)
    if _is_const(a, 0) and not _is_const(b, 0):
        return ZERO
    if _is_const(b, 1):
        return a
    return Div(a, b)


def fneg(a: Expr) -> Expr:
    if _is_const(a):
        return Const(-a.value)
    if type(a) is Neg:
        return a.arg
    return Neg(a)


def fpow(a: Expr, k: int) -> Expr:
    if k < 0:
        raise ValueError("exponent must be nonnegative")
    if k == 0:
        return ONE
    if k == 1:
        return a
    if _is_const(a):
        return Const(a.value ** k)
    return Pow(a, k)


# ---------------------------------------------------------------------------
# differentiation


def diff(e: Expr, var: str) -> Expr:
    """Exact symbolic partial derivative with respect to t, x, u or v."""
    if var not in VARIABLES:
        raise ValueError(f"unknown variable {var!r}")
    kind = type(e)
    if kind is Const:
        return ZERO
    if kind is Var:
        return ONE if e.name == var else ZERO
    if kind is Add:
        return fadd(diff(e.lhs, var), diff(e.rhs, var))
    if kind is Sub:
        return fsub(diff(e.lhs, var), diff(e.rhs, var))
    if kind is Mul:
        return fadd(fmul(diff(e.lhs, var), e.rhs), fmul(e.lhs, diff(e.rhs, var)))
    if kind is Div:
        num = fsub(fmul(diff(e.lhs, var), e.rhs), fmul(e.lhs, diff(e.rhs, var)))
        return fdiv(num, fpow(e.rhs, 2))
    if kind is Pow:
        if e.exponent == 0:
            return ZERO
        inner = diff(e.base, var)
        return fmul(fmul(Const(complex(e.exponent)), fpow(e.base, e.exponent - 1)), inner)
    if kind is Neg:
        return fneg(diff(e.arg, var))
    if kind is Exp:
        return fmul(Exp(e.arg), diff(e.arg, var))
    if kind is Log:
        return fdiv(diff(e.arg, var), e.arg)
    raise TypeError(f"not an expression node: {e!r}")


def subs(e: Expr, mapping: dict) -> Expr:
    """Substitute expressions (or constants) for variables, with folding."""
    lifted = {}
    for name, val in mapping.items():
        if name not in VARIABLES:
            raise ValueError(f"unknown variable {name!r}")
        lifted[name] = val if not isinstance(val, (int, float, complex)) else Const(complex(val))
    return _subs(e, lifted)


def _subs(e: Expr, mapping: dict) -> Expr:
    kind = type(e)
    if kind is Const:
        return e
    if kind is Var:
        return mapping.get(e.name, e)
    if kind is Add:
        return fadd(_subs(e.lhs, mapping), _subs(e.rhs, mapping))
    if kind is Sub:
        return fsub(_subs(e.lhs, mapping), _subs(e.rhs, mapping))
    if kind is Mul:
        return fmul(_subs(e.lhs, mapping), _subs(e.rhs, mapping))
    if kind is Div:
        return fdiv(_subs(e.lhs, mapping), _subs(e.rhs, mapping))
    if kind is Pow:
        return fpow(_subs(e.base, mapping), e.exponent)
    if kind is Neg:
        return fneg(_subs(e.arg, mapping))
    if kind is Exp:
        a = _subs(e.arg, mapping)
        if _is_const(a):
            val = cmath.exp(a.value)
            if cmath.isfinite(val):
                return Const(val)
        return Exp(a)
    if kind is Log:
        a = _subs(e.arg, mapping)
        if _is_const(a) and abs(a.value) > 0:
            return Const(cmath.log(a.value))
        return Log(a)
    raise TypeError(f"not an expression node: {e!r}")


def free_vars(e: Expr) -> set:
    kind = type(e)
    if kind is Const:
        return set()
    if kind is Var:
        return {e.name}
    if kind in (Add, Sub, Mul, Div):
        return free_vars(e.lhs) | free_vars(e.rhs)
    if kind is Pow:
        return free_vars(e.base)
    return free_vars(e.arg)


# ---------------------------------------------------------------------------
# printing (round-trips through parse up to evaluation equality)


def _fmt_const(z: complex) -> str:
    re, im = z.real + 0.0, z.imag + 0.0  # drop negative zero
    if im == 0.0:
        return repr(re) if re >= 0 else f"(-{repr(-re)})"
    if re == 0.0:
        return f"{repr(im)}i" if im > 0 else f"(-{repr(-im)}i)"
    sign = "+" if im >= 0 else "-"
    return f"({repr(re)}{sign}{repr(abs(im))}i)"


_PREC = {Add: 1, Sub: 1, Neg: 1, Mul: 2, Div: 2, Pow: 3, Const: 4, Var: 4,
         Exp: 4, Log: 4}


def _paren(child: Expr, need: int) -> str:
    s = to_str(child)
    if _PREC[type(child)] < need:
        return f"({s})"
    return s


def to_str(e: Expr) -> str:
    kind = type(e)
    if kind is Const:
        return _fmt_const(e.value)
    if kind is Var:
        return e.name
    if kind is Add:
        return f"{_paren(e.lhs, 1)} + {_paren(e.rhs, 2)}"
    if kind is Sub:
        return f"{_paren(e.lhs, 1)} - {_paren(e.rhs, 2)}"
    if kind is Mul:
        return f"{_paren(e.lhs, 2)}*{_paren(e.rhs, 3)}"
    if kind is Div:
        return f"{_paren(e.lhs, 2)}/{_paren(e.rhs, 4)}"
    if kind is Pow:
        return f"{_paren(e.base, 4)}^{e.exponent}"
    if kind is Neg:
        return f"-{_paren(e.arg, 2)}"
    if kind is Exp:
        return f"exp({to_str(e.arg)})"
    if kind is Log:
        return f"log({to_str(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# equation container


@dataclass(frozen=True)
class PdeSpec:
    """A parsed equation t*u_t = F(t, x, u, v) plus its working domain.

    When euler_form is set the v slot of F stands for x*u_x (the Euler
    derivative); otherwise it is the plain u_x.  T0/R0/rho0 bound the box
    [0,T0] x D_R0 x D_rho0 x D_rho0 the right-hand side is read on.
    """

    rhs: Expr
    euler_form: bool = False
    weight: "WeightFn" = None
    T0: float = 0.3
    R0: float = 0.1
    rho0: float = 1.0
    sector: "Sector" = None

    def __post_init__(self):
        from .core import WeightFn
        if self.weight is None:
            object.__setattr__(self, "weight", WeightFn("power", alpha=1.0, T0=self.T0))
        if min(self.T0, self.R0, self.rho0) <= 0:
            raise ValueError("domain parameters must be positive")
        bad = free_vars(self.rhs) - set(VARIABLES)
        if bad:
            raise ValueError(f"rhs uses unknown variables {sorted(bad)}")

    @classmethod
    def from_text(cls, text: str, **kwargs) -> "PdeSpec":
        return cls(rhs=parse(text), **kwargs)

    def rhs_eval(self, t, x, u, v):
        return eval_expr(self.rhs, t=t, x=x, u=u, v=v)
