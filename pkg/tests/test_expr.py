import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singpde import expr as ex
from singpde.expr import (Add, Const, Div, EvalDomainError, Exp, ExprSyntaxError,
                          Log, Mul, Neg, Pow, Sub, Var, eval_expr, parse, to_str)

GALLERY_SOURCES = [
    "u*v^1", "-u + v^2", "-2*u + x*t*v^2", "2*u - x*v + u*v",
    "-x*v + u^2 + v^2", "-u - x*v + v^2", "-2*u - x*v + 2*x*t*v^2",
    "2*u - x*v + x*t*v/(1-t)", "-u - x*v + t*v^2", "-u + t + v^2",
    "exp(-1/x)*t/(1-t)", "log(1-t)*u + v^3", "(2+3i)*u - 0.5i*v",
]


class TestParse:
    def test_negated_sum_structure(self):
        assert parse("-u + v^2") == Add(Neg(Var("u")), Pow(Var("v"), 2))

    def test_three_summands(self):
        e = parse("2*u - x*v + u*v")
        assert e == Add(Sub(Mul(Const(2 + 0j), Var("u")),
                            Mul(Var("x"), Var("v"))),
                        Mul(Var("u"), Var("v")))

    def test_unbalanced_paren_position(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse("u*(v^2")
        assert err.value.pos == len("u*(v^2")

    def test_bad_exponent_identifier(self):
        with pytest.raises(ExprSyntaxError):
            parse("u*(v^k)")

    def test_unknown_identifier(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse("u + y")
        assert "y" in str(err.value)

    def test_non_integer_exponent(self):
        with pytest.raises(ExprSyntaxError):
            parse("v^2.5")
        with pytest.raises(ExprSyntaxError):
            parse("v^-1")

    def test_complex_literals(self):
        assert eval_expr(parse("2+3i")) == 2 + 3j
        assert eval_expr(parse("1.5i*v"), v=2.0) == 3j
        assert eval_expr(parse("i^2")) == -1 + 0j

    def test_whitespace_insensitive(self):
        assert parse(" -u+v ^ 2 ") == parse("-u + v^2")

    def test_structural_equality_decidable(self):
        assert parse("u*v") == parse("u*v")
        assert parse("u*v") != parse("v*u")
        assert hash(parse("u*v")) == hash(parse("u*v"))


class TestEval:
    def test_product(self):
        assert eval_expr(parse("u*v"), t=0.7, x=1j, u=2, v=3) == 6

    def test_cancellation(self):
        val = eval_expr(parse("-u + v^2"), u=0.01, v=0.1)
        assert abs(val) < 1e-17

    def test_exp_identity(self):
        assert eval_expr(parse("exp(t)"), t=0.0) == 1.0

    def test_division_by_zero_names_node(self):
        with pytest.raises(EvalDomainError) as err:
            eval_expr(parse("u/v"), u=1.0, v=0.0)
        assert "u/v" in str(err.value)

    def test_log_of_zero(self):
        with pytest.raises(EvalDomainError):
            eval_expr(parse("log(x)"), x=0.0)

    def test_array_broadcast(self):
        xs = np.array([0.1, 0.2 + 0.1j, -0.3])
        vals = eval_expr(parse("x^2 + t"), t=0.5, x=xs)
        assert np.allclose(vals, xs ** 2 + 0.5)


class TestDiff:
    def test_power_rule(self):
        d = ex.diff(parse("v^2"), "v")
        assert d == Mul(Const(2 + 0j), Var("v"))

    def test_constant_derivative(self):
        assert ex.diff(parse("-u + v^2"), "u") == Const(-1 - 0j)

    def test_mixed_rule_at_base_point(self):
        d = ex.diff(parse("2*u - x*v + u*v"), "v")
        for xv in (0.3, -1.2 + 0.4j, 2j):
            assert eval_expr(d, x=xv, u=0, v=0) == pytest.approx(-xv)

    def test_linearity_under_evaluation(self):
        rng = np.random.default_rng(1)
        pairs = [("u*v + x^2", "exp(t)*u"), ("v^3 - u", "x/(1-t)"),
                 ("log(1-x)*v", "u^2 + t*v")]
        for s1, s2 in pairs:
            e1, e2 = parse(s1), parse(s2)
            a = complex(rng.normal(), rng.normal())
            combo = Add(Mul(Const(a), e1), e2)
            for var in ("t", "x", "u", "v"):
                d_combo = ex.diff(combo, var)
                d1, d2 = ex.diff(e1, var), ex.diff(e2, var)
                for _ in range(50):
                    pt = {k: complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
                          for k in ("t", "x", "u", "v")}
                    lhs = eval_expr(d_combo, **pt)
                    rhs = a * eval_expr(d1, **pt) + eval_expr(d2, **pt)
                    assert abs(lhs - rhs) < 1e-12

    @pytest.mark.parametrize("source", GALLERY_SOURCES)
    def test_finite_difference_agreement(self, source):
        e = parse(source)
        rng = np.random.default_rng(2)
        h = 1e-5
        for _ in range(12):
            pt = {k: complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
                  for k in ("t", "x", "u", "v")}
            if abs(pt["x"]) < 0.05:
                pt["x"] += 0.1  # keep clear of the 1/x pole
            for var in ("t", "x", "u", "v"):
                d = eval_expr(ex.diff(e, var), **pt)
                hi = dict(pt); hi[var] = pt[var] + h
                lo = dict(pt); lo[var] = pt[var] - h
                fd = (eval_expr(e, **hi) - eval_expr(e, **lo)) / (2 * h)
                assert abs(d - fd) <= 1e-6 * (1 + abs(d))


def _expr_strategy():
    leaves = st.one_of(
        st.sampled_from([Var("t"), Var("x"), Var("u"), Var("v")]),
        st.builds(Const, st.complex_numbers(max_magnitude=3.0, allow_nan=False,
                                            allow_infinity=False)),
    )

    def extend(children):
        return st.one_of(
            st.builds(Add, children, children),
            st.builds(Sub, children, children),
            st.builds(Mul, children, children),
            st.builds(Neg, children),
            st.builds(Pow, children, st.integers(min_value=0, max_value=3)),
            st.builds(Exp, children),
        )

    return st.recursive(leaves, extend, max_leaves=12)


class TestRoundTrip:
    @given(_expr_strategy())
    @settings(max_examples=300, deadline=None)
    def test_parse_print_eval_identity(self, e):
        text = to_str(e)
        back = parse(text)
        rng = np.random.default_rng(3)
        for _ in range(5):
            pt = {k: complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
                  for k in ("t", "x", "u", "v")}
            try:
                want = eval_expr(e, **pt)
            except (EvalDomainError, OverflowError):
                continue
            if abs(want) > 1e12 or not np.isfinite(abs(want)):
                continue
            got = eval_expr(back, **pt)
            assert abs(got - want) <= 1e-9 * (1 + abs(want))

    @pytest.mark.parametrize("source", GALLERY_SOURCES)
    def test_round_trip_gallery(self, source):
        e = parse(source)
        back = parse(to_str(e))
        rng = np.random.default_rng(4)
        for _ in range(10):
            pt = {k: complex(rng.uniform(0.05, 0.4), rng.uniform(-0.2, 0.2))
                  for k in ("t", "x", "u", "v")}
            assert eval_expr(back, **pt) == pytest.approx(eval_expr(e, **pt), rel=1e-14)


class TestPdeSpec:
    def test_from_text(self):
        pde = ex.PdeSpec.from_text("-u + v^2", T0=0.3, R0=0.1, rho0=1.0)
        assert pde.rhs_eval(0.0, 0j, 2.0, 1.0) == -1.0

    def test_rejects_bad_domain(self):
        from singpde.core import DomainError
        with pytest.raises((ValueError, DomainError)):
            ex.PdeSpec.from_text("-u", T0=-1.0, R0=0.1, rho0=1.0)
        with pytest.raises(ValueError):
            ex.PdeSpec.from_text("-u", T0=0.3, R0=-0.1, rho0=1.0)
