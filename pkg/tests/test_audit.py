import cmath
import math

import numpy as np
import pytest

from singpde import audit as au
from singpde import characteristics as ch
from singpde import series as se
from singpde.audit import (SolutionField, audit_disc, audit_sector,
                           hadamard_fields, sup_difference, transport_residual,
                           verdict)
from singpde.classify import classify
from singpde.core import Disc, Grid, Sector
from singpde.expr import PdeSpec


def make_pde(text, **kw):
    return PdeSpec.from_text(text, T0=0.3, R0=0.1, rho0=1.0, **kw)


class TestSolutionField:
    @pytest.mark.parametrize("source", ["x^2/4", "x*t/(5-t)", "t/2", "x/t"])
    def test_derivative_consistent_with_differences(self, source):
        f = SolutionField.from_expr(source)
        rng = np.random.default_rng(11)
        h = 1e-6
        for _ in range(20):
            t = rng.uniform(0.05, 0.25)
            x = complex(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05))
            d = f.ux(t, x)
            fd = (f.u(t, x + h) - f.u(t, x - h)) / (2 * h)
            assert abs(d - fd) <= 1e-6 * (1 + abs(d))

    def test_callable_field_cauchy_derivative(self):
        f = SolutionField.from_callable(lambda t, x: x ** 2 / 4 + t * x,
                                        Disc(0.2))
        for t, x in [(0.1, 0.05 + 0j), (0.2, -0.03 + 0.02j)]:
            assert f.ux(t, x) == pytest.approx(x / 2 + t, abs=1e-10)
            assert f.ut(t, x) == pytest.approx(x, abs=1e-6)

    def test_series_field_matches_table(self):
        pde = make_pde("-u + t + v^2")
        ds = se.build_solution(pde, classify(pde), M=5, N=5)
        f = SolutionField.from_series(ds)
        assert f.u(0.2, 0.05 + 0j) == pytest.approx(0.1)
        assert f.ut(0.2, 0.05 + 0j) == pytest.approx(0.5)


class TestAuditDisc:
    def test_quarter_parabola_value(self):
        rep = audit_disc(SolutionField.from_expr("x^2/4"))
        assert rep.trend == au.TREND_POSITIVE
        assert rep.outer_estimate == pytest.approx(0.25, abs=0.005)

    def test_zero_solution(self):
        rep = audit_disc(SolutionField.zero())
        assert rep.trend == au.TREND_ZERO and rep.outer_estimate == 0.0

    def test_pole_diverges(self):
        rep = audit_disc(SolutionField.from_expr("x/t"))
        assert rep.trend == au.TREND_DIVERGES
        assert rep.outer_estimate is None

    def test_weighted_solution_tends_to_zero(self):
        rep = audit_disc(SolutionField.from_expr("t*(1+x)"))
        assert rep.trend == au.TREND_ZERO

    def test_requires_four_rungs(self):
        with pytest.raises(Exception):
            audit_disc(SolutionField.zero(), R_ladder=(0.1, 0.05, 0.02))

    @pytest.mark.parametrize("s", [2.0, 0.5, 4.0])
    def test_positive_homogeneity_exact(self, s):
        base = SolutionField.from_expr("x^2/4")
        scaled = SolutionField(u=lambda t, x: s * base.u(t, x),
                               ux=lambda t, x: s * base.ux(t, x),
                               ut=None, provenance="scaled")
        r1 = audit_disc(base)
        r2 = audit_disc(scaled)
        assert r2.outer_estimate == s * r1.outer_estimate
        for row1, row2 in zip(r1.Q, r2.Q):
            assert all(b == s * a for a, b in zip(row1, row2))

    @pytest.mark.parametrize("c", [0.25, 1.0, 0.75])
    def test_criterion_sensitivity_grid_exact(self, c):
        f = SolutionField.from_expr(f"{c}*x^2")
        rep = audit_disc(f)
        assert abs(rep.outer_estimate - c) < 1e-12

    def test_q_table_carried(self):
        rep = audit_disc(SolutionField.from_expr("x^2/4"))
        doc = rep.to_dict()
        assert doc["schema"] == "audit-v1"
        assert len(doc["Q"]) == 4 and len(doc["Q"][0]) == 4
        assert all(all(v is not None for v in row) for row in doc["Q"])


class TestAuditSector:
    SECTOR = Sector(0.2, 0.1)

    def test_zero(self):
        rep = audit_sector(SolutionField.zero(), self.SECTOR)
        assert rep.trend == au.TREND_ZERO

    def test_weight_bounded_series_passes(self):
        rep = audit_sector(SolutionField.from_expr("t*(1+x)"), self.SECTOR)
        assert rep.trend == au.TREND_ZERO

    def test_pole_diverges(self):
        rep = audit_sector(SolutionField.from_expr("x/t"), self.SECTOR)
        assert rep.trend == au.TREND_DIVERGES


class TestHadamardFields:
    def test_parabola_pair_fields(self):
        pde = make_pde("-u + v^2")
        cc = classify(pde)
        fs = hadamard_fields(pde, cc, SolutionField.zero(),
                             SolutionField.from_expr("x^2/4"))
        for t, x in [(0.1, 0.05 + 0j), (0.2, -0.03 + 0.01j)]:
            assert fs.b(t, x) == pytest.approx(x / 2, abs=1e-12)
            assert fs.a(t, x) == pytest.approx(0.0, abs=1e-12)
            assert fs.lam(t, x) == -1
            # both sides of the transport identity evaluate to -x^2/4
            w = x ** 2 / 4
            assert fs.drift(t, x) * (x / 2) * -1 == pytest.approx(-x ** 2 / 4, abs=1e-12)
            assert fs.w_coeff(t, x) * w == pytest.approx(-x ** 2 / 4, abs=1e-12)

    def test_equal_pair_collapses(self):
        pde = make_pde("-u + v^2")
        cc = classify(pde)
        u = SolutionField.from_expr("x^2/4")
        fs = hadamard_fields(pde, cc, u, u)
        for t, x in [(0.1, 0.04 + 0j), (0.25, 0.02 - 0.01j)]:
            assert fs.a(t, x) == pytest.approx(0.0, abs=1e-12)
            # b1 at (0, 0) reduces to dF/dv on the base solution: 2 * v0
            assert fs.b(t, x) == pytest.approx(x, abs=1e-12)

    def test_identity_residual_small_cases(self):
        cases = [
            ("-u + v^2", False, "x^2/4"),
            ("-u - x*v + v^2", False, "3*x^2/4"),
            ("2*u - x*v + u*v", False, "x*t/(5-t)"),
            ("-u - x*v + t*v^2", True, "x/t"),
        ]
        for text, euler, witness in cases:
            sector = Sector(0.2, 0.1) if euler else None
            pde = make_pde(text, euler_form=euler, sector=sector)
            cc = classify(pde)
            zero = SolutionField.zero()
            sol = SolutionField.from_expr(witness)
            fs = hadamard_fields(pde, cc, zero, sol)
            if euler:
                grid = Grid.for_sector(sector, 0.25, 1e-2, n_times=6,
                                       n_radii=4, n_angles=4)
            else:
                grid = Grid.for_disc(Disc(0.08), 0.25, 1e-2, n_times=6,
                                     n_circles=3, n_angles=6)
            res = transport_residual(pde, cc, fs, zero, sol, grid)
            assert res < 1e-7, (text, res)


class TestVerdict:
    def test_zero_solution_unique(self):
        pde = make_pde("-u + v^2")
        cc = classify(pde)
        rep = verdict(pde, cc, SolutionField.zero(), SolutionField.zero())
        assert rep.verdict == au.VERDICT_UNIQUE and rep.sup_diff == 0.0

    def test_witness_fails_at_quarter(self):
        pde = make_pde("-u + v^2")
        cc = classify(pde)
        rep = verdict(pde, cc, SolutionField.from_expr("x^2/4"),
                      SolutionField.zero())
        assert rep.verdict == au.VERDICT_CRITERION
        assert rep.outer_estimate == pytest.approx(0.25, abs=0.005)

    def test_neutral_exponent_withheld(self):
        # both solutions vanish with t, but the exponent hypothesis fails
        pde = make_pde("u*v^1")
        cc = classify(pde)
        family = SolutionField.from_expr("x/(5-log(t))")
        assert au.cond_vanishing_sup(family, 0.08)
        assert au.cond_vanishing_sup(SolutionField.zero(), 0.08)
        rep = verdict(pde, cc, family, SolutionField.zero())
        assert rep.verdict == au.VERDICT_HYPOTHESES

    def test_soundness_guard(self):
        # trend alone would grant uniqueness; the direct comparison vetoes it
        pde = make_pde("-u + v^2")
        cc = classify(pde)
        not_a_solution = SolutionField.from_expr("t")
        rep = verdict(pde, cc, not_a_solution, SolutionField.zero())
        assert rep.trend == au.TREND_ZERO
        assert rep.sup_diff > 10 * 1e-9
        assert rep.verdict == au.VERDICT_INCONCLUSIVE

    def test_flags_propagated(self):
        pde = make_pde("2*u - x*v + u*v")
        cc = classify(pde)
        rep = verdict(pde, cc, SolutionField.from_expr("t^2"), SolutionField.zero())
        assert rep.verdict == au.VERDICT_HYPOTHESES
        assert rep.flags["re_lambda_negative"] is False


class TestSupDifference:
    def test_matches_direct_evaluation(self):
        grid = Grid.for_disc(Disc(0.05), 0.2, 1e-2, n_times=5, n_circles=2,
                             n_angles=8)
        a = SolutionField.from_expr("x^2/4")
        b = SolutionField.zero()
        got = sup_difference(a, b, grid)
        want = max(abs(p) ** 2 / 4 for p in grid.points)
        assert got == pytest.approx(want, rel=1e-12)
