import json

import numpy as np
import pytest

from singpde import expr as ex
from singpde.classify import classify
from singpde.core import Disc, Grid
from singpde.expr import PdeSpec
from singpde.series import (DoubleSeries, ResonanceError, TruncatedPoly,
                            build_solution, compose, residual, series_eval)


def make_pde(text, **kw):
    return PdeSpec.from_text(text, T0=0.3, R0=0.1, rho0=1.0, **kw)


def small_grid(r=0.05, t_hi=0.1):
    return Grid.for_disc(Disc(r), t_hi, 1e-3, n_times=12, n_circles=3, n_angles=8)


class TestTruncatedPoly:
    def test_mul_truncates_exactly(self):
        a = TruncatedPoly.var_t(3, 3) + TruncatedPoly.var_x(3, 3)
        sq = a * a
        assert sq.coeffs[2, 0] == 1 and sq.coeffs[1, 1] == 2 and sq.coeffs[0, 2] == 1

    def test_inverse(self):
        one_minus_t = 1.0 - TruncatedPoly.var_t(5, 0)
        inv = one_minus_t.inverse()
        assert np.allclose(inv.coeffs[:, 0], np.ones(6))

    def test_exp_log_roundtrip(self):
        s = 0.3 + 0.5 * TruncatedPoly.var_t(6, 2) + 0.2 * TruncatedPoly.var_x(6, 2)
        back = s.exp().log()
        assert np.allclose(back.coeffs, s.coeffs, atol=1e-12)

    def test_compose_matches_pointwise_eval(self):
        e = ex.parse("u*v + t/(1-t) + exp(x)")
        M = N = 6
        u_poly = TruncatedPoly.var_t(M, N) * TruncatedPoly.var_x(M, N)
        comp = compose(e, M, N, u_poly, u_poly.diff_x())
        for t, x in [(0.05, 0.03), (0.02, -0.04), (0.01, 0.02j)]:
            uv = u_poly.eval(t, x)
            vv = u_poly.diff_x().eval(t, x)
            direct = ex.eval_expr(e, t=t, x=x, u=uv, v=vv)
            # tails beyond the (M, N) window dominate the small mismatch
            assert comp.eval(t, x) == pytest.approx(direct, abs=1e-9)


class TestBuildSolution:
    def test_half_t_exact(self):
        pde = make_pde("-u + t + v^2")
        ds = build_solution(pde, classify(pde), M=6, N=6)
        assert ds.coeffs[1, 0] == pytest.approx(0.5, abs=1e-15)
        rest = np.abs(ds.coeffs.copy())
        rest[1, 0] = 0.0
        assert rest.max() < 1e-12
        assert residual(pde, ds, small_grid()) < 1e-14

    def test_zero_forcing_zero_series(self):
        pde = make_pde("-u + v^2")
        ds = build_solution(pde, classify(pde), M=6, N=6)
        assert np.abs(ds.coeffs).max() == 0.0
        assert residual(pde, ds, small_grid()) == 0.0

    def test_corrupted_coefficient_raises_residual(self):
        pde = make_pde("-u + t + v^2")
        ds = build_solution(pde, classify(pde), M=6, N=6)
        ds.coeffs[1, 0] += 1e-3
        grid = small_grid()
        t_min = min(grid.times)
        assert residual(pde, ds, grid) >= 1e-3 * t_min

    def test_zero_at_t0_exact(self):
        pde = make_pde("-u + t + v^2")
        ds = build_solution(pde, classify(pde), M=5, N=5)
        for x in (0j, 0.05, 0.02 + 0.03j):
            assert series_eval(ds, 0.0, x) == 0j

    def test_resonance_slots_listed(self):
        pde = make_pde("2*u - x*v + u*v")
        with pytest.raises(ResonanceError) as err:
            build_solution(pde, classify(pde), M=4, N=4)
        slots = {(i, j) for i, j, _ in err.value.resonances}
        assert slots == {(2, 0), (1, 1)}

    def test_case3_rejected(self):
        pde = make_pde("-u - x*v + t*v^2", euler_form=True)
        cc = classify(pde)
        with pytest.raises(Exception):
            build_solution(pde, cc, M=4, N=4)

    def test_small_divisor_warns_but_solves(self):
        # lambda00 = -1 + 1e-5: denominator at (., .) stays tiny nowhere,
        # but i=1,j=1 with c0 = -2 - 1e-5... craft: lam0 = 1 - 1e-5 keeps
        # i=1, j=0 denominator at 1e-5 inside the warn band
        rhs = ex.parse("0.99999*u + t + v^2")
        pde = PdeSpec(rhs=rhs, T0=0.3, R0=0.1, rho0=1.0)
        cc = classify(pde)
        with pytest.warns(UserWarning):
            ds = build_solution(pde, cc, M=3, N=3, res_tol=1e-8)
        assert any((i, j) == (1, 0) for i, j, _ in ds.small_divisors)


class TestResonanceDichotomy:
    def test_random_margins_build_then_flip(self):
        rng = np.random.default_rng(7)
        M = N = 4
        built = flipped = 0
        while built < 20:
            lam0 = complex(rng.uniform(-3, 3), rng.uniform(-2, 2))
            c0 = complex(rng.uniform(-2, -0.2), rng.uniform(-1, 1))
            margin = min(abs(i - lam0 - j * c0)
                         for i in range(1, M + 1) for j in range(N + 1))
            if margin < 0.1:
                continue
            rhs = ex.Add(ex.Add(ex.Mul(ex.Const(lam0), ex.Var("u")),
                                ex.Mul(ex.Const(c0), ex.Mul(ex.Var("x"), ex.Var("v")))),
                         ex.Var("t"))
            pde = PdeSpec(rhs=rhs, T0=0.3, R0=0.1, rho0=1.0)
            cc = classify(pde)
            assert cc.case_id == 2
            build_solution(pde, cc, M=M, N=N)  # must succeed
            built += 1
            # flip lambda0 onto an exact resonance
            i_star = int(rng.integers(1, M + 1))
            j_star = int(rng.integers(0, N + 1))
            lam_res = i_star - j_star * c0
            rhs2 = ex.Add(ex.Add(ex.Mul(ex.Const(lam_res), ex.Var("u")),
                                 ex.Mul(ex.Const(c0), ex.Mul(ex.Var("x"), ex.Var("v")))),
                          ex.Var("t"))
            pde2 = PdeSpec(rhs=rhs2, T0=0.3, R0=0.1, rho0=1.0)
            with pytest.raises(ResonanceError) as err:
                build_solution(pde2, classify(pde2), M=M, N=N)
            assert (i_star, j_star) in {(i, j) for i, j, _ in err.value.resonances}
            flipped += 1
        assert built == 20 and flipped == 20


class TestOrderConsistency:
    def test_residual_drops_with_time_scale(self):
        # nonterminating series: residual ~ C t^(M+1); halving the window
        # must shrink it by at least 2^M (factor-4 slack)
        pde = make_pde("-u + t + u^2")
        M = 4
        ds = build_solution(pde, classify(pde), M=M, N=0)
        r_full = residual(pde, ds, small_grid(t_hi=0.1))
        r_half = residual(pde, ds, small_grid(t_hi=0.05))
        assert r_full > 0
        assert r_full / r_half >= 2 ** M / 4

    def test_series_bounded_by_weight(self):
        # successful builds stay O(t) near the base point: sup |u|/t bounded
        for text in ("-u + t + v^2", "-u + t + u^2", "-2*u + x*t*v^2"):
            pde = make_pde(text)
            ds = build_solution(pde, classify(pde), M=6, N=6)
            xs = np.asarray(Grid.disc_points(Disc(0.05), 3, 8), dtype=complex)
            vals = []
            for t in Grid.geometric_times(0.1, 1e-6, 25):
                vals.append(float(np.max(np.abs(ds.eval(t, xs)))) / t)
            assert vals[-1] <= 1.2 * max(vals[:-1]) + 1e-12


class TestSerialization:
    def test_bit_exact_roundtrip(self):
        pde = make_pde("-u + t + u^2 + 0.125i*v^2")
        ds = build_solution(pde, classify(pde), M=5, N=4)
        doc = json.loads(json.dumps(ds.to_json_dict()))
        back = DoubleSeries.from_json_dict(doc)
        assert back.M == ds.M and back.N == ds.N
        assert np.array_equal(back.coeffs, ds.coeffs)

    def test_schema_fields(self):
        pde = make_pde("-u + t")
        ds = build_solution(pde, classify(pde), M=3, N=2)
        doc = ds.to_json_dict()
        assert doc["schema"] == "series-v1"
        assert len(doc["coeffs"]) == 3 * 3
