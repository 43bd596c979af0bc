import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singpde import (Disc, DomainError, Grid, PhiWeight, Sector, WeightFn,
                     phi_eval, sector_distance, shrunk_sector, weight_eval)


class TestWeightEval:
    def test_power_identity(self):
        w = WeightFn("power", alpha=1.0, T0=0.3)
        assert weight_eval(w, 0.25) == 0.25

    def test_power_square(self):
        w = WeightFn("power", alpha=2.0, T0=0.5)
        assert weight_eval(w, 0.5) == 0.25

    def test_log_power(self):
        w = WeightFn("log-power", beta=2.0, T0=0.3)
        assert weight_eval(w, math.exp(-4)) == pytest.approx(0.0625, rel=1e-14)

    def test_domain_error(self):
        w = WeightFn("power", alpha=1.0, T0=0.3)
        with pytest.raises(DomainError):
            weight_eval(w, 0.0)
        with pytest.raises(DomainError):
            weight_eval(w, 0.31)

    def test_family_restrictions(self):
        with pytest.raises(DomainError):
            WeightFn("power", alpha=0.0)
        with pytest.raises(DomainError):
            WeightFn("log-power", beta=1.0, T0=0.3)
        with pytest.raises(DomainError):
            WeightFn("log-power", beta=2.0, T0=1.5)  # weight not positive there


class TestPhiEval:
    def test_power_identity(self):
        assert phi_eval(WeightFn("power", alpha=1.0, T0=0.3), 0.3) == pytest.approx(0.3)

    def test_power_square_antiderivative(self):
        assert phi_eval(WeightFn("power", alpha=2.0, T0=0.5), 0.5) == pytest.approx(0.125)

    def test_log_power(self):
        w = WeightFn("log-power", beta=2.0, T0=0.3)
        assert phi_eval(w, math.exp(-4)) == pytest.approx(0.25, rel=1e-14)

    @pytest.mark.parametrize("w", [
        WeightFn("power", alpha=1.0, T0=0.3),
        WeightFn("power", alpha=0.5, T0=0.3),
        WeightFn("power", alpha=2.5, T0=0.5),
        WeightFn("log-power", beta=2.0, T0=0.3),
        WeightFn("log-power", beta=1.5, T0=0.2),
        WeightFn("log-power", beta=3.0, T0=0.5),
    ])
    def test_quadrature_matches_closed_form(self, w):
        rng = np.random.default_rng(0)
        phi = PhiWeight(w)
        ts = w.T0 * rng.uniform(1e-4, 1.0, size=100)
        for t in ts:
            exact = phi.value(t)
            approx = phi.quadrature(t)
            assert abs(approx - exact) <= 1e-8 * abs(exact)

    @given(st.floats(min_value=1e-6, max_value=0.3),
           st.floats(min_value=1e-6, max_value=0.3))
    @settings(max_examples=200)
    def test_monotone(self, t1, t2):
        w = WeightFn("power", alpha=1.3, T0=0.3)
        lo, hi = min(t1, t2), max(t1, t2)
        if lo < hi:
            assert phi_eval(w, lo) < phi_eval(w, hi)

    def test_monotone_log_power(self):
        w = WeightFn("log-power", beta=2.0, T0=0.3)
        ts = Grid.geometric_times(0.3, 1e-8, 40)
        vals = [phi_eval(w, t) for t in ts]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestSectorGeometry:
    def test_distance_interior_real(self):
        assert sector_distance(Sector(0.2, 1.0), 0.5) == pytest.approx(0.2)

    def test_distance_boundary_radius(self):
        assert sector_distance(Sector(0.2, 1.0), 1.0) == 0.0

    def test_distance_formula(self):
        d = sector_distance(Sector(0.3, 2.0), cmath.exp(1j * 0.1))
        assert d == pytest.approx(min(math.log(2), 0.2))

    def test_origin_rejected(self):
        with pytest.raises(DomainError):
            sector_distance(Sector(0.2, 1.0), 0.0)

    def test_membership_matches_distance_sign(self):
        s = Sector(0.4, 0.7)
        for x in [0.1, 0.69, 0.3 * cmath.exp(0.39j), 0.3 * cmath.exp(0.41j),
                  -0.1, 0.71, 0.5 * cmath.exp(-0.2j)]:
            assert s.contains(x) == (sector_distance(s, x) > 0)

    def test_shrunk_identity(self):
        s = Sector(0.3, 1.0)
        assert shrunk_sector(s, 1.0) == s

    def test_shrunk_scaling(self):
        assert shrunk_sector(Sector(0.3, 1.0), 0.5) == Sector(0.15, 0.5)
        small = shrunk_sector(Sector(0.2, 2.0), 0.1)
        assert small.theta == pytest.approx(0.02)
        assert small.R == pytest.approx(0.2)

    def test_shrunk_range(self):
        with pytest.raises(DomainError):
            shrunk_sector(Sector(0.3, 1.0), 0.0)
        with pytest.raises(DomainError):
            shrunk_sector(Sector(0.3, 1.0), 1.5)

    def test_shrunk_distance_scaling(self):
        # d_{S(eta theta, eta R)}(eta y) = min(log(R/|y|), eta theta - |arg y|)
        s = Sector(0.3, 1.5)
        for eta in (0.9, 0.5, 0.2):
            small = shrunk_sector(s, eta)
            for y in (0.4, 0.9 * cmath.exp(0.25j), 1.2 * cmath.exp(-0.1j)):
                got = sector_distance(small, eta * y)
                want = min(math.log(s.R / abs(y)), eta * s.theta - abs(cmath.phase(y)))
                assert got == pytest.approx(want, abs=1e-14)


class TestGrid:
    def test_times_descending_positive(self):
        ts = Grid.geometric_times(0.3, 1e-3, 30)
        assert len(ts) == 30
        assert ts[0] == 0.3 and ts[-1] == pytest.approx(1e-3)
        assert all(a > b > 0 for a, b in zip(ts, ts[1:]))

    def test_disc_points_strictly_inside(self):
        d = Disc(0.1)
        pts = Grid.disc_points(d, 4, 16)
        assert len(pts) == 64
        assert all(d.contains(p) for p in pts)

    def test_sector_points_strictly_inside(self):
        s = Sector(0.2, 0.1)
        pts = Grid.sector_points(s, 8, 8)
        assert len(pts) == 64
        assert all(s.contains(p) for p in pts)

    def test_deterministic(self):
        a = Grid.for_disc(Disc(0.1), 0.3, 1e-3)
        b = Grid.for_disc(Disc(0.1), 0.3, 1e-3)
        assert a == b
