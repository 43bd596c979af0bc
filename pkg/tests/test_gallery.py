import numpy as np
import pytest

from singpde import audit as au
from singpde import gallery as ga
from singpde.classify import classify

ALL_IDS = ["G1", "G2", "G3", "G4", "G5", "G6", "G7", "G8", "G9", "G10", "G11"]


class TestCatalogue:
    def test_eleven_entries_stable_ids(self):
        cases = ga.list_cases()
        assert [c.id for c in cases] == ALL_IDS

    def test_get_unknown_id(self):
        with pytest.raises(Exception):
            ga.get("G99")

    def test_g2_solutions(self):
        _, _, sols = ga.get("G2")
        assert set(sols) == {"zero", "quarter-square"}
        assert sols["quarter-square"].u(0.1, 0.2 + 0j) == pytest.approx(0.01)

    def test_g4_expected_classification(self):
        case, pde, _ = ga.get("G4")
        cc = classify(pde)
        assert cc.case_id == 2 and cc.lambda00 == 2 and cc.c00 == -1

    def test_g11_series_oracle(self):
        from singpde.series import build_solution
        case, pde, _ = ga.get("G11")
        ds = build_solution(pde, classify(pde), M=6, N=6)
        assert ds.coeffs[1, 0] == pytest.approx(0.5, abs=1e-15)

    def test_synthetic_tagged(self):
        assert {c.id for c in ga.list_cases() if c.synthetic} == {"G11"}

    def test_catalogue_export(self):
        doc = ga.catalogue_json()
        assert len(doc) == 11
        assert doc[1]["rhs"] == "-u + v^2"


class TestResiduals:
    @pytest.mark.parametrize("gid", ALL_IDS)
    def test_closed_forms_solve(self, gid):
        case, pde, sols = ga.get(gid)
        grid = ga.standard_grid(case)
        for name, sol in sols.items():
            assert ga.pde_residual(pde, sol, grid) < 1e-8, (gid, name)

    def test_g1_family_k2(self):
        case, pde, sols = ga.get("G1", k=2)
        grid = ga.standard_grid(case)
        assert ga.pde_residual(pde, sols["log-family"], grid) < 1e-8


class TestExpectations:
    @pytest.mark.parametrize("gid", ALL_IDS)
    def test_classification_matches(self, gid):
        case, pde, _ = ga.get(gid)
        cc = classify(pde)
        assert cc.case_id == case.expected_case
        assert cc.p == case.expected_p
        assert abs(cc.lambda00 - case.expected_lambda00) < 1e-12
        if case.expected_c00 is not None:
            assert abs(cc.c00 - case.expected_c00) < 1e-12
        assert cc.hypotheses_ok == case.expected_flags_ok

    @pytest.mark.parametrize("gid", ["G2", "G4", "G6", "G8", "G10"])
    def test_witnesses_differ(self, gid):
        case, pde, sols = ga.get(gid)
        grid = ga.standard_grid(case)
        pts = np.asarray(grid.points, dtype=complex)
        names = sorted(sols)
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                best = 0.0
                for t in grid.times:
                    ua = np.asarray(sols[names[i]].u(t, pts), dtype=complex) + np.zeros_like(pts)
                    ub = np.asarray(sols[names[j]].u(t, pts), dtype=complex) + np.zeros_like(pts)
                    best = max(best, float(np.max(np.abs(ua - ub))))
                assert best > 1e-3, (names[i], names[j])

    def test_g1_both_solutions_vanish_with_t(self):
        _, _, sols = ga.get("G1", k=1, alpha=0.0, c=5.0)
        for sol in sols.values():
            assert au.cond_vanishing_sup(sol, 0.08)


class TestRun:
    @pytest.mark.parametrize("gid", ALL_IDS)
    def test_entry_passes(self, gid):
        rep = ga.run(gid)
        failed = [c["name"] for c in rep["checks"] if not c["passed"]]
        assert rep["passed"], (gid, failed)

    def test_report_shape(self):
        rep = ga.run("G2")
        names = {c["name"] for c in rep["checks"]}
        assert {"classification", "witnesses-differ"} <= names
        assert any(n.startswith("residual:") for n in names)
        assert any(n.startswith("audit:") for n in names)
