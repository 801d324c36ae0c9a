import math

import numpy as np
import pytest

from netfv.analysis import (EocReport, crandall_majda_q, discrete_entropy_residuals, eoc,
                            eoc_orders, exact_eval, l1_error_vs, restrict)
from netfv.cases import CASES, get_case
from netfv.errors import OutsideValidity, SpecMismatch
from netfv.flux import Burgers, ScaledLWR
from netfv.germ import kruzkov_q, sample_germ
from netfv.grid import Grid
from netfv.scheme import NumericalFlux, cfl_dt, run, step

from netgen import random_setup, trials

C0_TRAFFIC = 0.5 * (3.0 - math.sqrt(7.0))


class TestExactEval:
    def test_traffic_fan_tail(self):
        assert exact_eval(get_case("holdenrisebro"), "1", 0.5, 0.2) == pytest.approx(C0_TRAFFIC)

    def test_roundabout_behind_shock(self):
        assert exact_eval(get_case("burgersroundabout"), "-1", 0.4, 0.1) == 2.0

    @pytest.mark.parametrize("name", sorted(CASES))
    def test_initial_data(self, name):
        case = get_case(name)
        x = np.linspace(0, 1, 97)[:-1] + 1e-3
        for e, pc in case.data.items():
            np.testing.assert_array_equal(exact_eval(case, e, x, 0.0), pc(x))

    def test_outside_validity(self):
        with pytest.raises(OutsideValidity):
            exact_eval(get_case("holdenrisebro"), "1", 0.5, 0.3)

    @pytest.mark.parametrize("name", sorted(CASES))
    def test_pde_residual(self, name):
        case = get_case(name)
        rng = np.random.default_rng(5)
        h = 1e-5
        t_max = min(case.t_end, case.exact.valid_until)
        checked = 0
        while checked < 50:
            e = str(rng.choice(sorted(case.data)))
            x, t = rng.uniform(0.05, 0.95), rng.uniform(0.01, t_max - 0.01)
            f = case.network.edge(e).flux
            wave = case.exact.waves[e]
            if any(abs(x - b) < 10 * h for b in wave.breakpoints(t) + wave.breakpoints(t + h)
                   + wave.breakpoints(t - h)):
                continue
            ut = (exact_eval(case, e, x, t + h) - exact_eval(case, e, x, t - h)) / (2 * h)
            fx = (f(exact_eval(case, e, x + h, t)) - f(exact_eval(case, e, x - h, t))) / (2 * h)
            assert abs(ut + fx) <= 1e-6
            checked += 1

    @pytest.mark.parametrize("name", sorted(CASES))
    def test_rankine_hugoniot(self, name):
        case = get_case(name)
        for e, wave in case.exact.waves.items():
            if wave.kind not in ("shock", "contact"):
                continue
            s = wave.speeds[0]
            f = wave.flux
            assert abs(s * (wave.ul - wave.ur) - (f(wave.ul) - f(wave.ur))) <= 1e-12

    def test_roundabout_shock_speed(self):
        case = get_case("burgersroundabout")
        assert case.exact.waves["-1"].speeds[0] == pytest.approx(1 / (2 - math.sqrt(2)), abs=1e-14)
        assert case.events["t_hit"] == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-15)


class TestCrandallMajda:
    def test_at_germ(self):
        F = NumericalFlux.for_flux(Burgers())
        assert crandall_majda_q(F, 1.0, 1.0, 1.0, 1.0) == 0.0

    def test_burgers(self):
        F = NumericalFlux.for_flux(Burgers())
        for ur in (0.0, 0.5, 3.0):
            assert crandall_majda_q(F, 1.0, 1.0, 2.0, ur) == 1.5

    def test_reduces_to_kruzkov(self):
        f = ScaledLWR(2.0, 3.0)
        F = NumericalFlux.for_flux(f)
        rng = np.random.default_rng(6)
        c, ul, ur = (rng.uniform(0, 1, 1000) for _ in range(3))
        np.testing.assert_allclose(crandall_majda_q(F, c, c, ul, ur), kruzkov_q(f, c, ul),
                                   rtol=0, atol=1e-15)


class TestEntropyResiduals:
    @pytest.mark.parametrize("name", sorted(CASES))
    def test_germ_state_zero(self, name):
        case = get_case(name)
        j = case.network.junction()
        c = sample_germ(j, np.random.default_rng(7))[0]
        s = c.to_state(case.grid(4))
        after, _ = step(s, cfl_dt(s))
        assert abs(discrete_entropy_residuals(s, after, cfl_dt(s), s).max()) <= 1e-13

    def test_roundabout_arrival(self):
        case = get_case("burgersroundabout")
        s = run(case.initial_state(7), case.events["t_hit"] - 0.002).state
        germs = [g.to_state(s.grid) for g in sample_germ(case.network, np.random.default_rng(8), 5)]
        for _ in range(10):
            dt = cfl_dt(s)
            after, _ = step(s, dt)
            for g in germs:
                assert discrete_entropy_residuals(s, after, dt, g).max() <= 1e-12
            s = after

    def test_random_states(self):
        rng = np.random.default_rng(9)

        def make(rng):
            while True:
                setup = random_setup(rng, topology=str(rng.choice(["star", "roundabout"])))
                try:
                    g = sample_germ(setup.network, rng)[0]
                except ValueError:
                    continue
                return setup.random_state(rng), g

        def check(item):
            u, g = item
            germ = g.to_state(u.grid)
            dt = cfl_dt(u)
            after, _ = step(u, dt)
            assert discrete_entropy_residuals(u, after, dt, germ).max() <= 1e-12

        trials(rng, 100, make, check)

    def test_grid_mismatch(self):
        case = get_case("linadv")
        a, b = case.initial_state(3), case.initial_state(4)
        with pytest.raises(SpecMismatch):
            discrete_entropy_residuals(a, a, 0.01, b)


class TestErrors:
    @pytest.mark.parametrize("name", sorted(CASES))
    def test_initial_projection_zero(self, name):
        case = get_case(name)
        assert l1_error_vs(case, case.initial_state(5), 0.0) <= 1e-15

    def test_fine_reference_of_itself(self):
        s = get_case("holdenrisebro").initial_state(4)
        assert l1_error_vs(s, s) == 0.0

    def test_restrict_block_average(self):
        case = get_case("linadv")
        fine = case.initial_state(6)
        coarse = case.grid(4)
        avg = restrict(fine, coarse)
        np.testing.assert_allclose(avg["-1"], fine.edges["-1"].reshape(-1, 4).mean(axis=1))
        with pytest.raises(SpecMismatch):
            restrict(case.initial_state(3), coarse)

    def test_time_mismatch(self):
        case = get_case("linadv")
        s = case.initial_state(4)
        with pytest.raises(SpecMismatch):
            l1_error_vs(s, s, 0.1)

    def test_traffic_level3_table_value(self):
        case = get_case("holdenrisebro")
        err = l1_error_vs(case, run(case.initial_state(3), case.t_end).state)
        assert err == pytest.approx(0.09904, rel=0.30)


class TestEoc:
    def test_formula(self):
        assert eoc_orders([0.1, 0.05], [0.1, 0.05]) == [1.0]

    def test_report_recomputes_bitwise(self):
        rep = eoc(get_case("burgersshock"), [3, 4, 5])
        assert rep.orders == eoc_orders(rep.errors, rep.dxs)
        assert rep.order_at(5) == rep.orders[-1]
        again = EocReport(rep.case, rep.levels, rep.dxs, rep.errors)
        assert again.orders == rep.orders

    def test_table_and_csv(self, tmp_path):
        rep = eoc(get_case("linadv"), [3, 4])
        assert len(rep.table().splitlines()) == 4
        path = tmp_path / "eoc.csv"
        rep.write_csv(path)
        rows = path.read_text().splitlines()
        assert rows[0] == "level,dx,l1_error,eoc"
        assert rows[1].endswith(",") and float(rows[2].split(",")[3]) == rep.orders[0]

    def test_self_reference_close_to_exact(self):
        case = get_case("burgersshock")
        exact = eoc(case, [3, 4, 5])
        self_ref = eoc(case, [3, 4, 5], reference=8)
        np.testing.assert_allclose(self_ref.errors, exact.errors, rtol=0.1)

    @pytest.mark.parametrize("levels", [[4, 3], [3], [3, 3]])
    def test_bad_levels(self, levels):
        with pytest.raises(ValueError):
            eoc(get_case("linadv"), levels)

    def test_reference_level_too_low(self):
        with pytest.raises(ValueError):
            eoc(get_case("linadv"), [3, 4], reference=4)

    def test_linear_order_half(self):
        rep = eoc(get_case("linadv"), range(7, 12))
        assert rep.orders[-1] == pytest.approx(0.5, abs=0.1)
