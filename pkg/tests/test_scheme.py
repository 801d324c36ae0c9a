import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from netfv.cases import get_case
from netfv.errors import CflViolation, DomainViolation, NotMonotone
from netfv.flux import Burgers, LinearAdvection, ScaledLWR
from netfv.germ import sample_germ
from netfv.grid import Grid, l1_distance, mass
from netfv.network import Dirichlet, Neumann, star_network
from netfv.scheme import NumericalFlux, Rule, cfl_dt, run, step, wave_speed

from netgen import bounded_star, random_setup, trials

C0_TRAFFIC = 0.5 * (3.0 - math.sqrt(7.0))


def max_change(a, b):
    out = max(float(np.max(np.abs(a.edges[e] - b.edges[e]))) for e in a.edges)
    return max(out, max(abs(a.vertices[v] - b.vertices[v]) for v in a.vertices))


class TestNumericalFlux:
    def test_rules(self):
        assert NumericalFlux.for_flux(Burgers()).rule is Rule.UPWIND_INCREASING
        assert NumericalFlux.for_flux(LinearAdvection(-1.0)).rule is Rule.UPWIND_DECREASING
        with pytest.raises(NotMonotone):
            NumericalFlux.for_flux(Burgers(domain=(-1.0, 1.0)))

    @pytest.mark.parametrize("flux", [Burgers(), ScaledLWR(2.0, 3.0), LinearAdvection(-2.0)], ids=repr)
    def test_consistency(self, flux):
        F = NumericalFlux.for_flux(flux)
        for u in (0.0, 0.4, 0.9):
            assert F(u, u) == flux(u)

    def test_upwind_side(self):
        assert NumericalFlux.for_flux(Burgers())(2.0, 1.0) == 2.0
        assert NumericalFlux.for_flux(LinearAdvection(-1.0))(2.0, 1.0) == -1.0


class TestCfl:
    def test_burgers(self):
        net = star_network(1, 1, Burgers())
        s = Grid(net, 0.01).constant({"-1": 2.0, "1": 1.0}, {"v": 1.5})
        assert cfl_dt(s, 1.0) == pytest.approx(0.0025, rel=1e-14)

    def test_linear(self):
        s = Grid(star_network(1, 1, LinearAdvection(1.0)), 0.01).zeros()
        assert cfl_dt(s, 1.0) == pytest.approx(0.005, rel=1e-14)
        assert cfl_dt(s, 0.5) == pytest.approx(0.0025, rel=1e-14)

    def test_dirichlet_widens(self):
        net = star_network(1, 1, Burgers(), bcs=[Dirichlet(3.0), Neumann()])
        s = Grid(net, 0.01).constant({"-1": 1.0, "1": 1.0}, {"v": 1.0})
        assert wave_speed(s) == 3.0

    def test_zero_speed(self):
        s = Grid(star_network(1, 1, Burgers()), 0.125).zeros()
        assert cfl_dt(s) == 0.125
        assert cfl_dt(s, dt_max=0.01) == 0.01

    @pytest.mark.parametrize("factor", [0.0, -0.5, 1.5])
    def test_bad_factor(self, factor):
        s = Grid(star_network(1, 1, Burgers()), 0.125).zeros()
        with pytest.raises(ValueError):
            cfl_dt(s, factor)


class TestStep:
    def test_germ_fixed_point(self):
        case = get_case("holdenrisebro")
        s = case.grid(5).constant({"-2": 0.5, "-1": 0.5, "1": C0_TRAFFIC, "2": C0_TRAFFIC,
                                   "3": C0_TRAFFIC}, {"v": C0_TRAFFIC})
        new, _ = step(s, cfl_dt(s))
        assert max_change(s, new) <= 1e-15

    def test_cfl_violation(self):
        s = get_case("burgersshock").initial_state(5)
        with pytest.raises(CflViolation):
            step(s, 1.01 * s.grid.dx / (2 * wave_speed(s)))

    def test_domain_violation(self):
        # three full in-edges feeding one out-edge overflows its capacity
        net = star_network(3, 1, ScaledLWR(1.0, 4.0))
        s = Grid(net, 0.25).constant({"-3": 0.5, "-2": 0.5, "-1": 0.5, "1": 0.5}, {"v": 0.5})
        with pytest.raises(DomainViolation):
            for _ in range(20):
                s, _ = step(s, cfl_dt(s))

    def test_time_and_report(self):
        s = get_case("linadv").initial_state(4)
        new, rep = step(s, 0.01)
        assert new.time == 0.01 and rep.dt_used == 0.01
        assert rep.max_wave_speed == 1.0
        in_sum, out_sum = rep.fluxes_at_vertices["v"]
        assert in_sum == pytest.approx(2.0) and out_sum == pytest.approx(2.0)

    def test_roundabout_arrival(self):
        case = get_case("burgersroundabout")
        res = run(case.initial_state(8), 0.35)
        assert 1.0 < res.state.vertices["v"] <= math.sqrt(5.0 / 3.0) + 0.02

    def test_executor_bitwise(self):
        s = get_case("holdenrisebro").initial_state(6)
        a = run(s, 0.2).state
        with ThreadPoolExecutor(4) as ex:
            b = run(s, 0.2, executor=ex).state
        assert all(np.array_equal(a.edges[e], b.edges[e]) for e in a.edges)
        assert a.vertices == b.vertices


class TestRun:
    def test_lands_on_snapshots(self):
        s = get_case("burgersshock").initial_state(5)
        res = run(s, 0.1, snapshot_times=[0.0, 0.0333, 0.05])
        assert [x.time for x in res.snapshots] == [0.0, 0.0333, 0.05]
        assert res.state.time == 0.1

    def test_germ_constant_run(self):
        j = star_network(2, 3, Burgers()).junction()
        c = sample_germ(j, np.random.default_rng(0))[0]
        s = c.to_state(Grid.from_level(star_network(2, 3, Burgers()), 5))
        res = run(s, 0.7)
        assert max_change(s, res.state) <= 1e-13

    def test_linadv_front(self):
        case = get_case("linadv")
        res = run(case.initial_state(9), 0.1)
        u = res.state.edges["-1"]
        x = res.state.grid.x_centers("-1")
        # the jump from 2 down to 1 starts at 0.8 and moves with unit speed
        crossing = x[np.argmin(np.abs(u - 1.5))]
        assert crossing == pytest.approx(0.9, abs=0.01)
        assert res.state.vertices["v"] == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert np.allclose(res.state.edges["1"], 2.0 / 3.0, atol=1e-12)

    def test_traffic_fan_head(self):
        res = run(get_case("holdenrisebro").initial_state(10), 0.2)
        u = res.state.edges["1"]
        x = res.state.grid.x_centers("1")
        # fan from c0 down to 0 with its head at 4 * 0.2; upwind smears it a little
        assert u[x <= 0.7].min() > 0.15
        assert u[(x > 0.78) & (x < 0.8)].max() > 0.02
        assert u[x >= 0.9].max() < 1e-6

    def test_report_csv(self, tmp_path):
        res = run(get_case("linadv").initial_state(3), 0.1)
        path = tmp_path / "report.csv"
        res.report.write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "n,t,dt,max_wave_speed"
        assert len(lines) == len(res.report.steps) + 1

    def test_bad_t_end(self):
        s = get_case("linadv").initial_state(3)
        with pytest.raises(ValueError):
            run(s, 0.0)


class TestProperties:
    """Smaller versions of the acceptance property suites."""

    def test_monotone(self):
        def make(rng):
            setup = random_setup(rng)
            u = setup.random_state(rng)
            v = u.map(lambda a: np.minimum(a + rng.uniform(0, 0.5, np.shape(a)), setup.window[1]))
            return u, v

        def check(pair):
            u, v = pair
            dt = min(cfl_dt(u), cfl_dt(v))
            su, sv = step(u, dt)[0], step(v, dt)[0]
            for e in su.edges:
                assert np.all(su.edges[e] <= sv.edges[e] + 1e-12)
            for w in su.vertices:
                assert su.vertices[w] <= sv.vertices[w] + 1e-12

        trials(np.random.default_rng(1), 50, make, check)

    def test_contraction(self):
        def make(rng):
            setup = random_setup(rng)
            return setup.random_state(rng), setup.random_state(rng)

        def check(pair):
            u, v = pair
            dt = min(cfl_dt(u), cfl_dt(v))
            assert l1_distance(step(u, dt)[0], step(v, dt)[0]) <= l1_distance(u, v) + 1e-12

        trials(np.random.default_rng(2), 50, make, check)

    def test_mass_budget(self):
        def check(u):
            dt = cfl_dt(u)
            new, rep = step(u, dt)
            budget = dt * (rep.boundary_influx - rep.boundary_outflux)
            assert abs(mass(new) - mass(u) - budget) <= 1e-12 * (1 + abs(mass(u)))

        trials(np.random.default_rng(3), 50,
               lambda rng: random_setup(rng, dirichlet_inflow=False).random_state(rng), check)

    def test_linf_and_lipschitz(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            b = bounded_star(rng)
            dt = b.state.grid.dx / (2 * b.speed_bound())
            prev, first = b.state, None
            for _ in range(30):
                assert b.inside(prev)
                new, _ = step(prev, dt)
                inc = l1_distance(new, prev)
                first = inc if first is None else first
                assert inc <= first + 1e-10
                prev = new
