import csv
import math
import time

import pytest

from netfv.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main, parse_levels
from netfv.config import BUNDLED, bundled_text, load_config
from netfv.grid import l1_distance, read_snapshot_csv

C0_TRAFFIC = 0.5 * (3.0 - math.sqrt(7.0))


def write_vectors(path, rows, c0=True):
    cols = ["-2", "-1", "1", "2", "3"] + (["c0"] if c0 else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(x) for x in r])
    return str(path)


class TestLevels:
    def test_range(self):
        assert parse_levels("3..6") == [3, 4, 5, 6]

    def test_list(self):
        assert parse_levels("3,5,9") == [3, 5, 9]

    def test_out_of_order(self):
        assert main(["eoc", "--config", "linadv", "--levels", "5,4"]) == EXIT_USAGE


class TestRun:
    @pytest.mark.parametrize("name", BUNDLED)
    def test_bundled_level7(self, name, tmp_path, capsys):
        t0 = time.perf_counter()
        assert main(["run", "--config", name, "--out", str(tmp_path), "--threads", "1"]) == EXIT_OK
        assert time.perf_counter() - t0 < 10.0
        for f in ("snapshot_initial.csv", "snapshot_final.csv", "run_report.csv",
                  "vertex_history.csv", "budget.txt", "snapshots.csv"):
            assert (tmp_path / f).exists()
        assert "budget_residual" in capsys.readouterr().out

    def test_roundabout_vertex_trace(self, tmp_path):
        assert main(["run", "--config", "burgersroundabout", "--out", str(tmp_path)]) == EXIT_OK
        with open(tmp_path / "vertex_history.csv") as fh:
            rows = [(float(r["t"]), float(r["value"])) for r in csv.DictReader(fh)]
        before = [v for t, v in rows if t < 0.25]
        after = [v for t, v in rows if t > 0.35]
        # the smeared shock reaches the vertex slightly early at level 7
        assert max(before) == pytest.approx(1.0, abs=1e-3)
        assert min(after) > 1.2
        snaps = (tmp_path / "snapshots.csv").read_text().splitlines()[1:]
        assert [float(s.split(",")[1]) for s in snaps] == [0.25, 0.35, 0.5]

    def test_germ_constant_config(self, tmp_path):
        text = bundled_text("holdenrisebro").replace("values: [0.0]", f"values: [{C0_TRAFFIC!r}]")
        text = text.replace("values: [1.0]", f"values: [{C0_TRAFFIC!r}]")
        cfg = tmp_path / "germ.yaml"
        cfg.write_text(text)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
        grid = load_config(str(cfg)).grid()
        first = read_snapshot_csv(tmp_path / "snapshot_initial.csv", grid)
        last = read_snapshot_csv(tmp_path / "snapshot_final.csv", grid)
        assert l1_distance(first, last) <= 1e-14

    def test_cfl_zero(self, tmp_path, capsys):
        assert main(["run", "--config", "linadv", "--cfl", "0", "--out", str(tmp_path)]) == EXIT_INVALID
        assert "cfl" in capsys.readouterr().err

    def test_cfl_zero_in_file(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text(bundled_text("linadv").replace("cfl_factor: 1.0", "cfl_factor: 0.0"))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_INVALID

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.yaml")]) == EXIT_INVALID

    def test_no_subcommand(self):
        assert main([]) == EXIT_USAGE

    def test_solver_error(self, tmp_path):
        # three full in-edges overflow the vertex of a one-lane exit
        text = bundled_text("holdenrisebro").replace("values: [0.0]", "values: [2.0]")
        text = text.replace("vertices: {v: auto}", "vertices: {v: 2.0}")
        cfg = tmp_path / "bad.yaml"
        cfg.write_text(text)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) in (EXIT_RUNTIME, EXIT_INVALID)


class TestEoc:
    def test_traffic(self, tmp_path, capsys):
        assert main(["eoc", "--config", "holdenrisebro", "--levels", "3..8",
                     "--out", str(tmp_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "level" in out and "EOC" in out
        rows = (tmp_path / "eoc.csv").read_text().splitlines()
        assert len(rows) == 7

    def test_two_levels(self, tmp_path, capsys):
        assert main(["eoc", "--config", "linadv", "--levels", "3,4", "--out", str(tmp_path)]) == EXIT_OK
        rows = (tmp_path / "eoc.csv").read_text().splitlines()[1:]
        assert rows[0].endswith(",") and not rows[1].endswith(",")

    def test_bad_levels_text(self):
        assert main(["eoc", "--config", "linadv", "--levels", "three"]) == EXIT_USAGE


class TestGermCheck:
    def test_traffic_vector(self, tmp_path, capsys):
        path = write_vectors(tmp_path / "v.csv", [[0.5, 0.5] + [C0_TRAFFIC] * 4])
        assert main(["germ-check", "--config", "holdenrisebro", "--vectors", path]) == EXIT_OK
        out = capsys.readouterr().out
        assert "stationary=pass" in out and "discrete_stationary=pass" in out
        assert "  0: 1" in out

    def test_perturbed(self, tmp_path, capsys):
        path = write_vectors(tmp_path / "v.csv", [[0.5, 0.4] + [C0_TRAFFIC] * 4,
                                                  [0.5, 0.5] + [C0_TRAFFIC] * 4])
        assert main(["germ-check", "--config", "holdenrisebro", "--vectors", path]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert "stationary=fail" in lines[0] and "stationary=pass" in lines[1]

    def test_parse_failure(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("a,b\n1,2\n")
        assert main(["germ-check", "--config", "holdenrisebro", "--vectors", str(path)]) == EXIT_INVALID

    def test_out_of_domain(self, tmp_path, capsys):
        path = write_vectors(tmp_path / "v.csv", [[3.0, 0.5] + [C0_TRAFFIC] * 4])
        assert main(["germ-check", "--config", "holdenrisebro", "--vectors", path]) == EXIT_OK
        assert "domain=fail" in capsys.readouterr().out
