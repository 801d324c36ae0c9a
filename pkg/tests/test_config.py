import math

import pytest

from netfv.cases import CASES, get_case
from netfv.config import (BUNDLED, case_config, config_case, dump_config, load_config,
                          parse_config)
from netfv.errors import ParseError, ValidationError
from netfv.grid import AUTO

MINIMAL = """\
network:
  vertices: [v]
  edges:
    - id: a
      flux: {kind: burgers}
      length: 1.0
      tail: {boundary: dirichlet, value: 1.0}
      head: v
    - id: b
      flux: {kind: burgers}
      length: 1.0
      tail: v
      head: {boundary: neumann}
initial:
  edges:
    a: {breaks: [0.5], values: [2.0, 1.0]}
    b: {values: [1.0]}
  vertices: {v: 1.0}
solver:
  dx: 0.125
  cfl_factor: 1.0
  t_end: 0.25
"""


def edit(text, old, new):
    assert old in text
    return text.replace(old, new)


class TestParse:
    def test_minimal(self):
        cfg = parse_config(MINIMAL)
        assert [e.id for e in cfg.network.edges] == ["a", "b"]
        assert cfg.mesh_width == 0.125 and cfg.t_end == 0.25
        assert cfg.initial_state().edges["a"].tolist() == [2.0] * 4 + [1.0] * 4

    def test_traffic_bundle(self):
        cfg = load_config("holdenrisebro")
        alphas = [e.flux.alpha for e in cfg.network.edges]
        assert alphas == [1.0, 1.0, 4.0, 4.0, 2.0]
        assert [cfg.data[k].values[0] for k in ("-2", "-1", "1", "3")] == [0.5, 0.5, 0.0, 1.0]
        assert cfg.data["2"].values[0] == pytest.approx(0.5 * (3 - math.sqrt(7)), abs=1e-15)
        assert cfg.vertex_init == {"v": AUTO}

    def test_empty_edges(self):
        with pytest.raises(ValidationError):
            parse_config(edit(MINIMAL, MINIMAL[MINIMAL.index("  edges:\n    - id: a"):MINIMAL.index("initial:")],
                              "  edges: []\n"))

    def test_dx_not_dividing(self):
        with pytest.raises(ValidationError, match="line"):
            parse_config(edit(MINIMAL, "dx: 0.125", "dx: 0.3"))

    @pytest.mark.parametrize("value", ["0.0", "1.5", "-1"])
    def test_cfl_range(self, value):
        with pytest.raises(ValidationError):
            parse_config(edit(MINIMAL, "cfl_factor: 1.0", f"cfl_factor: {value}"))

    def test_unknown_reference_has_line(self):
        with pytest.raises(ValidationError) as info:
            parse_config(edit(MINIMAL, "      head: v\n", "      head: w\n"))
        assert str(info.value).startswith("line ")

    def test_missing_initial_data(self):
        with pytest.raises(ValidationError):
            parse_config(edit(MINIMAL, "    b: {values: [1.0]}\n", ""))

    def test_unknown_flux(self):
        with pytest.raises((ParseError, ValidationError), match="line 5"):
            parse_config(edit(MINIMAL, "flux: {kind: burgers}\n      length: 1.0\n      tail: {",
                              "flux: {kind: godunov}\n      length: 1.0\n      tail: {"))

    def test_bad_yaml(self):
        with pytest.raises(ParseError, match="line"):
            parse_config("network: [\n")

    def test_level_or_dx(self):
        cfg = parse_config(edit(MINIMAL, "dx: 0.125", "level: 3"))
        assert cfg.mesh_width == 0.125


class TestRoundTrip:
    def test_minimal(self):
        cfg = parse_config(MINIMAL)
        assert parse_config(dump_config(cfg)) == cfg

    @pytest.mark.parametrize("name", BUNDLED)
    def test_bundled(self, name):
        cfg = load_config(name)
        again = parse_config(dump_config(cfg))
        assert again == cfg
        assert dump_config(again) == dump_config(cfg)

    @pytest.mark.parametrize("name", sorted(CASES))
    def test_bundle_matches_case(self, name):
        cfg = load_config(name)
        assert parse_config(dump_config(case_config(get_case(name)))).network == cfg.network
        assert config_case(cfg).exact is not None

    def test_custom_case_has_no_reference(self):
        assert config_case(parse_config(MINIMAL)).exact is None
