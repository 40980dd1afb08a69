import json

import pytest
from click.testing import CliRunner

from voalab import cli
from voalab.voa import CutoffError


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli.main, [str(a) for a in args])


def payload(result):
    # stdout carries the JSON document, the one-line summary goes to stderr
    return json.loads(result.stdout)


def test_check_jacobi_heisenberg(runner):
    r = invoke(runner, "check", "--voa", "heisenberg", "--cutoff", 6, "--suite", "jacobi")
    assert r.exit_code == 0, r.output
    doc = payload(r)
    assert doc["pass"] and doc["reports"][0]["suite"] == "jacobi"
    assert "jacobi: pass" in r.stderr


def test_check_coord_virasoro(runner):
    r = invoke(runner, "check", "--voa", "virasoro", "--c", "1/2", "--cutoff", 6, "--suite", "coord")
    assert r.exit_code == 0, r.output
    assert payload(r)["voa"]["central_charge"] == "1/2"


def test_check_seed_is_used(runner):
    a = invoke(runner, "check", "--cutoff", 4, "--suite", "coord", "--seed", 1)
    b = invoke(runner, "check", "--cutoff", 4, "--suite", "coord", "--seed", 1)
    assert a.exit_code == 0 and a.stdout == b.stdout


def test_check_criterion(runner):
    r = invoke(runner, "check", "--criterion", 4, "--criterion", 6)
    assert r.exit_code == 0, r.output
    doc = payload(r)
    assert [c["criterion"] for c in doc["criteria"]] == [4, 6]
    assert "criterion 4: pass" in r.stderr


def test_check_criterion_range(runner):
    assert invoke(runner, "check", "--criterion", 10).exit_code == 2


def test_bad_central_charge(runner):
    r = invoke(runner, "check", "--voa", "virasoro", "--c", "one/half")
    assert r.exit_code == 2
    assert "central charge" in r.output


def test_generic_central_charge(runner):
    r = invoke(runner, "dump-voa", "--voa", "virasoro", "--c", "generic", "--cutoff", 4)
    assert r.exit_code == 0
    assert payload(r)["dims"] == [1, 0, 1, 1, 2]


def test_zhu_level0(runner):
    r = invoke(runner, "zhu", "--voa", "heisenberg", "--cutoff", 6, "--level", 0)
    assert r.exit_code == 0, r.output
    doc = payload(r)
    assert doc["unit"] == [[]]
    assert doc["omega_central"] is True
    assert doc["pipelines_agree"] is True
    assert doc["stable"] is True


def test_zhu_level1(runner):
    r = invoke(runner, "zhu", "--voa", "heisenberg", "--cutoff", 6, "--level", 1)
    assert r.exit_code == 0, r.output
    doc = payload(r)
    assert "zn_dim" in doc
    assert doc["a_vs_atilde_delta"] == doc["zn_dim"]


def test_zhu_unstable_warns(runner):
    r = invoke(runner, "zhu", "--cutoff", 2, "--level", 3)
    assert r.exit_code == 0
    doc = payload(r)
    assert doc["stable"] is False
    assert "stable window" in doc["warning"]


def test_zhu_negative_level(runner):
    assert invoke(runner, "zhu", "--level", -1).exit_code == 2


def test_sew_order_zero(runner):
    r = invoke(runner, "sew", "--order", 0)
    assert r.exit_code == 0, r.output
    doc = payload(r)
    assert doc["series"] == [{"coeff": "1", "exponents": [0]}]
    assert doc["cross_check"] == "pass"


def test_sew_virasoro_label_check(runner):
    r = invoke(runner, "sew", "--voa", "virasoro", "--u", "1")
    assert r.exit_code == 2


def test_propagate_default(runner):
    r = invoke(runner, "propagate", "--u", "1", "--w", "1")
    assert r.exit_code == 0, r.output
    doc = payload(r)
    assert doc["cross_check"] == "pass"
    assert doc["functions"][0]["certificate"] is True


def _write_geometry(tmp_path, doc):
    p = tmp_path / "geo.json"
    p.write_text(json.dumps(doc))
    return str(p)


def test_propagate_coincident_points(runner, tmp_path):
    g = _write_geometry(tmp_path, {"incoming": [{"point": "1"}],
                                   "outgoing": [{"point": "1", "a": 0}, {"point": "inf", "a": 0}]})
    r = invoke(runner, "propagate", "--geometry", g)
    assert r.exit_code == 2
    assert "coincident" in r.output


def test_propagate_missing_incoming(runner, tmp_path):
    g = _write_geometry(tmp_path, {"outgoing": [{"point": "0", "a": 0}]})
    r = invoke(runner, "propagate", "--geometry", g)
    assert r.exit_code == 2
    assert "incoming" in r.output


def test_config_parse_error_location(runner, tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text('{"voa": "virasoro",\n  cutoff: 4}')
    r = invoke(runner, "check", "--config", p)
    assert r.exit_code == 2
    assert "line 2, column 3" in r.output


def test_flags_override_config(runner, tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"voa": "virasoro", "c": "1/2", "cutoff": 5}))
    r = invoke(runner, "dump-voa", "--config", p, "--cutoff", 3)
    doc = payload(r)
    assert doc["voa"] == "virasoro" and doc["cutoff"] == 3


def test_output_file(runner, tmp_path):
    out = tmp_path / "out.json"
    r = invoke(runner, "dump-voa", "--cutoff", 4, "--output", out)
    assert r.exit_code == 0
    assert r.stdout == ""
    assert json.loads(out.read_text())["dims"] == [1, 1, 2, 3, 5]


def test_deterministic_output(runner):
    a = invoke(runner, "zhu", "--voa", "virasoro", "--cutoff", 6, "--level", 0)
    b = invoke(runner, "zhu", "--voa", "virasoro", "--cutoff", 6, "--level", 0)
    assert a.stdout == b.stdout


def test_fusion(runner):
    r = invoke(runner, "fusion", "--cutoff", 4)
    assert r.exit_code == 0, r.output
    doc = payload(r)
    # level 0 on the q sphere recovers A_0(heisenberg) = C[a], one class per weight
    assert doc["dims_by_weight"] == [1, 1, 1, 1, 1]
    assert doc["dim"] == 5


def test_library_errors_exit_2(runner, monkeypatch):
    def boom(*args):
        raise CutoffError("vector of weight 9 exceeds cutoff 8")
    monkeypatch.setattr(cli.zhu, "build_A_n", boom)
    r = invoke(runner, "zhu")
    assert r.exit_code == 2
    assert "exceeds cutoff" in r.output
