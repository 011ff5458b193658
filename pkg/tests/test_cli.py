import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from hetnet.cli import main
from hetnet.netfile import parse_network, render_network
from hetnet.report import REPORT_SCHEMA
from hetnet.synth import Heterogeneity, SynthConfig, parse_hetero, synthesize
from hetnet.model import make_spec

GOLDEN = Path(__file__).resolve().parent.parent / "golden"
EXPECTED_EXIT = {"example1_homo": 0, "example1_hetero": 1, "example2_homo": 1, "example2_hetero": 0}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", sorted(EXPECTED_EXIT))
def test_golden_exit_codes_and_schema(capsys, name):
    code, out, _ = run(capsys, "check", str(GOLDEN / f"{name}.net"), "--json")
    assert code == EXPECTED_EXIT[name]
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert doc["summary"]["exit_code"] == code


def test_table_output(capsys):
    code, out, _ = run(capsys, "check", str(GOLDEN / "example1_hetero.net"))
    assert code == 1
    assert "witness s0" in out and out.rstrip().endswith("(exit 1)")
    assert not any(line != line.rstrip() for line in out.splitlines())


def test_criterion_selection(capsys):
    code, out, _ = run(capsys, "check", str(GOLDEN / "example2_hetero.net"), "--json",
                       "--criterion", "topology,theorem2")
    doc = json.loads(out)
    assert [r["criterion"] for r in doc["reports"]] == ["topology", "theorem2"]
    # a topology-only negative does not decide the network
    assert code == 2


def test_usage_errors_exit_3(capsys, tmp_path):
    net = str(GOLDEN / "example1_homo.net")
    assert run(capsys, "check", net, "--criterion", "bogus")[0] == 3
    assert run(capsys, "check", net, "--tol", "rank_factor=abc")[0] == 3
    assert run(capsys, "check", net, "--tol", "nope=1")[0] == 3
    assert run(capsys, "check", str(tmp_path / "missing.net"))[0] == 3
    assert run(capsys, "frobnicate")[0] == 3


def test_malformed_file_exit_3(capsys, tmp_path):
    d = json.loads((GOLDEN / "example1_homo.net").read_text())
    del d["H"]
    f = tmp_path / "bad.net"
    f.write_text(json.dumps(d))
    code, _, err = run(capsys, "check", str(f))
    assert code == 3 and "H" in err


def test_tolerance_override_reaches_report(capsys):
    _, out, _ = run(capsys, "check", str(GOLDEN / "example1_homo.net"), "--json", "--tol", "rank_factor=2")
    assert json.loads(out)["tolerances"]["rank_factor"] == 2


def test_drivers(capsys):
    code, out, _ = run(capsys, "drivers", str(GOLDEN / "example2_hetero.net"), "--json")
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert code == 0 and doc["minimal_sets"] == [[1]] and doc["verified"]
    code, out, _ = run(capsys, "drivers", str(GOLDEN / "example1_hetero.net"), "--mode", "greedy")
    assert code in (0, 1) and "no optimality claim" in out


def test_drivers_refuses_large_exhaustive(capsys, tmp_path):
    N = 13
    spec = make_spec([np.zeros((1, 1))] * N, [np.ones((1, 1))] * N, [np.ones((1, 1))] * N,
                     np.eye(N, k=-1), np.ones((1, 1)), [0] * N)
    f = tmp_path / "big.net"
    f.write_text(render_network(spec))
    code, _, err = run(capsys, "drivers", str(f))
    assert code == 3 and "greedy" in err


def test_generate_is_deterministic(capsys):
    args = ("generate", "--kind", "random", "--N", "4", "--seed", "11", "--hetero", "perturb(0.1)")
    a = run(capsys, *args)[1]
    b = run(capsys, *args)[1]
    assert a == b
    assert parse_network(a).spec.N == 4


def test_perturb_zero_matches_none(capsys):
    base = ("generate", "--kind", "ring", "--N", "4", "--seed", "3", "--hetero")
    assert run(capsys, *base, "none")[1] == run(capsys, *base, "perturb(0)")[1]


def test_generated_file_checks(capsys, tmp_path):
    f = tmp_path / "g.net"
    f.write_text(run(capsys, "generate", "--kind", "chain", "--N", "3", "--hetero", "resample", "--seed", "2")[1])
    code, out, _ = run(capsys, "check", str(f), "--json")
    assert code in (0, 1)
    jsonschema.validate(json.loads(out), REPORT_SCHEMA)


def test_experiment_header_only(capsys):
    code, out, err = run(capsys, "experiment", "--samples", "0")
    assert code == 0 and out.strip() == "sample,seed,kind,N,n,hetero,drivers,verdict,controllable,kalman"
    assert err == ""


def _fraction(err):
    return float(err.split("controllable_fraction=")[1].split()[0])


def test_experiment_star_fractions(capsys):
    common = ("experiment", "--kind", "star", "--N", "4", "--n", "2", "--samples", "25", "--seed", "1")
    code, out, err = run(capsys, *common, "--hetero", "none")
    assert code == 0 and _fraction(err) == 0.0
    assert len(out.strip().splitlines()) == 26
    code, _, err = run(capsys, *common, "--hetero", "resample")
    assert code == 0 and _fraction(err) > 0.0


def test_experiment_parallel_matches_serial(capsys):
    common = ("experiment", "--kind", "random", "--N", "3", "--samples", "6", "--seed", "5")
    assert run(capsys, *common)[1] == run(capsys, *common, "--jobs", "2")[1]


def test_schema_command(capsys):
    code, out, _ = run(capsys, "schema")
    assert code == 0 and json.loads(out) == REPORT_SCHEMA
    jsonschema.Draft202012Validator.check_schema(REPORT_SCHEMA)


def test_parse_hetero():
    assert parse_hetero("perturb:0.5") == Heterogeneity("perturb", 0.5)
    assert str(parse_hetero("perturb(0)")) == "none"
    for bad in ("perturb(-1)", "perturb(x)", "wild"):
        with pytest.raises(ValueError):
            parse_hetero(bad)


def test_synth_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(drivers=5, N=3)
    with pytest.raises(ValueError):
        SynthConfig(kind="tree")


def test_synthesized_entries_are_dyadic():
    spec = synthesize(SynthConfig(kind="random", N=4, hetero=parse_hetero("perturb(0.3)")), 9)
    for nd in spec.nodes:
        assert np.array_equal(nd.A * 2**16, np.round(nd.A * 2**16))


def test_generated_chain_is_three_node_path(capsys):
    text = run(capsys, "generate", "--kind", "chain", "--N", "3", "--hetero", "none")[1]
    edges = [(e["from"], e["to"]) for e in json.loads(text)["edges"]]
    assert edges == [(1, 2), (2, 3)]
