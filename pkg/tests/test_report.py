from pathlib import Path

import pytest
from hypothesis import given

from hetnet.analyzers import ControllabilityReport, Verdict
from hetnet.netfile import parse_network, render_network
from hetnet.report import clean, exit_code, run_criteria, summary_verdict
from strategies import general_specs


def rep(v, scope="network"):
    return ControllabilityReport(v, "x", scope=scope)


@pytest.mark.parametrize("verdicts, code", [
    ([Verdict.CONTROLLABLE, Verdict.NECESSARY_PASSED], 0),
    ([Verdict.NECESSARY_FAILED, Verdict.NOT_APPLICABLE], 1),
    ([Verdict.NOT_APPLICABLE, Verdict.NECESSARY_PASSED], 2),
    ([Verdict.CONTROLLABLE, Verdict.UNCONTROLLABLE], 4),
])
def test_exit_code_mapping(verdicts, code):
    assert exit_code([rep(v) for v in verdicts]) == code
    assert summary_verdict(code) in ("Controllable", "Uncontrollable", "Inconclusive", "Conflict")


def test_non_network_scopes_do_not_vote():
    reports = [rep(Verdict.CONTROLLABLE), rep(Verdict.UNCONTROLLABLE, "topology"), rep(Verdict.UNCONTROLLABLE, "crosscheck")]
    assert exit_code(reports) == 0


def test_clean():
    assert clean(3e-13) == 0.0 and clean(0.12345678901234) == 0.123456789


def test_unknown_criterion():
    doc = parse_network((Path(__file__).parent.parent / "golden" / "example1_homo.net").read_text())
    with pytest.raises(ValueError):
        run_criteria(doc, ["theorem9"])


@given(general_specs)
def test_full_run_never_conflicts(spec):
    doc = parse_network(render_network(spec))
    assert exit_code(run_criteria(doc, ["all"])) in (0, 1)
