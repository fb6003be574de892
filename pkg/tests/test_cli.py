import json
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
import cube_lab
from cli.commands import (EXIT_CHECK_FAILED, EXIT_IO, EXIT_OK, EXIT_USAGE, cmd_analyze, cmd_approx,
                          cmd_oracle, cmd_shift, parse_checks, parse_grid, run_command)
from core.errors import CertificationError, SpecError
from core.file_parsing import JsonReportParser


def run_main(tmp_path, *argv):
    out = tmp_path / "out.json"
    code = cube_lab.main(["--out", str(out), *argv])
    return code, JsonReportParser.read_json(str(out))


def test_analyze_subcube(tmp_path):
    code, document = run_main(tmp_path, "analyze", "--fn", "subcube:k=3,n=8")
    assert code == EXIT_OK
    assert document["schema_version"] == "1"
    assert float(document["report"]["M"]) == pytest.approx(0.0, abs=1e-12)
    assert document["report"]["mu"] == {"num": 1, "den_pow2": 3}
    assert all(document["checks"].values())


def test_analyze_majority_direct():
    document, code = cmd_analyze("majority:n=3")
    assert code == EXIT_OK
    assert float(document["report"]["kkl_bound"]) == pytest.approx(4 / 27)


def test_single_shift(tmp_path):
    code, document = run_main(tmp_path, "shift", "--fn", "n=2:2", "--S", "1", "--T", "2")
    assert code == EXIT_OK
    assert document["output"] == "n=2:4"
    assert document["shift"]["label"] == "S_{1}{2}"


def test_pipeline(tmp_path):
    code, document = run_main(tmp_path, "shift", "--fn", "n=2:4", "--pipeline")
    assert code == EXIT_OK
    assert len(document["stages"]) == 3
    assert document["stages"][-1]["table"] == "n=2:8"
    assert document["checks"]["vanishes_on_lower_half"]


def test_pipeline_precondition_is_a_usage_error(tmp_path):
    code, document = run_main(tmp_path, "shift", "--fn", "constant:n=3,value=1", "--pipeline")
    assert code == EXIT_USAGE
    assert document["error"] == "PreconditionError"
    assert document["reproducer"] == "constant:n=3,value=1"


def test_approx(tmp_path):
    code, document = run_main(tmp_path, "approx", "--fn", "sharpness:w=2,l=2", "--eps", "0.2")
    assert code == EXIT_OK
    assert document["result"]["certified"]
    assert document["checks"] == {"certified": True, "error_matches": True}


def test_approx_with_policy():
    document, code = run_command("approx", cmd_approx, "tribes:w=2,s=3", 0.1, "split_rule=equal,rho=1/8")
    assert code == EXIT_OK
    assert document["result"]["policy"]["split_rule"] == "equal"


def test_oracle():
    document, code = cmd_oracle("parity:n=2", 2)
    assert code == EXIT_OK
    assert document["dnf"]["text"] == "1&!2|!1&2"
    assert document["error"] == {"num": 0, "den_pow2": 0}


def test_estimate(tmp_path):
    code, document = run_main(tmp_path, "estimate", "--fn", "dual-tribes:w=4,s=16", "--quantity", "measure",
                              "--samples", "20000", "--seed", "1")
    assert code == EXIT_OK
    assert document["estimate"]["samples"] == 20000
    assert document["estimate"]["spec"] == "dual-tribes:w=4,s=16"


def test_estimate_dnf_error(tmp_path):
    code, document = run_main(tmp_path, "estimate", "--fn", "subcube:n=40,pos=1+2", "--quantity", "dnf-error",
                              "--dnf", "1&2", "--samples", "1000")
    assert code == EXIT_OK
    assert float(document["estimate"]["value"]) == 0.0


def test_sweep_command(tmp_path):
    output = tmp_path / "sweep.csv"
    code, document = run_main(tmp_path, "sweep", "--family", "exhaustive-n", "--n", "2",
                              "--checks", "iso,kkl,infind,split-gain", "--output", str(output))
    assert code == EXIT_OK
    assert document["summary"]["all_passed"]
    assert os.path.exists(output)
    assert os.path.exists(document["summary_file"])


def test_sweep_over_cap_is_a_usage_error(tmp_path):
    code, document = run_main(tmp_path, "sweep", "--family", "exhaustive-n", "--n", "6",
                              "--output", str(tmp_path / "s.csv"))
    assert code == EXIT_USAGE
    assert document["error"] == "CapExceededError"


def test_failed_sweep_reports_witness(tmp_path, monkeypatch):
    import sweeps.checks as checks
    monkeypatch.setattr(checks, 'TOLERANCE', -10.0)
    code, document = run_main(tmp_path, "sweep", "--family", "exhaustive-n", "--n", "2", "--checks", "kkl",
                              "--output", str(tmp_path / "s.csv"))
    assert code == EXIT_CHECK_FAILED
    assert document["failure"]["reproducer"] == "n=2:1"
    assert document["failure"]["failed_checks"] == ["kkl"]


def test_bad_spec_is_a_usage_error(tmp_path):
    code, document = run_main(tmp_path, "analyze", "--fn", "nope:x=1")
    assert code == EXIT_USAGE
    assert document["error"] == "SpecError"


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x")
    code = cube_lab.main(["--out", str(blocker / "out.json"), "analyze", "--fn", "parity:n=3"])
    assert code == EXIT_IO


def test_stdout_output(capsys):
    code = cube_lab.main(["oracle", "--fn", "n=2:8", "--size", "1"])
    assert code == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document["dnf"]["text"] == "1&2"


def test_shift_direct_rejects_bad_sets():
    document, code = run_command("shift", cmd_shift, "parity:n=3", "1,2", "2", reproducer="parity:n=3")
    assert code == EXIT_USAGE
    assert document["error"] == SpecError.__name__


def test_list_parsers():
    assert parse_checks("iso, kkl,,infind") == ["iso", "kkl", "infind"]
    assert parse_grid("tribes:w=2,s=4; n=2:8") == ["tribes:w=2,s=4", "n=2:8"]


def test_certification_failure_is_a_check_failure():
    def uncertified(spec_text):
        raise CertificationError("error 1/4 exceeds budget 1/8")

    document, code = run_command("approx", uncertified, "parity:n=3", reproducer="parity:n=3")
    assert code == EXIT_CHECK_FAILED
    assert document["failure"]["reproducer"] == "parity:n=3"


def test_sweep_accepts_numbered_check_names(tmp_path):
    code, document = run_main(tmp_path, "sweep", "--family", "exhaustive-n", "--n", "3",
                              "--checks", "iso,kkl,infind,lemma12", "--output", str(tmp_path / "s.csv"))
    assert code == EXIT_OK
    assert document["summary"]["config"]["checks"] == ["iso", "kkl", "infind", "split-gain"]


@pytest.mark.slow
def test_exhaustive_four_bit_sweep_command(tmp_path):
    code, document = run_main(tmp_path, "sweep", "--family", "exhaustive-n", "--n", "4",
                              "--checks", "iso,kkl,infind,lemma12", "--output", str(tmp_path / "n4.csv"))
    assert code == EXIT_OK
    assert document["summary"]["functions"] == 65536
    assert document["summary"]["iso_equality_count"] == 80
