import io
import json
import subprocess
import sys

import pytest

from weakvalues.cli import run
from weakvalues.document import load_setup

from conftest import GOLDEN, GOLDEN_NAMES


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


def golden(name):
    return str(GOLDEN / f"{name}.json")


class TestCommands:
    def test_amplitudes(self):
        obj = call_json("amplitudes", "--setup", golden("threebox"))
        assert obj["schema"] == 1 and obj["command"] == "amplitudes"
        amps = [complex(*p["amplitude"]) for p in obj["paths"]]
        assert [round(a.real * 3, 12) for a in amps] == [1.0, 1.0, -1.0]
        assert obj["setup"]["seed"] == 1

    def test_amplitudes_csv(self):
        code, out, _ = call("amplitudes", "--setup", golden("generic_d2"), "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("index,amplitude_re") and len(lines) == 3

    def test_weakvalue_inline(self):
        obj = call_json("weakvalue", "--psi", "1,0;1,0", "--phi", "1,0;0,0", "--B", "0.5,-0.5")
        assert obj["weak_value"] == [0.5, 0.0]
        assert obj["strong_mean"] == 0.5

    def test_meanshift_methods(self):
        a = call_json("meanshift", "--setup", golden("generic_d2"))
        q = call_json("meanshift", "--setup", golden("generic_d2"), "--quad")
        assert a["method"] == "closed_form" and q["method"] == "quadrature"
        assert q["mean_shift"] == pytest.approx(a["mean_shift"], rel=1e-9)
        assert "diagnostics" in q

    def test_sweep(self):
        obj = call_json("sweep", "--setup", golden("aav"), "--widths", "10,100,1000,10000")
        assert [r["width"] for r in obj["rows"]] == [10.0, 100.0, 1000.0, 10000.0]
        assert obj["weak_limit"] == pytest.approx(100.0, abs=1e-10)

    def test_sweep_csv(self):
        code, out, _ = call("sweep", "--setup", golden("aav"), "--widths", "1,10", "--format", "csv")
        assert code == 0 and out.splitlines()[0] == "width,mean_shift,norm,strong_error,weak_error"

    def test_sample(self):
        obj = call_json("sample", "--setup", golden("generic_d2"), "-n", "2000", "--seed", "5")
        assert obj["n"] == 2000 and len(obj["readings"]) == 2000 and obj["seed"] == 5
        s = obj["summary"]
        assert abs(s["mean"] - obj["analytic_mean"]) < 5 * s["std_error"]

    def test_sample_classify(self):
        obj = call_json("sample", "--setup", golden("generic_d2"), "--width", "0.001", "-n", "1000",
                        "--classify", "--no-readings")
        assert "readings" not in obj
        assert sum(c["count"] for c in obj["summary"]["outcome_counts"]) == 1000

    def test_sample_csv(self):
        code, out, _ = call("sample", "--setup", golden("aav"), "-n", "5", "--format", "csv")
        assert code == 0 and len(out.splitlines()) == 6

    def test_solve_target(self):
        obj = call_json("solve", "--B", "0.5,-0.5", "--Z", "100", "--psi", "0.7071,0;0.7071,0")
        assert obj["weak_value"][0] == pytest.approx(100.0, abs=1e-9)
        assert obj["residual"] < 1e-9
        # <phi|psi> = sum(eta) / |eta / a| = 1 / (2 Z) here
        assert obj["overlap"] == pytest.approx(0.005, rel=1e-4)

    def test_solve_epsilon(self):
        obj = call_json("solve", "--B", "0.5,-0.5", "--epsilon", "0.01", "--psi", "1;1")
        assert obj["target"] == [99.5, 0.0]

    @pytest.mark.parametrize("name", ["threebox", "aav", "route"])
    def test_scenarios(self, name):
        obj = call_json("scenario", name)
        assert obj["report"]["passed"] is True


class TestErrors:
    @pytest.mark.parametrize(
        "argv, code, name",
        [
            (["weakvalue", "--psi", "1;1", "--phi", "1;-1", "--B", "1,0"], 3, "forbidden_transition"),
            (["meanshift", "--amplitudes", "0.5;-0.5", "--B", "1,1", "--width", "1"], 3, "forbidden_transition"),
            (["sample", "--setup", "GOLD:aav", "--width", "10", "--classify", "-n", "10"], 3, "regime_error"),
            (["meanshift", "--psi", "1;1"], 2, "validation_error"),
            (["meanshift", "--psi", "0;0", "--phi", "1;0"], 2, "validation_error"),
            (["weakvalue", "--psi", "1;1", "--phi", "1;0", "--B", "1,2,3"], 2, "validation_error"),
            (["sweep", "--setup", "GOLD:aav", "--widths", "10,1"], 2, "validation_error"),
            (["solve", "--B", "1,1", "--Z", "2", "--psi", "1;1"], 2, "validation_error"),
            (["solve", "--B", "1,0", "--psi", "1;1"], 2, "validation_error"),
            (["scenario", "route", "--format", "csv"], 2, "validation_error"),
            (["nonsense"], 2, "validation_error"),
            (["meanshift", "--setup", "/nonexistent.json"], 2, "validation_error"),
            (["meanshift", "--setup", "GOLD:aav", "--width", "-1"], 2, "validation_error"),
            (["meanshift", "--setup", "GOLD:aav", "--H", "1,0;0,1|0,0;0,0"], 2, "validation_error"),
        ],
    )
    def test_exit_codes(self, argv, code, name):
        argv = [golden(a[5:]) if a.startswith("GOLD:") else a for a in argv]
        got, out, err = call(*argv)
        assert got == code
        assert out == ""
        assert err.startswith(f"code:{name} ")

    def test_bad_setup_names_field(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps({"psi": [[1, 0], [1, 0]], "phi": [[1, 0]], "observable": [1, 0]}))
        code, _, err = call("weakvalue", "--setup", str(p))
        assert code == 2 and "field phi" in err


class TestDeterminism:
    def _bytes(self, *argv):
        res = subprocess.run([sys.executable, "-m", "weakvalues", *argv], capture_output=True, check=True)
        return res.stdout

    @pytest.mark.parametrize("name", GOLDEN_NAMES)
    def test_byte_identical_runs(self, name):
        argv = ("sample", "--setup", golden(name), "-n", "70000")
        a = self._bytes(*argv, "--workers", "1")
        b = self._bytes(*argv, "--workers", "4")
        assert a == b and len(a) > 0

    def test_scenario_byte_identical(self):
        assert self._bytes("scenario", "aav") == self._bytes("scenario", "aav")

    @pytest.mark.parametrize("name", GOLDEN_NAMES)
    def test_setup_round_trip(self, name, tmp_path):
        obj = call_json("meanshift", "--setup", golden(name))
        p = tmp_path / "echo.json"
        p.write_text(json.dumps(obj["setup"]))
        assert load_setup(p) == load_setup(golden(name))
        assert call_json("meanshift", "--setup", str(p)) == obj


@pytest.mark.parametrize("name", GOLDEN_NAMES)
def test_quadrature_agrees_on_golden(name):
    a = call_json("meanshift", "--setup", golden(name))["mean_shift"]
    q = call_json("meanshift", "--setup", golden(name), "--quad")["mean_shift"]
    assert abs(a - q) <= 1e-9 * max(1.0, abs(a))
