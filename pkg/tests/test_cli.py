import json
import os
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from baumlv import __version__
from baumlv.cli import EXIT_ERROR, EXIT_OK, EXIT_UNDECIDABLE, EXIT_UNKNOWN, EXIT_VIOLATED, main
from baumlv.model import parse_model

from conftest import CORPUS

SHOP = str(CORPUS / "shop.bauml")
SHOP_MIN = str(CORPUS / "shop_min.bauml")
ZERO_LOOP = str(CORPUS / "zero-loop.cm2")
INC_DEC = str(CORPUS / "inc-dec.cm2")


@pytest.fixture(scope="module")
def schema():
    text = resources.files("baumlv").joinpath("schemas/report.schema.json").read_text()
    return json.loads(text)


@pytest.fixture(autouse=True)
def no_color(monkeypatch):
    monkeypatch.setenv("BAUMLV_COLOR", "0")


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, schema, *argv):
    code, out, _ = run_cli(capsys, *argv, "--json")
    data = json.loads(out)
    jsonschema.validate(data, schema)
    return code, data


@pytest.fixture(scope="module")
def table2_zero_loop(tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "zero-loop-t2.bauml"
    assert main(["encode-2cm", ZERO_LOOP, "--table", "2", "-o", str(path)]) == EXIT_OK
    return str(path)


class TestExitCodes:
    def test_analyze_ok(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", SHOP)
        assert code == EXIT_OK
        assert "DECIDABLE_THM3" in out and "N=3" in out

    def test_verify_holds(self, capsys):
        code, out, _ = run_cli(capsys, "verify", SHOP_MIN, "--termination", "--mode", "thm3", "--budget", "40")
        assert code == EXIT_OK and "HOLDS" in out

    def test_verify_violated(self, capsys, table2_zero_loop):
        code, out, _ = run_cli(capsys, "verify", table2_zero_loop, "--termination", "--mode", "thm6", "--instances", "1",
                               "--budget", "4")
        assert code == EXIT_VIOLATED
        assert "VIOLATED" in out and "loop:" in out

    def test_verify_unknown(self, capsys):
        code, out, _ = run_cli(capsys, "verify", SHOP, "--termination", "--budget", "10", "--max-states", "5")
        assert code == EXIT_UNKNOWN and "UNKNOWN" in out

    def test_verify_refuses_undecidable(self, capsys, table2_zero_loop):
        code, out, _ = run_cli(capsys, "verify", table2_zero_loop, "--termination")
        assert code == EXIT_UNDECIDABLE
        assert "--mode thm6" in out

    @pytest.mark.parametrize("argv", [
        ["bogus"], [], ["analyze"], ["verify", SHOP, "--budget", "0"], ["run-2cm"],
        ["run-2cm", INC_DEC, "--input", "a,b"], ["run-2cm", INC_DEC, "--random", "3"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, err = run_cli(capsys, *argv)
        assert code == EXIT_ERROR and "error" in err

    def test_verify_needs_a_property(self, capsys):
        code, _, err = run_cli(capsys, "verify", SHOP)
        assert code == EXIT_ERROR and "--termination" in err

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "analyze", "/nonexistent.bauml")
        assert code == EXIT_ERROR and "cannot read" in err

    def test_invalid_model(self, capsys, tmp_path):
        bad = tmp_path / "bad.bauml"
        bad.write_text((CORPUS.parent.parent.parent / "tests" / "fixtures" / "invalid" /
                        "terminal-count.bauml").read_text())
        code, _, err = run_cli(capsys, "analyze", str(bad))
        assert code == EXIT_ERROR and "[terminal-count]" in err

    def test_syntax_error_location(self, capsys, tmp_path):
        bad = tmp_path / "bad.bauml"
        bad.write_text("artifact Order\nstate X Order\n")
        code, _, err = run_cli(capsys, "analyze", str(bad))
        assert code == EXIT_ERROR and f"{bad}:2:" in err


class TestJson:
    def test_analyze(self, capsys, schema):
        code, data = run_json(capsys, schema, "analyze", SHOP)
        assert code == EXIT_OK and data["verdict"] == "DECIDABLE_THM3"
        assert data["bounds"]["system"] == 456

    def test_analyze_instance_bound(self, capsys, schema, tmp_path):
        path = tmp_path / "t4.bauml"
        main(["encode-2cm", INC_DEC, "--encoder", "shared", "-o", str(path)])
        capsys.readouterr()
        _, data = run_json(capsys, schema, "analyze", str(path), "--instances", "2")
        assert data["verdict"] == "DECIDABLE_THM6_IF_INSTANCE_BOUNDED"

    def test_verify(self, capsys, schema):
        code, data = run_json(capsys, schema, "verify", SHOP, "--termination", "--budget", "10")
        assert code == EXIT_OK and data["outcome"] == "holds" and data["states"] == 169
        assert data["navigationally_compatible"] is True

    def test_verify_counterexample(self, capsys, schema, table2_zero_loop):
        code, data = run_json(capsys, schema, "verify", table2_zero_loop, "--termination", "--mode", "thm6",
                              "--instances", "1", "--budget", "4")
        assert code == EXIT_VIOLATED and data["counterexample"]["loop"]

    def test_verify_undecidable(self, capsys, schema, table2_zero_loop):
        code, data = run_json(capsys, schema, "verify", table2_zero_loop, "--termination")
        assert code == EXIT_UNDECIDABLE and data["outcome"] == "undecidable"

    def test_verify_unknown(self, capsys, schema):
        code, data = run_json(capsys, schema, "verify", SHOP, "--termination", "--budget", "1")
        assert code == EXIT_UNKNOWN and data["resource"] == "fresh"

    def test_ground(self, capsys, schema, tmp_path):
        dump = tmp_path / "ts.json"
        code, data = run_json(capsys, schema, "ground", SHOP, "--budget", "10", "--dump", str(dump))
        assert code == EXIT_OK and (data["states"], data["edges"], data["deadlocks"]) == (169, 321, 9)
        assert len(json.loads(dump.read_text())["states"]) == 169

    def test_run(self, capsys, schema):
        code, data = run_json(capsys, schema, "run-2cm", INC_DEC, "--input", "2,0", "--trace")
        assert code == EXIT_OK and data["result"] == "HALTED"
        assert data["trace"][0] == [1, [2, 0]]

    def test_encode(self, capsys, schema):
        code, data = run_json(capsys, schema, "encode-2cm", "--random", "5", "--seed", "3", "--table", "3")
        assert code == EXIT_OK and data["table"] == 3
        parse_model(data["model"])


class TestProperty:
    def test_property_file(self, capsys, tmp_path):
        prop = tmp_path / "p.mulp"
        prop.write_text(r"mu Y. (exists x: SentOrder. true) \/ <> Y")
        code, out, _ = run_cli(capsys, "verify", SHOP, "--budget", "10", "--property", str(prop))
        assert code == EXIT_OK and "HOLDS" in out

    def test_violated_property_without_lasso(self, capsys, tmp_path):
        prop = tmp_path / "p.mulp"
        prop.write_text("exists x: SentOrder. true")
        code, out, _ = run_cli(capsys, "verify", SHOP, "--budget", "10", "--property", str(prop))
        assert code == EXIT_VIOLATED and "no lasso" in out


class TestMachines:
    def test_run_step_limit(self, capsys):
        code, out, _ = run_cli(capsys, "run-2cm", ZERO_LOOP, "--step-limit", "7")
        assert code == EXIT_OK and out.startswith("RUNNING after 7 steps")

    def test_encode_to_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "encode-2cm", INC_DEC, "--input", "1,1")
        assert code == EXIT_OK and out.startswith("bauml 1")


class TestEntryPoints:
    def test_module(self):
        env = dict(os.environ, BAUMLV_COLOR="0")
        proc = subprocess.run([sys.executable, "-m", "baumlv", "--version"], capture_output=True, text=True,
                              env=env)
        assert proc.returncode == 0 and __version__ in proc.stdout

    def test_module_exit_code(self):
        proc = subprocess.run([sys.executable, "-m", "baumlv", "analyze", SHOP_MIN], capture_output=True,
                              text=True)
        assert proc.returncode == EXIT_OK and "DECIDABLE_THM3" in proc.stdout
