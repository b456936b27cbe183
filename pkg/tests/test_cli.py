import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from retrolind.cli import (
    EXIT_CONSISTENCY,
    EXIT_INTEGRATION,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_USAGE,
    main,
)

SCENARIOS_DIR = Path(__file__).resolve().parent.parent / "scenarios"
DEMO = str(SCENARIOS_DIR / "atom_demo.json")
HALF_LIFE_WINDOW = 2.0 * math.log(2.0)


class TestExitCodeValues:
    def test_documented_mapping(self):
        assert (EXIT_OK, EXIT_PARSE, EXIT_USAGE, EXIT_CONSISTENCY, EXIT_INTEGRATION) == (
            0, 1, 2, 3, 4,
        )


class TestValidate:
    def test_good_file(self, capsys):
        assert main(["validate", DEMO]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "OK"

    def test_invalid_priors_file(self, capsys):
        code = main(["validate", str(SCENARIOS_DIR / "invalid_priors.json")])
        assert code == EXIT_USAGE
        err = capsys.readouterr().err
        assert "scenario is invalid" in err
        assert "priors" in err

    def test_malformed_file(self, capsys):
        code = main(["validate", str(SCENARIOS_DIR / "malformed.json")])
        assert code == EXIT_PARSE
        assert "parse error" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["validate", "/no/such/file.json"]) == EXIT_PARSE


class TestRetrodict:
    def test_csv_output(self, capsys):
        assert main(["retrodict", DEMO, "--outcome", "+"]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "# outcome: +"
        assert out[1].startswith("# max_abs_difference:")
        assert out[2] == "label,p_retrodict,p_bayes"
        label, p_retro, p_bayes = out[3].split(",")
        assert label == "+"
        assert float(p_retro) == pytest.approx(0.75, abs=1e-6)
        assert float(p_bayes) == pytest.approx(0.75, abs=1e-6)

    def test_json_output(self, capsys):
        assert main(["retrodict", DEMO, "--outcome", "-", "--format", "json"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["outcome"] == "-"
        assert doc["labels"] == ["+", "-"]
        assert doc["posterior"][1] == pytest.approx(0.75, abs=1e-6)
        assert doc["max_abs_difference"] < 1e-6
        assert sum(doc["posterior"]) == pytest.approx(1.0, abs=1e-12)

    def test_unknown_outcome(self, capsys):
        assert main(["retrodict", DEMO, "--outcome", "sideways"]) == EXIT_USAGE
        assert "known labels" in capsys.readouterr().err


class TestPredict:
    def test_csv_output(self, capsys):
        assert main(["predict", DEMO, "--preparation", "+"]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "# preparation: +"
        assert out[1] == "label,probability"
        probs = {line.split(",")[0]: float(line.split(",")[1]) for line in out[2:]}
        assert probs["+"] == pytest.approx(0.75, abs=1e-6)
        assert probs["+"] + probs["-"] == pytest.approx(1.0, abs=1e-12)

    def test_unknown_preparation(self, capsys):
        assert main(["predict", DEMO, "--preparation", "zz"]) == EXIT_USAGE


class TestEvolve:
    def test_predictive_by_label(self, tmp_path, capsys):
        out_path = tmp_path / "fwd.csv"
        code = main(["evolve", DEMO, "--mode", "predictive", "--initial", "+",
                     "--out", str(out_path)])
        assert code == EXIT_OK
        assert "wrote" in capsys.readouterr().out
        lines = out_path.read_text().splitlines()
        assert lines[0] == "# time column: t - t_p (laboratory time since preparation)"
        assert len(lines) > 10
        assert float(lines[2].split(",")[0]) == 0.0

    def test_pom_backward_by_label(self, tmp_path):
        out_path = tmp_path / "back.csv"
        code = main(["evolve", DEMO, "--mode", "pom-backward", "--initial", "-",
                     "--out", str(out_path)])
        assert code == EXIT_OK
        first = out_path.read_text().splitlines()[0]
        assert first == "# time column: tau = t_m - t (premeasurement time)"

    def test_retrodictive_with_inline_matrix(self, tmp_path):
        identity = "[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]"
        out_path = tmp_path / "retro.csv"
        code = main(["evolve", DEMO, "--mode", "retrodictive", "--initial", identity,
                     "--out", str(out_path)])
        assert code == EXIT_OK
        last = out_path.read_text().splitlines()[-1].split(",")
        assert float(last[1]) == pytest.approx(0.5, abs=1e-8)

    def test_garbage_initial(self, tmp_path, capsys):
        code = main(["evolve", DEMO, "--mode", "predictive", "--initial", "nonsense",
                     "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_USAGE
        assert "neither a known label nor inline JSON" in capsys.readouterr().err


class TestSweep:
    def test_flat_across_collapse_times(self, capsys):
        code = main(["sweep", DEMO, "--preparation", "+", "--outcome", "+",
                     "--points", "5"])
        assert code == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[2] == "collapse_time,probability"
        assert len(out) == 3 + 5
        spread = float(out[1].split(":")[1])
        assert spread < 1e-6

    def test_too_few_points(self, capsys):
        code = main(["sweep", DEMO, "--preparation", "+", "--outcome", "+",
                     "--points", "1"])
        assert code == EXIT_USAGE
        assert "at least 2" in capsys.readouterr().err

    def test_unknown_labels(self, capsys):
        code = main(["sweep", DEMO, "--preparation", "q", "--outcome", "+",
                     "--points", "3"])
        assert code == EXIT_USAGE


class TestDemoAtom:
    def test_passes_against_closed_forms(self, capsys):
        code = main(["demo-atom", "--gamma", "1.0", "--duration", str(HALF_LIFE_WINDOW)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "PASS" in out
        assert "posterior P(+|+)" in out
        numeric = float(out.splitlines()[0].split("numerical ")[1].split(",")[0])
        assert numeric == pytest.approx(0.75, abs=1e-6)

    def test_zero_window(self, capsys):
        assert main(["demo-atom", "--gamma", "2.0", "--duration", "0.0"]) == EXIT_OK
        assert "PASS" in capsys.readouterr().out

    def test_rejects_nonpositive_gamma(self, capsys):
        assert main(["demo-atom", "--gamma", "0.0", "--duration", "1.0"]) == EXIT_USAGE
        assert "--gamma" in capsys.readouterr().err

    def test_rejects_negative_duration(self, capsys):
        assert main(["demo-atom", "--gamma", "1.0", "--duration", "-1.0"]) == EXIT_USAGE


class TestArgumentParsing:
    def test_no_command_is_a_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2

    def test_bad_mode_choice(self):
        with pytest.raises(SystemExit) as err:
            main(["evolve", DEMO, "--mode", "sideways", "--initial", "+", "--out", "x"])
        assert err.value.code == 2


class TestConsoleEntry:
    def test_module_invocation_round_trip(self):
        proc = subprocess.run(
            [sys.executable, "-m", "retrolind.cli", "validate", DEMO],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.strip() == "OK"
