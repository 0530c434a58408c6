import math

import pytest

from pcalevy.cli import EXIT_DIVERGENT, EXIT_INVALID, EXIT_OK, run_command
from pcalevy.scenario_io import fmt, load_scenario, parse_csv, parse_scenario, render_csv

GOOD = """
[regime0]
mu = 0.2
sigma = 0.2
jump_intensity = 1
jump_rate = 10
[regime1]
mu = 0.1
sigma = 0.1
jump_intensity = 1
jump_rate = 10
[model]
q = 0.1
b = 1
a_target = 0.3   # post-infusion drawdown
run_rate = 1
penalty_coeff = 1
"""


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def scenario_file(tmp_path):
    def write(text):
        path = tmp_path / "s.scenario"
        path.write_text(text)
        return str(path)
    return write


class TestScenarioFiles:
    def test_bundled(self, base):
        scn = load_scenario("paper.scenario")
        assert scn.regime0 == base.regime0 and scn.regime1 == base.regime1
        assert (scn.q, scn.b, scn.a_target, scn.run_rate, scn.penalty_coeff) == (0.1, 1.0, 0.3, 1.0, 1.0)
        assert scn.bprime == scn.a_target

    def test_defaults_only_for_optimize(self):
        sf = parse_scenario(GOOD)
        assert (sf.window.lo, sf.window.hi, sf.window.steps) == (0.3, 1.0, 100)
        with pytest.raises(ValueError, match="run_rate"):
            parse_scenario(GOOD.replace("run_rate = 1\n", ""))

    def test_unknown_key_named(self):
        with pytest.raises(ValueError, match="gamma"):
            parse_scenario(GOOD + "gamma = 2\n")

    def test_unknown_section(self):
        with pytest.raises(ValueError, match="extras"):
            parse_scenario(GOOD + "[extras]\nz = 1\n")

    def test_invariant_named(self):
        with pytest.raises(ValueError, match="a < b"):
            parse_scenario(GOOD.replace("a_target = 0.3", "a_target = 1.5"))

    def test_bad_number_has_line(self):
        with pytest.raises(ValueError, match=r"<string>:13"):
            parse_scenario(GOOD.replace("q = 0.1", "q = abc"))

    def test_duplicate_key(self):
        with pytest.raises(ValueError, match="already exists"):
            parse_scenario(GOOD + "[model]\nq = 0.2\n")


class TestCsv:
    def test_format(self):
        assert fmt(None) == "inf" and fmt(math.inf) == "inf"
        assert fmt(1 / 3) == "0.333333333333"
        assert fmt(True) == "1" and fmt(7) == "7"

    def test_round_trip(self):
        text = render_csv(["a", "b"], [(0.1, None), (2.5, 3.0)])
        header, rows = parse_csv(text)
        assert header == ["a", "b"]
        assert rows == [[0.1, math.inf], [2.5, 3.0]]

    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            render_csv(["a", "b"], [(1.0,)])


class TestCommands:
    def test_critical(self, capsys):
        code, out, _ = run(capsys, "critical")
        assert code == EXIT_OK
        _, rows = parse_csv(out)
        assert rows[0][0] == pytest.approx(0.66716, abs=1e-5)

    def test_sweep(self, capsys):
        code, out, _ = run(capsys, "sweep", "--scenario", "paper.scenario", "--lo", "0.3", "--hi", "0.69",
                           "--steps", "100")
        assert code == EXIT_OK
        header, rows = parse_csv(out)
        assert header == ["bprime", "cost"] and len(rows) == 100
        assert rows[-1][1] == math.inf
        best = min(rows, key=lambda r: r[1])
        assert 0.5 < best[0] < 0.54

    def test_optimize(self, capsys):
        code, out, _ = run(capsys, "optimize")
        header, rows = parse_csv(out)
        assert code == EXIT_OK and header[:3] == ["bstar", "cost", "boundary"] and rows[0][2] == 0.0

    def test_statics(self, capsys):
        code, out, _ = run(capsys, "statics", "--param", "a_target", "--values", "0.1,0.6")
        _, rows = parse_csv(out)
        assert code == EXIT_OK and len(rows) == 2 and rows[1][2] == 0.6 and rows[1][4] == 1.0

    def test_cost_and_scale(self, capsys):
        code, out, _ = run(capsys, "cost", "--x", "-0.25", "--bprime", "0.3", "--series")
        header, rows = parse_csv(out)
        assert code == EXIT_OK and header[-1] == "total_cost" and rows[0][3] == "c2"
        code, out, _ = run(capsys, "scale", "--x", "0,0.5", "--regime", "1")
        _, rows = parse_csv(out)
        assert code == EXIT_OK and rows[0][2] == pytest.approx(200.0)

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "c.csv"
        code, out, _ = run(capsys, "critical", "--out", str(path))
        assert code == EXIT_OK and out == "" and path.read_text().startswith("critical_bprime\n")

    def test_mc_byte_identical(self, capsys):
        argv = ("mc", "--paths", "2000", "--seed", "5", "--bprime", "0.4", "--tilt", "1.5")
        code, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert code == EXIT_OK and first == second
        header, rows = parse_csv(first)
        assert header == ["quantity", "mean", "stderr", "n"] and rows[0][0] == "total"

    def test_mc_trigger(self, capsys):
        code, out, _ = run(capsys, "mc", "--what", "trigger", "--paths", "3000", "--bprime", "0.5")
        _, rows = parse_csv(out)
        assert code == EXIT_OK and [r[0] for r in rows] == ["creep", "jump", "overshoot", "decay"]


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ("cost", "--bprime", "0.7"),
        ("cost", "--bprime", "0.5401", "--series"),
        ("optimize", "--lo", "0.68", "--hi", "0.9"),
    ])
    def test_divergent(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == EXIT_DIVERGENT and out == "" and err

    @pytest.mark.parametrize("argv", [
        ("nosuch",),
        ("sweep", "--steps", "x"),
        ("cost", "--x", "0.5", "--s", "0.0"),
        ("sweep", "--lo", "0.5", "--hi", "0.4"),
        ("statics", "--param", "rho"),
        ("critical", "--scenario", "missing.scenario"),
        ("mc", "--paths", "0"),
    ])
    def test_invalid(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == EXIT_INVALID and err

    @pytest.mark.parametrize("edit", [
        lambda t: t + "gamma = 2\n",
        lambda t: t.replace("a_target = 0.3", "a_target = 1.5"),
        lambda t: t.replace("sigma = 0.1", "sigma = 0"),
        lambda t: t.replace("[model]", "[modle]"),
        lambda t: "not an ini file",
    ])
    def test_malformed_scenarios(self, capsys, scenario_file, edit):
        code, _, err = run(capsys, "critical", "--scenario", scenario_file(edit(GOOD)))
        assert code == EXIT_INVALID and err
