"""Tests for the command-line interface."""

import json

import numpy as np
import pytest

from iqvip.cli import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    RunSpec,
    load_problem,
    main,
    problem_from_dict,
    run,
    spec_from_args,
)
from iqvip.errors import ContractViolationError
from iqvip.trace_io import (
    read_iter_trace,
    read_summary,
    read_toll_trace,
    read_trajectory,
)

SCALED_IDENTITY = {
    "name": "scaled-identity",
    "matrix": [[2.0, 0.0], [0.0, 2.0]],
    "lipschitz": 2.0,
    "strong_monotonicity": 2.0,
    "mu": 1.0,
    "family": {"type": "whole_space"},
    "known_solution": [0.0, 0.0],
}

CORRIDOR_NETWORK = {
    "name": "corridor",
    "nodes": ["O", "D"],
    "links": [
        {"tail": "O", "head": "D", "t0": 10.0, "cap": 100.0},
        {"tail": "O", "head": "D", "t0": 12.0, "cap": 80.0},
    ],
    "od": [{"o": "O", "d": "D", "demand": 100.0}],
    "controlled": [{"link": 0, "lo": 40.0, "hi": 90.0}],
}


class TestRunSpec:
    """Test cases for RunSpec and argument parsing."""

    def test_seed_defaults_to_zero(self):
        """Test the default seed."""
        spec = RunSpec("certify", "example51")
        assert spec.get("seed") == 0

    def test_unknown_command_raises(self):
        """Test that only the four commands are accepted."""
        with pytest.raises(ContractViolationError, match="command"):
            RunSpec("optimize", "example51")

    def test_unknown_param_raises(self):
        """Test that unknown parameter keys are rejected."""
        with pytest.raises(ContractViolationError, match="unknown key"):
            RunSpec("certify", "example51", {"gamma": 1.0})

    def test_missing_required_param_raises(self):
        """Test that solve needs tau."""
        with pytest.raises(ContractViolationError, match="tau"):
            RunSpec("solve", "example51", {}, "out.csv")

    def test_missing_output_raises(self):
        """Test that non-certify commands need --out."""
        with pytest.raises(ContractViolationError, match="--out"):
            RunSpec("solve", "example51", {"tau": 0.1})

    def test_flags_and_params(self):
        """Test that flags and --params entries are merged."""
        spec = spec_from_args(
            [
                "--command", "simulate", "--problem", "damped",
                "--sigma", "2", "--tau", "1", "--horizon", "1",
                "--x0", "0.5,0.5", "--params", "v0=1,-2",
                "--params", "tail-fraction=0.25", "--out", "t.csv",
            ]
        )
        assert spec.params["x0"] == [0.5, 0.5]
        assert spec.params["v0"] == [1.0, -2.0]
        assert spec.params["tail_fraction"] == 0.25
        assert spec.output_path == "t.csv"

    @pytest.mark.parametrize(
        "x0_args, expected",
        [
            (["--x0", "-7,5"], [-7.0, 5.0]),
            (["--x0=-7,5"], [-7.0, 5.0]),
            (["--x0", "-.5,-2"], [-0.5, -2.0]),
            (["--x0", "7,-5"], [7.0, -5.0]),
        ],
    )
    def test_negative_start_vector(self, x0_args, expected):
        """Test that a start vector may begin with a minus sign."""
        spec = spec_from_args(
            ["--command", "solve", "--problem", "example51", "--tau", "0.1",
             *x0_args, "--out", "run.csv"]
        )
        assert spec.params["x0"] == expected
        assert spec.params["tau"] == 0.1

    def test_missing_start_vector_value_raises(self):
        """Test that --x0 followed by another flag is still a usage error."""
        with pytest.raises(ContractViolationError, match="x0"):
            spec_from_args(
                ["--command", "solve", "--problem", "example51",
                 "--x0", "--tau", "0.1", "--out", "run.csv"]
            )

    def test_bad_params_value_raises(self):
        """Test that an unparsable --params value is a usage error."""
        with pytest.raises(ContractViolationError, match="invalid value"):
            spec_from_args(
                ["--command", "certify", "--problem", "example51",
                 "--params", "seed=abc"]
            )

    def test_version_flag(self, capsys):
        """Test that --version prints the package version."""
        with pytest.raises(SystemExit) as info:
            spec_from_args(["--version"])
        assert info.value.code == 0
        assert "0.1.0" in capsys.readouterr().out


class TestProblemFiles:
    """Test cases for JSON problem documents."""

    def test_problem_from_dict(self):
        """Test building an affine problem."""
        problem = problem_from_dict(SCALED_IDENTITY)
        np.testing.assert_allclose(problem.natural_map([1.0, -2.0]),
                                   [1.0, -2.0])
        assert problem.certify().theta > 0

    def test_unknown_family_raises(self):
        """Test that the family type is validated."""
        data = dict(SCALED_IDENTITY, family={"type": "simplex"})
        with pytest.raises(ContractViolationError, match="simplex"):
            problem_from_dict(data)

    def test_missing_field_raises(self):
        """Test that a missing field is reported by name."""
        data = dict(SCALED_IDENTITY)
        del data["mu"]
        with pytest.raises(ContractViolationError, match="mu"):
            problem_from_dict(data)

    def test_box_family(self):
        """Test a constant box family."""
        data = dict(
            SCALED_IDENTITY,
            family={"type": "box", "lower": [-1, -1], "upper": [1, 1]},
        )
        data.pop("known_solution")
        assert problem_from_dict(data).family.rho == 0.0

    def test_load_problem_reports_json_position(self, tmp_path):
        """Test that JSON errors carry line and column."""
        path = tmp_path / "p.json"
        path.write_text('{"matrix": [1,\n]}', encoding="utf-8")
        with pytest.raises(ContractViolationError, match="line 2"):
            load_problem(str(path))

    def test_network_name_rejected_for_solve(self):
        """Test that a traffic built-in is not an IQVIP problem."""
        with pytest.raises(ContractViolationError, match="traffic"):
            load_problem("traffic-demo")


class TestRun:
    """Test cases for running commands end to end."""

    def test_certify_prints_constants(self, capsys):
        """Test certify on example51 with a step check."""
        code = main(
            ["--command", "certify", "--problem", "example51",
             "--sigma", "0.59", "--tau", "0.000146"]
        )
        assert code == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["constants"]["theta"] == pytest.approx(0.08)
        assert document["step"]["discrete_ok"] is True
        assert document["rho_estimate"] <= 1.0 + 1e-6

    def test_certify_writes_out(self, tmp_path, capsys):
        """Test that certify --out stores the printed document."""
        out = tmp_path / "cert.json"
        code = main(
            ["--command", "certify", "--problem", "example51",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8")) == json.loads(
            capsys.readouterr().out
        )

    def test_solve_writes_trace_and_summary(self, tmp_path):
        """Test solve on example51 to |x_n| <= 0.1."""
        out = tmp_path / "solve.csv"
        code = main(
            ["--command", "solve", "--problem", "example51",
             "--sigma", "0.59", "--tau", "0.000146", "--stop-error", "0.1",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        summary = read_summary(out)
        assert summary["stop_reason"] == "error"
        assert summary["q"] < 1
        trace = read_iter_trace(out)
        assert trace.stop_reason.value == "error"
        assert len(trace) == summary["steps_used"] + 1
        assert trace.error[-1] <= 0.1

    def test_solve_is_byte_identical(self, tmp_path):
        """Test that two identical runs write identical files."""
        outputs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            spec = RunSpec(
                "solve",
                "example51",
                {"sigma": 0.5, "tau": 1e-3, "max_iter": 200},
                str(out),
            )
            assert run(spec) == EXIT_OK
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_first_order_default_sigma(self, tmp_path):
        """Test that first_order runs without --sigma."""
        out = tmp_path / "fo.csv"
        code = main(
            ["--command", "solve", "--problem", "scalar-gain",
             "--variant", "first_order", "--tau", "0.5",
             "--stop-residual", "1e-8", "--out", str(out)]
        )
        assert code == EXIT_OK
        assert read_summary(out)["variant"] == "first_order"

    def test_simulate_damped(self, tmp_path):
        """Test simulate against the closed-form damped motion."""
        out = tmp_path / "sim.csv"
        code = main(
            ["--command", "simulate", "--problem", "damped",
             "--sigma", "2", "--tau", "1", "--horizon", "1", "--dt", "0.01",
             "--x0", "0.5,0.5", "--params", "v0=1,-2", "--out", str(out)]
        )
        assert code == EXIT_OK
        trace = read_trajectory(out)
        decay = 1.0 - np.exp(-2.0 * trace.times[-1])
        np.testing.assert_allclose(
            trace.positions[-1], [0.5 + decay / 2, 0.5 - decay], atol=1e-8
        )
        assert read_summary(out)["zeta"] is None

    def test_simulate_json_problem(self, tmp_path):
        """Test simulate on a problem file with a rate fit."""
        problem = tmp_path / "p.json"
        problem.write_text(json.dumps(SCALED_IDENTITY), encoding="utf-8")
        out = tmp_path / "sim.csv"
        code = main(
            ["--command", "simulate", "--problem", str(problem),
             "--sigma", "3", "--tau", "1", "--horizon", "5", "--dt", "0.01",
             "--x0", "1,1", "--out", str(out)]
        )
        assert code == EXIT_OK
        assert read_summary(out)["zeta"] > 0

    def test_traffic_on_network_file(self, tmp_path):
        """Test a short toll run on a network file."""
        network = tmp_path / "net.json"
        network.write_text(json.dumps(CORRIDOR_NETWORK), encoding="utf-8")
        out = tmp_path / "tolls.csv"
        code = main(
            ["--command", "traffic", "--problem", str(network),
             "--sigma", "0.6", "--tau", "0.05", "--mu", "0.5",
             "--max-iter", "20", "--out", str(out)]
        )
        assert code == EXIT_OK
        header = out.read_text(encoding="utf-8").splitlines()[0]
        assert header == "n,x0,flow0,residual"
        summary = read_summary(out)
        assert summary["final_residual"] < summary["initial_residual"]

    def test_divergence_exits_2_with_partial_trace(self, tmp_path):
        """Test exit code 2 and the flushed partial trace."""
        out = tmp_path / "div.csv"
        code = main(
            ["--command", "solve", "--problem", "scalar-gain",
             "--variant", "first_order", "--tau", "10", "--out", str(out)]
        )
        assert code == EXIT_NUMERICAL
        assert out.exists()
        summary = read_summary(out)
        assert summary["diverged"] is True
        assert summary["step"] == len(read_iter_trace(out))

    def test_traffic_divergence_writes_toll_trace(self, tmp_path):
        """Test that a diverged toll run is flushed with its flows."""
        network = tmp_path / "net.json"
        network.write_text(json.dumps(CORRIDOR_NETWORK), encoding="utf-8")
        out = tmp_path / "tolls.csv"
        code = main(
            ["--command", "traffic", "--problem", str(network),
             "--variant", "first_order", "--sigma", "1", "--tau", "1e20",
             "--mu", "0.5", "--out", str(out)]
        )
        assert code == EXIT_NUMERICAL
        header = out.read_text(encoding="utf-8").splitlines()[0]
        assert header == "n,x0,flow0,residual"
        partial = read_toll_trace(out)
        assert read_summary(out)["step"] == len(partial) == 1
        assert partial.flows[0, 0] > 90.0

    @pytest.mark.parametrize(
        "argv",
        [
            ["--command", "optimize", "--problem", "example51"],
            ["--command", "solve", "--problem", "example51", "--tau", "1"],
            ["--command", "certify", "--problem", "example51",
             "--params", "gamma=1"],
            ["--command", "certify", "--problem", "no-such-problem"],
            ["--command", "solve", "--problem", "example51",
             "--tau", "0.1", "--out", "x.csv"],
        ],
    )
    def test_usage_errors_exit_1(self, argv, tmp_path, monkeypatch):
        """Test exit code 1 for invalid invocations."""
        monkeypatch.chdir(tmp_path)
        assert main(argv) == EXIT_USAGE

    def test_invalid_log_level_exits_1(self, monkeypatch, capsys):
        """Test that a bad IQVIP_LOG value is a usage error."""
        monkeypatch.setenv("IQVIP_LOG", "chatty")
        code = main(["--command", "certify", "--problem", "example51"])
        assert code == EXIT_USAGE
        assert "IQVIP_LOG" in capsys.readouterr().err
