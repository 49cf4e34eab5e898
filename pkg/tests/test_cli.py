import json
from pathlib import Path

import pytest
from click.testing import CliRunner

import families
from families import rule6_instance, stubborn_instance
from sfast.cli import (
    EXIT_INVALID,
    EXIT_NO_SOLUTION,
    EXIT_TRIVIAL_NO,
    EXIT_TRIVIAL_YES,
    main,
)
from sfast.graphs import Instance, Tournament
from sfast.instancefile import parse_instance, parse_solution


@pytest.fixture
def runner():
    return CliRunner()


def combined(result):
    return result.output + result.stderr


def triangle_instance(k=1):
    return Instance(Tournament.from_arcs(3, [(0, 1), (1, 2), (2, 0)]), frozenset({0}), k)


def transitive_instance(n, terminals, k):
    return Instance(Tournament(families.transitive(n)), frozenset(terminals), k)


class TestKernelizeCommand:
    def test_reduced_instance_exits_zero(self, runner, tmp_instance_file):
        path = tmp_instance_file(stubborn_instance())
        result = runner.invoke(main, ["kernelize", path])
        assert result.exit_code == 0
        assert result.output.startswith("reduced:")

    def test_trivial_yes(self, runner, tmp_instance_file):
        path = tmp_instance_file(transitive_instance(4, {0, 2}, 0))
        result = runner.invoke(main, ["kernelize", path])
        assert result.exit_code == EXIT_TRIVIAL_YES
        assert "trivial-yes" in result.output

    def test_trivial_no(self, runner, tmp_instance_file):
        path = tmp_instance_file(triangle_instance(k=0))
        result = runner.invoke(main, ["kernelize", path])
        assert result.exit_code == EXIT_TRIVIAL_NO
        assert "trivial-no" in result.output

    def test_kernel_file_round_trips(self, runner, tmp_instance_file, tmp_path):
        path = tmp_instance_file(stubborn_instance())
        out = tmp_path / "kernel.sfast"
        result = runner.invoke(main, ["kernelize", path, "-o", str(out)])
        assert result.exit_code == 0
        kernel = parse_instance(out.read_text())
        assert kernel.n == stubborn_instance().n
        assert kernel.k == 1

    def test_trace_file_records_the_applied_rules(self, runner, tmp_instance_file, tmp_path):
        path = tmp_instance_file(transitive_instance(6, {0, 3}, 1))
        trace_path = tmp_path / "trace.json"
        result = runner.invoke(main, ["kernelize", path, "--trace", str(trace_path)])
        assert result.exit_code == 0
        trace = [json.loads(line) for line in trace_path.read_text().splitlines()]
        assert [rec["rule"] for rec in trace] == ["rr2", "rr2"]
        assert all(rec["status"] == "applied" for rec in trace)
        assert all({"rule", "status", "note", "detail"} <= set(rec) for rec in trace)
        assert sorted(label for rec in trace for label in rec["detail"]["deleted"]) == [0, 3]

    def test_json_report(self, runner, tmp_instance_file):
        path = tmp_instance_file(stubborn_instance())
        result = runner.invoke(main, ["kernelize", path, "--json"])
        assert result.exit_code == 0
        blob = json.loads(result.output)
        assert blob["status"] == "reduced"
        assert blob["kernel"] == {"n": 5, "terminals": 1, "k": 1}


class TestSolveCommand:
    def test_solves_a_triangle(self, runner, tmp_instance_file, tmp_path):
        path = tmp_instance_file(triangle_instance())
        out = tmp_path / "solution.txt"
        result = runner.invoke(main, ["solve", path, "-o", str(out)])
        assert result.exit_code == 0
        assert "minimum solution: 1 arcs" in result.output
        assert any(line.startswith("r ") for line in result.output.splitlines())
        arcs = parse_solution(out.read_text())
        assert len(arcs) == 1

    def test_solution_file_passes_verify(self, runner, tmp_instance_file, tmp_path):
        path = tmp_instance_file(triangle_instance())
        out = tmp_path / "solution.txt"
        assert runner.invoke(main, ["solve", path, "-o", str(out)]).exit_code == 0
        result = runner.invoke(main, ["verify", path, str(out)])
        assert result.exit_code == 0
        assert "valid: 1 arcs within budget 1" in result.output

    def test_kernel_refutation_exits_twenty(self, runner, tmp_instance_file):
        path = tmp_instance_file(rule6_instance())
        result = runner.invoke(main, ["solve", path])
        assert result.exit_code == EXIT_TRIVIAL_NO
        assert "refuted during kernelization" in result.output

    def test_exhausted_trials_exit_thirty(self, runner, tmp_instance_file):
        path = tmp_instance_file(stubborn_instance())
        result = runner.invoke(main, ["solve", path])
        assert result.exit_code == EXIT_NO_SOLUTION
        assert "no solution found in 37 trials" in result.output

    def test_trials_option_caps_the_search(self, runner, tmp_instance_file):
        path = tmp_instance_file(stubborn_instance())
        result = runner.invoke(main, ["solve", path, "--trials", "3"])
        assert result.exit_code == EXIT_NO_SOLUTION
        assert "no solution found in 3 trials" in result.output

    def test_json_report(self, runner, tmp_instance_file):
        path = tmp_instance_file(triangle_instance())
        result = runner.invoke(main, ["solve", path, "--json"])
        assert result.exit_code == 0
        blob = json.loads(result.output)
        assert blob["size"] == 1
        assert blob["certified"] is True
        assert len(blob["arcs"]) == 1
        assert blob["seconds"] >= 0

    def test_json_on_refuted_instance(self, runner, tmp_instance_file):
        path = tmp_instance_file(triangle_instance(k=0))
        result = runner.invoke(main, ["solve", path, "--json"])
        assert result.exit_code == EXIT_TRIVIAL_NO
        blob = json.loads(result.output.splitlines()[0])
        assert blob["size"] is None
        assert blob["arcs"] is None


class TestVerifyCommand:
    def test_empty_solution_on_a_triangle_is_invalid(self, runner, tmp_instance_file, tmp_path):
        path = tmp_instance_file(triangle_instance())
        sol = tmp_path / "empty.txt"
        sol.write_text("")
        result = runner.invoke(main, ["verify", path, str(sol)])
        assert result.exit_code == EXIT_INVALID
        assert "invalid" in result.output

    def test_unknown_vertex_is_a_usage_error(self, runner, tmp_instance_file, tmp_path):
        path = tmp_instance_file(triangle_instance())
        sol = tmp_path / "bad.txt"
        sol.write_text("r 99 0\n")
        result = runner.invoke(main, ["verify", path, str(sol)])
        assert result.exit_code == 1
        assert "unknown vertex 99" in combined(result)

    def test_absent_arc_is_a_usage_error(self, runner, tmp_instance_file, tmp_path):
        path = tmp_instance_file(triangle_instance())
        sol = tmp_path / "bad.txt"
        sol.write_text("r 1 0\n")
        result = runner.invoke(main, ["verify", path, str(sol)])
        assert result.exit_code == 1

    def test_mode_flag_changes_the_verdict(self, runner, tmp_instance_file, tmp_path):
        path = tmp_instance_file(transitive_instance(3, {0, 1, 2}, 2))
        sol = tmp_path / "both.txt"
        sol.write_text("r 0 1\nr 1 2\n")
        reversal = runner.invoke(main, ["verify", path, str(sol)])
        assert reversal.exit_code == EXIT_INVALID
        deletion = runner.invoke(main, ["verify", path, str(sol), "--mode", "deletion"])
        assert deletion.exit_code == 0


class TestOracleCommand:
    def test_reports_the_optimum(self, runner, tmp_instance_file):
        path = tmp_instance_file(triangle_instance())
        result = runner.invoke(main, ["oracle", path])
        assert result.exit_code == 0
        assert result.output.strip() == "1"

    def test_budget_too_small_reports_none(self, runner, tmp_instance_file):
        path = tmp_instance_file(triangle_instance())
        result = runner.invoke(main, ["oracle", path, "--kmax", "0"])
        assert result.exit_code == 0
        assert result.output.strip() == "none within 0"

    def test_orderings_method_agrees(self, runner, tmp_instance_file):
        path = tmp_instance_file(stubborn_instance())
        result = runner.invoke(main, ["oracle", path, "--method", "orderings"])
        assert result.exit_code == 0
        assert result.output.strip() == "2"

    def test_orderings_refuses_large_instances(self, runner, tmp_instance_file):
        big = transitive_instance(11, {0}, 1)
        path = tmp_instance_file(big)
        result = runner.invoke(main, ["oracle", path, "--method", "orderings"])
        assert result.exit_code == 1


class TestGenCommand:
    def test_uniform_instance(self, runner, tmp_path):
        out = tmp_path / "random.sfast"
        result = runner.invoke(
            main, ["gen", "--n", "10", "--terminals", "4", "--seed", "3", "--k", "2", "-o", str(out)]
        )
        assert result.exit_code == 0
        assert f"wrote {out}" in result.output
        instance = parse_instance(out.read_text())
        assert instance.n == 10
        assert len(instance.terminals) == 4
        assert instance.k == 2

    def test_generation_is_deterministic(self, runner, tmp_path):
        args = ["gen", "--n", "8", "--terminals", "3", "--seed", "9", "--k", "1"]
        first, second = tmp_path / "a.sfast", tmp_path / "b.sfast"
        runner.invoke(main, args + ["-o", str(first)])
        runner.invoke(main, args + ["-o", str(second)])
        assert first.read_text() == second.read_text()

    def test_planted_sidecar_verifies(self, runner, tmp_path):
        out = tmp_path / "planted.sfast"
        result = runner.invoke(
            main,
            ["gen", "--n", "9", "--terminals", "4", "--seed", "5", "--planted", "2", "-o", str(out)],
        )
        assert result.exit_code == 0
        sidecar = Path(str(out) + ".planted")
        assert sidecar.exists()
        check = runner.invoke(main, ["verify", str(out), str(sidecar)])
        assert check.exit_code == 0

    def test_rejects_both_budget_flavors(self, runner, tmp_path):
        out = tmp_path / "x.sfast"
        result = runner.invoke(
            main,
            ["gen", "--n", "5", "--terminals", "2", "--k", "1", "--planted", "1", "-o", str(out)],
        )
        assert result.exit_code == 1
        assert "exactly one" in combined(result)

    def test_rejects_neither_budget_flavor(self, runner, tmp_path):
        out = tmp_path / "x.sfast"
        result = runner.invoke(main, ["gen", "--n", "5", "--terminals", "2", "-o", str(out)])
        assert result.exit_code == 1

    def test_rejects_impossible_terminal_count(self, runner, tmp_path):
        out = tmp_path / "x.sfast"
        result = runner.invoke(
            main, ["gen", "--n", "4", "--terminals", "9", "--k", "1", "-o", str(out)]
        )
        assert result.exit_code == 1


class TestBenchCommand:
    def test_table_and_csv(self, runner, tmp_instance_file, tmp_path):
        first = tmp_instance_file(triangle_instance(), "one.sfast")
        second = tmp_instance_file(stubborn_instance(), "two.sfast")
        csv_path = tmp_path / "bench.csv"
        result = runner.invoke(main, ["bench", first, second, "--csv", str(csv_path)])
        assert result.exit_code == 0
        header = result.output.splitlines()[0].split()
        assert header == ["instance", "n", "terminals", "k", "kernel_n", "trials", "seconds", "value"]
        lines = csv_path.read_text().splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("one.sfast,3,1,1,")
        assert lines[2].startswith("two.sfast,5,1,1,")
        assert lines[1].rstrip().endswith(",1")
        assert lines[2].endswith(",")


class TestErrorPaths:
    def test_malformed_instance_file(self, runner, tmp_path):
        path = tmp_path / "broken.sfast"
        path.write_text("p wrong 3\n")
        for command in (["kernelize"], ["solve"], ["oracle"]):
            result = runner.invoke(main, command + [str(path)])
            assert result.exit_code == 1
            assert "line 1" in combined(result)

    def test_missing_file_is_a_usage_error(self, runner):
        result = runner.invoke(main, ["kernelize", "nowhere.sfast"])
        assert result.exit_code == 2

    def test_version_flag(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "0.1.0" in result.output
