"""Command line front end.

Verdict-style exit codes leave 0 for "work produced", 1 for usage and format
errors, and distinct codes for the interesting outcomes so scripts can
branch without scraping output: kernelize exits 10/20 on trivial yes/no,
solve exits 20 when the kernelization already refutes the instance and 30
when the trial budget finds nothing, verify exits 40 on an invalid solution.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path
from typing import Optional

import click

from .graphs import Instance, InvalidArcError, verify_solution
from .instancefile import (
    InstanceFormatError,
    parse_instance,
    parse_solution,
    serialize_instance,
    serialize_solution,
)
from .kernel import kernelize
from .oracle import (
    GeneratorSpec,
    OracleScaleError,
    generate_planted,
    generate_random,
    oracle_min_deletion,
    oracle_min_reversal_orderings,
)
from .solver import SolverConfig, solve_report

EXIT_TRIVIAL_YES = 10
EXIT_TRIVIAL_NO = 20
EXIT_NO_SOLUTION = 30
EXIT_INVALID = 40


def _load_instance(path: str) -> Instance:
    try:
        return parse_instance(Path(path).read_text())
    except (InstanceFormatError, ValueError) as exc:
        raise click.ClickException(f"{path}: {exc}") from exc


@click.group()
@click.version_option(package_name="sfast")
def main() -> None:
    """Subset feedback arc set in tournaments: kernelize, solve, check."""


@main.command("kernelize")
@click.argument("input_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Write the kernel here.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), help="Write the rule trace here.")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON report instead of prose.")
@click.pass_context
def kernelize_cmd(ctx, input_file: str, output: Optional[str], trace_path: Optional[str], as_json: bool) -> None:
    """Reduce INPUT_FILE; exit 0 reduced, 10 trivial yes, 20 trivial no."""
    instance = _load_instance(input_file)
    result = kernelize(instance)
    trace = [
        {"rule": rec.rule, "status": rec.status, "note": rec.note, "detail": rec.detail}
        for rec in result.trace
    ]
    if trace_path:
        Path(trace_path).write_text("".join(json.dumps(rec) + "\n" for rec in trace))
    if result.kernel is not None and output:
        Path(output).write_text(serialize_instance(result.kernel))
    if as_json:
        blob = {"status": result.status, "applied": len([r for r in trace if r["status"] == "applied"])}
        if result.kernel is not None:
            blob["kernel"] = {
                "n": result.kernel.n,
                "terminals": len(result.kernel.terminals),
                "k": result.kernel.k,
            }
        click.echo(json.dumps(blob))
    elif result.kernel is not None:
        click.echo(
            f"reduced: {instance.n} vertices to {result.kernel.n}, "
            f"budget {instance.k} to {result.kernel.k}, {len(trace)} rule applications"
        )
    else:
        click.echo(f"{result.status} ({result.trace[-1].note})")
    if result.status == "trivial-yes":
        ctx.exit(EXIT_TRIVIAL_YES)
    if result.status == "trivial-no":
        ctx.exit(EXIT_TRIVIAL_NO)


@main.command("solve")
@click.argument("input_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Write the solution here.")
@click.option("--seed", default=0, show_default=True, help="Base seed for the coloring trials.")
@click.option("--trials", type=int, default=None, help="Trial budget (default scales with k).")
@click.option("--workers", default=1, show_default=True, help="Parallel trial processes.")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON report instead of prose.")
@click.pass_context
def solve_cmd(ctx, input_file: str, output: Optional[str], seed: int, trials: Optional[int], workers: int, as_json: bool) -> None:
    """Solve INPUT_FILE; exit 0 solved, 20 trivial no, 30 nothing found."""
    instance = _load_instance(input_file)
    config = SolverConfig(seed=seed, max_trials=trials, parallel_trials=workers)
    report = solve_report(instance, config)
    if report.solution is not None and output:
        Path(output).write_text(serialize_solution(report.solution))
    if as_json:
        blob = {
            "size": report.size,
            "arcs": sorted(map(list, report.solution)) if report.solution is not None else None,
            "trials": report.trials,
            "certified": report.certified,
            "seconds": round(report.seconds, 6),
        }
        click.echo(json.dumps(blob))
    elif report.solution is not None:
        tag = "minimum" if report.certified else "best found"
        click.echo(f"{tag} solution: {report.size} arcs after {report.trials} trials")
        for u, v in sorted(report.solution):
            click.echo(f"r {u} {v}")
    if report.solution is None:
        if report.kernel.status == "trivial-no":
            click.echo("no solution: refuted during kernelization")
            ctx.exit(EXIT_TRIVIAL_NO)
        click.echo(f"no solution found in {report.trials} trials")
        ctx.exit(EXIT_NO_SOLUTION)


@main.command()
@click.argument("input_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("solution_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["reversal", "deletion"]), default="reversal", show_default=True)
@click.pass_context
def verify(ctx, input_file: str, solution_file: str, mode: str) -> None:
    """Check a solution file; exit 0 valid, 40 invalid."""
    instance = _load_instance(input_file)
    try:
        arcs = parse_solution(Path(solution_file).read_text())
    except InstanceFormatError as exc:
        raise click.ClickException(f"{solution_file}: {exc}") from exc
    index = instance.tournament.index_of()
    try:
        internal = [(index[u], index[v]) for u, v in arcs]
    except KeyError as exc:
        raise click.ClickException(f"unknown vertex {exc.args[0]}") from exc
    try:
        ok = verify_solution(instance, internal, mode=mode)
    except InvalidArcError as exc:
        raise click.ClickException(str(exc)) from exc
    if ok:
        click.echo(f"valid: {len(arcs)} arcs within budget {instance.k}")
    else:
        click.echo("invalid")
        ctx.exit(EXIT_INVALID)


@main.command()
@click.argument("input_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["deletion", "orderings"]), default="deletion", show_default=True)
@click.option("--kmax", "k_max", type=int, default=None, help="Search cap for the deletion method (default: the instance budget).")
def oracle(input_file: str, method: str, k_max: Optional[int]) -> None:
    """Brute-force optimum of a small instance."""
    instance = _load_instance(input_file)
    try:
        if method == "orderings":
            value = oracle_min_reversal_orderings(instance.tournament, instance.terminals)
        else:
            cap = instance.k if k_max is None else k_max
            value = oracle_min_deletion(instance.tournament, instance.terminals, cap)
    except OracleScaleError as exc:
        raise click.ClickException(str(exc)) from exc
    if value is None:
        click.echo(f"none within {instance.k if k_max is None else k_max}")
    else:
        click.echo(str(value))


@main.command()
@click.option("--n", required=True, type=int, help="Vertex count.")
@click.option("--terminals", "s_count", required=True, type=int, help="Terminal count.")
@click.option("--seed", default=0, show_default=True)
@click.option("--k", type=int, default=None, help="Budget for a uniform instance.")
@click.option("--planted", type=int, default=None, help="Plant a solution of this size instead.")
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
def gen(n: int, s_count: int, seed: int, k: Optional[int], planted: Optional[int], output: str) -> None:
    """Generate an instance file (and a .planted sidecar when planting)."""
    if (k is None) == (planted is None):
        raise click.ClickException("give exactly one of --k and --planted")
    try:
        if planted is not None:
            spec = GeneratorSpec(n=n, s_count=s_count, seed=seed, planted_k=planted)
            instance, arcs = generate_planted(spec)
            Path(output + ".planted").write_text(serialize_solution(arcs))
        else:
            spec = GeneratorSpec(n=n, s_count=s_count, seed=seed, k=k)
            instance = generate_random(spec)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    Path(output).write_text(serialize_instance(instance))
    click.echo(f"wrote {output}")


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=0, show_default=True)
@click.option("--trials", type=int, default=None)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Also write the table as CSV.")
def bench(inputs: tuple[str, ...], seed: int, trials: Optional[int], csv_path: Optional[str]) -> None:
    """Kernelize and solve each input, tabulating sizes and timings."""
    rows = []
    for path in inputs:
        instance = _load_instance(path)
        report = solve_report(instance, SolverConfig(seed=seed, max_trials=trials))
        kernel_n = report.kernel.kernel.n if report.kernel.kernel is not None else 0
        rows.append(
            {
                "instance": Path(path).name,
                "n": instance.n,
                "terminals": len(instance.terminals),
                "k": instance.k,
                "kernel_n": kernel_n,
                "trials": report.trials,
                "seconds": round(report.seconds, 4),
                "value": report.size if report.size is not None else "",
            }
        )
    header = list(rows[0].keys())
    widths = [max(len(str(r[h])) for r in rows + [dict(zip(header, header))]) for h in header]
    click.echo("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        click.echo("  ".join(str(row[h]).ljust(w) for h, w in zip(header, widths)))
    if csv_path:
        with open(csv_path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=header)
            writer.writeheader()
            writer.writerows(rows)


if __name__ == "__main__":
    sys.exit(main())
