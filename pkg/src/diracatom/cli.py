"""
Batch command line front end.

    diracatom run CONFIG          one evolution -> PREFIX.csv + PREFIX.json
    diracatom sweep CONFIG        one run per sweep value + PREFIX_sweep.csv
    diracatom algebra-check       identity table for the operator algebra
    diracatom compare CONFIG      cross-model deviations -> PREFIX_compare.json

Exit codes: 0 success, 1 config error, 2 I/O error, 3 numerical abort,
4 unsupported comparison.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from diracatom.algebra import identity_checks
from diracatom.config import ConfigError, RunConfig, SweepConfig, parse_config
from diracatom.dynamics import (
    Direction,
    EvolutionProblem,
    NumericalAbort,
    evolve,
    transform_trajectory,
)
from diracatom.model import (
    CouplingKind,
    ModelKind,
    PhysicalParams,
    validate_weak_field,
)
from diracatom.observables import (
    FOUR_COMPONENT_COLUMNS,
    TWO_COMPONENT_COLUMNS,
    norm,
    observable_columns,
    oscillation_frequency,
    populations,
)

log = logging.getLogger("diracatom")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3
EXIT_UNSUPPORTED = 4

BASELINE_TOL = 1e-8
# absolute floor added to the interaction-picture bound to absorb round-off
ROUNDOFF_FLOOR = 1e-12


class UnsupportedComparison(ValueError):
    pass


# -- serialization -----------------------------------------------------------


def write_csv(path: Path, columns: dict[str, np.ndarray]) -> None:
    """17 significant digits in scientific notation, one row per sample."""
    table = np.column_stack(list(columns.values()))
    np.savetxt(path, table, fmt="%.16e", delimiter=",", header=",".join(columns), comments="")


def _dipole_coupling(config: RunConfig) -> CouplingKind:
    # a free atom still reports the α dipole
    if config.coupling is CouplingKind.NONE:
        return CouplingKind.ALPHA_E
    return config.coupling


def run_single(config: RunConfig, output_dir: Path) -> dict:
    """Evolve one config, write its CSV and JSON, and return the summary."""
    problem = config.to_problem()
    params = problem.params

    ratio = None
    if params.gamma is not None:
        ratio = validate_weak_field(params, problem.field, problem.t1 - problem.t0, t0=problem.t0)
        if ratio >= 1:
            log.warning("weak-field ratio %.3g >= 1: drive strong enough to split the levels", ratio)

    start = time.perf_counter()
    traj = evolve(problem)
    wall = time.perf_counter() - start

    columns = observable_columns(traj.times, traj.states, _dipole_coupling(config), params.mu)
    expected = FOUR_COMPONENT_COLUMNS if traj.dimension == 4 else TWO_COMPONENT_COLUMNS
    assert tuple(columns) == expected

    frequency, note = None, None
    try:
        frequency = oscillation_frequency(traj, config.frequency_signal)
    except ValueError as exc:
        note = str(exc)

    norms = norm(traj.states)
    summary = {
        "config": config.to_dict(),
        "weak_field_ratio": ratio,
        "weak_field_ok": None if ratio is None else bool(ratio < 1),
        "final_norm_drift": float(abs(norms[-1] - norms[0])),
        "oscillation_frequency": frequency,
        "oscillation_note": note,
        "n_steps": problem.n_steps,
        "wall_time_s": wall,
        "steps_per_second": problem.n_steps / wall if wall > 0 else None,
    }
    output_dir.mkdir(parents=True, exist_ok=True)
    prefix = output_dir / config.output_prefix
    write_csv(prefix.with_name(prefix.name + ".csv"), columns)
    prefix.with_name(prefix.name + ".json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def cmd_run(config: RunConfig, output_dir: Path, quiet: bool = False) -> int:
    try:
        summary = run_single(config, output_dir)
    except NumericalAbort as exc:
        log.error("numerical abort: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    if not quiet:
        freq = summary["oscillation_frequency"]
        print(
            f"{config.output_prefix}: {summary['n_steps']} steps, "
            f"norm drift {summary['final_norm_drift']:.2e}, "
            f"frequency {'-' if freq is None else f'{freq:.6g}'}"
        )
    return EXIT_OK


def _sweep_worker(args):
    config, output_dir = args
    try:
        return "ok", run_single(config, Path(output_dir))
    except Exception as exc:  # recorded per row, never fatal to the sweep
        return "failed", f"{type(exc).__name__}: {exc}"


def cmd_sweep(config: SweepConfig, output_dir: Path, jobs: int = 1, quiet: bool = False) -> int:
    runs = [(config.run_for(i), str(output_dir)) for i in range(len(config.values))]
    if jobs > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(runs))) as pool:
            results = list(pool.map(_sweep_worker, runs))
    else:
        results = [_sweep_worker(r) for r in runs]

    rows = []
    for index, (value, (status, payload)) in enumerate(zip(config.values, results)):
        if status == "ok":
            freq = payload["oscillation_frequency"]
            rows.append([
                index, repr(value),
                "" if freq is None else f"{freq:.16e}",
                f"{payload['final_norm_drift']:.16e}",
                "ok", payload["oscillation_note"] or "",
            ])
        else:
            rows.append([index, repr(value), "", "", "failed", payload])
        if not quiet:
            print(f"[{index}] {config.axis}={value}: {rows[-1][4]} {rows[-1][2] or rows[-1][5]}")

    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        path = output_dir / f"{config.base.output_prefix}_sweep.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["index", "value", "oscillation_frequency", "final_norm_drift", "status", "detail"])
            writer.writerows(rows)
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    return EXIT_OK if all(status == "ok" for status, _ in results) else EXIT_NUMERICAL


def cmd_algebra_check(quiet: bool = False) -> int:
    checks = identity_checks()
    if not quiet:
        width = max(len(c.name) for c in checks)
        print(f"{'identity':<{width}}  {'value':>10}  result")
        for c in checks:
            print(f"{c.name:<{width}}  {c.deviation:10.3e}  {'pass' if c.passed else 'FAIL'}")
    failed = [c for c in checks if not c.passed]
    if failed and not quiet:
        print(f"{len(failed)} of {len(checks)} identities failed")
    return EXIT_OK if not failed else 1


# -- model comparison --------------------------------------------------------


def _max_pop_deviation(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(populations(a) - populations(b))))


def _check_comparable(problem: EvolutionProblem) -> None:
    if problem.model_kind not in (ModelKind.FULL, ModelKind.TRANSFORMED_LITERAL):
        raise UnsupportedComparison("compare needs model_kind Full or TransformedLiteral")
    if problem.coupling is not CouplingKind.ALPHA_E:
        raise UnsupportedComparison("compare needs coupling AlphaE")
    if any(problem.params.momentum):
        raise UnsupportedComparison("compare needs zero momentum")
    amplitude = getattr(problem.field, "amplitude", (0.0, 0.0, 0.0))
    if amplitude[0] != 0.0 or amplitude[1] != 0.0:
        raise UnsupportedComparison("compare needs a z-polarized field")


def baseline_pair(problem: EvolutionProblem) -> tuple[EvolutionProblem, EvolutionProblem]:
    """The {1,3}-block four-component run and its two-level counterpart.

    The baseline uses ω_a = 2ω and the same field profile carried on the x
    axis, so its coupling is -μE(t)σ_x like the {1,3} block of α_z.
    """
    psi = np.array(problem.initial_state)
    block = np.array([psi[0], 0, psi[2], 0], dtype=complex)
    if norm(block) == 0:
        block = np.array([0, 0, 1, 0], dtype=complex)
    four = problem.replace(model_kind=ModelKind.TRANSFORMED_LITERAL, initial_state=block)

    field = problem.field
    if hasattr(field, "amplitude"):
        field = dataclasses.replace(field, amplitude=(field.amplitude[2], 0.0, 0.0))
    p = problem.params
    params2 = PhysicalParams(
        hbar=p.hbar, c=p.c, mass=p.mass, omega=p.omega, mu=p.mu,
        momentum=p.momentum, gamma=p.gamma, omega_a=2 * p.omega,
    )
    two = problem.replace(
        model_kind=ModelKind.BASELINE2,
        params=params2,
        field=field,
        initial_state=[block[0], block[2]],
        polarization_axis="x",
    )
    return four, two


def convergence_error(problem: EvolutionProblem) -> float:
    """Max state difference between step dt and dt/2 at the shared sample times."""
    coarse = evolve(problem)
    fine = evolve(problem.replace(dt=problem.dt / 2, sample_stride=2 * problem.sample_stride))
    idx = np.searchsorted(fine.times, coarse.times)
    idx = np.clip(idx, 0, len(fine.times) - 1)
    shared = np.isclose(fine.times[idx], coarse.times, rtol=0, atol=1e-9 * problem.dt)
    return float(np.max(np.abs(fine.states[idx[shared]] - coarse.states[shared])))


def compare_models(problem: EvolutionProblem) -> dict:
    _check_comparable(problem)
    params = problem.params

    four, two = baseline_pair(problem)
    t4, t2 = evolve(four), evolve(two)
    block = t4.states[:, [0, 2]]
    baseline_dev = _max_pop_deviation(block, t2.states)
    leakage = float(np.max(populations(t4.states)[:, [1, 3]]))

    literal = evolve(problem.replace(model_kind=ModelKind.TRANSFORMED_LITERAL))
    exact_problem = problem.replace(model_kind=ModelKind.TRANSFORMED_EXACT)
    exact = evolve(exact_problem)
    literal_dev = _max_pop_deviation(literal.states, exact.states)

    full = evolve(problem.replace(model_kind=ModelKind.FULL))
    moved = transform_trajectory(full, params, Direction.REMOVE_REST)
    conv = convergence_error(exact_problem)
    amp_dev = float(np.max(np.abs(moved.states - exact.states)))
    tolerance = 10 * conv + ROUNDOFF_FLOOR

    return {
        "config_model_kind": problem.model_kind.value,
        "baseline_equivalence": {
            "pair": "TransformedLiteral {1,3} block vs Baseline2 (omega_a = 2 omega)",
            "max_population_deviation": baseline_dev,
            "block_leakage": leakage,
            "tolerance": BASELINE_TOL,
            "ok": baseline_dev <= BASELINE_TOL,
        },
        "literal_vs_exact": {
            "pair": "TransformedLiteral vs TransformedExact",
            "max_population_deviation": literal_dev,
        },
        "interaction_picture": {
            "pair": "Full + remove_rest vs TransformedExact",
            "max_population_deviation": _max_pop_deviation(moved.states, exact.states),
            "max_amplitude_deviation": amp_dev,
            "convergence_error": conv,
            "tolerance": tolerance,
            "ok": amp_dev <= tolerance,
        },
    }


def cmd_compare(config: RunConfig, output_dir: Path, quiet: bool = False) -> int:
    try:
        report = compare_models(config.to_problem())
    except UnsupportedComparison as exc:
        log.error("unsupported comparison: %s", exc)
        return EXIT_UNSUPPORTED
    except NumericalAbort as exc:
        log.error("numerical abort: %s", exc)
        return EXIT_NUMERICAL
    report = {"config": config.to_dict(), **report}
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        path = output_dir / f"{config.output_prefix}_compare.json"
        path.write_text(json.dumps(report, indent=2) + "\n")
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    if not quiet:
        for key in ("baseline_equivalence", "literal_vs_exact", "interaction_picture"):
            entry = report[key]
            flag = "" if "ok" not in entry else ("  ok" if entry["ok"] else "  EXCEEDS TOLERANCE")
            print(f"{entry['pair']}: {entry['max_population_deviation']:.3e}{flag}")
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", type=Path, default=Path("."), help="where outputs go")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="parallel sweep runs")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(prog="diracatom", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "evolve one configuration"),
        ("sweep", "run a parameter sweep"),
        ("compare", "cross-check the model variants"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("config", type=Path)
    sub.add_parser("algebra-check", parents=[common], help="verify the operator identities")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    if args.command == "algebra-check":
        return cmd_algebra_check(args.quiet)

    try:
        text = args.config.read_text()
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    try:
        config = parse_config(text)
    except ConfigError as exc:
        log.error("%s: %s", args.config, exc)
        return EXIT_CONFIG

    if args.command == "sweep":
        if not isinstance(config, SweepConfig):
            log.error("%s: sweep needs a 'sweep' section", args.config)
            return EXIT_CONFIG
        return cmd_sweep(config, args.output_dir, max(1, args.jobs), args.quiet)
    if isinstance(config, SweepConfig):
        log.error("%s: '%s' takes a run document, not a sweep", args.config, args.command)
        return EXIT_CONFIG
    if args.command == "run":
        return cmd_run(config, args.output_dir, args.quiet)
    return cmd_compare(config, args.output_dir, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
