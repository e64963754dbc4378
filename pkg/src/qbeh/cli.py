"""Command-line interface.

Exit codes: 0 success, 1 validation/usage/format error, 2 numerical failure.
Whenever ``--report`` is given, the report is written even on failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import run_benchmark
from .errors import (
    BlowUpError,
    CapacityError,
    DimensionError,
    DivergenceError,
    FormatError,
    NumericalError,
    PreconditionError,
    StabilityError,
    SymmetryError,
    ValidationError,
)
from .gramian import gramian_series, kron_residual, qbeh_residual
from .linalg import min_symmetric_eigenvalue, read_matrix_market, spectral_radius, write_matrix_market
from .report import Report
from .simulate import InputSignal, loglog_slope, simulate_original_circuit, simulate_qbsh, volterra_scaling_check
from .solver import (
    FRECHET_AUTO_MAX_N,
    SolveOptions,
    StartMode,
    frechet_operator_matrix,
    fixed_point_solve,
)
from .systems import CircuitParams, build_h_from_fg, build_transmission_line, load_system, save_system

# checked first: several numerical errors also subclass ValueError
NUMERICAL_ERRORS = (
    StabilityError, PreconditionError, NumericalError, DivergenceError, BlowUpError,
    CapacityError, ArithmeticError, np.linalg.LinAlgError,
)
USAGE_ERRORS = (ValidationError, DimensionError, FormatError, SymmetryError, ValueError, OSError)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _norm_rel(r, sys):
    return float(np.linalg.norm(r) / (1.0 + np.linalg.norm(sys.d_mat)))


def cmd_build(args, report):
    params = CircuitParams(args.nodes, args.diode_coeff)
    with report.timed("build"):
        system = build_transmission_line(params)
        save_system(system, args.out)
    report.results.update(n_state=system.n_state, directory=str(args.out))
    return 0


def cmd_solve(args, report):
    system = load_system(args.system)
    opts = dict(tolerance=args.tol, max_iterations=args.max_iter)
    if args.x0 or args.z:
        if not (args.x0 and args.z):
            raise ValidationError("--x0 and --z must be given together")
        opts.update(
            start_mode=StartMode.SUPPLIED_START,
            x0=read_matrix_market(args.x0),
            z_matrix=read_matrix_market(args.z),
            check_theorem_preconditions=True,
        )
    with report.timed("solve"):
        res = fixed_point_solve(system, SolveOptions(**opts))
    if args.solution_out:
        write_matrix_market(args.solution_out, res.solution)
    report.results.update(
        converged=res.converged,
        iterations=res.iterations,
        final_residual=res.residual_history[-1] if res.residual_history else None,
        residual_history=res.residual_history,
        rate_estimate=res.rate_estimate,
        frechet_rho=res.frechet_rho,
        min_eigenvalue=min_symmetric_eigenvalue(res.solution),
        monotone_decreasing_psd=res.monotone_decreasing_psd,
        monotone_increasing_psd=res.monotone_increasing_psd,
        above_z_psd=res.above_z_psd,
        preconditions=res.preconditions,
        solution=res.solution,
    )
    if not res.converged:
        report.errors.append({"type": "NotConverged", "message": f"no convergence in {res.iterations} iterations"})
        return 2
    return 0


def cmd_series(args, report):
    system = load_system(args.system)
    with report.timed("series"):
        ser = gramian_series(system, args.order)
    if args.solution_out:
        write_matrix_market(args.solution_out, ser.gramian)
    report.results.update(
        truncation_order=ser.truncation_order,
        stop_reason=ser.stop_reason,
        diverging=ser.diverging,
        term_norms=ser.term_norms,
        residual_norms=ser.residual_norms,
        gramian=ser.gramian,
    )
    return 0


def cmd_verify(args, report):
    system = load_system(args.system)
    x = read_matrix_market(args.solution)
    with report.timed("verify"):
        r_had = qbeh_residual(x, system)
        h = build_h_from_fg(system.f_mat, system.g_mat)
        r_kr = kron_residual(x, system, h)
        diff = np.abs(r_had - r_kr)
        scale = 1.0 + np.max(np.abs(r_had))
        rho = None
        if system.n_state <= FRECHET_AUTO_MAX_N:
            rho = spectral_radius(frechet_operator_matrix(system, x))
    report.results.update(
        qbeh_residual=_norm_rel(r_had, system),
        kron_residual=_norm_rel(r_kr, system),
        bridge_max_abs_diff=float(np.max(diff)),
        bridge_max_rel_diff=float(np.max(diff) / scale),
        frechet_rho=rho,
        min_eigenvalue=min_symmetric_eigenvalue(x),
    )
    return 0


def cmd_simulate(args, report):
    u = InputSignal.parse(args.input)
    with report.timed("simulate"):
        if args.model == "original":
            if args.nodes is None:
                raise ValidationError("--model original needs --nodes and --diode-coeff")
            traj = simulate_original_circuit(CircuitParams(args.nodes, args.diode_coeff), u, args.t_end, args.step)
        else:
            if args.system:
                system = load_system(args.system)
            elif args.nodes is not None:
                system = build_transmission_line(CircuitParams(args.nodes, args.diode_coeff))
            else:
                raise ValidationError("give --system DIR or --nodes/--diode-coeff")
            traj = simulate_qbsh(system, u, args.t_end, args.step)
        traj.to_csv(args.out)
    report.results.update(points=len(traj.times), final_state=traj.final_state(), csv=str(args.out))
    return 0


def cmd_scaling(args, report):
    system = load_system(args.system)
    with report.timed("scaling"):
        pairs = volterra_scaling_check(system, args.amplitudes, args.t_end, args.step)
    eps, dev = zip(*pairs)
    slope = loglog_slope(eps, dev) if len(pairs) >= 2 and min(dev) > 0 else None
    report.results.update(pairs=pairs, loglog_slope=slope)
    return 0


def cmd_bench(args, report):
    with report.timed("bench"):
        res = run_benchmark(args.sizes, repeats=args.repeats)
    if args.table:
        res.write_csv(args.table)
    report.results.update(
        rows=[vars(r) for r in res.rows],
        skipped_sizes=res.skipped,
        max_feasible_n=res.max_feasible_n,
        hadamard_slope=res.hadamard_slope,
        kronecker_slope=res.kronecker_slope,
        thresholds_met=res.passed,
        justification=res.justification,
    )
    return 0


def make_parser():
    p = argparse.ArgumentParser(prog="qbeh", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build", help="build the diode transmission-line system")
    s.add_argument("--nodes", type=int, required=True)
    s.add_argument("--diode-coeff", type=float, required=True)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--report", type=Path)
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("solve", help="fixed-point solve of the Gramian equation")
    s.add_argument("--system", type=Path, required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int, default=10000)
    s.add_argument("--x0", type=Path)
    s.add_argument("--z", type=Path)
    s.add_argument("--solution-out", type=Path)
    s.add_argument("--report", type=Path)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("series", help="Volterra/Lyapunov cascade")
    s.add_argument("--system", type=Path, required=True)
    s.add_argument("--order", type=int, default=40)
    s.add_argument("--solution-out", type=Path)
    s.add_argument("--report", type=Path)
    s.set_defaults(func=cmd_series)

    s = sub.add_parser("verify", help="residuals and rate check of a candidate solution")
    s.add_argument("--system", type=Path, required=True)
    s.add_argument("--solution", type=Path, required=True)
    s.add_argument("--report", type=Path)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="RK4 trajectory to CSV")
    s.add_argument("--system", type=Path)
    s.add_argument("--nodes", type=int)
    s.add_argument("--diode-coeff", type=float, default=1.0)
    s.add_argument("--model", choices=("lifted", "original"), default="lifted")
    s.add_argument("--input", default="step:1")
    s.add_argument("--t-end", type=float, default=10.0)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--report", type=Path)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("scaling", help="Volterra amplitude-scaling check")
    s.add_argument("--system", type=Path, required=True)
    s.add_argument("--amplitudes", type=_floats, default=[0.1, 0.05, 0.025])
    s.add_argument("--t-end", type=float, default=2.0)
    s.add_argument("--step", type=float, default=1e-2)
    s.add_argument("--report", type=Path)
    s.set_defaults(func=cmd_scaling)

    s = sub.add_parser("bench", help="Hadamard vs Kronecker timing")
    s.add_argument("--sizes", type=_ints, default=[4, 8, 16, 32, 48, 64])
    s.add_argument("--repeats", type=int, default=5)
    s.add_argument("--table", type=Path, help="optional CSV table")
    s.add_argument("--report", type=Path)
    s.set_defaults(func=cmd_bench)
    return p


def _inputs(args):
    return {k: v for k, v in vars(args).items() if k not in ("func", "report", "command")}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    report = Report(args.command, _inputs(args))
    try:
        code = args.func(args, report)
    except NUMERICAL_ERRORS as exc:
        report.add_error(exc)
        code = 2
    except USAGE_ERRORS as exc:
        report.add_error(exc)
        code = 1
    if report.errors:
        for e in report.errors:
            print(f"qbeh {args.command}: {e['type']}: {e['message']}", file=sys.stderr)
    if args.report:
        report.write(args.report)
    return code


if __name__ == "__main__":
    sys.exit(main())
