"""
V-monotone Moments Engine
Copyright (c) 2024 Carlos Manzanedo Rueda (@cmanaha)

Licensed under the MIT License (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://opensource.org/licenses/MIT
"""

import os
import sys
import argparse
from typing import List, Literal, Optional, Sequence

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

import mgf
from fock import FockConfig, ScanRow, convergence_scan, omega_N_moment, richardson_limit
from labelings import LabelingRule, count_ov2, enumerate_adapted, enumerate_ov2, enumerate_ov2_k
from moments import clt_moment, moment_table, universal_polynomial
from polyengine import moment_via_poly
from reporting import (
    EnumerationReport,
    LabeledPartitionRow,
    MgfReport,
    MgfRow,
    MomentRow,
    MomentTableReport,
    PolynomialTerm,
    UniversalPolynomialReport,
    emit,
    render_csv,
    render_json,
)
from utils import (
    TimingStats,
    create_progress,
    measure_time,
    print_configuration,
    SystemInfo,
    err_console
)
from verification import DEFAULT_SEED, VerifyConfig, run_verification

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

MOMENT_COLUMNS = ["order", "numerator", "denominator", "decimal", "count", "printed_count",
                  "N", "extrapolated"]
SCAN_COLUMNS = ["N", "order", "value", "error", "slope"]
MGF_COLUMNS = ["z", "M", "residual", "error"]


class MomentsConfig(BaseModel):
    order_max: int = Field(default=20, ge=0)
    method: Literal["recurrence", "enumerate", "poly", "fock"] = "recurrence"
    N: int = Field(default=100, ge=1)
    enumerate_cap: int = Field(default=16, ge=0)


def _env_flag(name: str) -> bool:
    return os.getenv(name, '').lower() in ('true', '1', 'yes')


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _grid(text: str) -> List[float]:
    """Either 'start:stop:count' or a comma-separated list of reals."""
    try:
        if ':' in text:
            start, stop, count = text.split(':')
            n = int(count)
            if n < 1:
                raise ValueError
            if n == 1:
                return [float(start)]
            step = (float(stop) - float(start)) / (n - 1)
            return [round(float(start) + i * step, 12) for i in range(n)]
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'start:stop:count' or a list of reals, got {text!r}")


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    env_path = os.path.join(os.path.dirname(os.path.dirname(__file__)), '.env')
    if os.path.exists(env_path):
        load_dotenv(env_path)
        err_console.log(f"[cyan]Loading environment from: {env_path}[/cyan]")

    env_verbose = _env_flag('VMONO_VERBOSE')
    system_settings = SystemInfo.get_optimal_settings(verbose=env_verbose)

    env_seed = os.getenv('VMONO_SEED', '')
    env_level = os.getenv('VMONO_LEVEL', 'fast')
    env_format = os.getenv('VMONO_FORMAT') or None
    env_output = os.getenv('VMONO_OUTPUT') or None
    env_workers = os.getenv('VMONO_WORKERS', str(system_settings['num_workers']))

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=['csv', 'json'], default=env_format,
        help='Output format (default depends on the command)')
    common.add_argument('-o', '--output', type=str, default=env_output,
        help='Output file path (default: stdout)')
    common.add_argument('--verbose', action='store_true', default=env_verbose,
        help='Show configuration, progress and timing information')

    parser = argparse.ArgumentParser(
        description='Moments, enumerations and checks for V-monotone independence')
    commands = parser.add_subparsers(dest='command', required=True)

    moments = commands.add_parser('moments', parents=[common],
        help='Even moments of the V-monotone central limit law')
    moments.add_argument('--order-max', type=int, default=20,
        help='Largest moment order (default: 20)')
    moments.add_argument('--method', choices=['recurrence', 'enumerate', 'poly', 'fock'],
        default='recurrence', help='How the moments are computed (default: recurrence)')
    moments.add_argument('--N', type=int, default=100,
        help='Number of operators for the fock method (default: 100)')

    enumerate_cmd = commands.add_parser('enumerate', parents=[common],
        help='List labeled partitions of a class')
    enumerate_cmd.add_argument('--seq', type=_int_list,
        help='Index sequence, e.g. 2,7,5,7,5,2, for the adapted class')
    enumerate_cmd.add_argument('--class', dest='family', choices=['adapted', 'ov2', 'ov2k'],
        default='adapted', help='Which class to list (default: adapted)')
    enumerate_cmd.add_argument('--order', type=int, help='Even order 2n for ov2 and ov2k')
    enumerate_cmd.add_argument('--k', type=int, help='Enclosing label k for ov2k')
    enumerate_cmd.add_argument('--rule', choices=[rule.value for rule in LabelingRule],
        default=LabelingRule.V_MONOTONE.value, help='Labeling rule for the adapted class')

    verify = commands.add_parser('verify', parents=[common], help='Run the acceptance checks')
    verify.add_argument('--level', choices=['fast', 'full'], default=env_level,
        help='fast or full (default: fast)')
    verify.add_argument('--seed', type=int,
        default=int(env_seed) if env_seed.lstrip('-').isdigit() else DEFAULT_SEED,
        help='Seed for random matrix states')
    verify.add_argument('--workers', type=int, default=int(env_workers),
        help='Checks run concurrently (default: from system memory and cores)')

    scan = commands.add_parser('fock-scan', parents=[common],
        help='Convergence of φ(ω(N)^k) to the limit moments')
    scan.add_argument('--N', dest='Ns', type=_int_list, default=[25, 100, 400],
        help='Comma-separated N values (default: 25,100,400)')
    scan.add_argument('--orders', type=_int_list, default=[2, 4, 6],
        help='Comma-separated moment orders (default: 2,4,6)')
    scan.add_argument('--method', choices=['reduced', 'sparse'], default='reduced',
        help='Fock evaluation method (default: reduced)')

    mgf_cmd = commands.add_parser('mgf', parents=[common],
        help='Evaluate the moment generating function on a grid')
    mgf_cmd.add_argument('--z-grid', type=_grid, default=_grid('-0.45:0.45:19'),
        help="'start:stop:count' or comma list inside (-1/2, 1/2)")
    mgf_cmd.add_argument('--residual-x', type=float, default=0.5,
        help='x at which the integral equation residual is reported (default: 0.5)')
    mgf_cmd.add_argument('--series', action='store_true',
        help='Also recover the series coefficients (json output)')

    poly = commands.add_parser('universal-poly', parents=[common],
        help='Universal polynomial of an index sequence')
    poly.add_argument('--seq', type=_int_list, required=True, help='Index sequence, e.g. 1,2,1,2,1')

    return parser.parse_args(argv)


def _render(rows, columns, report, fmt: str) -> str:
    return render_csv(rows, columns) if fmt == 'csv' else render_json(report)


def cmd_moments(args: argparse.Namespace, timing_stats=None) -> str:
    config = MomentsConfig(order_max=args.order_max, method=args.method, N=args.N)
    if config.method == 'enumerate' and config.order_max > config.enumerate_cap:
        raise ValueError(
            f"enumerate method is capped at order {config.enumerate_cap}; got {config.order_max}"
        )
    orders = list(range(2, config.order_max + 1, 2))
    rows: List[MomentRow] = []
    if config.method == 'recurrence':
        for entry in measure_time("Recurrence", moment_table, timing_stats, config.order_max):
            rows.append(MomentRow.of(entry.order, entry.value, count=entry.numerator,
                                     printed_count=entry.printed_numerator))
    elif config.method == 'enumerate':
        for order in orders:
            count = measure_time("Enumeration", count_ov2, timing_stats, order)
            rows.append(MomentRow.of(order, clt_moment(order), count=count))
    elif config.method == 'poly':
        for order in orders:
            rows.append(MomentRow.of(order, measure_time("Polynomials", moment_via_poly,
                                                         timing_stats, order)))
    else:
        for order in orders:
            value = measure_time("Fock model", omega_N_moment, timing_stats, config.N, order)
            rows.append(MomentRow.of(order, value, N=config.N,
                                     extrapolated=richardson_limit(config.N, order)))
    report = MomentTableReport(method=config.method, rows=rows)
    return _render(rows, MOMENT_COLUMNS, report, args.format or 'csv')


def cmd_enumerate(args: argparse.Namespace, timing_stats=None) -> str:
    if args.family == 'adapted':
        if not args.seq:
            raise ValueError("enumerate needs --seq for the adapted class")
        found = list(enumerate_adapted(args.seq, LabelingRule(args.rule)))
    else:
        if args.order is None:
            raise ValueError(f"--class {args.family} needs --order")
        cap = MomentsConfig().enumerate_cap
        if args.order > cap:
            raise ValueError(f"enumerate method is capped at order {cap}; got {args.order}")
        if args.family == 'ov2':
            found = list(enumerate_ov2(args.order))
        else:
            if args.k is None:
                raise ValueError("--class ov2k needs --k")
            found = list(enumerate_ov2_k(args.order, args.k))
    report = EnumerationReport(
        family=args.family if args.family != 'adapted' else f"adapted/{args.rule}",
        seq=list(args.seq) if args.seq else None,
        order=args.order,
        k=args.k,
        count=len(found),
        partitions=[LabeledPartitionRow(**lp.to_json()) for lp in found],
    )
    if (args.format or 'json') == 'csv':
        rows = [_EnumerationCsvRow(blocks=str(lp.to_json()['blocks']),
                                   labels=str(lp.to_json()['labels'])) for lp in found]
        return render_csv(rows, ['blocks', 'labels'])
    return render_json(report)


class _EnumerationCsvRow(BaseModel):
    blocks: str
    labels: str


def cmd_verify(args: argparse.Namespace, timing_stats=None):
    config = VerifyConfig(level=args.level, seed=args.seed, workers=max(1, args.workers))
    if args.verbose:
        with create_progress() as progress:
            report = run_verification(config, progress, timing_stats)
    else:
        report = run_verification(config, None, timing_stats)
    for failure in report.failures:
        err_console.log(f"[red]FAIL[/red] {failure.name}: expected {failure.expected}, "
                        f"got {failure.actual} ({failure.detail})")
    if args.format == 'csv':
        text = render_csv(report.checks, ['name', 'passed', 'expected', 'actual', 'tolerance',
                                          'seconds', 'detail'])
    else:
        text = render_json(report)
    return text, report.passed


def cmd_fock_scan(args: argparse.Namespace, timing_stats=None) -> str:
    if any(N < 1 for N in args.Ns):
        raise ValueError(f"N values must be >= 1, got {args.Ns}")
    config = FockConfig(exact=True, method=args.method)
    rows = measure_time("Convergence scan", convergence_scan, timing_stats,
                        args.Ns, args.orders, config)
    if (args.format or 'csv') == 'csv':
        return render_csv(rows, SCAN_COLUMNS)
    return render_json(_ScanReport(rows=rows))


class _ScanReport(BaseModel):
    kind: Literal["fock-scan"] = "fock-scan"
    rows: List[ScanRow]


def cmd_mgf(args: argparse.Namespace, timing_stats=None) -> str:
    rows: List[MgfRow] = []
    for z in args.z_grid:
        try:
            value = measure_time("M(z)", mgf.mgf, timing_stats, z)
        except (ValueError, RuntimeError) as exc:
            rows.append(MgfRow(z=z, error=str(exc)))
            continue
        residual = None
        if 0 < z < 0.25:
            residual = measure_time("Integral equation", mgf.integral_equation_residual,
                                    timing_stats, z, args.residual_x)
        rows.append(MgfRow(z=z, M=value, residual=residual))
    series = mgf.mgf_series() if args.series else {}
    if (args.format or 'csv') == 'csv':
        return render_csv(rows, MGF_COLUMNS)
    return render_json(MgfReport(rows=rows, series=series))


def cmd_universal_poly(args: argparse.Namespace, timing_stats=None) -> str:
    polynomial = measure_time("Universal polynomial", universal_polynomial, timing_stats,
                              tuple(args.seq))
    report = UniversalPolynomialReport(
        seq=list(args.seq), terms=[PolynomialTerm(**term) for term in polynomial.to_json()]
    )
    if args.format == 'csv':
        rows = [_PolynomialCsvRow(vars=str(term.vars), coeff=term.coeff) for term in report.terms]
        return render_csv(rows, ['vars', 'coeff'])
    return render_json(report)


class _PolynomialCsvRow(BaseModel):
    vars: str
    coeff: int


COMMANDS = {
    'moments': cmd_moments,
    'enumerate': cmd_enumerate,
    'fock-scan': cmd_fock_scan,
    'mgf': cmd_mgf,
    'universal-poly': cmd_universal_poly,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_arguments(argv)
    timing_stats = TimingStats() if args.verbose else None
    print_configuration(args.command, {k: v for k, v in vars(args).items() if k != 'command'},
                        args.verbose)
    passed = True
    try:
        if args.command == 'verify':
            text, passed = cmd_verify(args, timing_stats)
        else:
            text = COMMANDS[args.command](args, timing_stats)
    except (ValueError, RuntimeError, ValidationError) as exc:
        err_console.print(f"[red]Error:[/red] {exc}")
        return EXIT_USAGE

    destination = emit(text, args.output)
    if args.output and args.verbose:
        err_console.log(f"[green]Output saved to:[/green] {destination}")
    if timing_stats:
        timing_stats.print_stats()
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
