"""
CLI interface for the Renyi dimension toolkit.
"""

import argparse
import logging
import math
import os
import sys

# Set UTF-8 encoding for stdout/stderr on Windows
if sys.platform == 'win32':
    import io
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

from .config import (
    MEASURE_KEYS,
    EstimatorSettings,
    MeasureSpec,
    apply_overrides,
    dump_config,
    parse_config,
)
from .exceptions import (
    ArtifactNotFoundError,
    ConfigError,
    InvariantViolationError,
    QuadratureError,
    RenyiDimensionsError,
)
from .export import (
    render_loglog_png,
    write_csv,
    write_gnuplot_script,
    write_key_values,
    write_measure_csv,
    write_profile_csv,
    write_stats_csv,
    write_text,
)
from .gaussfilter import QuadratureSpec, check_ratio_bound
from .measure import cdf_with_residual, discretize
from .partition import PartitionTable, build_table
from .profiles import running_stats
from .reproduce import RECIPE_ALIASES, RECIPES, run_recipe
from .slopes import dimension_report, fit_table, matuszewska_sweep, secant_curve

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_ACCEPTANCE = 3
EXIT_INVARIANT = 4
EXIT_INTERRUPTED = 130

MEASURE_FILE = "measure.cfg"
SUMMARY_OMEGAS = 8


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='renyi_dimensions',
        description='Build cascade measures, tabulate partition functions and estimate '
                    'Renyi and Matuszewska dimensions.',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Build a measure from a key/value config
  %(prog)s build lebesgue.cfg --out runs/leb

  # Partition table of the built measure, with a plot
  %(prog)s table runs/leb/measure.cfg --n-max 12 --out runs/leb --plot

  # Dimension report from a measure or from an external table
  %(prog)s fit runs/leb/measure.cfg --out runs/leb
  %(prog)s fit table.csv --q 2 --out runs/ext

  # Reproduce a named example
  %(prog)s reproduce bestfit-gap --out runs/gap
        """
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', '-o', default='.', help='Output directory (default: .)')
    common.add_argument('--set', dest='overrides', action='append', default=[],
                        metavar='KEY=VALUE', help='Override a config or settings key')
    common.add_argument('--settings', default=None,
                        help='Key/value file with estimator settings')
    common.add_argument('--verbose', '-v', action='store_true', help='Debug logging')

    verbs = parser.add_subparsers(dest='command', required=True)

    build = verbs.add_parser('build', parents=[common], help='Build a measure descriptor')
    build.add_argument('config', help='Measure config file')
    build.add_argument('--q', type=float, default=None, help='Build exponent')
    build.add_argument('--depth', type=int, default=None, help='Cascade depth')
    build.add_argument('--discretize', type=int, default=None, metavar='LEVEL',
                       help='Also write the atoms of the level-LEVEL discretization')
    build.add_argument('--profile', action='store_true', help='Also write the profile CSV')
    build.add_argument('--cdf', type=int, default=None, metavar='POINTS',
                       help='Also write F(x) at x = k/POINTS, k = 0..POINTS (tolerance: cdf_tol)')

    table = verbs.add_parser('table', parents=[common], help='Write a partition table')
    table.add_argument('measure', help='Measure descriptor written by build')
    table.add_argument('--n-max', type=int, default=None, help='Finest level (default: depth)')
    table.add_argument('--q', type=float, default=None,
                       help='Evaluation exponent (default: build exponent)')
    table.add_argument('--checkpoints', type=int, nargs='*', default=None,
                       help='Also write running profile stats at these levels')
    table.add_argument('--rational', action='store_true', help='Exact checkpoint stats')
    table.add_argument('--plot', action='store_true', help='Write a gnuplot script and a PNG')

    filt = verbs.add_parser('filter', parents=[common], help='Gaussian ratio bound check')
    filt.add_argument('measure', help='Measure descriptor written by build')
    filt.add_argument('--q', type=float, default=None, help='Exponent (default: build exponent)')
    filt.add_argument('--depth', type=int, default=None,
                      help='Discretization level (default: min(depth, 16))')
    filt.add_argument('--levels', type=int, nargs=2, default=(3, 10), metavar=('FIRST', 'LAST'),
                      help='Use eps = 2^-FIRST .. 2^-LAST (default: 3 10)')

    fit = verbs.add_parser(
        'fit', parents=[common], help='Dimension report',
        description='Dimension report. D_minus and D_plus are extremes of the secant over the '
                    'last tail_fraction of the table (default 0.5). Slowly oscillating profiles '
                    'such as block48 need a longer tail (--set tail_fraction=0.8) to reach '
                    'their extremes.')
    fit.add_argument('source', help='Measure descriptor or partition table CSV')
    fit.add_argument('--q', type=float, default=None, help='Exponent (required for a CSV table)')
    fit.add_argument('--depth', type=int, default=None, help='Rows to use (default: depth)')
    fit.add_argument('--plot', action='store_true', help='Write a gnuplot script and a PNG')

    mat = verbs.add_parser('matuszewska', parents=[common], help='Matuszewska window sweep')
    mat.add_argument('source', help='Measure descriptor or partition table CSV')
    mat.add_argument('--q', type=float, default=None, help='Exponent (required for a CSV table)')
    mat.add_argument('--depth', type=int, default=None, help='Rows to use (default: depth)')

    rep = verbs.add_parser('reproduce', parents=[common], help='Run a named reproduction')
    rep.add_argument('name', choices=sorted([*RECIPES, *RECIPE_ALIASES]),
                     help='Recipe name or its short alias')
    rep.add_argument('--depth', type=int, default=None, help='Override the recipe depth')

    return parser


def main(argv=None):
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
    )

    try:
        print("Renyi Dimensions")
        print("=" * 40)
        settings = _load_settings(args)
        handler = COMMANDS[args.command]
        code = handler(args, settings)
        if code == EXIT_OK:
            print("\n" + "=" * 40)
            print("✓ Completed successfully!")
        return code

    except (ConfigError, ArtifactNotFoundError) as e:
        print(f"\n✗ Error: {e}")
        print("  Please check the input file and the key names.")
        return EXIT_USAGE

    except InvariantViolationError as e:
        print(f"\n✗ Internal check failed: {e}")
        print("  This indicates a bug upstream, not a problem with the input.")
        return EXIT_INVARIANT

    except QuadratureError as e:
        print(f"\n✗ Error: {e}")
        print(f"  Estimates: {', '.join(f'{v:.17g}' for v in e.estimates)}")
        return EXIT_INVARIANT

    except RenyiDimensionsError as e:
        print(f"\n✗ Error: {e}")
        return EXIT_USAGE

    except KeyboardInterrupt:
        print("\n\n✗ Cancelled by user.")
        return EXIT_INTERRUPTED

    except Exception as e:
        print(f"\n✗ Unexpected error: {e}")
        import traceback
        traceback.print_exc()
        return EXIT_UNEXPECTED


def cmd_build(args, settings) -> int:
    print(f"\n[1/3] Reading config '{args.config}'...")
    _require_file(args.config)
    spec = MeasureSpec.from_file(args.config, _measure_overrides(args))
    print(f"      ✓ kind={spec.kind} q={spec.q:g} depth={spec.depth}")

    print("\n[2/3] Building cascade...")
    measure = spec.build()
    check_level = min(measure.depth, 16)
    mass = math.fsum(measure.level_masses(check_level))
    print(f"      ✓ Total mass at level {check_level}: {mass:.17g}")
    head = ", ".join(f"{w:.17g}" for w in measure.omegas[:SUMMARY_OMEGAS])
    print(f"      • omega_1..{min(SUMMARY_OMEGAS, measure.depth)}: {head}")

    print("\n[3/3] Saving output...")
    path = os.path.join(args.out, MEASURE_FILE)
    write_text(path, dump_config(spec.to_entries()))
    print(f"      ✓ Measure descriptor saved to '{path}'")
    if args.profile:
        profile_path = write_profile_csv(measure.profile, os.path.join(args.out, 'profile.csv'))
        print(f"      ✓ Profile saved to '{profile_path}'")
    if args.discretize:
        atoms_path = write_measure_csv(discretize(measure, args.discretize),
                                       os.path.join(args.out, 'atoms.csv'))
        print(f"      ✓ Atoms saved to '{atoms_path}'")
    if args.cdf:
        grid = [k / args.cdf for k in range(args.cdf + 1)]
        rows = [[x, *cdf_with_residual(measure, x, settings.cdf_tol)] for x in grid]
        cdf_path = write_csv(os.path.join(args.out, 'cdf.csv'), ['x', 'F', 'residual'], rows)
        print(f"      ✓ Distribution function saved to '{cdf_path}'")
    return EXIT_OK


def cmd_table(args, settings) -> int:
    print(f"\n[1/3] Loading measure '{args.measure}'...")
    spec = _load_measure(args)
    measure = spec.build()
    n_max = measure.depth if args.n_max is None else args.n_max
    print(f"      ✓ kind={spec.kind} q={spec.q:g} depth={spec.depth}")

    print(f"\n[2/3] Tabulating ln S for n = 0..{n_max}...")
    table = build_table(measure, n_max, args.q)
    print(f"      ✓ {len(table)} rows ({table.source})")

    print("\n[3/3] Saving output...")
    path = os.path.join(args.out, 'table.csv')
    table.to_csv(path)
    print(f"      ✓ Table saved to '{path}'")
    if args.checkpoints:
        stats = running_stats(measure.profile, args.checkpoints, rational=args.rational)
        stats_path = write_stats_csv(stats, os.path.join(args.out, 'stats.csv'))
        print(f"      ✓ Checkpoint stats saved to '{stats_path}'")
    if args.plot:
        _plot_table(table, args.out, 'table')
    return EXIT_OK


def cmd_filter(args, settings) -> int:
    print(f"\n[1/3] Loading measure '{args.measure}'...")
    spec = _load_measure(args)
    measure = spec.build()
    q = spec.q if args.q is None else args.q
    depth = min(measure.depth, 16) if args.depth is None else args.depth
    first, last = args.levels
    eps_list = [2.0 ** -k for k in range(first, last + 1)]
    print(f"      ✓ q={q:g}, discretized at level {depth}, eps = 2^-{first}..2^-{last}")

    print("\n[2/3] Integrating filtered norms...")
    report = check_ratio_bound(measure, q, eps_list, depth,
                               QuadratureSpec.from_settings(settings), settings.envelope_radius)
    for row in report.rows:
        mark = "✓" if report.envelope.contains(row.ratio) else "✗"
        print(f"      {mark} eps={row.eps:.6g} ratio={row.ratio:.17g}")
    print(f"      • C = {report.envelope.C:.17g}")

    print("\n[3/3] Saving output...")
    path = write_csv(os.path.join(args.out, 'ratio.csv'),
                     ['ln_eps', 'ln_ratio', 'lower_bound', 'upper_bound'], report.csv_rows())
    print(f"      ✓ Ratio report saved to '{path}'")
    report.raise_for_violation()
    return EXIT_OK


def cmd_fit(args, settings) -> int:
    print(f"\n[1/3] Loading '{args.source}'...")
    table, measure = _load_table_or_measure(args)

    print("\n[2/3] Running estimators...")
    if measure is not None:
        report = dimension_report(measure, args.q, args.depth, settings)
        for key in ('D_mm', 'D_minus', 'D_plus', 'D_pp', 'bestfit_liminf', 'bestfit_limsup'):
            print(f"      • {key} = {getattr(report, key):.17g}")
        fits = report.fits
        if args.plot:
            table = build_table(measure, report.depth, report.q)
    else:
        report = None
        fits = fit_table(table, settings)
    for fit in fits:
        print(f"      • {fit.method}: slope={fit.slope:.17g} dimension={fit.dimension:.17g}")

    print("\n[3/3] Saving output...")
    fits_path = write_csv(os.path.join(args.out, 'fits.csv'),
                          ['method', 'q', 'slope', 'dimension', 'window'],
                          [[f.method, f.q, f.slope, f.dimension,
                            ';'.join(f"{k}={v:.17g}" for k, v in sorted(f.window.items()))]
                           for f in fits])
    print(f"      ✓ Fits saved to '{fits_path}'")
    if report is not None:
        entries = report.to_entries()
        write_key_values(os.path.join(args.out, 'report.txt'), entries)
        report_path = write_csv(os.path.join(args.out, 'report.csv'), ['key', 'value'],
                                sorted(entries.items()))
        print(f"      ✓ Dimension report saved to '{report_path}'")
    if args.plot:
        _plot_table(table, args.out, 'fit')
    return EXIT_OK


def cmd_matuszewska(args, settings) -> int:
    print(f"\n[1/3] Loading '{args.source}'...")
    table, measure = _load_table_or_measure(args)
    if measure is not None:
        depth = measure.depth if args.depth is None else args.depth
        table = build_table(measure, depth, args.q)

    print("\n[2/3] Sweeping long-secant windows...")
    windows = matuszewska_sweep(table, settings.matuszewska_windows, settings.matuszewska_burn_in)
    for w in windows:
        print(f"      • L={w.L:.6g}: alpha={w.alpha:.17g} beta={w.beta:.17g}")

    print("\n[3/3] Saving output...")
    path = write_csv(os.path.join(args.out, 'matuszewska.csv'), ['L', 'alpha', 'beta'],
                     [[w.L, w.alpha, w.beta] for w in windows])
    print(f"      ✓ Sweep saved to '{path}'")
    return EXIT_OK


def cmd_reproduce(args, settings) -> int:
    print(f"\n[1/2] Running '{args.name}'...")
    result = run_recipe(args.name, args.depth, settings)
    stem = result.name
    print(f"      • {result.description}")
    for c in result.criteria:
        mark = "✓" if c.passed else "✗"
        print(f"      {mark} {c.verdict} {c.name}: measured {c.measured:.17g} (target {c.target})")

    print("\n[2/2] Saving output...")
    for key, rows in result.tables.items():
        path = write_csv(os.path.join(args.out, f"{stem}_{key}.csv"),
                         result.headers[key], rows)
        print(f"      ✓ {key} saved to '{path}'")
    write_csv(os.path.join(args.out, f"{stem}_criteria.csv"),
              ['criterion', 'measured', 'target', 'verdict'],
              [[c.name, c.measured, c.target, c.verdict] for c in result.criteria])

    if not result.passed:
        failed = sum(not c.passed for c in result.criteria)
        print(f"\n✗ {failed} criteria failed.")
        return EXIT_ACCEPTANCE
    return EXIT_OK


COMMANDS = {
    'build': cmd_build,
    'table': cmd_table,
    'filter': cmd_filter,
    'fit': cmd_fit,
    'matuszewska': cmd_matuszewska,
    'reproduce': cmd_reproduce,
}


def _split_overrides(overrides):
    measure, rest = [], []
    for item in overrides:
        key = item.split('=', 1)[0].strip()
        (measure if key in MEASURE_KEYS else rest).append(item)
    return measure, rest


def _load_settings(args) -> EstimatorSettings:
    entries = {}
    if args.settings:
        _require_file(args.settings)
        entries = parse_config(args.settings)
    _, rest = _split_overrides(args.overrides)
    return EstimatorSettings.from_entries(apply_overrides(entries, rest))


def _measure_overrides(args):
    measure_overrides, _ = _split_overrides(args.overrides)
    if args.command == 'build':
        for key in ('q', 'depth'):
            value = getattr(args, key, None)
            if value is not None:
                measure_overrides.append(f"{key}={value}")
    return measure_overrides


def _load_measure(args) -> MeasureSpec:
    _require_file(args.measure)
    return MeasureSpec.from_file(args.measure, _measure_overrides(args))


def _load_table_or_measure(args):
    _require_file(args.source)
    if args.source.endswith('.csv'):
        if args.q is None:
            raise ConfigError("A CSV table needs --q", key='q')
        table = PartitionTable.from_csv(args.source, args.q)
        print(f"      ✓ {len(table)} rows at q={table.q:g}")
        return table, None
    spec = MeasureSpec.from_file(args.source, _measure_overrides(args))
    print(f"      ✓ kind={spec.kind} q={spec.q:g} depth={spec.depth}")
    return None, spec.build()


def _require_file(path: str) -> None:
    if not os.path.isfile(path):
        raise ArtifactNotFoundError(f"Input file not found: {path}")


def _plot_table(table: PartitionTable, out: str, stem: str) -> None:
    csv_path = os.path.join(out, f'{stem}_loglog.csv')
    rows, secants = secant_curve(table)
    write_csv(csv_path, ['ln_eps', 'ln_S'], table.rows)
    write_gnuplot_script(os.path.join(out, f'{stem}.gp'), os.path.basename(csv_path),
                         f'{stem}.png', f'ln S against ln eps (q={table.q:g})')
    png = render_loglog_png(os.path.join(out, f'{stem}.png'),
                            [(table.ln_eps, table.ln_S)],
                            title=f'ln S against ln eps, q={table.q:g}', labels=['ln S'])
    write_csv(os.path.join(out, f'{stem}_secants.csv'), ['row', 'secant'],
              zip(rows.tolist(), secants.tolist()))
    print(f"      ✓ Plot saved to '{png}'")


if __name__ == '__main__':
    sys.exit(main())
