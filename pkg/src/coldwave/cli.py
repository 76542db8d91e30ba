"""Command-line front end over the batch run modes.

Subcommands: converge, stability, conserve, perf, beam2d, freqsolve.
Each loads an optional JSON config, applies flag overrides, runs the mode
and writes CSV/JSON outputs. Exit codes: 0 when all requested assertions
pass, 2 on an assertion failure, 1 on a runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .runs import (RunConfig, benchmark_config, beam_config,
                   run_beam_2d, run_conservation, run_convergence_study,
                   run_freqsolve, run_performance, run_stability_scan)


def _add_common(p):
    p.add_argument('--config', help='JSON config file (overridden by flags)')
    p.add_argument('--scheme', choices=['poisson', 'hamiltonian',
                                        'crank_nicolson', 'all'])
    p.add_argument('--cfl', type=float)
    p.add_argument('--ppp', type=int)
    p.add_argument('--periods', type=float, dest='n_periods')
    p.add_argument('--tol', type=float)
    p.add_argument('--out', dest='output_dir')


def _parse_schemes(args, config):
    if args.scheme == 'all':
        return ['poisson', 'hamiltonian', 'crank_nicolson']
    return [args.scheme or config.scheme]


def _load_config(args, default_factory):
    if args.config:
        config = RunConfig.from_json(args.config)
    else:
        config = default_factory()
    overrides = {}
    for key in ('cfl', 'ppp', 'n_periods', 'tol', 'output_dir'):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if 'cfl' in overrides and 'ppp' not in overrides:
        overrides['ppp'] = None
    if 'ppp' in overrides and 'cfl' not in overrides:
        overrides['cfl'] = None
    if getattr(args, 'scheme', None) and args.scheme != 'all':
        overrides['scheme'] = args.scheme
    if overrides:
        config = config.with_updates(**overrides)
    return config


def _limit_blas_threads():
    # the time loop is dominated by many small factorization solves and
    # matrix-vector products; thread-pool spin-waits make those far slower
    # than single-threaded execution
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(1)
    except ImportError:
        pass


def main(argv=None):
    _limit_blas_threads()
    parser = argparse.ArgumentParser(
        prog='coldwave',
        description='Structure-preserving cold-plasma full-wave solver')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('converge', help='grid-refinement convergence study')
    _add_common(p)
    p.add_argument('--mode', choices=['O', 'X'], default='O')
    p.add_argument('--ppw', type=int, nargs='+', default=[10, 20, 40])
    p.add_argument('--assert-slopes', action='store_true')

    p = sub.add_parser('stability', help='Courant-number stability scan')
    _add_common(p)
    p.add_argument('--mode', choices=['O', 'X'], default='X')
    p.add_argument('--ppw', type=int, default=10)
    p.add_argument('--cfl-list', type=float, nargs='+',
                   default=[0.33, 0.5, 1.0])

    p = sub.add_parser('conserve', help='energy/charge/divergence tracking')
    _add_common(p)
    p.add_argument('--ppw', type=int, nargs='+', default=[10, 20, 40])

    p = sub.add_parser('perf', help='iteration and operation-count study')
    _add_common(p)
    p.add_argument('--mode', choices=['O', 'X'], default='X')
    p.add_argument('--ppw', type=int, nargs='+', default=[10, 20, 40])

    p = sub.add_parser('beam2d', help='2D Gaussian-beam run with '
                                      'frequency-domain comparison')
    _add_common(p)
    p.add_argument('--ppw', type=int, default=6)
    p.add_argument('--polarization', choices=['O', 'X'], default='O')
    p.add_argument('--wavelengths', type=int, default=12)
    p.add_argument('--freq-method', choices=['auto', 'iterative', 'direct'],
                   default='auto')

    p = sub.add_parser('freqsolve', help='frequency-domain solve only')
    _add_common(p)
    p.add_argument('--mode', choices=['O', 'X'], default='O')
    p.add_argument('--ppw', type=int, default=20)
    p.add_argument('--method', choices=['auto', 'iterative', 'direct'],
                   default='auto')

    args = parser.parse_args(argv)
    try:
        report = _dispatch(args)
    except Exception as exc:                      # runtime failure
        print(f'error: {exc}', file=sys.stderr)
        return 1
    print(json.dumps(_strip(report), indent=1, sort_keys=True, default=str))
    if report.get('passed') is False:
        return 2
    return 0


def _strip(report, depth=0):
    """Keep the summary JSON printable (drop bulky per-step rows)."""
    if isinstance(report, dict):
        return {k: _strip(v, depth + 1) for k, v in report.items()
                if k not in ('rows', 'final_state')}
    if isinstance(report, (list, tuple)) and depth > 6:
        return '...'
    return report


def _dispatch(args):
    cmd = args.command
    if cmd == 'converge':
        config = _load_config(args, lambda: benchmark_config(mode=args.mode))
        if not args.config:
            config = config.with_updates(source={'manufactured': args.mode})
        return run_convergence_study(config, ppw_list=args.ppw,
                                     schemes=_parse_schemes(args, config),
                                     assert_slopes=args.assert_slopes)
    if cmd == 'stability':
        config = _load_config(args, lambda: benchmark_config(
            mode=args.mode, ppw=args.ppw))
        return run_stability_scan(config, cfl_list=args.cfl_list,
                                  schemes=_parse_schemes(args, config))
    if cmd == 'conserve':
        config = _load_config(args, lambda: benchmark_config(mode='X'))
        return run_conservation(config, ppw_list=args.ppw,
                                schemes=_parse_schemes(args, config))
    if cmd == 'perf':
        config = _load_config(args, lambda: benchmark_config(mode=args.mode))
        return run_performance(config, ppw_list=args.ppw,
                               schemes=_parse_schemes(args, config))
    if cmd == 'beam2d':
        config = _load_config(args, lambda: beam_config(
            ppw=args.ppw, wavelengths=args.wavelengths,
            polarization=args.polarization))
        return run_beam_2d(config, freq_method=args.freq_method)
    if cmd == 'freqsolve':
        config = _load_config(args, lambda: benchmark_config(
            mode=args.mode, ppw=args.ppw))
        return run_freqsolve(config, method=args.method)
    raise ValueError(f'unknown command {cmd!r}')


if __name__ == '__main__':
    sys.exit(main())
