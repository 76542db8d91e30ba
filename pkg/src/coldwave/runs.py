"""Batch run modes: convergence, stability, conservation, cost, 2D beam.

Each mode builds the discrete system from a :class:`RunConfig`, marches it
and emits deterministic CSV tables plus a machine-readable JSON summary
(configuration echo, build identifier, headline numbers). The benchmark
configuration is the density ramp on ``[0, 3 pi]`` with one periodic cell
in the transverse directions; the 2D beam mode uses a square transverse
box with an incoming Gaussian beam and compares the transient against the
frequency-domain solution.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import subprocess
from dataclasses import dataclass, asdict, field

import numpy as np

from .assembly import SourceSpec, build_system_operators
from .derham import build_complex
from .diagnostics import (ManufacturedErrorTracker, div_b_max, hamiltonian,
                          local_field_ops, step_block_products,
                          step_cost_iterations, total_charge)
from .freqdomain import FrequencySystem, TimeHarmonicMismatch, write_snapshot
from .integrators import FieldState, make_stepper
from .plasma import (GaussianBeam, ManufacturedSolution, blob_profile,
                     envelope, profile_from_csv, ramp_profile, vacuum_profile)
from .solvers import ConvergenceFailure, SolverBreakdown

__all__ = [
    'RunConfig',
    'benchmark_config',
    'beam_config',
    'run_convergence_study',
    'run_stability_scan',
    'run_conservation',
    'run_performance',
    'run_beam_2d',
    'run_freqsolve',
]

TWO_PI = 2.0 * np.pi


# =============================================================================
@dataclass
class RunConfig:
    """Normalized-units run description; serializes to/from JSON."""

    mode: str = 'converge'
    domain: tuple = ((0.0, 3 * np.pi), (0.0, TWO_PI), (0.0, TWO_PI))
    n_cells: tuple = (15, 1, 1)
    degrees: tuple = (3, 1, 1)
    periodic: tuple = (False, True, True)
    scheme: str = 'poisson'
    cfl: float = 0.25
    ppp: int = None
    n_periods: float = 3.0
    profile: dict = field(default_factory=lambda: {'preset': 'ramp_x'})
    source: dict = field(default_factory=lambda: {'manufactured': 'O'})
    tol: float = 1e-12
    max_iter: int = 5000
    use_envelope: bool = False
    snapshot_periods: tuple = ()
    output_dir: str = None
    seed: int = 0

    def __post_init__(self):
        self.domain = tuple((float(a), float(b)) for a, b in self.domain)
        self.n_cells = tuple(int(n) for n in self.n_cells)
        self.degrees = tuple(int(p) for p in self.degrees)
        self.periodic = tuple(bool(p) for p in self.periodic)
        self.snapshot_periods = tuple(float(s) for s in self.snapshot_periods)
        if (self.cfl is None) == (self.ppp is None):
            raise ValueError('exactly one of cfl / ppp must be set')

    # -- derived quantities ----------------------------------------------
    @property
    def dx(self) -> float:
        (a, b) = self.domain[0]
        return (b - a) / self.n_cells[0]

    @property
    def ppw(self) -> float:
        return TWO_PI / self.dx

    def time_step(self):
        """(dt, n_steps) covering ``n_periods`` with the exact horizon."""
        horizon = self.n_periods * TWO_PI
        target = self.cfl * self.dx if self.cfl is not None else TWO_PI / self.ppp
        n_steps = max(1, int(np.ceil(horizon / target - 1e-12)))
        return horizon / n_steps, n_steps

    # -- serialization ------------------------------------------------------
    def to_dict(self):
        d = asdict(self)
        d['domain'] = [list(pair) for pair in self.domain]
        for key in ('n_cells', 'degrees', 'periodic', 'snapshot_periods'):
            d[key] = list(d[key])
        return d

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=1, sort_keys=True)
        if path is not None:
            with open(path, 'w') as fh:
                fh.write(text + '\n')
        return text

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d['domain'] = tuple(tuple(pair) for pair in d['domain'])
        for key in ('n_cells', 'degrees', 'periodic', 'snapshot_periods'):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    @classmethod
    def from_json(cls, text_or_path):
        if os.path.exists(str(text_or_path)):
            with open(text_or_path) as fh:
                return cls.from_dict(json.load(fh))
        return cls.from_dict(json.loads(text_or_path))

    def with_updates(self, **kw):
        d = self.to_dict()
        d.update(kw)
        return RunConfig.from_dict(d)


def benchmark_config(mode='O', scheme='poisson', ppw=10, cfl=0.25,
                     n_periods=3.0, **kw) -> RunConfig:
    """The 1D-like verification setup: ramp density, one transverse cell."""
    nx = max(1, int(round(1.5 * ppw)))
    return RunConfig(mode='converge', n_cells=(nx, 1, 1), scheme=scheme,
                     cfl=cfl, n_periods=n_periods,
                     source={'manufactured': mode}, **kw)


def beam_config(ppw=6, wavelengths=12, scheme='poisson', ppp=32,
                n_periods=15.0, polarization='O', peak_omega_p2=1.3,
                **kw) -> RunConfig:
    """2D beam setup: square transverse box, one periodic cell along z."""
    L = wavelengths * TWO_PI
    n = max(1, int(round(wavelengths * ppw)))
    pol = (0.0, 0.0, 1.0) if polarization == 'O' else (0.0, 1.0, 0.0)
    source = {'beam': {'waist': TWO_PI, 'y0': L / 2.0, 'z0': np.pi,
                       'polarization': pol}}
    return RunConfig(mode='beam2d',
                     domain=((0.0, L), (0.0, L), (0.0, TWO_PI)),
                     n_cells=(n, n, 1), degrees=(3, 3, 1),
                     periodic=(False, False, True), scheme=scheme,
                     cfl=None, ppp=ppp, n_periods=n_periods,
                     profile={'preset': 'blobs',
                              'peak_omega_p2': peak_omega_p2},
                     source=source, use_envelope=True, **kw)


# =============================================================================
def _build_profile(config: RunConfig):
    spec = dict(config.profile)
    if 'csv' in spec:
        path = spec.pop('csv')
        return profile_from_csv(path, **spec)
    preset = spec.pop('preset')
    if preset == 'vacuum':
        return vacuum_profile()
    if preset == 'ramp_x':
        return ramp_profile(**spec)
    if preset == 'blobs':
        return blob_profile(config.domain, **spec)
    raise ValueError(f'unknown profile preset {preset!r}')


def _artificial_faces(config: RunConfig):
    return [(axis, side) for axis in range(3) if not config.periodic[axis]
            for side in (0, 1)]


def _build_source(config: RunConfig, profile):
    spec = config.source or {}
    env = envelope if config.use_envelope else None
    if 'manufactured' in spec:
        ms = ManufacturedSolution(spec['manufactured'], profile)
        return ms.source_spec(envelope=env), ms
    if 'beam' in spec:
        beam = GaussianBeam(**spec['beam'])

        def boundary_field(pts, normal, beam=beam):
            # incoming trace only on the launch face x = 0
            if normal[0] < -0.5:
                return beam.boundary_trace(pts, normal)
            return np.zeros(np.asarray(pts).shape, dtype=complex)

        return SourceSpec(boundary_field=boundary_field, envelope=env), beam
    return SourceSpec(envelope=env), None


def build_run(config: RunConfig):
    """Assemble (complex, profile, ops, extra) for a configuration."""
    cx = build_complex(config.n_cells, config.degrees, config.periodic,
                       config.domain)
    profile = _build_profile(config)
    source, extra = _build_source(config, profile)
    ops = build_system_operators(cx, profile, _artificial_faces(config),
                                 source)
    return cx, profile, ops, extra


# =============================================================================
def _build_id():
    try:
        here = os.path.dirname(os.path.abspath(__file__))
        sha = subprocess.run(['git', 'rev-parse', '--short', 'HEAD'],
                             capture_output=True, text=True, cwd=here,
                             timeout=5).stdout.strip()
        if sha:
            return sha
    except Exception:
        pass
    return 'unversioned'


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating))
                             else v for v in row])


def _write_summary(config: RunConfig, report, name):
    if config.output_dir is None:
        return
    os.makedirs(config.output_dir, exist_ok=True)
    payload = {
        'config': config.to_dict(),
        'build': _build_id(),
        'config_hash': hashlib.sha256(
            config.to_json().encode()).hexdigest()[:12],
        'report': report,
    }
    with open(os.path.join(config.output_dir, f'{name}_summary.json'), 'w') as fh:
        json.dump(payload, fh, indent=1, sort_keys=True, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f'not JSON serializable: {type(obj)}')


# =============================================================================
DIAG_COLUMNS = ['step', 't', 'hamiltonian', 'total_charge', 'div_b_max',
                'err_total', 'err_solver', 'err_proj', 'err_total_e',
                'err_total_b', 'err_total_y', 'mismatch', 'block_products']


def march(config: RunConfig, ops, tracker=None, mismatch=None,
          divergence_cap=1e12, csv_path=None, state=None,
          snapshot_prefix=None):
    """March one run, recording per-step diagnostics.

    Returns a dict with the diagnostics rows, iteration averages,
    block-product averages and a divergence flag. Marching stops early
    when the state magnitude passes ``divergence_cap`` or an inner solve
    fails (recorded as divergence, not an error).
    """
    dt, n_steps = config.time_step()
    stepper = make_stepper(config.scheme, ops, dt, tol=config.tol,
                           maxiter=config.max_iter,
                           use_envelope=config.use_envelope)
    if state is None:
        state = (tracker.reference_state(0.0) if tracker is not None
                 else FieldState.zeros(ops))
    rows = []
    iters_acc = {}
    bp_acc = []
    maxes = {'err_total': 0.0, 'err_solver': 0.0, 'err_proj': 0.0,
             'energy_err': 0.0, 'charge_err': 0.0, 'div_b': 0.0,
             'magnitude': 0.0}
    diverged = False
    snap_steps = {int(round(p * TWO_PI / dt)): p
                  for p in config.snapshot_periods}
    period_marks = []

    for k in range(1, n_steps + 1):
        try:
            state, cost = stepper.step(state)
        except (ConvergenceFailure, SolverBreakdown):
            diverged = True
            break
        mag = state.norm_inf()
        maxes['magnitude'] = max(maxes['magnitude'], mag)
        if not np.isfinite(mag) or mag > divergence_cap:
            diverged = True
            break
        for label, n_it in step_cost_iterations(cost).items():
            iters_acc.setdefault(label, []).append(n_it)
        bp_acc.append(cost.block_products())
        row = {'step': k, 't': state.t,
               'hamiltonian': hamiltonian(state, ops),
               'total_charge': total_charge(state, ops),
               'div_b_max': div_b_max(state, ops),
               'block_products': bp_acc[-1]}
        maxes['div_b'] = max(maxes['div_b'], row['div_b_max'])
        if tracker is not None:
            err = tracker.errors(state)
            row.update({'err_total': err['total'], 'err_solver': err['solver'],
                        'err_proj': err['proj'],
                        'err_total_e': err['total_e'],
                        'err_total_b': err['total_b'],
                        'err_total_y': err['total_y']})
            maxes['err_total'] = max(maxes['err_total'], err['total'])
            maxes['err_solver'] = max(maxes['err_solver'], err['solver'])
            maxes['err_proj'] = max(maxes['err_proj'], err['proj'])
        if mismatch is not None:
            row['mismatch'] = mismatch.track(state)
        rows.append(row)
        if k in snap_steps and snapshot_prefix is not None:
            write_snapshot(f'{snapshot_prefix}_p{snap_steps[k]:g}_e',
                           ops.complex.V1, state.e,
                           meta={'t': state.t, 'field': 'electric'})

    if csv_path is not None:
        table = [[row.get(c, '') for c in DIAG_COLUMNS] for row in rows]
        _write_csv(csv_path, DIAG_COLUMNS, table)

    iter_avg = {k: float(np.mean(v)) for k, v in iters_acc.items()}
    return {'rows': rows, 'diverged': diverged, 'maxes': maxes,
            'iter_avg': iter_avg,
            'block_products_avg': float(np.mean(bp_acc)) if bp_acc else 0.0,
            'dt': dt, 'n_steps': n_steps, 'final_state': state}


def _fit_slope(dxs, errs):
    mask = np.asarray(errs) > 0
    if mask.sum() < 2:
        return float('nan')
    return float(np.polyfit(np.log(np.asarray(dxs)[mask]),
                            np.log(np.asarray(errs)[mask]), 1)[0])


# =============================================================================
def run_convergence_study(config: RunConfig, ppw_list=(10, 20, 40),
                          schemes=None, assert_slopes=False):
    """Grid-refinement study at fixed Courant number (manufactured mode).

    Per scheme and resolution, records the max-in-time relative errors and
    fits the order against the grid size. With ``assert_slopes`` the
    report carries a pass flag requiring every fitted slope in [1.8, 2.2].
    """
    if 'manufactured' not in (config.source or {}):
        raise ValueError('convergence study requires a manufactured source')
    schemes = list(schemes or [config.scheme])
    mode = config.source['manufactured']
    report = {'mode': mode, 'cfl': config.cfl, 'ppw': list(ppw_list),
              'schemes': {}}
    rows = []
    for scheme in schemes:
        entry = {'ppw': [], 'dx': [], 'total': [], 'solver': [], 'proj': [],
                 'iter_avg': [], 'block_products': []}
        for ppw in ppw_list:
            nx = max(1, int(round((config.domain[0][1] - config.domain[0][0])
                                  / (TWO_PI / ppw))))
            cfg = config.with_updates(n_cells=[nx, *config.n_cells[1:]],
                                      scheme=scheme)
            cx, profile, ops, ms = build_run(cfg)
            tracker = ManufacturedErrorTracker(ops, ms)
            out = march(cfg, ops, tracker=tracker,
                        csv_path=_diag_path(cfg, f'convergence_{scheme}_{mode}_ppw{ppw}'))
            entry['ppw'].append(ppw)
            entry['dx'].append(cfg.dx)
            entry['total'].append(out['maxes']['err_total'])
            entry['solver'].append(out['maxes']['err_solver'])
            entry['proj'].append(out['maxes']['err_proj'])
            entry['iter_avg'].append(out['iter_avg'])
            entry['block_products'].append(out['block_products_avg'])
            rows.append([scheme, ppw, cfg.dx, out['maxes']['err_total'],
                         out['maxes']['err_solver'], out['maxes']['err_proj'],
                         out['block_products_avg']])
        entry['slope_total'] = _fit_slope(entry['dx'], entry['total'])
        entry['slope_solver'] = _fit_slope(entry['dx'], entry['solver'])
        report['schemes'][scheme] = entry
    if assert_slopes:
        slopes = [report['schemes'][s]['slope_total'] for s in schemes]
        report['passed'] = bool(all(1.8 <= s <= 2.2 for s in slopes))
    if config.output_dir:
        _write_csv(os.path.join(config.output_dir, f'convergence_{mode}.csv'),
                   ['scheme', 'ppw', 'dx', 'err_total', 'err_solver',
                    'err_proj', 'block_products'], rows)
    _write_summary(config, report, f'convergence_{mode}')
    return report


def _diag_path(config, name):
    if config.output_dir is None:
        return None
    return os.path.join(config.output_dir, f'{name}_steps.csv')


def run_stability_scan(config: RunConfig, cfl_list=(0.33, 0.5, 1.0),
                       schemes=None):
    """Fixed grid, growing time step: divergence flags and error growth.

    Errors are reported relative to the numerical solution's magnitude, so
    diverged runs saturate instead of overflowing; a run is flagged as
    diverged when its error ratio passes 1e6, an inner solve fails, or the
    state magnitude overflows the cap.
    """
    if 'manufactured' not in (config.source or {}):
        raise ValueError('stability scan requires a manufactured source')
    schemes = list(schemes or [config.scheme])
    mode = config.source['manufactured']
    report = {'mode': mode, 'ppw': config.ppw, 'cfl': list(cfl_list),
              'schemes': {}}
    rows = []
    for scheme in schemes:
        entry = {'cfl': [], 'dt': [], 'error': [], 'diverged': [],
                 'magnitude': []}
        for cfl in cfl_list:
            cfg = config.with_updates(scheme=scheme, cfl=cfl, ppp=None)
            cx, profile, ops, ms = build_run(cfg)
            tracker = ManufacturedErrorTracker(ops, ms)
            out = march(cfg, ops, tracker=tracker)
            err = out['maxes']['err_total']
            diverged = bool(out['diverged'] or err > 1e6)
            entry['cfl'].append(cfl)
            entry['dt'].append(out['dt'])
            entry['error'].append(err)
            entry['diverged'].append(diverged)
            entry['magnitude'].append(out['maxes']['magnitude'])
            rows.append([scheme, cfl, out['dt'], err, int(diverged),
                         out['maxes']['magnitude']])
        kept = [(d, e) for d, e, f in
                zip(entry['dt'], entry['error'], entry['diverged']) if not f]
        entry['slope_dt'] = (_fit_slope([d for d, _ in kept],
                                        [e for _, e in kept])
                             if len(kept) >= 2 else float('nan'))
        report['schemes'][scheme] = entry
    if config.output_dir:
        _write_csv(os.path.join(config.output_dir, f'stability_{mode}.csv'),
                   ['scheme', 'cfl', 'dt', 'err_total_rel', 'diverged',
                    'magnitude'], rows)
    _write_summary(config, report, f'stability_{mode}')
    return report


def run_conservation(config: RunConfig, ppw_list=(10, 20, 40), schemes=None):
    """Energy / total-charge / magnetic-divergence tracking under refinement."""
    if config.source.get('manufactured') != 'X':
        config = config.with_updates(source={'manufactured': 'X'})
    schemes = list(schemes or [config.scheme])
    report = {'ppw': list(ppw_list), 'cfl': config.cfl, 'schemes': {}}
    rows = []
    for scheme in schemes:
        entry = {'ppw': [], 'dx': [], 'energy_err': [], 'charge_err': [],
                 'div_b_max': []}
        for ppw in ppw_list:
            nx = max(1, int(round((config.domain[0][1] - config.domain[0][0])
                                  / (TWO_PI / ppw))))
            cfg = config.with_updates(n_cells=[nx, *config.n_cells[1:]],
                                      scheme=scheme)
            cx, profile, ops, ms = build_run(cfg)
            tracker = ManufacturedErrorTracker(ops, ms)
            q_hat = ms.exact_charge_phasor(cfg.domain)
            state = tracker.reference_state(0.0)
            dt, n_steps = cfg.time_step()
            stepper = make_stepper(scheme, ops, dt, tol=cfg.tol,
                                   maxiter=cfg.max_iter)
            e_err = q_err = db = 0.0
            for _ in range(n_steps):
                state, cost = stepper.step(state)
                e_err = max(e_err, abs(hamiltonian(state, ops)
                                       - ms.exact_hamiltonian(state.t, cfg.domain)))
                q_err = max(q_err, abs(total_charge(state, ops)
                                       - np.real(q_hat * np.exp(-1j * state.t))))
                db = max(db, div_b_max(state, ops))
            entry['ppw'].append(ppw)
            entry['dx'].append(cfg.dx)
            entry['energy_err'].append(e_err)
            entry['charge_err'].append(q_err)
            entry['div_b_max'].append(db)
            rows.append([scheme, ppw, cfg.dx, e_err, q_err, db])
        entry['slope_energy'] = _fit_slope(entry['dx'], entry['energy_err'])
        entry['slope_charge'] = _fit_slope(entry['dx'], entry['charge_err'])
        report['schemes'][scheme] = entry
    if config.output_dir:
        _write_csv(os.path.join(config.output_dir, 'conservation.csv'),
                   ['scheme', 'ppw', 'dx', 'energy_err', 'charge_err',
                    'div_b_max'], rows)
    _write_summary(config, report, 'conservation')
    return report


def run_performance(config: RunConfig, ppw_list=(10, 20, 40), schemes=None):
    """Average iteration counts, block products and per-period cost."""
    schemes = list(schemes or [config.scheme])
    report = {'ppw': list(ppw_list), 'schemes': {}}
    rows = []
    for scheme in schemes:
        entry = {'ppw': [], 'iter_avg': [], 'block_products': [],
                 'field_ops': [], 'dim': [], 'identity_ok': True}
        for ppw in ppw_list:
            nx = max(1, int(round((config.domain[0][1] - config.domain[0][0])
                                  / (TWO_PI / ppw))))
            cfg = config.with_updates(n_cells=[nx, *config.n_cells[1:]],
                                      scheme=scheme)
            cx, profile, ops, ms = build_run(cfg)
            tracker = (ManufacturedErrorTracker(ops, ms)
                       if ms is not None and hasattr(ms, 'e_hat') else None)
            out = march(cfg, ops, tracker=tracker)
            bp_formula = step_block_products(scheme, **out['iter_avg'])
            identity_ok = abs(bp_formula - out['block_products_avg']) < 1e-9
            entry['identity_ok'] = bool(entry['identity_ok'] and identity_ok)
            dim = cx.V1.dim
            dt = out['dt']
            ppp = TWO_PI / dt
            entry['ppw'].append(ppw)
            entry['iter_avg'].append(out['iter_avg'])
            entry['block_products'].append(out['block_products_avg'])
            entry['field_ops'].append(local_field_ops(
                ppp, out['block_products_avg'], dim))
            entry['dim'].append(dim)
            rows.append([scheme, ppw, dim, json.dumps(out['iter_avg'],
                                                      sort_keys=True),
                         out['block_products_avg'], entry['field_ops'][-1]])
        report['schemes'][scheme] = entry
    if config.output_dir:
        _write_csv(os.path.join(config.output_dir, 'performance.csv'),
                   ['scheme', 'ppw', 'dim_v1', 'iter_avg', 'block_products',
                    'field_ops_per_period'], rows)
    _write_summary(config, report, 'performance')
    return report


def run_beam_2d(config: RunConfig, freq_method='auto'):
    """Gaussian-beam run with frequency-domain comparison.

    Marches the transient with the ramped beam source, solves the
    frequency-domain system once, and tracks the relative mismatch; the
    report carries per-period mean mismatch values and snapshot paths.
    """
    cx, profile, ops, beam = build_run(config)
    fs = FrequencySystem(ops, boundary_field=None)
    freq = fs.solve(tol=max(config.tol, 1e-10), method=freq_method)
    mismatch = TimeHarmonicMismatch(ops, freq.e_hat)
    prefix = None
    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        prefix = os.path.join(config.output_dir, 'beam2d')
        write_snapshot(prefix + '_freq_e', cx.V1, freq.e_hat,
                       meta={'kind': 'frequency-domain electric phasor',
                             'residual': freq.residual,
                             'method': freq.method})
    out = march(config, ops, mismatch=mismatch,
                csv_path=(prefix + '_steps.csv') if prefix else None,
                snapshot_prefix=prefix)
    series = np.array([(row['t'], row['mismatch']) for row in out['rows']])
    per_period = []
    n_periods = int(np.floor(config.n_periods))
    for k in range(n_periods):
        sel = (series[:, 0] > k * TWO_PI) & (series[:, 0] <= (k + 1) * TWO_PI)
        if sel.any():
            per_period.append(float(series[sel, 1].mean()))
    report = {'freq_method': freq.method, 'freq_residual': freq.residual,
              'mismatch_per_period': per_period,
              'final_mismatch': float(series[-1, 1]) if len(series) else None,
              'div_b_max': out['maxes']['div_b'],
              'iter_avg': out['iter_avg'],
              'block_products_avg': out['block_products_avg'],
              'diverged': out['diverged']}
    _write_summary(config, report, 'beam2d')
    return report


def run_freqsolve(config: RunConfig, method='auto'):
    """Frequency-domain solve of the configured problem, with snapshot."""
    cx, profile, ops, extra = build_run(config)
    fs = FrequencySystem(ops)
    sol = fs.solve(tol=max(config.tol, 1e-10), method=method)
    report = {'method': sol.method, 'residual': float(sol.residual),
              'e_hat_max': float(np.abs(sol.e_hat).max()),
              'div_b_hat_max': float(np.abs(cx.div @ sol.b_hat).max())}
    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        write_snapshot(os.path.join(config.output_dir, 'freq_e'), cx.V1,
                       sol.e_hat, meta={'residual': sol.residual})
    _write_summary(config, report, 'freqsolve')
    return report
