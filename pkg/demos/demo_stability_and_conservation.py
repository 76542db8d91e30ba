"""Long-time stability scan and conserved-quantity tracking.

At a fixed coarse grid, the energy-splitting scheme blows up once the
Courant number passes ~1/4 while the Poisson splitting and Crank-Nicolson
remain second order at Courant numbers up to 1. Under refinement at fixed
Courant number, the energy and total-charge errors converge quadratically
and the magnetic divergence stays at machine zero.
"""

from _common import setup

setup()

from coldwave import benchmark_config, run_conservation, run_stability_scan

config = benchmark_config(mode='X', ppw=10, n_periods=3.0)
report = run_stability_scan(config, cfl_list=(0.33, 0.5, 1.0),
                            schemes=['poisson', 'hamiltonian',
                                     'crank_nicolson'])
print('--- stability at 10 points per wavelength ---')
for scheme, entry in report['schemes'].items():
    cells = []
    for cfl, err, div in zip(entry['cfl'], entry['error'],
                             entry['diverged']):
        cells.append(f'cfl {cfl}: ' + ('diverged' if div else f'{err:.2e}'))
    print(f'{scheme:16s} ' + ' | '.join(cells))

report = run_conservation(benchmark_config(mode='X', n_periods=3.0),
                          ppw_list=(10, 20, 40),
                          schemes=['poisson', 'crank_nicolson'])
print('--- conservation under refinement (courant 0.25) ---')
for scheme, entry in report['schemes'].items():
    print(f'{scheme:16s} energy slope {entry["slope_energy"]:.2f}, '
          f'charge slope {entry["slope_charge"]:.2f}, '
          f'max |div B| {max(entry["div_b_max"]):.2e}')
