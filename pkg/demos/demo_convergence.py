"""Manufactured-solution convergence of the three time schemes.

Refines the benchmark grid at a fixed Courant number and reports the
max-in-time relative errors. All three schemes are second order; the
Poisson splitting is consistently the most accurate and the unsplit
Crank-Nicolson step the least.
"""

from _common import output_dir, setup

plt = setup()

from coldwave import benchmark_config, run_convergence_study

PPW = (8, 16, 32)

for mode in ('O', 'X'):
    config = benchmark_config(mode=mode, cfl=0.25, n_periods=3.0)
    report = run_convergence_study(
        config, ppw_list=PPW,
        schemes=['poisson', 'hamiltonian', 'crank_nicolson'])
    print(f'--- {mode}-mode, courant 0.25, three periods ---')
    print(f'{"scheme":16s} ' + ' '.join(f'ppw {p:<8d}' for p in PPW)
          + ' slope')
    for scheme, entry in report['schemes'].items():
        errs = ' '.join(f'{e:.3e}' for e in entry['total'])
        print(f'{scheme:16s} {errs}  {entry["slope_total"]:.2f}')

    if plt is not None:
        fig, ax = plt.subplots(figsize=(5, 4))
        for scheme, entry in report['schemes'].items():
            ax.loglog(entry['dx'], entry['total'], 'o-', label=scheme)
        ax.loglog(entry['dx'], [0.1 * d ** 2 for d in entry['dx']], 'k--',
                  label='slope 2')
        ax.set_xlabel('grid size')
        ax.set_ylabel('max-in-time relative error')
        ax.legend()
        ax.set_title(f'{mode}-mode convergence')
        path = f'{output_dir()}/convergence_{mode}.png'
        fig.savefig(path, dpi=110, bbox_inches='tight')
        print(f'wrote {path}')
