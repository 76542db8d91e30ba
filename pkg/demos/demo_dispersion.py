"""Local dispersion diagnostics along a density ramp.

Scans the squared refractive index of both perpendicular polarizations on
a steep ramp, locating the ordinary-mode cutoff (plasma frequency reaching
the wave frequency) and the upper-hybrid resonance of the extraordinary
mode.
"""

import numpy as np

from _common import output_dir, setup

plt = setup()

from coldwave import dispersion_scan, ramp_profile, stix_parameters

profile = ramp_profile(slope=0.25)          # plasma frequency x/4
x = np.linspace(0.0, 6.0, 1201)
pts = np.column_stack([x, 0 * x, 0 * x])

print('Stix parameters at a few points (collisionless):')
for xi in (0.0, 2.0, 4.0):
    S, D, P = stix_parameters(profile.omega_p(xi, 0, 0), 0.5, 0.0)
    print(f'  x = {xi:4.1f}:  S = {S.real:+.3f}  D = {D.real:+.3f}  '
          f'P = {P.real:+.3f}')

scan_o = dispersion_scan(profile, pts, 'O')
scan_x = dispersion_scan(profile, pts, 'X')
xc = x[:-1][scan_o['cutoff']]
xr = x[:-1][scan_x['resonance']]
print(f'ordinary-mode cutoff near x = {xc[0]:.3f} (analytic 4.0)')
print(f'upper-hybrid resonance near x = {xr[0]:.3f} '
      f'(analytic {4 * np.sqrt(0.75):.3f})')

if plt is not None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(x, scan_o['n2'].real, label='ordinary n^2 = P')
    ax.plot(x, np.clip(scan_x['n2'].real, -4, 4),
            label='extraordinary n^2 = S - D^2/S')
    ax.axhline(0, color='k', lw=0.5)
    ax.set_ylim(-4, 2)
    ax.set_xlabel('x')
    ax.legend()
    ax.set_title('local perpendicular dispersion on the ramp')
    path = f'{output_dir()}/dispersion.png'
    fig.savefig(path, dpi=110)
    print(f'wrote {path}')
