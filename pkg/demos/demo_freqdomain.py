"""Frequency-domain solves on the benchmark line.

Solves the time-harmonic system for the vacuum plane wave (unit traveling
wave up to discretization error) and for the extraordinary manufactured
solution on the density ramp, comparing against the projected exact
phasor.
"""

import numpy as np

from _common import setup

setup()

from coldwave import (FrequencySystem, ManufacturedSolution,
                      build_complex, build_system_operators, project_l2,
                      ramp_profile, vacuum_profile)

BOX = ((0.0, 3 * np.pi), (0.0, 2 * np.pi), (0.0, 2 * np.pi))

for label, profile, mode in (('vacuum plane wave', vacuum_profile(), 'O'),
                             ('ramp, X polarization', ramp_profile(), 'X')):
    cx = build_complex((30, 1, 1), (3, 1, 1), (False, True, True), BOX)
    solution = ManufacturedSolution(mode, profile)
    ops = build_system_operators(cx, profile, [(0, 0), (0, 1)],
                                 solution.source_spec())
    freq = FrequencySystem(ops).solve(tol=1e-11)
    ref = (project_l2(cx.V1, lambda p: solution.e_hat(p).real, ops.quad,
                      mass=ops.m1)
           + 1j * project_l2(cx.V1, lambda p: solution.e_hat(p).imag,
                             ops.quad, mass=ops.m1))
    diff = freq.e_hat - ref
    rel = np.sqrt(abs(diff.conj() @ (ops.m1 @ diff))
                  / abs(ref.conj() @ (ops.m1 @ ref)))
    div_b = np.abs(cx.div @ freq.b_hat).max()
    print(f'{label:24s} method {freq.method:9s} '
          f'relative defect vs projected exact {rel:.2e}, '
          f'|div b_hat| {div_b:.1e}')
