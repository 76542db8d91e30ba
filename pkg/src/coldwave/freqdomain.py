"""Frequency-domain companion solver and the time-harmonic comparison.

For a time-harmonic ansatz the semi-discrete system collapses onto the
electric coefficients: curl-curl minus the dielectric-weighted mass, with
the impedance penalty entering through an imaginary boundary term,

    (C^T M2 C - M1_eps - i A1) E_hat = -i S_hat,

where ``S_hat`` are the complex boundary-source moments. The magnetic
phasor follows exactly from the curl matrix (``B_hat = -i C E_hat``, so
its discrete divergence vanishes identically), and the current phasor is
recovered by projecting the pointwise current response of the electric
phasor back onto the curl-conforming space.

The complex solve runs on the equivalent real system of twice the size so
the counted real solvers and preconditioners are reused; near cutoffs the
operator conditioning degrades and a sparse direct factorization is used
as fallback (or on request).
"""

from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .assembly import (SystemOperators, assemble_boundary_source,
                       assemble_dielectric_mass)
from .derham import TensorSpace
from .integrators import FieldState
from .solvers import (BlockDiagPreconditioner, KroneckerMassSolver,
                      SolveStats, SolverBreakdown, pbicgstab)

__all__ = [
    'FrequencySystem',
    'FrequencySolution',
    'assemble_frequency_system',
    'TimeHarmonicMismatch',
    'write_snapshot',
    'read_snapshot',
]


@dataclass
class FrequencySolution:
    """Complex phasors of the time-harmonic solution."""

    e_hat: np.ndarray
    b_hat: np.ndarray
    y_hat: np.ndarray
    residual: float
    method: str
    stats: SolveStats = None


class FrequencySystem:
    """Assembled frequency-domain operator with solve strategies."""

    def __init__(self, ops: SystemOperators, m1_eps=None, boundary_field=None):
        self.ops = ops
        cx = ops.complex
        if m1_eps is None:
            m1_eps = assemble_dielectric_mass(cx.V1, ops.profile, ops.quad)
        self.m1_eps = m1_eps.tocsr()
        self.matrix = (ops.curl_sq.astype(complex) - self.m1_eps
                       - 1j * ops.a1).tocsr()
        if boundary_field is not None and ops.faces:
            s_hat = assemble_boundary_source(cx.V1, cx, ops.faces,
                                             boundary_field, ops.quad)
        else:
            s_hat = ops.s_r + 1j * ops.s_i
        self.s_hat = s_hat
        self.rhs = -1j * s_hat

    def real_form(self):
        """Equivalent real system of twice the dimension."""
        A_r = sparse.csr_matrix(self.matrix.real)
        A_i = sparse.csr_matrix(self.matrix.imag)
        big = sparse.bmat([[A_r, -A_i], [A_i, A_r]], format='csr')
        rhs = np.concatenate([self.rhs.real, self.rhs.imag])
        return big, rhs

    def solve(self, tol=1e-10, maxiter=2000, method='auto') -> FrequencySolution:
        """Solve for the phasors; ``method`` in {'auto', 'iterative', 'direct'}.

        'auto' tries the preconditioned iterative solve and falls back to
        a sparse direct factorization on non-convergence or breakdown
        (expected near cutoffs, where the operator is badly conditioned).
        """
        ops = self.ops
        n = ops.complex.V1.dim
        e_hat = None
        stats = None
        used = method
        if method in ('auto', 'iterative'):
            big, rhs = self.real_form()
            k1 = KroneckerMassSolver(ops.complex.V1, ops.quad)
            precond = BlockDiagPreconditioner([(k1, n), (k1, n)])
            try:
                x, stats = pbicgstab(big, rhs, precond=precond, tol=tol,
                                     maxiter=maxiter)
                if stats.converged:
                    e_hat = x[:n] + 1j * x[n:]
                    used = 'iterative'
                elif method == 'iterative':
                    raise SolverBreakdown(
                        f'frequency solve stalled at residual '
                        f'{stats.final_residual:.3e}')
            except SolverBreakdown:
                if method == 'iterative':
                    raise
        if e_hat is None:
            lu = splu(self.matrix.tocsc())
            e_hat = lu.solve(self.rhs)
            used = 'direct'
        res = np.linalg.norm(self.matrix @ e_hat - self.rhs)
        scale = np.linalg.norm(self.rhs)
        b_hat = -1j * (ops.complex.curl @ e_hat)
        y_hat = self._recover_current(e_hat)
        return FrequencySolution(e_hat=e_hat, b_hat=b_hat, y_hat=y_hat,
                                 residual=res / (scale if scale else 1.0),
                                 method=used, stats=stats)

    def _recover_current(self, e_hat):
        """Project the pointwise current response of the electric phasor.

        Applies the (plasma-frequency-scaled) inverse current-response
        tensor at quadrature points; identically zero wherever the plasma
        frequency vanishes.
        """
        from .plasma import current_response_inverse
        from .projections import project_l2

        ops = self.ops
        cx = ops.complex

        def y_fn_factory(part):
            def fn(pts):
                flat = pts.reshape(-1, 3)
                T = current_response_inverse(ops.profile, flat)
                e_vals = _eval_many(cx.V1, e_hat, pts)
                y = np.einsum('mij,mj->mi', T, e_vals.reshape(-1, 3))
                y = y.reshape(pts.shape)
                return y.real if part == 'r' else y.imag
            return fn

        quad = ops.quad
        k1 = KroneckerMassSolver(cx.V1, quad)
        y_r = project_l2(cx.V1, y_fn_factory('r'), quad, mass=ops.m1, precond=k1)
        y_i = project_l2(cx.V1, y_fn_factory('i'), quad, mass=ops.m1, precond=k1)
        return y_r + 1j * y_i


def _eval_many(space, vec, pts):
    from .derham import FieldCoeffs, eval_field
    flat = pts.reshape(-1, 3)
    out = np.empty((len(flat), 3), dtype=complex)
    out[:] = eval_field(FieldCoeffs(space, vec.real.astype(float)), flat)
    out += 1j * eval_field(FieldCoeffs(space, np.ascontiguousarray(vec.imag)), flat)
    return out


def assemble_frequency_system(ops: SystemOperators, m1_eps=None,
                              boundary_field=None) -> FrequencySystem:
    """Convenience constructor mirroring the time-domain operator bundle."""
    return FrequencySystem(ops, m1_eps=m1_eps, boundary_field=boundary_field)


# =============================================================================
class TimeHarmonicMismatch:
    """Relative distance of a transient run to the time-harmonic solution.

    Tracks ``||E(t) - Re{E_hat e^{-it}}|| / max_hist(||E_th||, ||E||)``
    in the electric mass norm; the normalization is the running maximum
    over the recorded history, so the indicator is computable online.
    """

    def __init__(self, ops: SystemOperators, e_hat):
        self.ops = ops
        self.e_hat = np.asarray(e_hat)
        self._max_norm = 0.0
        self.history = []

    def _norm(self, v):
        return float(np.sqrt(max(v @ (self.ops.m1 @ v), 0.0)))

    def track(self, state: FieldState) -> float:
        e_th = np.real(self.e_hat * np.exp(-1j * state.t))
        n_th = self._norm(e_th)
        n_h = self._norm(state.e)
        self._max_norm = max(self._max_norm, n_th, n_h)
        diff = self._norm(state.e - e_th)
        value = diff / self._max_norm if self._max_norm > 0 else 0.0
        self.history.append((state.t, value))
        return value


# =============================================================================
def write_snapshot(prefix, space: TensorSpace, vec, meta=None):
    """Write a field snapshot: flat binary + JSON header sidecar.

    Real data is stored as C-ordered float64; complex data as the real
    part followed by the imaginary part. The header records the component
    shapes, the form degree, the layout and any user metadata.
    """
    vec = np.asarray(vec)
    is_complex = np.iscomplexobj(vec)
    if is_complex:
        payload = np.concatenate([vec.real, vec.imag]).astype(np.float64)
    else:
        payload = vec.astype(np.float64)
    bin_path = f'{prefix}.bin'
    payload.tofile(bin_path)
    header = {
        'form_degree': space.form_degree,
        'component_shapes': [list(s) for s in space.component_shapes],
        'dim': space.dim,
        'layout': 'real_then_imag' if is_complex else 'real',
        'dtype': 'float64',
        'meta': meta or {},
    }
    with open(f'{prefix}.json', 'w') as fh:
        json.dump(header, fh, indent=1, sort_keys=True)
    return bin_path


def read_snapshot(prefix):
    """Read back a snapshot written by :func:`write_snapshot`."""
    with open(f'{prefix}.json') as fh:
        header = json.load(fh)
    data = np.fromfile(f'{prefix}.bin', dtype=np.float64)
    if header['layout'] == 'real_then_imag':
        n = header['dim']
        data = data[:n] + 1j * data[n:]
    return data, header
