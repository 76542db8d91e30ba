"""Tracked quantities, error taxonomy and the operation-count cost model.

The cost model counts matrix-vector block products (one product of one
assembled operator with one field-sized block). Per time step:

* Crank-Nicolson: ``15 + 12 n`` (one 3-block solve),
* Poisson splitting: ``17 + 4 n_maxwell + 8 n_plasma`` (two 1-block wave
  solves, one 2-block plasma solve),
* energy splitting: ``18 + 4 n_electric + 8 n_magnetic_plasma``,

where each ``n`` is the (average) iteration count of the corresponding
solve and the constants cover the right-hand-side products. These formulas
are exact identities in the recorded counts by construction: the inversion
part reproduces the solver counters (conjugate gradient spends ``2 + 2n``
products, the stabilized biconjugate method ``2 + 4n``) multiplied by the
number of blocks each operator touches.

The per-period cost is ``steps-per-period x block-products x block size``
(local field operations), which is what makes runs of different resolution
comparable.
"""

from __future__ import annotations

import numpy as np

from .assembly import SystemOperators, BoxQuadrature
from .derham import TensorSpace
from .integrators import FieldState, StepCost

__all__ = [
    'hamiltonian',
    'total_charge',
    'div_b_max',
    'energy_balance_residual',
    'step_block_products',
    'local_field_ops',
    'GridEvaluator',
    'ManufacturedErrorTracker',
]


# =============================================================================
def hamiltonian(state: FieldState, ops: SystemOperators) -> float:
    """Discrete field energy ``(E M1 E + B M2 B + Y M1 Y) / 2``."""
    return 0.5 * (state.e @ (ops.m1 @ state.e)
                  + state.b @ (ops.m2 @ state.b)
                  + state.y @ (ops.m1 @ state.y))


def total_charge(state: FieldState, ops: SystemOperators) -> float:
    """Integral of the weak divergence of the electric field.

    Pairs the weak-divergence matrix with the constant-one function of the
    scalar space. On a fully periodic box this is identically zero; with
    artificial faces it equals the boundary flux of the electric field.
    (In Gaussian units the physical charge carries an extra ``1/(4 pi)``.)
    """
    return float(ops.charge_row @ state.e)


def div_b_max(state: FieldState, ops: SystemOperators) -> float:
    """Max-norm of the exact discrete divergence of the magnetic field."""
    div_b = ops.complex.div @ state.b
    return float(np.abs(div_b).max(initial=0.0))


def energy_balance_residual(prev: FieldState, new: FieldState,
                            ops: SystemOperators, dt, source_scale=1.0):
    """Defect of the discrete energy balance over one step.

    Compares the energy increment rate with the midpoint evaluation of the
    boundary dissipation, the collisional dissipation and the source input
    power. Second-order schemes drive this to zero quadratically; the
    ideal homogeneous trapezoidal step keeps it at solver tolerance.
    """
    h1 = hamiltonian(prev, ops)
    h2 = hamiltonian(new, ops)
    e_mid = 0.5 * (prev.e + new.e)
    y_mid = 0.5 * (prev.y + new.y)
    t_mid = 0.5 * (prev.t + new.t)
    source = source_scale * (np.cos(t_mid) * ops.s_r + np.sin(t_mid) * ops.s_i)
    power = (-(e_mid @ (ops.a1 @ e_mid)) - (y_mid @ (ops.m1_nu @ y_mid))
             + e_mid @ source)
    return (h2 - h1) / dt - power


# =============================================================================
def step_block_products(scheme, **iters) -> float:
    """Block products per step from (average) iteration counts.

    Keyword names per scheme: ``n`` (crank_nicolson), ``n_maxwell`` and
    ``n_plasma`` (poisson), ``n_electric`` and ``n_magnetic_plasma``
    (hamiltonian).
    """
    if scheme == 'crank_nicolson':
        return 15.0 + 12.0 * iters['n']
    if scheme == 'poisson':
        return 17.0 + 4.0 * iters['n_maxwell'] + 8.0 * iters['n_plasma']
    if scheme == 'hamiltonian':
        return (18.0 + 4.0 * iters['n_electric']
                + 8.0 * iters['n_magnetic_plasma'])
    raise ValueError(f'unknown scheme {scheme!r}')


def step_cost_iterations(cost: StepCost):
    """Average iteration counts of one step, keyed for the formula above."""
    its = cost.iterations()
    if cost.scheme == 'crank_nicolson':
        return {'n': float(np.mean(its['full']))}
    if cost.scheme == 'poisson':
        return {'n_maxwell': float(np.mean(its['maxwell'])),
                'n_plasma': float(np.mean(its['plasma']))}
    return {'n_electric': float(np.mean(its['electric'])),
            'n_magnetic_plasma': float(np.mean(its['magnetic_plasma']))}


def local_field_ops(ppp, block_products, dim) -> float:
    """Per-period cost: steps per period x block products x block size."""
    if min(ppp, block_products, dim) < 0:
        raise ValueError('cost factors must be nonnegative')
    return float(ppp) * float(block_products) * float(dim)


# =============================================================================
class GridEvaluator:
    """Evaluate discrete fields and integrate squares on a quadrature grid.

    Precomputes per-direction dense basis tables at the points of a
    :class:`BoxQuadrature`, so repeated per-step error norms are cheap.
    """

    def __init__(self, space: TensorSpace, quad: BoxQuadrature):
        self.space = space
        self.quad = quad
        self.tables = []
        for comp in space.components:
            self.tables.append([comp[d].eval_dense(quad.rules[d].flat_points)[0]
                                for d in range(3)])
        self.weights = np.einsum('x,y,z->xyz',
                                 quad.rules[0].flat_weights,
                                 quad.rules[1].flat_weights,
                                 quad.rules[2].flat_weights)
        px = quad.rules[0].flat_points
        py = quad.rules[1].flat_points
        pz = quad.rules[2].flat_points
        self.coords = (px[:, None, None], py[None, :, None], pz[None, None, :])
        self.grid_shape = (px.size, py.size, pz.size)

    def sample(self, fn):
        """Sample a vector callable ``fn(pts) -> (..., 3)`` on the grid."""
        pts = np.stack(np.broadcast_arrays(*self.coords), axis=-1)
        vals = np.asarray(fn(pts))
        return [np.ascontiguousarray(vals[..., c]) for c in range(3)]

    def values(self, vec):
        """Component values of a coefficient vector on the grid."""
        out = []
        for c in range(self.space.n_components):
            coeffs = self.space.component_view(np.asarray(vec), c)
            t = self.tables[c]
            out.append(np.einsum('xi,yj,zk,ijk->xyz', t[0], t[1], t[2], coeffs))
        return out

    def norm2(self, comps):
        """Squared L2 norm of sampled component values."""
        return float(sum(np.sum(self.weights * np.abs(c) ** 2) for c in comps))

    def diff_norm(self, comps_a, comps_b):
        return np.sqrt(float(sum(
            np.sum(self.weights * np.abs(a - b) ** 2)
            for a, b in zip(comps_a, comps_b))))


class ManufacturedErrorTracker:
    """Projection / total / solver errors against a manufactured solution.

    The exact solution is time-harmonic, so its samples and discrete
    references split into cosine and sine parts that are precomputed once;
    per-step error norms then cost a few small tensor contractions. Errors
    are reported per field and combined, relative to the exact solution
    norm at the same instant.
    """

    FIELDS = ('e', 'b', 'y')

    def __init__(self, ops: SystemOperators, solution, quad=None,
                 projections=None):
        from .projections import project_l2, project_commuting_v2

        cx = ops.complex
        if quad is None:
            orders = tuple(min(p + 3, 10) for p in cx.degrees)
            quad = BoxQuadrature(cx, orders)
        self.quad = quad
        self.ev1 = GridEvaluator(cx.V1, quad)
        self.ev2 = GridEvaluator(cx.V2, quad)
        self.sol = solution

        def parts(hat_fn, ev):
            return (ev.sample(lambda pts: hat_fn(pts).real),
                    ev.sample(lambda pts: hat_fn(pts).imag))

        self.exact = {'e': parts(solution.e_hat, self.ev1),
                      'b': parts(solution.b_hat, self.ev2),
                      'y': parts(solution.y_hat, self.ev1)}

        if projections is None:
            proj_e = project_l2(cx.V1, lambda p: solution.e(0.0, p), quad)
            proj_e_s = project_l2(cx.V1, lambda p: solution.e(np.pi / 2, p), quad)
            proj_y = project_l2(cx.V1, lambda p: solution.y(0.0, p), quad)
            proj_y_s = project_l2(cx.V1, lambda p: solution.y(np.pi / 2, p), quad)
            proj_b = project_commuting_v2(cx, lambda p: solution.b(0.0, p))
            proj_b_s = project_commuting_v2(cx, lambda p: solution.b(np.pi / 2, p))
            projections = {'e': (proj_e, proj_e_s), 'b': (proj_b, proj_b_s),
                           'y': (proj_y, proj_y_s)}
        self.proj_coeffs = projections
        self.proj_vals = {
            'e': tuple(self.ev1.values(c) for c in projections['e']),
            'b': tuple(self.ev2.values(c) for c in projections['b']),
            'y': tuple(self.ev1.values(c) for c in projections['y']),
        }

    def reference_state(self, t=0.0) -> FieldState:
        """Projected exact fields at time t (the canonical initial datum)."""
        ct, st = np.cos(t), np.sin(t)
        return FieldState(
            e=ct * self.proj_coeffs['e'][0] + st * self.proj_coeffs['e'][1],
            b=ct * self.proj_coeffs['b'][0] + st * self.proj_coeffs['b'][1],
            y=ct * self.proj_coeffs['y'][0] + st * self.proj_coeffs['y'][1],
            t=t)

    @staticmethod
    def _combine(parts, t):
        ct, st = np.cos(t), np.sin(t)
        return [ct * r + st * i for r, i in zip(parts[0], parts[1])]

    def errors(self, state: FieldState):
        """Dict of relative errors at the state's time, per field."""
        out = {}
        evs = {'e': self.ev1, 'b': self.ev2, 'y': self.ev1}
        vals = {'e': self.ev1.values(state.e), 'b': self.ev2.values(state.b),
                'y': self.ev1.values(state.y)}
        tot2 = {'exact': 0.0, 'total': 0.0, 'solver': 0.0, 'proj': 0.0}
        for f in self.FIELDS:
            ev = evs[f]
            exact = self._combine(self.exact[f], state.t)
            proj = self._combine(self.proj_vals[f], state.t)
            norm_ex = np.sqrt(max(ev.norm2(exact), 1e-300))
            e_tot = ev.diff_norm(exact, vals[f])
            e_sol = ev.diff_norm(proj, vals[f])
            e_prj = ev.diff_norm(exact, proj)
            out[f'total_{f}'] = e_tot / norm_ex
            out[f'solver_{f}'] = e_sol / norm_ex
            out[f'proj_{f}'] = e_prj / norm_ex
            tot2['exact'] += norm_ex ** 2
            tot2['total'] += e_tot ** 2
            tot2['solver'] += e_sol ** 2
            tot2['proj'] += e_prj ** 2
        norm_all = np.sqrt(tot2['exact'])
        out['total'] = np.sqrt(tot2['total']) / norm_all
        out['solver'] = np.sqrt(tot2['solver']) / norm_all
        out['proj'] = np.sqrt(tot2['proj']) / norm_all
        return out
