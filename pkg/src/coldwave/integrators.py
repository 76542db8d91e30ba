"""Geometric time integrators for the semi-discrete cold-plasma system.

Three second-order schemes advance the coefficient triplet (electric,
magnetic, current):

* a splitting of the Poisson structure into a Maxwell sub-flow (implicit
  trapezoidal wave step) and a plasma sub-flow (trapezoidal
  current/electric exchange with cyclotron rotation), composed
  symmetrically (half/full/half),
* a splitting of the energy into its electric part (exactly integrable)
  and a magnetic-plasma part (block-triangular trapezoidal step), composed
  the same way,
* a Crank-Nicolson step of the full system, for comparison.

The impedance boundary penalty and the incoming-source arrays always stay
in the same sub-flow as the magnetic curl term: splitting them apart would
enforce the wrong boundary condition on each sub-flow and produce a large
spurious boundary error, so the placement is asserted structurally here by
construction of the flows.

Every implicit solve is preconditioned with (block-diagonal) Kronecker
mass solvers, warm-started from the previous time level, and returns its
operation counters; a step reports the list of its solves so the cost
model can reconstruct the per-step matrix-vector block products exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .assembly import SystemOperators
from .plasma import envelope as envelope_ramp
from .solvers import (BlockDiagPreconditioner, ConvergenceFailure,
                      KroneckerMassSolver, pbicgstab, pcg)

__all__ = [
    'FieldState',
    'StepCost',
    'RHS_BLOCK_PRODUCTS',
    'flow_maxwell',
    'flow_plasma',
    'flow_electric',
    'flow_magnetic_plasma',
    'crank_nicolson_flow',
    'PoissonSplitStepper',
    'HamiltonianSplitStepper',
    'CrankNicolsonStepper',
    'make_stepper',
    'SCHEMES',
    'build_evolution_operator',
]

# per-step matrix-vector block products spent on right-hand sides, by
# scheme (fixed metadata of the cost model; the inversion part is counted
# live from the solver statistics)
RHS_BLOCK_PRODUCTS = {'crank_nicolson': 9, 'poisson': 9, 'hamiltonian': 10}


# =============================================================================
@dataclass
class FieldState:
    """Coefficient triplet at one time level."""

    e: np.ndarray
    b: np.ndarray
    y: np.ndarray
    t: float

    def copy(self):
        return FieldState(self.e.copy(), self.b.copy(), self.y.copy(), self.t)

    @classmethod
    def zeros(cls, ops: SystemOperators, t=0.0):
        return cls(np.zeros(ops.complex.V1.dim), np.zeros(ops.complex.V2.dim),
                   np.zeros(ops.complex.V1.dim), t)

    def as_vector(self):
        return np.concatenate([self.e, self.b, self.y])

    @classmethod
    def from_vector(cls, ops: SystemOperators, vec, t=0.0):
        n1 = ops.complex.V1.dim
        n2 = ops.complex.V2.dim
        return cls(vec[:n1].copy(), vec[n1:n1 + n2].copy(),
                   vec[n1 + n2:].copy(), t)

    def norm_inf(self):
        return max(np.abs(self.e).max(initial=0.0),
                   np.abs(self.b).max(initial=0.0),
                   np.abs(self.y).max(initial=0.0))


@dataclass
class StepCost:
    """Solver statistics of one time step, for the cost model."""

    scheme: str
    solves: list = field(default_factory=list)   # (label, SolveStats, blocks)

    def add(self, label, stats, blocks):
        self.solves.append((label, stats, blocks))

    def iterations(self):
        """Iteration counts per solve label."""
        out = {}
        for label, stats, _ in self.solves:
            out.setdefault(label, []).append(stats.iterations)
        return out

    def block_products(self) -> float:
        """Matrix-vector block products spent in this step."""
        inv = sum(blocks * stats.total_products
                  for _, stats, blocks in self.solves)
        return inv + RHS_BLOCK_PRODUCTS[self.scheme]


def _check_solve(label, stats):
    if not stats.converged:
        raise ConvergenceFailure(
            f'{label} solve did not converge '
            f'(residual {stats.final_residual:.3e})', stats)
    return stats


# =============================================================================
def _source_factors(t_start, dt):
    return (np.sin(t_start + dt) - np.sin(t_start),
            np.cos(t_start + dt) - np.cos(t_start))


def maxwell_matrix(ops: SystemOperators, dt):
    """Implicit wave operator ``M1 + dt^2/4 C^T M2 C + dt/2 A1`` (SPD)."""
    return (ops.m1 + (dt ** 2 / 4.0) * ops.curl_sq + (dt / 2.0) * ops.a1).tocsr()


def flow_maxwell(state: FieldState, ops: SystemOperators, dt, t_start,
                 tol=1e-12, maxiter=1000, source_scale=1.0,
                 matrix=None, precond=None, cost: StepCost = None):
    """Trapezoidal Maxwell sub-flow (electric/magnetic exchange).

    Solves for the midpoint electric field; the source and the boundary
    penalty belong to this sub-flow. The current is frozen.
    """
    A = maxwell_matrix(ops, dt) if matrix is None else matrix
    P = KroneckerMassSolver(ops.complex.V1, ops.quad) if precond is None else precond
    s, c = _source_factors(t_start, dt)
    rhs = ops.m1 @ state.e + (dt / 2.0) * (ops.ct_m2 @ state.b)
    if source_scale:
        rhs = rhs + source_scale * (0.5 * s * ops.s_r - 0.5 * c * ops.s_i)
    e_half, stats = pcg(A, rhs, precond=P, x0=state.e, tol=tol,
                        maxiter=maxiter)
    _check_solve('maxwell', stats)
    if cost is not None:
        cost.add('maxwell', stats, 1)
    e_new = 2.0 * e_half - state.e
    b_new = state.b - dt * (ops.curl @ e_half)
    return FieldState(e_new, b_new, state.y.copy(), state.t + dt)


def plasma_matrix(ops: SystemOperators, dt):
    """Trapezoidal current/electric block system (non-symmetric)."""
    return sparse.bmat([
        [ops.m1, (dt / 2.0) * ops.m1_w],
        [-(dt / 2.0) * ops.m1_w, ops.m1 + (dt / 2.0) * ops.rot_nu],
    ], format='csr')


def flow_plasma(state: FieldState, ops: SystemOperators, dt,
                tol=1e-12, maxiter=1000, matrix=None, precond=None,
                cost: StepCost = None):
    """Trapezoidal plasma sub-flow: current/electric exchange, rotation and
    collisional damping; the magnetic field is frozen."""
    A = plasma_matrix(ops, dt) if matrix is None else matrix
    if precond is None:
        k1 = KroneckerMassSolver(ops.complex.V1, ops.quad)
        precond = BlockDiagPreconditioner([(k1, ops.complex.V1.dim)] * 2)
    rhs = np.concatenate([
        ops.m1 @ state.e - (dt / 2.0) * (ops.m1_w @ state.y),
        ops.m1 @ state.y - (dt / 2.0) * (ops.rot_nu @ state.y)
        + (dt / 2.0) * (ops.m1_w @ state.e),
    ])
    x0 = np.concatenate([state.e, state.y])
    sol, stats = pbicgstab(A, rhs, precond=precond, x0=x0, tol=tol,
                           maxiter=maxiter)
    _check_solve('plasma', stats)
    if cost is not None:
        cost.add('plasma', stats, 2)
    n1 = ops.complex.V1.dim
    return FieldState(sol[:n1], state.b.copy(), sol[n1:], state.t + dt)


def flow_electric(state: FieldState, ops: SystemOperators, dt,
                  tol=1e-12, maxiter=1000, precond=None,
                  cost: StepCost = None):
    """Exact flow of the electric energy: the electric field is frozen and
    feeds the magnetic field and the current linearly in time."""
    P = KroneckerMassSolver(ops.complex.V1, ops.quad) if precond is None else precond
    b_new = state.b - dt * (ops.curl @ state.e)
    rhs = ops.m1 @ state.y + dt * (ops.m1_w @ state.e)
    y_new, stats = pcg(ops.m1, rhs, precond=P, x0=state.y, tol=tol,
                       maxiter=maxiter)
    _check_solve('electric', stats)
    if cost is not None:
        cost.add('electric', stats, 1)
    return FieldState(state.e.copy(), b_new, y_new, state.t + dt)


def magnetic_plasma_matrix(ops: SystemOperators, dt):
    """Block-triangular system of the magnetic-plasma energy sub-flow."""
    n1 = ops.complex.V1.dim
    return sparse.bmat([
        [ops.m1 + (dt / 2.0) * ops.a1, (dt / 2.0) * ops.m1_w],
        [sparse.csr_matrix((n1, n1)), ops.m1 + (dt / 2.0) * ops.rot_nu],
    ], format='csr')


def flow_magnetic_plasma(state: FieldState, ops: SystemOperators, dt, t_start,
                         tol=1e-12, maxiter=1000, source_scale=1.0,
                         matrix=None, precond=None, cost: StepCost = None):
    """Trapezoidal magnetic-plasma sub-flow; carries the curl term, the
    boundary penalty and the source. The magnetic field is frozen."""
    A = magnetic_plasma_matrix(ops, dt) if matrix is None else matrix
    if precond is None:
        k1 = KroneckerMassSolver(ops.complex.V1, ops.quad)
        precond = BlockDiagPreconditioner([(k1, ops.complex.V1.dim)] * 2)
    s, c = _source_factors(t_start, dt)
    rhs_e = (ops.m1 @ state.e - (dt / 2.0) * (ops.a1 @ state.e)
             + dt * (ops.ct_m2 @ state.b)
             - (dt / 2.0) * (ops.m1_w @ state.y))
    if source_scale:
        rhs_e = rhs_e + source_scale * (s * ops.s_r - c * ops.s_i)
    rhs_y = ops.m1 @ state.y - (dt / 2.0) * (ops.rot_nu @ state.y)
    x0 = np.concatenate([state.e, state.y])
    sol, stats = pbicgstab(A, np.concatenate([rhs_e, rhs_y]), precond=precond,
                           x0=x0, tol=tol, maxiter=maxiter)
    _check_solve('magnetic_plasma', stats)
    if cost is not None:
        cost.add('magnetic_plasma', stats, 2)
    n1 = ops.complex.V1.dim
    return FieldState(sol[:n1], state.b.copy(), sol[n1:], state.t + dt)


def crank_nicolson_matrix(ops: SystemOperators, dt):
    n2 = ops.complex.V2.dim
    h = dt / 2.0
    return sparse.bmat([
        [ops.m1 + h * ops.a1, -h * ops.ct_m2, h * ops.m1_w],
        [h * ops.curl, sparse.identity(n2, format='csr'), None],
        [-h * ops.m1_w, None, ops.m1 + h * ops.rot_nu],
    ], format='csr')


def crank_nicolson_flow(state: FieldState, ops: SystemOperators, dt, t_start,
                        tol=1e-12, maxiter=1000, source_scale=1.0,
                        matrix=None, precond=None, cost: StepCost = None):
    """Trapezoidal step of the full three-field system."""
    A = crank_nicolson_matrix(ops, dt) if matrix is None else matrix
    n1 = ops.complex.V1.dim
    n2 = ops.complex.V2.dim
    if precond is None:
        k1 = KroneckerMassSolver(ops.complex.V1, ops.quad)
        precond = BlockDiagPreconditioner([(k1, n1), (None, n2), (k1, n1)])
    h = dt / 2.0
    s, c = _source_factors(t_start, dt)
    rhs_e = (ops.m1 @ state.e - h * (ops.a1 @ state.e)
             + h * (ops.ct_m2 @ state.b) - h * (ops.m1_w @ state.y))
    if source_scale:
        rhs_e = rhs_e + source_scale * (s * ops.s_r - c * ops.s_i)
    rhs_b = state.b - h * (ops.curl @ state.e)
    rhs_y = (ops.m1 @ state.y - h * (ops.rot_nu @ state.y)
             + h * (ops.m1_w @ state.e))
    x0 = np.concatenate([state.e, state.b, state.y])
    sol, stats = pbicgstab(A, np.concatenate([rhs_e, rhs_b, rhs_y]),
                           precond=precond, x0=x0, tol=tol, maxiter=maxiter)
    _check_solve('full', stats)
    if cost is not None:
        cost.add('full', stats, 3)
    return FieldState(sol[:n1], sol[n1:n1 + n2], sol[n1 + n2:], state.t + dt)


# =============================================================================
class _StepperBase:
    """Caches the implicit matrices and preconditioners of one scheme."""

    scheme = None

    def __init__(self, ops: SystemOperators, dt, tol=1e-12, maxiter=1000,
                 source_enabled=True, use_envelope=False):
        self.ops = ops
        self.dt = float(dt)
        self.tol = tol
        self.maxiter = maxiter
        self.source_enabled = source_enabled
        self.use_envelope = use_envelope and ops.envelope is not None
        self._kron1 = KroneckerMassSolver(ops.complex.V1, ops.quad)

    def _scale(self, t_mid):
        """Source multiplier for a sub-interval centered at ``t_mid``."""
        if not self.source_enabled:
            return 0.0
        if self.use_envelope:
            return float(self.ops.envelope(t_mid, self.dt))
        return 1.0

    def step(self, state: FieldState):
        raise NotImplementedError

    def march(self, state: FieldState, n_steps, callback=None):
        """Advance ``n_steps``; calls ``callback(state, cost)`` after each."""
        costs = []
        for _ in range(n_steps):
            state, cost = self.step(state)
            costs.append(cost)
            if callback is not None:
                callback(state, cost)
        return state, costs


class PoissonSplitStepper(_StepperBase):
    """Symmetric Maxwell / plasma / Maxwell composition."""

    scheme = 'poisson'

    def __init__(self, ops, dt, **kwargs):
        super().__init__(ops, dt, **kwargs)
        self._maxwell = maxwell_matrix(ops, dt / 2.0)
        self._plasma = plasma_matrix(ops, dt)
        n1 = ops.complex.V1.dim
        self._precond2 = BlockDiagPreconditioner([(self._kron1, n1)] * 2)

    def step(self, state):
        dt = self.dt
        cost = StepCost(self.scheme)
        t0 = state.t
        s1 = flow_maxwell(state, self.ops, dt / 2.0, t0, tol=self.tol,
                          maxiter=self.maxiter,
                          source_scale=self._scale(t0 + dt / 4.0),
                          matrix=self._maxwell, precond=self._kron1, cost=cost)
        s2 = flow_plasma(s1, self.ops, dt, tol=self.tol, maxiter=self.maxiter,
                         matrix=self._plasma, precond=self._precond2,
                         cost=cost)
        s3 = flow_maxwell(s2, self.ops, dt / 2.0, t0 + dt / 2.0, tol=self.tol,
                          maxiter=self.maxiter,
                          source_scale=self._scale(t0 + 3.0 * dt / 4.0),
                          matrix=self._maxwell, precond=self._kron1, cost=cost)
        s3.t = t0 + dt
        return s3, cost


class HamiltonianSplitStepper(_StepperBase):
    """Symmetric electric / magnetic-plasma / electric composition."""

    scheme = 'hamiltonian'

    def __init__(self, ops, dt, **kwargs):
        super().__init__(ops, dt, **kwargs)
        self._bp = magnetic_plasma_matrix(ops, dt)
        n1 = ops.complex.V1.dim
        self._precond2 = BlockDiagPreconditioner([(self._kron1, n1)] * 2)

    def step(self, state):
        dt = self.dt
        cost = StepCost(self.scheme)
        t0 = state.t
        s1 = flow_electric(state, self.ops, dt / 2.0, tol=self.tol,
                           maxiter=self.maxiter, precond=self._kron1,
                           cost=cost)
        s2 = flow_magnetic_plasma(s1, self.ops, dt, t0, tol=self.tol,
                                  maxiter=self.maxiter,
                                  source_scale=self._scale(t0 + dt / 2.0),
                                  matrix=self._bp, precond=self._precond2,
                                  cost=cost)
        s3 = flow_electric(s2, self.ops, dt / 2.0, tol=self.tol,
                           maxiter=self.maxiter, precond=self._kron1,
                           cost=cost)
        s3.t = t0 + dt
        return s3, cost


class CrankNicolsonStepper(_StepperBase):
    """Implicit trapezoidal step of the unsplit system."""

    scheme = 'crank_nicolson'

    def __init__(self, ops, dt, **kwargs):
        super().__init__(ops, dt, **kwargs)
        self._mat = crank_nicolson_matrix(ops, dt)
        n1 = ops.complex.V1.dim
        n2 = ops.complex.V2.dim
        self._precond3 = BlockDiagPreconditioner(
            [(self._kron1, n1), (None, n2), (self._kron1, n1)])

    def step(self, state):
        cost = StepCost(self.scheme)
        out = crank_nicolson_flow(state, self.ops, self.dt, state.t,
                                  tol=self.tol, maxiter=self.maxiter,
                                  source_scale=self._scale(state.t + self.dt / 2.0),
                                  matrix=self._mat, precond=self._precond3,
                                  cost=cost)
        return out, cost


SCHEMES = {
    'poisson': PoissonSplitStepper,
    'hamiltonian': HamiltonianSplitStepper,
    'crank_nicolson': CrankNicolsonStepper,
}


def make_stepper(scheme, ops, dt, **kwargs):
    try:
        cls = SCHEMES[scheme]
    except KeyError:
        raise ValueError(f'unknown scheme {scheme!r}; '
                         f'choose from {sorted(SCHEMES)}') from None
    return cls(ops, dt, **kwargs)


# =============================================================================
def build_evolution_operator(scheme, ops: SystemOperators, dt, cap=1500,
                             tol=1e-14, maxiter=10000):
    """Dense one-step operator of the homogeneous scheme, with the mass.

    Applies the source-free scheme to every unit coefficient vector,
    column by column; used by the long-time stability checks (the operator
    must not expand the energy norm). Refuses dimensions above ``cap``.

    Returns
    -------
    K : ndarray (dim, dim)
    M : ndarray (dim, dim)
        Block-diagonal mass defining the energy norm.
    """
    dim = 2 * ops.complex.V1.dim + ops.complex.V2.dim
    if dim > cap:
        raise ValueError(f'state dimension {dim} exceeds the cap {cap}')
    stepper = make_stepper(scheme, ops, dt, tol=tol, maxiter=maxiter,
                           source_enabled=False)
    K = np.empty((dim, dim))
    for j in range(dim):
        unit = np.zeros(dim)
        unit[j] = 1.0
        state = FieldState.from_vector(ops, unit, t=0.0)
        out, _ = stepper.step(state)
        K[:, j] = out.as_vector()
    M = sparse.block_diag([ops.m1, ops.m2, ops.m1]).toarray()
    return K, M
