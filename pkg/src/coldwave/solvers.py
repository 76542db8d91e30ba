"""Preconditioned Krylov solvers with exact operation accounting.

Both solvers count every application of the system operator and of the
preconditioner; the counts satisfy exact identities in the iteration
number ``n`` (asserted at stats construction):

* conjugate gradient: ``1 + n`` products with each of A and P,
* stabilized biconjugate gradient: ``1 + 2 n`` products with each.

The biconjugate solver is right-preconditioned in correction form (the
update is solved for, then mapped through the preconditioner once), so the
tracked residual is the true residual and the counts above are exact.

The Kronecker mass solver inverts an unweighted tensor-product mass matrix
exactly through its per-direction Cholesky factors; it is the standard
preconditioner for every implicit step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .assembly import BoxQuadrature, mass_matrix_1d
from .derham import TensorSpace

__all__ = [
    'SolveStats',
    'SolverBreakdown',
    'ConvergenceFailure',
    'pcg',
    'pbicgstab',
    'KroneckerMassSolver',
    'BlockDiagPreconditioner',
    'IdentityPreconditioner',
]


class SolverBreakdown(RuntimeError):
    """Krylov recurrence broke down (vanishing inner product)."""


class ConvergenceFailure(RuntimeError):
    """An inner solve did not reach its tolerance; carries the stats."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


@dataclass(frozen=True)
class SolveStats:
    """Iteration and operation counters of one linear solve."""

    method: str
    iterations: int
    matvec_a: int
    matvec_p: int
    converged: bool
    final_residual: float

    def __post_init__(self):
        n = self.iterations
        if self.method == 'pcg':
            expected = 1 + n
        elif self.method == 'pbicgstab':
            expected = 1 + 2 * n
        else:
            raise ValueError(f'unknown method {self.method!r}')
        if self.matvec_a != expected or self.matvec_p != expected:
            raise AssertionError(
                f'{self.method} counters off: n={n}, '
                f'matvec_a={self.matvec_a}, matvec_p={self.matvec_p}, '
                f'expected {expected} each')

    @property
    def total_products(self) -> int:
        return self.matvec_a + self.matvec_p


class IdentityPreconditioner:
    def __call__(self, r):
        return r.copy()


def _as_callable(precond):
    if precond is None:
        return IdentityPreconditioner()
    return precond


# =============================================================================
def pcg(A, b, precond=None, x0=None, tol=1e-12, maxiter=1000):
    """Preconditioned conjugate gradient for symmetric positive systems.

    Stops when the true residual satisfies ``||b - A x|| <= tol * ||b||``
    (absolute zero for a zero right-hand side). Returns ``(x, stats)``;
    non-convergence is reported through ``stats.converged``, not raised.
    """
    P = _as_callable(precond)
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)

    n_a = n_p = 0
    r = b - A @ x
    n_a += 1
    z = P(r)
    n_p += 1
    target = tol * np.linalg.norm(b)
    res = np.linalg.norm(r)
    if res <= target:
        stats = SolveStats('pcg', 0, n_a, n_p, True, res)
        return x, stats

    p = z.copy()
    rz = r @ z
    it = 0
    converged = False
    while it < maxiter:
        Ap = A @ p
        n_a += 1
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        z = P(r)
        n_p += 1
        it += 1
        res = np.linalg.norm(r)
        if res <= target:
            converged = True
            break
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    stats = SolveStats('pcg', it, n_a, n_p, converged, res)
    return x, stats


def pbicgstab(A, b, precond=None, x0=None, tol=1e-12, maxiter=1000):
    """Right-preconditioned stabilized biconjugate gradient.

    Solves ``A x = b`` for general invertible ``A``. The method iterates on
    the correction system ``(A P) u = r0`` with ``x = x0 + P u``, so the
    tracked residual is the true residual ``b - A x``; the single final
    preconditioner application keeps the operation counts at ``1 + 2 n``
    for both operators. Raises :class:`SolverBreakdown` on a vanishing
    recurrence inner product.
    """
    P = _as_callable(precond)
    b = np.asarray(b, dtype=float)
    x0 = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)

    n_a = n_p = 0
    r = b - A @ x0
    n_a += 1
    target = tol * np.linalg.norm(b)
    res = np.linalg.norm(r)
    # accumulated correction in the preconditioned variable
    u = np.zeros_like(b)
    if res <= target:
        x = x0 + P(u)
        n_p += 1
        return x, SolveStats('pbicgstab', 0, n_a, n_p, True, res)

    r_shadow = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    it = 0
    converged = False
    tiny = 100.0 * np.finfo(float).tiny
    while it < maxiter:
        rho_new = r_shadow @ r
        if abs(rho_new) < tiny or (it > 0 and abs(omega) < tiny):
            raise SolverBreakdown(
                f'pbicgstab breakdown at iteration {it}: rho={rho_new:.3e}, '
                f'omega={omega:.3e}')
        if it == 0:
            p = r.copy()
        else:
            beta = (rho_new / rho) * (alpha / omega)
            p = r + beta * (p - omega * v)
        rho = rho_new

        phat = P(p)
        n_p += 1
        v = A @ phat
        n_a += 1
        alpha = rho / (r_shadow @ v)
        s = r - alpha * v

        shat = P(s)
        n_p += 1
        t = A @ shat
        n_a += 1
        tt = t @ t
        omega = (t @ s) / tt if tt > 0.0 else 0.0

        u += alpha * phat + omega * shat
        r = s - omega * t
        it += 1
        res = np.linalg.norm(r)
        if res <= target:
            converged = True
            break

    x = x0 + u
    # counted as the final preconditioner application of the correction form
    n_p += 1
    stats = SolveStats('pbicgstab', it, n_a, n_p, converged, res)
    return x, stats


# =============================================================================
class KroneckerMassSolver:
    """Exact inverse of an unweighted tensor-product mass matrix.

    On a Cartesian box the mass matrix of each component factorizes into a
    Kronecker product of three banded 1D mass matrices; the solver applies
    the inverse through per-direction Cholesky solves, component by
    component. Applying the solver after the matrix (or vice versa)
    reproduces the input to factorization roundoff.
    """

    def __init__(self, space: TensorSpace, quad: BoxQuadrature):
        self.space = space
        self._factors = []
        for comp in space.components:
            chols = []
            for d in range(3):
                m = mass_matrix_1d(comp[d], comp[d], quad.rules[d])
                try:
                    chols.append(sla.cho_factor(m))
                except sla.LinAlgError as exc:
                    raise ValueError(
                        f'singular 1D mass factor in direction {d}') from exc
            self._factors.append(chols)

    def __call__(self, r):
        r = np.asarray(r)
        out = np.empty_like(r, dtype=float)
        off = self.space.offsets
        for c, chols in enumerate(self._factors):
            shape = self.space.component_shapes[c]
            block = r[off[c]:off[c + 1]].reshape(shape)
            for d in range(3):
                moved = np.moveaxis(block, d, 0)
                flat = moved.reshape(moved.shape[0], -1)
                solved = sla.cho_solve(chols[d], flat)
                block = np.moveaxis(solved.reshape(moved.shape), 0, d)
            out[off[c]:off[c + 1]] = block.reshape(-1)
        return out


class BlockDiagPreconditioner:
    """Apply independent preconditioners to consecutive vector blocks."""

    def __init__(self, blocks):
        # blocks: sequence of (solver_or_None, size); None means identity
        self.blocks = [(solver, int(size)) for solver, size in blocks]
        self.dim = sum(size for _, size in self.blocks)

    def __call__(self, r):
        r = np.asarray(r)
        if r.shape != (self.dim,):
            raise ValueError(f'expected vector of length {self.dim}, '
                             f'got {r.shape}')
        out = np.empty_like(r, dtype=float)
        k = 0
        for solver, size in self.blocks:
            seg = r[k:k + size]
            out[k:k + size] = seg if solver is None else solver(seg)
            k += size
        return out
