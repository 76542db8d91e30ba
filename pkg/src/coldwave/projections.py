"""Projection operators onto the discrete spaces.

Two kinds are provided:

* an L2 projection (any space): Galerkin right-hand side by quadrature,
  mass solve by preconditioned conjugate gradient;
* geometric (commuting) projections onto the divergence-conforming space
  and the volume-form space, built from interpolation at Greville points
  in B-kind directions and integration over consecutive Greville intervals
  (histopolation) in M-kind directions.

With these choices the projections commute with the differential matrices:
the divergence of the projected flux equals the projection of the
divergence, which is what keeps the magnetic constraint exact when the
initial datum is divergence free.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg as sla

from .assembly import BoxQuadrature, assemble_mass, assemble_volume_moments
from .derham import DeRhamComplex, TensorSpace
from .splines import SplineBasis1D, interpolation_matrix, histopolation_matrix

__all__ = ['project_l2', 'project_commuting_v2', 'project_commuting_v3']


def project_l2(space: TensorSpace, fn, quad: BoxQuadrature, mass=None,
               precond=None, tol=1e-12, maxiter=200):
    """L2-orthogonal projection of a function onto a discrete space.

    Parameters
    ----------
    space : TensorSpace
    fn : callable
        ``fn(x, y, z)`` for scalar spaces, ``fn(pts) -> (..., 3)`` for
        vector spaces (same convention as the moment assembly).
    quad : BoxQuadrature
    mass, precond : optional
        Reuse a preassembled mass matrix / preconditioner.

    Returns
    -------
    coeffs : ndarray
        Flat coefficient vector solving ``M c = <basis, fn>``.
    """
    from .solvers import pcg, KroneckerMassSolver, ConvergenceFailure

    rhs = assemble_volume_moments(space, fn, quad)
    if mass is None:
        mass = assemble_mass(space, None, quad)
    if precond is None:
        precond = KroneckerMassSolver(space, quad)
    coeffs, stats = pcg(mass, rhs, precond=precond, tol=tol, maxiter=maxiter)
    if not stats.converged:
        raise ConvergenceFailure(
            f'L2 projection mass solve stalled at residual '
            f'{stats.final_residual:.3e}', stats)
    return coeffs


# =============================================================================
def _histo_quad_weights(m_basis: SplineBasis1D, greville, n_gauss=10):
    """Quadrature nodes and an (intervals x nodes) weight matrix whose row i
    integrates over the Greville interval [g_i, g_{i+1}] (wrapped for a
    periodic basis), split at the breakpoints for accuracy."""
    g = np.asarray(greville, dtype=float)
    if m_basis.periodic:
        a, b = m_basis.domain
        edges = np.concatenate([g, [g[0] + (b - a)]])
    else:
        edges = g
    nodes_ref, w_ref = np.polynomial.legendre.leggauss(n_gauss)
    a0, _ = m_basis.domain
    h = m_basis.cell_size
    all_nodes, rows, cols, vals = [], [], [], []
    for i in range(len(edges) - 1):
        x0, x1 = edges[i], edges[i + 1]
        k0 = int(np.floor((x0 - a0) / h - 1e-12)) + 1
        k1 = int(np.ceil((x1 - a0) / h + 1e-12)) - 1
        cuts = np.unique(np.clip(
            np.concatenate([[x0], a0 + h * np.arange(k0, k1 + 1), [x1]]),
            x0, x1))
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi - lo < 1e-14:
                continue
            half = 0.5 * (hi - lo)
            xs = lo + half * (nodes_ref + 1.0)
            start = len(all_nodes) and sum(len(n) for n in all_nodes)
            all_nodes.append(xs)
            rows.extend([i] * len(xs))
            cols.extend(range(start, start + len(xs)))
            vals.extend(half * w_ref)
    nodes = np.concatenate(all_nodes)
    W = np.zeros((len(edges) - 1, len(nodes)))
    W[rows, cols] = vals
    return nodes, W


def _directional_dofs(bases, parents, pts_w):
    """Per-direction (nodes, weight matrix) pairs for the geometric DoFs."""
    out = []
    for d in range(3):
        basis = bases[d]
        if basis.kind == 'B':
            g = basis.greville()
            a, b = basis.domain
            if basis.periodic:
                g = a + np.mod(g - a, b - a)
            out.append((g, np.eye(len(g))))
        else:
            g = parents[d].greville()
            out.append(_histo_quad_weights(basis, g, n_gauss=pts_w))
    return out


def _solve_kron(mats, rhs):
    """Solve (M1 (x) M2 (x) M3) c = rhs with dense per-direction factors."""
    out = rhs
    lus = [sla.lu_factor(m) for m in mats]
    for d in range(3):
        moved = np.moveaxis(out, d, 0)
        flat = moved.reshape(moved.shape[0], -1)
        solved = sla.lu_solve(lus[d], flat)
        out = np.moveaxis(solved.reshape(moved.shape), 0, d)
    return out


def _project_geometric(space: TensorSpace, complex_: DeRhamComplex, fn,
                       vector, n_gauss):
    parents = complex_.bases_B
    parts = []
    for c in range(space.n_components):
        bases = space.components[c]
        dofs_dirs = _directional_dofs(bases, parents, n_gauss)
        nodes = [dd[0] for dd in dofs_dirs]
        Ws = [dd[1] for dd in dofs_dirs]
        X = nodes[0][:, None, None]
        Y = nodes[1][None, :, None]
        Z = nodes[2][None, None, :]
        if vector:
            pts = np.stack(np.broadcast_arrays(X, Y, Z), axis=-1)
            F = np.asarray(fn(pts))[..., c]
        else:
            F = np.broadcast_to(np.asarray(fn(X, Y, Z)),
                                (X.size, Y.size, Z.size))
        dof = np.einsum('in,jm,kl,nml->ijk', Ws[0], Ws[1], Ws[2], F)

        mats = []
        for d in range(3):
            basis = bases[d]
            if basis.kind == 'B':
                mats.append(interpolation_matrix(basis))
            else:
                mats.append(histopolation_matrix(basis, parents[d].greville()))
        for d, m in enumerate(mats):
            if m.shape[0] != m.shape[1]:
                raise ValueError(f'singular geometric system in direction {d}')
        parts.append(_solve_kron(mats, dof).ravel())
    return np.concatenate(parts)


def project_commuting_v2(complex_: DeRhamComplex, fn, n_gauss=10):
    """Geometric projection onto the divergence-conforming space.

    ``fn(pts) -> (..., 3)``. Commutes with the divergence matrix: applying
    it to an analytically divergence-free field yields exactly (to
    quadrature accuracy) a discretely divergence-free coefficient vector.
    """
    return _project_geometric(complex_.V2, complex_, fn, vector=True,
                              n_gauss=n_gauss)


def project_commuting_v3(complex_: DeRhamComplex, fn, n_gauss=10):
    """Geometric projection onto the volume-form space (cell histopolation)."""
    return _project_geometric(complex_.V3, complex_, fn, vector=False,
                              n_gauss=n_gauss)
