"""Univariate B-spline machinery on uniform grids.

This module provides the one-dimensional building blocks used by the
tensor-product spaces: knot vectors (open/clamped or periodic), B-spline
basis evaluation via the Cox-de Boor recursion, the unit-integral
(Curry-Schoenberg, "M-") companion basis, Greville points, Gauss-Legendre
quadrature rules and the 1D interpolation/histopolation matrices.

Conventions
-----------
* Breakpoints are uniform; only uniform grids are supported.
* A clamped basis of degree ``p`` on ``n`` cells has ``n + p`` functions,
  a periodic one has ``n`` functions (indices wrap around, no ghost
  unknowns).
* The derivative of a combination of B-splines is a combination of
  M-splines with an incidence matrix whose entries are 0 and +-1; see
  :func:`derivative_matrix`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    'KnotVector',
    'SplineBasis1D',
    'make_knot_vector',
    'make_basis',
    'derivative_matrix',
    'gauss_rule',
    'QuadratureRule',
]


# =============================================================================
@dataclass(frozen=True)
class KnotVector:
    """Knot sequence of a univariate spline space on a uniform grid.

    Parameters
    ----------
    knots : ndarray
        Non-decreasing knot sequence. For a clamped space this is the open
        knot vector with the first/last knot repeated ``degree + 1`` times.
        For a periodic space it is the uniform sequence extended by
        ``degree`` period-shifted ghost knots on each side.

    degree : int
        Polynomial degree.

    periodic : bool
        Whether the space is periodic over the domain.

    domain : tuple of float
        Interval ``[a, b]`` covered by the breakpoints.

    n_cells : int
        Number of grid cells in the domain.
    """

    knots: np.ndarray
    degree: int
    periodic: bool
    domain: tuple
    n_cells: int

    @property
    def n_basis(self) -> int:
        """Dimension of the spline space spanned on this knot vector."""
        if self.periodic:
            return self.n_cells
        return len(self.knots) - self.degree - 1

    @property
    def breakpoints(self) -> np.ndarray:
        a, b = self.domain
        return np.linspace(a, b, self.n_cells + 1)

    @property
    def cell_size(self) -> float:
        a, b = self.domain
        return (b - a) / self.n_cells


# =============================================================================
def make_knot_vector(n_cells, degree, domain, periodic=False) -> KnotVector:
    """Create the knot vector of a uniform spline space.

    Parameters
    ----------
    n_cells : int
        Number of cells, at least 1.

    degree : int
        Polynomial degree, non-negative.

    domain : (float, float)
        Interval ``[a, b]`` with ``a < b``.

    periodic : bool
        Periodic (ghost knots shifted by the period) or clamped (open knot
        vector) structure.

    Returns
    -------
    KnotVector
    """
    n_cells = int(n_cells)
    degree = int(degree)
    a, b = float(domain[0]), float(domain[1])
    if n_cells < 1:
        raise ValueError(f'n_cells must be >= 1, got {n_cells}')
    if degree < 0:
        raise ValueError(f'degree must be >= 0, got {degree}')
    if not b > a:
        raise ValueError(f'degenerate domain [{a}, {b}]')

    h = (b - a) / n_cells
    if periodic:
        grid = a + h * np.arange(-degree, n_cells + degree + 1)
    else:
        interior = a + h * np.arange(1, n_cells)
        grid = np.concatenate([np.full(degree + 1, a), interior,
                               np.full(degree + 1, b)])
    return KnotVector(knots=grid, degree=degree, periodic=periodic,
                      domain=(a, b), n_cells=n_cells)


# =============================================================================
def _basis_values(knots, degree, x, span):
    """Non-vanishing B-spline values at points ``x`` (Cox-de Boor recursion).

    Vectorized version of Algorithm A2.2 in the NURBS book: for each point
    ``x[m]`` with knot-span index ``span[m]``, fills row ``m`` with the
    values of the ``degree + 1`` splines that are non-zero there.
    """
    npts = len(x)
    values = np.zeros((npts, degree + 1))
    left = np.zeros((npts, degree + 1))
    right = np.zeros((npts, degree + 1))

    values[:, 0] = 1.0
    for j in range(1, degree + 1):
        left[:, j] = x - knots[span + 1 - j]
        right[:, j] = knots[span + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            denom = right[:, r + 1] + left[:, j - r]
            temp = values[:, r] / denom
            values[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        values[:, j] = saved
    return values


def _basis_ders(knots, degree, x, span, nderiv):
    """Values and first ``nderiv`` derivatives of the non-zero B-splines.

    The k-th derivative of a degree-``p`` spline is obtained from the
    (k-1)-th derivatives of the degree-``(p-1)`` splines on the same knot
    sequence, scaled by ``p`` over the local knot span.
    """
    npts = len(x)
    out = np.zeros((npts, nderiv + 1, degree + 1))
    out[:, 0, :] = _basis_values(knots, degree, x, span)
    for k in range(1, nderiv + 1):
        if degree - k < 0:
            break          # higher derivatives vanish identically
        lower = _basis_ders(knots, degree - 1, x, span, k - 1)[:, k - 1, :]
        # N_i^{p}' = p * (N_i^{p-1}/(t_{i+p}-t_i) - N_{i+1}^{p-1}/(t_{i+p+1}-t_{i+1}))
        saved = degree * lower[:, 0] / (knots[span + 1] - knots[span + 1 - degree])
        out[:, k, 0] = -saved
        for j in range(1, degree):
            temp = saved
            saved = degree * lower[:, j] / (knots[span + j + 1] - knots[span + j + 1 - degree])
            out[:, k, j] = temp - saved
        out[:, k, degree] = saved
    return out


# =============================================================================
@dataclass(frozen=True)
class SplineBasis1D:
    """Univariate spline basis: standard ("B") or unit-integral ("M") kind.

    The B-kind basis is the standard B-spline basis, which forms a
    partition of unity. The M-kind basis consists of the Curry-Schoenberg
    splines, rescaled so that every function has unit integral over its
    support; it spans the derivatives of the B-kind space one degree up.

    Use :func:`make_basis` or :meth:`derivative_basis` to construct
    instances. All objects are immutable and evaluation is reentrant.
    """

    knot_vector: KnotVector
    kind: str = 'B'
    # per-function rescaling; ones for the B-kind
    scale: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ('B', 'M'):
            raise ValueError(f"kind must be 'B' or 'M', got {self.kind!r}")
        if self.scale is None:
            object.__setattr__(self, 'scale', np.ones(self._n_eval_funcs()))

    # -- geometry ------------------------------------------------------------
    @property
    def degree(self) -> int:
        return self.knot_vector.degree

    @property
    def periodic(self) -> bool:
        return self.knot_vector.periodic

    @property
    def domain(self) -> tuple:
        return self.knot_vector.domain

    @property
    def n_cells(self) -> int:
        return self.knot_vector.n_cells

    @property
    def n_basis(self) -> int:
        return self.knot_vector.n_basis

    @property
    def breakpoints(self) -> np.ndarray:
        return self.knot_vector.breakpoints

    @property
    def cell_size(self) -> float:
        return self.knot_vector.cell_size

    def _n_eval_funcs(self):
        # number of distinct functions seen by the evaluation routine
        # (periodic aliases are resolved through the modulo map)
        if self.periodic:
            return self.n_cells + self.degree
        return self.n_basis

    # -- evaluation ----------------------------------------------------------
    def _locate(self, x):
        """Map points to cells; returns (x_eff, cell) with periodic wrap."""
        a, b = self.domain
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.periodic:
            period = b - a
            x_eff = a + np.mod(x - a, period)
            # guard against mod returning the period itself
            x_eff[x_eff >= b] = a
        else:
            if np.any(x < a) or np.any(x > b):
                bad = x[(x < a) | (x > b)][0]
                raise ValueError(f'point {bad} outside domain [{a}, {b}]')
            x_eff = x
        h = self.cell_size
        cell = np.minimum((np.floor((x_eff - a) / h)).astype(int), self.n_cells - 1)
        cell = np.maximum(cell, 0)
        return x_eff, cell

    def eval_basis(self, x, nderiv=0):
        """Evaluate the non-vanishing basis functions (and derivatives) at x.

        Parameters
        ----------
        x : float or array
            Evaluation points. Must lie in the domain (clamped) or are
            wrapped by the period (periodic).

        nderiv : int
            Number of derivatives requested.

        Returns
        -------
        first : int array of shape (npts,)
            Index of the first non-zero basis function at each point. For
            a periodic basis the returned index may be negative; global
            indices are ``(first + k) % n_basis`` for ``k = 0 .. degree``.

        values : array of shape (npts, nderiv + 1, degree + 1)
            ``values[m, d, k]`` is the d-th derivative of basis function
            ``first[m] + k`` at ``x[m]``.
        """
        x_eff, cell = self._locate(x)
        p = self.degree
        if self.periodic:
            span = cell + p
            first = cell - p
            eval_func_first = cell     # index into the extended function list
        else:
            span = cell + p
            first = cell
            eval_func_first = cell
        values = _basis_ders(self.knot_vector.knots, p, x_eff, span, nderiv)
        if self.kind == 'M':
            cols = eval_func_first[:, None] + np.arange(p + 1)[None, :]
            values = values * self.scale[cols][:, None, :]
        return first, values

    def global_indices(self, first):
        """Global (wrapped) indices of the ``degree + 1`` local functions."""
        idx = first[:, None] + np.arange(self.degree + 1)[None, :]
        if self.periodic:
            idx = np.mod(idx, self.n_basis)
        return idx

    def eval_dense(self, x, nderiv=0):
        """Dense table ``values[d, m, j]`` of every basis function at x.

        Periodic aliases (functions whose support wraps around more than
        once) are accumulated, so columns always sum consistently with
        :meth:`eval_basis`.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        first, vals = self.eval_basis(x, nderiv)
        idx = self.global_indices(first)
        out = np.zeros((nderiv + 1, len(x), self.n_basis))
        m = np.arange(len(x))[:, None]
        for d in range(nderiv + 1):
            np.add.at(out[d], (m, idx), vals[:, d, :])
        return out

    # -- companion bases -----------------------------------------------------
    def derivative_basis(self) -> 'SplineBasis1D':
        """Unit-integral (M-kind) basis spanning derivatives of this one.

        The returned basis has degree ``p - 1``; each function is the
        classical Curry-Schoenberg spline ``p * N_i^{p-1} / (t_{i+p} - t_i)``
        with unit integral. Requires the B-kind and ``p >= 1``.
        """
        if self.kind != 'B':
            raise ValueError('derivative_basis requires the B-kind')
        p = self.degree
        if p < 1:
            raise ValueError('derivative_basis requires degree >= 1')
        if self.periodic:
            kv = make_knot_vector(self.n_cells, p - 1, self.domain, periodic=True)
            n_eval = kv.n_cells + kv.degree
            knots = kv.knots
            spans = knots[np.arange(n_eval) + p] - knots[np.arange(n_eval)]
        else:
            knots = self.knot_vector.knots[1:-1]
            kv = KnotVector(knots=knots, degree=p - 1, periodic=False,
                            domain=self.domain, n_cells=self.n_cells)
            n_eval = kv.n_basis
            spans = knots[np.arange(n_eval) + p] - knots[np.arange(n_eval)]
        scale = p / spans
        return SplineBasis1D(knot_vector=kv, kind='M', scale=scale)

    # -- geometric degrees of freedom -----------------------------------------
    def greville(self) -> np.ndarray:
        """Greville points (averages of ``degree`` consecutive knots).

        For a periodic basis the points are returned unwrapped and strictly
        increasing (they may exceed the right end of the domain); wrap them
        by the period before point evaluation.
        """
        if self.kind != 'B':
            raise ValueError('Greville points are defined for the B-kind')
        p = self.degree
        t = self.knot_vector.knots
        n = self.n_basis
        if p == 0:
            # midpoints degenerate case: one point per cell
            return 0.5 * (t[:-1] + t[1:])[:n]
        if self.periodic:
            i = np.arange(n) + p          # extended index of function j = i - p
            return np.array([t[k + 1: k + p + 1].mean() for k in i])
        return np.array([t[k + 1: k + p + 1].mean() for k in range(n)])


def make_basis(n_cells, degree, domain, periodic=False, kind='B') -> SplineBasis1D:
    """Construct a univariate spline basis on a uniform grid."""
    if kind == 'M':
        return make_basis(n_cells, degree + 1, domain, periodic, 'B').derivative_basis()
    return SplineBasis1D(make_knot_vector(n_cells, degree, domain, periodic))


# =============================================================================
def derivative_matrix(basis: SplineBasis1D):
    """1D incidence matrix mapping B-spline coefficients to M-spline ones.

    If ``c`` are the coefficients of ``f`` on the B-kind basis, then
    ``derivative_matrix(basis) @ c`` are the coefficients of ``f'`` on
    ``basis.derivative_basis()``. Entries are 0 and +-1:

    * clamped: rows ``(-1, +1)`` (forward difference), shape ``(n-1, n)``;
    * periodic: circulant backward difference, shape ``(n, n)``.

    Returns
    -------
    mat : scipy.sparse.csr_matrix of int64
    dbasis : SplineBasis1D
    """
    from scipy.sparse import coo_matrix

    dbasis = basis.derivative_basis()
    n = basis.n_basis
    if basis.periodic:
        rows = np.concatenate([np.arange(n), np.arange(n)])
        cols = np.concatenate([np.arange(n), (np.arange(n) - 1) % n])
        vals = np.concatenate([np.ones(n, dtype=np.int64),
                               -np.ones(n, dtype=np.int64)])
        mat = coo_matrix((vals, (rows, cols)), shape=(n, n))
    else:
        m = n - 1
        rows = np.concatenate([np.arange(m), np.arange(m)])
        cols = np.concatenate([np.arange(m), np.arange(1, m + 1)])
        vals = np.concatenate([-np.ones(m, dtype=np.int64),
                               np.ones(m, dtype=np.int64)])
        mat = coo_matrix((vals, (rows, cols)), shape=(m, n))
    mat = mat.tocsr()
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return mat, dbasis


# =============================================================================
@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre points and weights, mapped cell by cell.

    ``points`` and ``weights`` have shape ``(n_cells, n_points)``; the rule
    integrates polynomials of degree up to ``2 * n_points - 1`` exactly on
    each cell.
    """

    points: np.ndarray
    weights: np.ndarray

    @property
    def flat_points(self):
        return self.points.ravel()

    @property
    def flat_weights(self):
        return self.weights.ravel()


def gauss_rule(n_points, breakpoints) -> QuadratureRule:
    """Gauss-Legendre rule with ``n_points`` nodes on each cell."""
    if n_points < 1:
        raise ValueError('n_points must be >= 1')
    breakpoints = np.asarray(breakpoints, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(n_points)
    lo = breakpoints[:-1][:, None]
    hi = breakpoints[1:][:, None]
    half = 0.5 * (hi - lo)
    pts = lo + half * (nodes[None, :] + 1.0)
    wts = half * weights[None, :]
    return QuadratureRule(points=pts, weights=wts)


# =============================================================================
def interpolation_matrix(basis: SplineBasis1D, points=None):
    """Collocation matrix ``V[i, j] = N_j(g_i)`` at the Greville points."""
    if points is None:
        points = basis.greville()
    a, b = basis.domain
    if basis.periodic:
        pts = a + np.mod(points - a, b - a)
    else:
        pts = points
    return basis.eval_dense(pts)[0]


def integrate_basis(basis: SplineBasis1D, x0, x1, n_quad=None):
    """Integral of every basis function over ``[x0, x1]``.

    The interval is split at the grid breakpoints so that spline integrands
    are integrated exactly; for a periodic basis the interval may extend
    past the domain and is wrapped segment by segment.
    """
    if n_quad is None:
        n_quad = basis.degree + 2
    a, b = basis.domain
    out = np.zeros(basis.n_basis)
    if x1 <= x0:
        return out
    h = basis.cell_size
    # split [x0, x1] at breakpoints of the (possibly unwrapped) axis
    k0 = int(np.floor((x0 - a) / h - 1e-12)) + 1
    k1 = int(np.ceil((x1 - a) / h + 1e-12)) - 1
    cuts = np.concatenate([[x0], a + h * np.arange(k0, k1 + 1), [x1]])
    cuts = np.unique(np.clip(cuts, x0, x1))
    nodes, weights = np.polynomial.legendre.leggauss(n_quad)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo < 1e-14:
            continue
        half = 0.5 * (hi - lo)
        xs = lo + half * (nodes + 1.0)
        ws = half * weights
        first, vals = basis.eval_basis(xs)          # periodic wrap inside
        idx = basis.global_indices(first)
        np.add.at(out, idx, ws[:, None] * vals[:, 0, :])
    return out


def histopolation_matrix(m_basis: SplineBasis1D, greville_points):
    """Matrix of M-spline integrals over consecutive Greville intervals.

    ``H[i, j]`` is the integral of M-spline ``j`` over the interval between
    Greville points ``i`` and ``i + 1`` of the parent B-kind basis; for a
    periodic basis the last interval wraps around the domain.
    """
    g = np.asarray(greville_points, dtype=float)
    if m_basis.periodic:
        a, b = m_basis.domain
        edges = np.concatenate([g, [g[0] + (b - a)]])
    else:
        edges = g
    n_int = len(edges) - 1
    out = np.zeros((n_int, m_basis.n_basis))
    for i in range(n_int):
        out[i] = integrate_basis(m_basis, edges[i], edges[i + 1])
    return out
