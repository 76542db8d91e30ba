"""Tensor-product spline de Rham complex on a Cartesian box.

Four discrete spaces are built from one triple of univariate B-spline
bases (degrees ``p = (p1, p2, p3)``, mixed clamped/periodic):

* ``V0`` — scalar, basis ``B x B x B`` (gradient-conforming),
* ``V1`` — vector, component bases ``(M,B,B), (B,M,B), (B,B,M)``
  (curl-conforming),
* ``V2`` — vector, component bases ``(B,M,M), (M,B,M), (M,M,B)``
  (divergence-conforming),
* ``V3`` — scalar, basis ``M x M x M``,

where ``M`` denotes the unit-integral derivative basis one degree lower.
The gradient, curl and divergence matrices between the coefficient spaces
are pure incidence matrices (entries 0 and +-1) built from the univariate
derivative matrices by Kronecker products, so that ``curl @ grad = 0`` and
``div @ curl = 0`` hold exactly in integer arithmetic.

Coefficient layout: each component is stored as a C-ordered array of shape
``component_shapes[c]`` (x index slowest); a field is the concatenation of
its raveled components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .splines import SplineBasis1D, make_basis, derivative_matrix

__all__ = [
    'TensorSpace',
    'DeRhamComplex',
    'FieldCoeffs',
    'build_complex',
    'eval_field',
    'eval_on_grid',
]


# =============================================================================
@dataclass(frozen=True)
class TensorSpace:
    """One space of the discrete complex.

    Attributes
    ----------
    form_degree : int
        0, 1, 2 or 3.
    components : tuple of tuple of SplineBasis1D
        One triple of 1D bases per (scalar or vector) component.
    """

    form_degree: int
    components: tuple

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def component_shapes(self):
        return tuple(tuple(b.n_basis for b in comp) for comp in self.components)

    @property
    def component_dims(self):
        return tuple(int(np.prod(s)) for s in self.component_shapes)

    @property
    def dim(self) -> int:
        return sum(self.component_dims)

    @property
    def offsets(self):
        """Start offset of each component in the flat coefficient vector."""
        dims = self.component_dims
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(dims)]))

    def component_view(self, vec, c):
        """C-ordered array view of component ``c`` of a flat vector."""
        o = self.offsets
        return vec[o[c]:o[c + 1]].reshape(self.component_shapes[c])

    def zeros(self, dtype=float):
        return np.zeros(self.dim, dtype=dtype)


@dataclass
class FieldCoeffs:
    """Coefficient vector bound to its space."""

    space: TensorSpace
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.shape != (self.space.dim,):
            raise ValueError(f'expected flat vector of length {self.space.dim}, '
                             f'got shape {self.data.shape}')

    def component(self, c):
        return self.space.component_view(self.data, c)


# =============================================================================
@dataclass(frozen=True)
class DeRhamComplex:
    """The four tensor-product spaces with their differential matrices."""

    V0: TensorSpace
    V1: TensorSpace
    V2: TensorSpace
    V3: TensorSpace
    grad: sparse.csr_matrix
    curl: sparse.csr_matrix
    div: sparse.csr_matrix
    domain: tuple
    n_cells: tuple
    degrees: tuple
    periodic: tuple

    @property
    def bases_B(self):
        return self.V0.components[0]

    @property
    def bases_M(self):
        return self.V3.components[0]

    def space(self, form_degree):
        return (self.V0, self.V1, self.V2, self.V3)[form_degree]


def _kron3(a, b, c):
    # scipy's kron drops the integer dtype when an operand has no entries
    # (1-cell periodic directions); force it back
    out = sparse.kron(sparse.kron(a, b, format='csr'), c, format='csr')
    return out.astype(np.int64)


def build_complex(n_cells, degrees, periodic, domain) -> DeRhamComplex:
    """Assemble the discrete de Rham complex on a box.

    Parameters
    ----------
    n_cells : (int, int, int)
        Cells per direction, each >= 1.

    degrees : (int, int, int)
        B-spline degrees of the gradient-conforming space, each >= 1.

    periodic : (bool, bool, bool)
        Periodicity flags per direction.

    domain : ((float, float),) * 3
        Box extents per direction.

    Returns
    -------
    DeRhamComplex
    """
    n_cells = tuple(int(n) for n in n_cells)
    degrees = tuple(int(p) for p in degrees)
    periodic = tuple(bool(f) for f in periodic)
    domain = tuple((float(d[0]), float(d[1])) for d in domain)
    if any(p < 1 for p in degrees):
        raise ValueError(f'degrees must be >= 1, got {degrees}')
    if any(n < 1 for n in n_cells):
        raise ValueError(f'n_cells must be >= 1, got {n_cells}')

    B = tuple(make_basis(n_cells[d], degrees[d], domain[d], periodic[d])
              for d in range(3))
    DM = [derivative_matrix(b) for b in B]
    M = tuple(dm[1] for dm in DM)
    Dmat = tuple(dm[0] for dm in DM)
    IB = tuple(sparse.identity(b.n_basis, dtype=np.int64, format='csr') for b in B)
    IM = tuple(sparse.identity(m.n_basis, dtype=np.int64, format='csr') for m in M)

    V0 = TensorSpace(0, ((B[0], B[1], B[2]),))
    V1 = TensorSpace(1, ((M[0], B[1], B[2]),
                         (B[0], M[1], B[2]),
                         (B[0], B[1], M[2])))
    V2 = TensorSpace(2, ((B[0], M[1], M[2]),
                         (M[0], B[1], M[2]),
                         (M[0], M[1], B[2])))
    V3 = TensorSpace(3, ((M[0], M[1], M[2]),))

    grad = sparse.vstack([_kron3(Dmat[0], IB[1], IB[2]),
                          _kron3(IB[0], Dmat[1], IB[2]),
                          _kron3(IB[0], IB[1], Dmat[2])], format='csr')

    zero = None
    curl = sparse.bmat([
        [zero, -_kron3(IB[0], IM[1], Dmat[2]), _kron3(IB[0], Dmat[1], IM[2])],
        [_kron3(IM[0], IB[1], Dmat[2]), zero, -_kron3(Dmat[0], IB[1], IM[2])],
        [-_kron3(IM[0], Dmat[1], IB[2]), _kron3(Dmat[0], IM[1], IB[2]), zero],
    ], format='csr')

    div = sparse.hstack([_kron3(Dmat[0], IM[1], IM[2]),
                         _kron3(IM[0], Dmat[1], IM[2]),
                         _kron3(IM[0], IM[1], Dmat[2])], format='csr')

    for mat in (grad, curl, div):
        mat.sum_duplicates()
        mat.eliminate_zeros()

    return DeRhamComplex(V0=V0, V1=V1, V2=V2, V3=V3,
                         grad=grad, curl=curl, div=div,
                         domain=domain, n_cells=n_cells,
                         degrees=degrees, periodic=periodic)


# =============================================================================
def _eval_component_at_points(bases, coeffs, pts):
    """Evaluate one scalar tensor-product component at scattered points."""
    pts = np.asarray(pts, dtype=float)
    firsts, values, indices = [], [], []
    for d in range(3):
        f, v = bases[d].eval_basis(pts[:, d])
        firsts.append(f)
        values.append(v[:, 0, :])
        indices.append(bases[d].global_indices(f))
    ix, iy, iz = indices
    gathered = coeffs[ix[:, :, None, None], iy[:, None, :, None], iz[:, None, None, :]]
    return np.einsum('mabc,ma,mb,mc->m', gathered, values[0], values[1], values[2])


def eval_field(field: FieldCoeffs, pts):
    """Evaluate a discrete field at scattered points.

    Parameters
    ----------
    field : FieldCoeffs
    pts : array of shape (npts, 3)

    Returns
    -------
    values : array of shape (npts,) for scalar spaces, (npts, 3) otherwise
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    space = field.space
    if space.n_components == 1:
        return _eval_component_at_points(space.components[0], field.component(0), pts)
    out = np.empty((len(pts), 3), dtype=field.data.dtype)
    for c in range(3):
        out[:, c] = _eval_component_at_points(space.components[c],
                                              field.component(c), pts)
    return out


def eval_on_grid(space: TensorSpace, vec, xs, ys, zs):
    """Evaluate a field on a tensor grid of points.

    Returns a list with one array of shape ``(len(xs), len(ys), len(zs))``
    per component. Much faster than :func:`eval_field` for structured
    point sets since the basis factorizes per direction.
    """
    grids = (np.asarray(xs, float), np.asarray(ys, float), np.asarray(zs, float))
    out = []
    for c in range(space.n_components):
        tables = [space.components[c][d].eval_dense(grids[d])[0] for d in range(3)]
        coeffs = space.component_view(np.asarray(vec), c)
        out.append(np.einsum('xi,yj,zk,ijk->xyz',
                             tables[0], tables[1], tables[2], coeffs))
    return out
