"""Assembled operators against dense quadrature oracles and their
structural contracts."""

import numpy as np
import pytest

from coldwave.assembly import (BoxQuadrature, assemble_block,
                               assemble_boundary_penalty,
                               assemble_boundary_source,
                               assemble_dielectric_mass, assemble_mass,
                               assemble_rotation, assemble_volume_moments,
                               assemble_weak_divergence,
                               build_system_operators)
from coldwave.derham import build_complex
from coldwave.plasma import (ManufacturedSolution, PlasmaProfile,
                             ramp_profile, vacuum_profile)

from oracles import dense_face_matrix, dense_face_moments, dense_volume_matrix

BOX = ((0.0, 3 * np.pi), (0.0, 2 * np.pi), (0.0, 2 * np.pi))


@pytest.fixture(scope='module')
def small():
    cx = build_complex((3, 3, 3), (2, 2, 1), (False, True, True),
                       ((0.0, 1.0), (0.0, 2.0), (0.0, 1.5)))
    return cx, BoxQuadrature(cx)


@pytest.fixture(scope='module')
def bench():
    cx = build_complex((4, 1, 1), (3, 1, 1), (False, True, True), BOX)
    return cx, BoxQuadrature(cx)


def smooth_weight(x, y, z):
    return 1.0 + 0.3 * x + 0.2 * np.sin(np.pi * y) + 0.1 * z ** 2


class TestMassOracle:

    def test_hat_mass_row(self):
        # degree-1 mass on a uniform grid: interior row h/6 * [1, 4, 1]
        cx = build_complex((4, 1, 1), (1, 1, 1), (False, True, True),
                           ((0, 1), (0, 1), (0, 1)))
        m0 = assemble_mass(cx.V0, None, BoxQuadrature(cx)).toarray()
        h = 0.25
        np.testing.assert_allclose(m0[2, 1:4], h / 6 * np.array([1, 4, 1]),
                                   atol=1e-15)

    def test_unweighted_blocks(self, small):
        cx, quad = small
        for space in (cx.V0, cx.V1, cx.V2, cx.V3):
            mat = assemble_mass(space, None, quad).toarray()
            offs = space.offsets
            for c in range(space.n_components):
                oracle = dense_volume_matrix(space.components[c],
                                             space.components[c], None, quad)
                blk = mat[offs[c]:offs[c + 1], offs[c]:offs[c + 1]]
                np.testing.assert_allclose(blk, oracle, atol=1e-12)

    def test_weighted_mass(self, small):
        cx, quad = small
        mat = assemble_mass(cx.V1, smooth_weight, quad).toarray()
        offs = cx.V1.offsets
        for c in range(3):
            oracle = dense_volume_matrix(cx.V1.components[c],
                                         cx.V1.components[c], smooth_weight,
                                         quad)
            np.testing.assert_allclose(mat[offs[c]:offs[c + 1],
                                           offs[c]:offs[c + 1]],
                                       oracle, atol=1e-12)

    def test_ramp_weight_matches_oracle(self, bench):
        cx, quad = bench
        w = lambda x, y, z: x / 100.0 + 0.0 * y + 0.0 * z
        mat = assemble_mass(cx.V1, w, quad).toarray()
        offs = cx.V1.offsets
        oracle = dense_volume_matrix(cx.V1.components[0], cx.V1.components[0],
                                     w, quad)
        np.testing.assert_allclose(mat[:offs[1], :offs[1]], oracle, atol=1e-13)

    def test_zero_weight(self, small):
        cx, quad = small
        mat = assemble_mass(cx.V1, lambda x, y, z: 0.0 * x, quad)
        assert abs(mat).max() == 0.0

    def test_symmetry_and_definiteness(self, small):
        cx, quad = small
        rng = np.random.default_rng(8)
        m1 = assemble_mass(cx.V1, None, quad)
        asym = abs(m1 - m1.T).max()
        assert asym < 1e-14
        for _ in range(20):
            v = rng.standard_normal(cx.V1.dim)
            assert v @ (m1 @ v) > 0
        mw = assemble_mass(cx.V1, lambda x, y, z: x * 0 + np.abs(np.sin(y)),
                           quad)
        for _ in range(20):
            v = rng.standard_normal(cx.V1.dim)
            assert v @ (mw @ v) >= -1e-13

    def test_determinism(self, small):
        cx, quad = small
        a = assemble_mass(cx.V1, smooth_weight, quad)
        b = assemble_mass(cx.V1, smooth_weight, quad)
        assert (a != b).nnz == 0
        assert np.array_equal(a.data, b.data)


class TestRotationOracle:

    def test_constant_axial_field_structure(self, small):
        cx, quad = small
        prof = ramp_profile()
        rot = assemble_rotation(cx.V1, prof.omega_c, prof.b0, quad).toarray()
        offs = cx.V1.offsets
        # only the (x, y) / (y, x) blocks are populated
        assert abs(rot[offs[2]:, :]).max() == 0.0
        assert abs(rot[:, offs[2]:]).max() == 0.0
        wxy = lambda x, y, z: 0.5 + 0.0 * (x + y + z)
        oracle = dense_volume_matrix(cx.V1.components[0], cx.V1.components[1],
                                     wxy, quad)
        np.testing.assert_allclose(rot[offs[0]:offs[1], offs[1]:offs[2]],
                                   oracle, atol=1e-12)

    def test_skew_symmetry_random_direction(self, small):
        cx, quad = small

        def b0(x, y, z):
            shape = np.broadcast_arrays(x, y, z)[0].shape
            vx = np.broadcast_to(np.sin(0.5 * x) * 0.3, shape)
            vy = np.broadcast_to(0.2 + 0.0 * y, shape)
            vz = np.sqrt(np.clip(1.0 - vx ** 2 - vy ** 2, 0.0, None))
            return np.stack([vx, vy + 0 * vz, vz], axis=-1)

        rot = assemble_rotation(cx.V1, lambda x, y, z: 0.4 + 0.1 * x, b0, quad)
        assert abs(rot + rot.T).max() < 1e-13

    def test_oracle_all_blocks(self, small):
        cx, quad = small

        def b0(x, y, z):
            shape = np.broadcast_arrays(x, y, z)[0].shape
            vx = np.broadcast_to(0.6 + 0.0 * x, shape)
            vy = np.broadcast_to(0.0 * y, shape)
            vz = np.broadcast_to(0.8 + 0.0 * z, shape)
            return np.stack([vx, vy, vz], axis=-1)

        wc = lambda x, y, z: 0.5 + 0.2 * x
        rot = assemble_rotation(cx.V1, wc, b0, quad).toarray()
        offs = cx.V1.offsets
        eps = {(0, 1): 2, (0, 2): 1, (1, 2): 0}
        sign = {(0, 1): 1.0, (0, 2): -1.0, (1, 2): 1.0}
        comp_val = {0: 0.6, 1: 0.0, 2: 0.8}
        for (mu, nu), k in eps.items():
            w = lambda x, y, z, k=k, s=sign[(mu, nu)]: \
                s * comp_val[k] * wc(x, y, z)
            oracle = dense_volume_matrix(cx.V1.components[mu],
                                         cx.V1.components[nu], w, quad)
            np.testing.assert_allclose(rot[offs[mu]:offs[mu + 1],
                                           offs[nu]:offs[nu + 1]],
                                       oracle, atol=1e-12)


class TestBoundaryPenalty:

    def test_empty_faces_zero(self, bench):
        cx, quad = bench
        a1 = assemble_boundary_penalty(cx, [], quad)
        assert a1.nnz == 0

    def test_oracle(self, small):
        cx, quad = small
        a1 = assemble_boundary_penalty(cx, [(0, 0), (0, 1)], quad).toarray()
        offs = cx.V1.offsets
        for mu in (1, 2):
            oracle = sum(dense_face_matrix(cx.V1.components[mu],
                                           cx.V1.components[mu], 0, xf, None,
                                           quad)
                         for xf in (0.0, 1.0))
            np.testing.assert_allclose(a1[offs[mu]:offs[mu + 1],
                                          offs[mu]:offs[mu + 1]],
                                       oracle, atol=1e-12)

    def test_normal_component_untouched(self, bench):
        cx, quad = bench
        a1 = assemble_boundary_penalty(cx, [(0, 0), (0, 1)], quad).toarray()
        offs = cx.V1.offsets
        assert abs(a1[:offs[1], :offs[1]]).max() == 0.0

    def test_positive_semidefinite(self, bench):
        cx, quad = bench
        a1 = assemble_boundary_penalty(cx, [(0, 0), (0, 1)], quad)
        rng = np.random.default_rng(12)
        for _ in range(100):
            v = rng.standard_normal(cx.V1.dim)
            assert v @ (a1 @ v) >= -1e-13

    def test_periodic_face_rejected(self, bench):
        cx, quad = bench
        with pytest.raises(ValueError, match='periodic'):
            assemble_boundary_penalty(cx, [(1, 0)], quad)


class TestBoundarySource:

    def test_zero_field(self, bench):
        cx, quad = bench
        s = assemble_boundary_source(
            cx.V1, cx, [(0, 0), (0, 1)],
            lambda pts, nu: np.zeros(np.asarray(pts).shape, dtype=complex),
            quad)
        assert np.abs(s).max() == 0.0

    def test_normal_field_gives_zero(self, bench):
        cx, quad = bench
        s = assemble_boundary_source(
            cx.V1, cx, [(0, 0), (0, 1)],
            lambda pts, nu: np.broadcast_to(np.asarray(nu, float), pts.shape),
            quad)
        np.testing.assert_allclose(np.abs(s), 0.0, atol=1e-15)

    @pytest.mark.parametrize('mode', ['O', 'X'])
    def test_manufactured_sources_match_oracle(self, bench, mode):
        cx, quad = bench
        ms = ManufacturedSolution(mode, ramp_profile())
        got = assemble_boundary_source(cx.V1, cx, [(0, 0), (0, 1)],
                                       ms.boundary_trace, quad)
        expected = np.zeros(cx.V1.dim, dtype=complex)
        offs = cx.V1.offsets
        for axis, side in ((0, 0), (0, 1)):
            xf = BOX[0][side]
            nu = np.zeros(3)
            nu[axis] = 1.0 if side else -1.0
            for mu in (1, 2):
                def g(x, y, z, mu=mu, nu=nu):
                    pts = np.stack(np.broadcast_arrays(x, y, z), axis=-1)
                    return ms.boundary_trace(pts, nu)[..., mu]
                expected[offs[mu]:offs[mu + 1]] += dense_face_moments(
                    cx.V1.components[mu], axis, xf, g, quad)
        np.testing.assert_allclose(got, expected, atol=1e-12)

    @pytest.mark.parametrize('mode', ['O', 'X'])
    def test_volume_moments_match_oracle(self, bench, mode):
        from oracles import dense_basis_1d

        cx, quad = bench
        ms = ManufacturedSolution(mode, ramp_profile())
        got = assemble_volume_moments(cx.V1, ms.volume_r, quad)
        offs = cx.V1.offsets
        W = np.einsum('x,y,z->xyz', quad.rules[0].flat_weights,
                      quad.rules[1].flat_weights, quad.rules[2].flat_weights)
        X = quad.rules[0].flat_points[:, None, None]
        Y = quad.rules[1].flat_points[None, :, None]
        Z = quad.rules[2].flat_points[None, None, :]
        pts = np.stack(np.broadcast_arrays(X, Y, Z), axis=-1)
        F = ms.volume_r(pts)
        for c in range(3):
            T = [dense_basis_1d(cx.V1.components[c][d],
                                quad.rules[d].flat_points) for d in range(3)]
            oracle = np.einsum('xi,yj,zk,xyz->ijk', T[0], T[1], T[2],
                               W * F[..., c], optimize=True).reshape(-1)
            np.testing.assert_allclose(got[offs[c]:offs[c + 1]], oracle,
                                       atol=1e-12)


class TestWeakDivergence:

    def test_compact_gradient_matches_interior_part(self, bench):
        cx, quad = bench
        m1 = assemble_mass(cx.V1, None, quad)
        wd, b1 = assemble_weak_divergence(cx, m1, quad)
        rng = np.random.default_rng(5)
        phi = rng.standard_normal(cx.V0.component_shapes[0])
        phi[:2] = 0.0
        phi[-2:] = 0.0
        e = cx.grad @ phi.reshape(-1)
        np.testing.assert_allclose(wd @ e, -(cx.grad.T @ (m1 @ e)),
                                   atol=1e-13)

    def test_constant_tangential_field(self, bench):
        cx, quad = bench
        m1 = assemble_mass(cx.V1, None, quad)
        wd, _ = assemble_weak_divergence(cx, m1, quad)
        offs = cx.V1.offsets
        e = np.zeros(cx.V1.dim)
        e[offs[1]:offs[2]] = 2 * np.pi    # constant-1 y-directed field
        assert abs(np.ones(cx.V0.dim) @ (wd @ e)) < 1e-12

    def test_boundary_matrix_oracle(self, small):
        cx, quad = small
        m1 = assemble_mass(cx.V1, None, quad)
        _, b1 = assemble_weak_divergence(cx, m1, quad)
        offs = cx.V1.offsets
        oracle = (dense_face_matrix(cx.V0.components[0], cx.V1.components[0],
                                    0, 1.0, None, quad)
                  - dense_face_matrix(cx.V0.components[0],
                                      cx.V1.components[0], 0, 0.0, None,
                                      quad))
        np.testing.assert_allclose(b1.toarray()[:, :offs[1]], oracle,
                                   atol=1e-12)
        assert abs(b1.toarray()[:, offs[1]:]).max() == 0.0


class TestDielectricMass:

    def test_vacuum_reduces_to_mass(self, bench):
        cx, quad = bench
        md = assemble_dielectric_mass(cx.V1, vacuum_profile(), quad)
        m1 = assemble_mass(cx.V1, None, quad)
        assert abs(md - m1.astype(complex)).max() < 1e-14

    def test_hermitian_without_collisions(self, small):
        cx, quad = small
        md = assemble_dielectric_mass(cx.V1, ramp_profile(), quad)
        assert abs(md - md.conj().T).max() < 1e-13

    def test_oracle(self, small):
        cx, quad = small
        prof = ramp_profile(slope=0.3, nu_e=0.05)
        md = assemble_dielectric_mass(cx.V1, prof, quad).toarray()
        offs = cx.V1.offsets
        from coldwave.plasma import stix_parameters

        def eps_entry(mu, nu):
            def w(x, y, z):
                S, D, P = stix_parameters(prof.omega_p(x, y, z),
                                          prof.omega_c(x, y, z),
                                          prof.nu_e(x, y, z))
                b = np.array([0.0, 0.0, 1.0])
                cross = np.array([[0, -b[2], b[1]], [b[2], 0, -b[0]],
                                  [-b[1], b[0], 0]])
                val = (S if mu == nu else 0.0) \
                    - 1j * D * cross[mu, nu] \
                    + (P - S) * b[mu] * b[nu]
                return val + 0.0 * np.broadcast_arrays(x, y, z)[0]
            return w

        for mu in range(3):
            for nu in range(3):
                oracle = dense_volume_matrix(cx.V1.components[mu],
                                             cx.V1.components[nu],
                                             eps_entry(mu, nu), quad)
                np.testing.assert_allclose(md[offs[mu]:offs[mu + 1],
                                              offs[nu]:offs[nu + 1]],
                                           oracle, atol=1e-12)


class TestSystemOperators:

    def test_bundle_contracts(self, bench):
        cx, quad = bench
        ms = ManufacturedSolution('X', ramp_profile())
        ops = build_system_operators(cx, ramp_profile(), [(0, 0), (0, 1)],
                                     ms.source_spec(), quad)
        assert abs(ops.rot + ops.rot.T).max() < 1e-13
        assert abs(ops.m1 - ops.m1.T).max() < 1e-14
        assert abs(ops.a1 - ops.a1.T).max() < 1e-14
        # curl-curl precompute consistency
        c = cx.curl
        assert abs(ops.curl_sq - c.T @ ops.m2 @ c).max() < 1e-14
        assert ops.dims['V1'] == cx.V1.dim
