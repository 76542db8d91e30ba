"""Plasma profiles, Stix parameters, beam source and manufactured solutions.

All quantities are normalized: times by the injected angular frequency,
lengths by the vacuum wavelength over ``2 pi``, so the wave frequency is 1
and the vacuum wavelength is ``2 pi``. Profiles are plain callables over
broadcastable coordinate arrays, which keeps symbolic presets and gridded
data interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    'PlasmaProfile',
    'GaussianBeam',
    'ManufacturedSolution',
    'stix_parameters',
    'dielectric_apply',
    'dielectric_matrix',
    'current_response_inverse',
    'dispersion_scan',
    'envelope',
    'vacuum_profile',
    'ramp_profile',
    'blob_profile',
    'profile_from_csv',
    'PROFILE_PRESETS',
]


# =============================================================================
@dataclass(frozen=True)
class PlasmaProfile:
    """Background plasma description through normalized profiles.

    Attributes
    ----------
    omega_p : callable(x, y, z) -> array
        Normalized plasma frequency (>= 0).
    omega_c : callable(x, y, z) -> array
        Normalized cyclotron frequency (> 0).
    b0 : callable(x, y, z) -> array (..., 3)
        Unit background magnetic direction.
    nu_e : callable(x, y, z) -> array
        Normalized electron-collision frequency (>= 0).
    """

    omega_p: object
    omega_c: object
    b0: object
    nu_e: object

    def check(self, pts, tol=1e-12):
        """Validate the pointwise invariants at sample points."""
        pts = np.atleast_2d(pts)
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        b = np.asarray(self.b0(x, y, z))
        norms = np.linalg.norm(np.broadcast_to(b, (len(x), 3)), axis=-1)
        if np.any(np.abs(norms - 1.0) > tol):
            raise ValueError('b0 is not a unit vector field')
        if np.any(np.asarray(self.nu_e(x, y, z)) < 0):
            raise ValueError('nu_e must be nonnegative')
        return True


def _const(v):
    v = float(v)
    return lambda x, y, z: np.broadcast_arrays(x, y, z)[0] * 0.0 + v


def _const_vec(v):
    v = np.asarray(v, dtype=float)
    def f(x, y, z):
        shape = np.broadcast_arrays(x, y, z)[0].shape
        return np.broadcast_to(v, shape + (3,))
    return f


def vacuum_profile() -> PlasmaProfile:
    """No plasma: identity dielectric, decoupled current."""
    return PlasmaProfile(omega_p=_const(0.0), omega_c=_const(0.5),
                         b0=_const_vec((0.0, 0.0, 1.0)), nu_e=_const(0.0))


def ramp_profile(omega_c=0.5, slope=0.01, nu_e=0.0) -> PlasmaProfile:
    """Linear density ramp along x with a constant axial background field.

    The benchmark configuration: plasma frequency ``slope * x`` (default
    ``x / 100``), cyclotron frequency 0.5 and ``b0 = e_z``.
    """
    return PlasmaProfile(omega_p=lambda x, y, z: slope * (x + 0.0 * y + 0.0 * z),
                         omega_c=_const(omega_c),
                         b0=_const_vec((0.0, 0.0, 1.0)),
                         nu_e=_const(nu_e))


def blob_profile(domain, blobs=None, peak_omega_p2=1.3, omega_c=0.5,
                 nu_e=0.0, ramp_in_x=True) -> PlasmaProfile:
    """Smooth 2D density made of Gaussian blobs in the (x, y) plane.

    The squared plasma frequency is a superposition of Gaussian bumps,
    multiplied by a linear ramp in x (so the wave is launched from vacuum)
    and rescaled so its maximum equals ``peak_omega_p2``. Blob placement is
    configurable; the defaults straddle the horizontal midline of the box.

    Parameters
    ----------
    domain : ((a, b),) * 3
    blobs : sequence of (x0, y0, sigma, amplitude), optional
    peak_omega_p2 : float
        Maximum of the squared plasma frequency after rescaling. Choose it
        against the cutoff/resonance thresholds of the polarization at
        hand (O cutoff at 1, X cutoff at ``1 - omega_c``, upper-hybrid
        resonance at ``1 - omega_c**2``).
    """
    (xa, xb), (ya, yb), _ = domain
    lx, ly = xb - xa, yb - ya
    if blobs is None:
        blobs = [
            (xa + 0.45 * lx, ya + 0.62 * ly, 0.11 * lx, 1.0),
            (xa + 0.55 * lx, ya + 0.38 * ly, 0.09 * lx, 0.9),
            (xa + 0.70 * lx, ya + 0.55 * ly, 0.10 * lx, 0.8),
            (xa + 0.62 * lx, ya + 0.80 * ly, 0.08 * lx, 0.7),
            (xa + 0.80 * lx, ya + 0.30 * ly, 0.09 * lx, 0.85),
        ]
    blobs = [tuple(map(float, b)) for b in blobs]

    def raw(x, y):
        out = 0.0
        for x0, y0, sig, amp in blobs:
            out = out + amp * np.exp(-((x - x0) ** 2 + (y - y0) ** 2)
                                     / (2.0 * sig ** 2))
        if ramp_in_x:
            out = out * np.clip((x - xa) / lx, 0.0, None)
        return out

    # deterministic normalization from a fixed sample grid
    xs = np.linspace(xa, xb, 241)
    ys = np.linspace(ya, yb, 241)
    peak = raw(xs[:, None], ys[None, :]).max()
    scale = peak_omega_p2 / peak

    def omega_p(x, y, z):
        val = scale * raw(x, y) + 0.0 * z
        return np.sqrt(np.clip(val, 0.0, None))

    return PlasmaProfile(omega_p=omega_p, omega_c=_const(omega_c),
                         b0=_const_vec((0.0, 0.0, 1.0)), nu_e=_const(nu_e))


def profile_from_csv(path, omega_c=0.5, nu_e=0.0, b0=(0.0, 0.0, 1.0)
                     ) -> PlasmaProfile:
    """Plasma-frequency profile interpolated from a gridded CSV file.

    The file must have a header ``x,y,omega_p`` and enumerate a regular
    (x, y) grid in row-major order (y fastest). Values are interpolated
    bilinearly and extended constantly outside the grid; the profile is
    uniform in z.
    """
    from scipy.interpolate import RegularGridInterpolator

    data = np.genfromtxt(path, delimiter=',', names=True)
    xs = np.unique(data['x'])
    ys = np.unique(data['y'])
    vals = np.asarray(data['omega_p']).reshape(len(xs), len(ys))
    interp = RegularGridInterpolator((xs, ys), vals, method='linear',
                                     bounds_error=False, fill_value=None)

    def omega_p(x, y, z):
        xb, yb, zb = np.broadcast_arrays(x, y, z)
        pts = np.stack([np.clip(xb, xs[0], xs[-1]),
                        np.clip(yb, ys[0], ys[-1])], axis=-1)
        return interp(pts)

    return PlasmaProfile(omega_p=omega_p, omega_c=_const(omega_c),
                         b0=_const_vec(b0), nu_e=_const(nu_e))


PROFILE_PRESETS = {
    'vacuum': lambda domain=None, **kw: vacuum_profile(),
    'ramp_x': lambda domain=None, **kw: ramp_profile(**kw),
    'blobs': lambda domain, **kw: blob_profile(domain, **kw),
}


# =============================================================================
def stix_parameters(omega_p, omega_c, nu_e):
    """Cold-plasma Stix parameters S, D, P (complex, elementwise).

    ``S = 1 - (1 + i nu) wp^2 / ((1 + i nu)^2 - wc^2)``,
    ``D = wc wp^2 / ((1 + i nu)^2 - wc^2)``,
    ``P = 1 - wp^2 / (1 + i nu)``.

    Raises on a fundamental cyclotron resonance (vanishing denominator
    with zero collisionality).
    """
    wp = np.asarray(omega_p, dtype=float)
    wc = np.asarray(omega_c, dtype=float)
    nu = np.asarray(nu_e, dtype=float)
    one = 1.0 + 1j * nu
    den = one ** 2 - wc ** 2
    if np.any(np.abs(den) < 1e-12):
        raise ValueError('fundamental cyclotron resonance: '
                         '(1 + i nu)^2 - omega_c^2 vanishes')
    S = 1.0 - one * wp ** 2 / den
    D = wc * wp ** 2 / den
    P = 1.0 - wp ** 2 / one
    return S, D, P


def dielectric_apply(S, D, P, b0, v):
    """Apply the dielectric tensor: ``S v - i D b0 x v + (P - S) b0 (b0 . v)``."""
    b0 = np.asarray(b0, dtype=float)
    v = np.asarray(v)
    bv = np.einsum('...k,...k->...', b0, v)
    return (np.asarray(S)[..., None] * v
            - 1j * np.asarray(D)[..., None] * np.cross(b0, v)
            + (np.asarray(P) - np.asarray(S))[..., None] * b0 * bv[..., None])


def dielectric_matrix(profile: PlasmaProfile, pts):
    """Dielectric tensor at points, shape (npts, 3, 3)."""
    pts = np.atleast_2d(pts)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    S, D, P = stix_parameters(profile.omega_p(x, y, z),
                              profile.omega_c(x, y, z),
                              profile.nu_e(x, y, z))
    b = np.broadcast_to(np.asarray(profile.b0(x, y, z)), (len(x), 3))
    eye = np.eye(3)
    cross = np.zeros((len(x), 3, 3))
    cross[:, 0, 1] = -b[:, 2]
    cross[:, 0, 2] = b[:, 1]
    cross[:, 1, 0] = b[:, 2]
    cross[:, 1, 2] = -b[:, 0]
    cross[:, 2, 0] = -b[:, 1]
    cross[:, 2, 1] = b[:, 0]
    return (S[:, None, None] * eye
            - 1j * D[:, None, None] * cross
            + (P - S)[:, None, None] * np.einsum('mi,mj->mij', b, b))


def current_response_inverse(profile: PlasmaProfile, pts):
    """Matrix sending the harmonic electric field to the harmonic current.

    Pointwise inverse of the time-harmonic current-response operator,
    premultiplied by the plasma frequency: ``Y_hat = wp T^{-1} E_hat`` with
    ``T = (nu - i) I - wc [b0 x]``. Rows vanish where the plasma frequency
    is zero, which removes the division singularity of the equivalent
    susceptibility relation ``wp Y_hat = i (E_hat - eps E_hat)``.
    """
    pts = np.atleast_2d(pts)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    wp = np.broadcast_to(np.asarray(profile.omega_p(x, y, z), float), x.shape)
    wc = np.broadcast_to(np.asarray(profile.omega_c(x, y, z), float), x.shape)
    nu = np.broadcast_to(np.asarray(profile.nu_e(x, y, z), float), x.shape)
    b = np.broadcast_to(np.asarray(profile.b0(x, y, z)), (len(x), 3))
    T = np.zeros((len(x), 3, 3), dtype=complex)
    T[:] = (nu - 1j)[:, None, None] * np.eye(3)
    T[:, 0, 1] += wc * b[:, 2]
    T[:, 0, 2] -= wc * b[:, 1]
    T[:, 1, 0] -= wc * b[:, 2]
    T[:, 1, 2] += wc * b[:, 0]
    T[:, 2, 0] += wc * b[:, 1]
    T[:, 2, 1] -= wc * b[:, 0]
    return wp[:, None, None] * np.linalg.inv(T)


def dispersion_scan(profile: PlasmaProfile, pts, mode):
    """Local perpendicular-propagation refractive index along a point path.

    Returns a dict with the squared refractive index ``n2`` (``P`` for
    O-mode, ``S - D^2/S`` for X-mode), and boolean flags per segment
    marking cutoff crossings (sign change of ``n2``) and, for the X-mode,
    resonance crossings (sign change of ``S``).
    """
    if mode not in ('O', 'X'):
        raise ValueError(f"mode must be 'O' or 'X', got {mode!r}")
    pts = np.atleast_2d(pts)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    S, D, P = stix_parameters(profile.omega_p(x, y, z),
                              profile.omega_c(x, y, z),
                              profile.nu_e(x, y, z))
    def crossings(vals):
        return np.diff(np.signbit(np.real(vals))) != 0

    if mode == 'O':
        n2 = P
        res = np.zeros(len(x) - 1, dtype=bool)
    else:
        n2 = S - D ** 2 / S
        res = crossings(S)
    return {'n2': n2, 'cutoff': crossings(n2), 'resonance': res}


# =============================================================================
def envelope(t, dt):
    """Slow turn-on ramp ``(2/pi) arctan(t / (20 dt))``, in [0, 1)."""
    return 2.0 / np.pi * np.arctan(np.asarray(t) / (20.0 * dt))


@dataclass(frozen=True)
class GaussianBeam:
    """Time-harmonic circular Gaussian beam propagating along +x.

    The focus sits on the launch plane ``x = 0`` at ``(0, y0, z0)``; the
    phasor at the focus is the polarization vector itself. The magnetic
    phasor is ``-i curl E`` evaluated with 4th-order central finite
    differences of the closed form (the beam is a paraxial, not an exact,
    solution, so a hand-derived curl would buy no extra accuracy).
    """

    waist: float
    y0: float
    z0: float
    polarization: tuple
    amplitude: float = 1.0
    fd_step: float = 1e-2

    def __post_init__(self):
        e = np.asarray(self.polarization, dtype=float)
        if not np.isclose(np.linalg.norm(e), 1.0):
            raise ValueError('polarization must be a unit vector')
        if not self.waist > 0:
            raise ValueError('waist must be positive')

    @property
    def rayleigh_range(self) -> float:
        return 0.5 * self.waist ** 2

    def e_hat(self, pts):
        """Electric phasor at points, shape (npts, 3), complex."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x = pts[..., 0]
        r2 = (pts[..., 1] - self.y0) ** 2 + (pts[..., 2] - self.z0) ** 2
        xr = self.rayleigh_range
        w2 = self.waist ** 2 * (1.0 + (x / xr) ** 2)
        curvature = x / (x ** 2 + xr ** 2)
        gouy = np.arctan(x / xr)
        amp = self.amplitude * self.waist / np.sqrt(w2) * np.exp(-r2 / w2)
        phase = x + 0.5 * curvature * r2 - gouy
        e = np.asarray(self.polarization, dtype=float)
        return (amp * np.exp(1j * phase))[..., None] * e

    def b_hat(self, pts):
        """Magnetic phasor ``-i curl e_hat`` by finite differences."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        h = self.fd_step
        curl = np.zeros(pts.shape[:-1] + (3,), dtype=complex)
        grads = []
        for d in range(3):
            vals = []
            for c, s in ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)):
                q = pts.copy()
                q[..., d] += c * h
                vals.append(s * self.e_hat(q))
            grads.append(sum(vals) / (12.0 * h))
        curl[..., 0] = grads[1][..., 2] - grads[2][..., 1]
        curl[..., 1] = grads[2][..., 0] - grads[0][..., 2]
        curl[..., 2] = grads[0][..., 1] - grads[1][..., 0]
        return -1j * curl

    def boundary_trace(self, pts, normal):
        """Impedance trace ``e_hat - b_hat x nu`` for the boundary source."""
        return self.e_hat(pts) - np.cross(self.b_hat(pts), np.asarray(normal))


# =============================================================================
class ManufacturedSolution:
    """Closed-form time-harmonic solutions for solver verification.

    Two polarizations on the density-ramp configuration (b0 = e_z,
    constant cyclotron frequency): 'O' with the electric field along the
    background direction, 'X' with it in the transverse plane. Each comes
    with the volume and boundary sources that make it an exact solution of
    the damped-free model; the boundary trace is generated from the fields
    themselves, ``s_hat = e_hat - b_hat x nu``, which reproduces the
    closed-form source expressions.
    """

    def __init__(self, mode, profile: PlasmaProfile):
        if mode not in ('O', 'X'):
            raise ValueError(f"mode must be 'O' or 'X', got {mode!r}")
        self.mode = mode
        self.profile = profile

    # -- phasors ---------------------------------------------------------
    def _wp(self, x):
        return np.asarray(self.profile.omega_p(x, 0.0 * x, 0.0 * x), float)

    def _wc(self, x):
        return np.asarray(self.profile.omega_c(x, 0.0 * x, 0.0 * x), float)

    def e_hat(self, pts):
        pts = np.atleast_2d(pts)
        x = pts[..., 0]
        out = np.zeros(x.shape + (3,), dtype=complex)
        if self.mode == 'O':
            out[..., 2] = np.exp(1j * x)
        else:
            out[..., 0] = -1j * np.cos(x)
            out[..., 1] = -self._wc(x) * np.cos(x)
        return out

    def b_hat(self, pts):
        pts = np.atleast_2d(pts)
        x = pts[..., 0]
        out = np.zeros(x.shape + (3,), dtype=complex)
        if self.mode == 'O':
            out[..., 1] = -np.exp(1j * x)
        else:
            out[..., 2] = -1j * self._wc(x) * np.sin(x)
        return out

    def y_hat(self, pts):
        pts = np.atleast_2d(pts)
        x = pts[..., 0]
        out = np.zeros(x.shape + (3,), dtype=complex)
        if self.mode == 'O':
            out[..., 2] = 1j * self._wp(x) * np.exp(1j * x)
        else:
            out[..., 0] = self._wp(x) * np.cos(x)
        return out

    def s_hat_volume(self, pts):
        """Phasor of the residual volume source in the weakly-posed law."""
        pts = np.atleast_2d(pts)
        x = pts[..., 0]
        out = np.zeros(x.shape + (3,), dtype=complex)
        if self.mode == 'O':
            out[..., 2] = 1j * self._wp(x) ** 2 * np.exp(1j * x)
        else:
            out[..., 0] = (self._wp(x) ** 2 - 1.0) * np.cos(x)
        return out

    # -- real fields -----------------------------------------------------
    @staticmethod
    def _at_time(phasor, t):
        return phasor.real * np.cos(t) + phasor.imag * np.sin(t)

    def e(self, t, pts):
        return self._at_time(self.e_hat(pts), t)

    def b(self, t, pts):
        return self._at_time(self.b_hat(pts), t)

    def y(self, t, pts):
        return self._at_time(self.y_hat(pts), t)

    # -- sources ----------------------------------------------------------
    def boundary_trace(self, pts, normal):
        """Generic trace ``e_hat - b_hat x nu`` on an artificial face."""
        return self.e_hat(pts) - np.cross(self.b_hat(pts), np.asarray(normal))

    def volume_r(self, pts):
        return self.s_hat_volume(pts).real

    def volume_i(self, pts):
        return self.s_hat_volume(pts).imag

    def source_spec(self, envelope=None):
        from .assembly import SourceSpec
        return SourceSpec(boundary_field=self.boundary_trace,
                          volume_r=self.volume_r, volume_i=self.volume_i,
                          envelope=envelope)

    # -- exact invariants --------------------------------------------------
    def exact_hamiltonian(self, t, domain, n_quad=4000):
        """Field energy of the exact solution by high-order quadrature.

        The manufactured fields depend on x only, so the transverse
        directions contribute the cross-section area.
        """
        (xa, xb), (ya, yb), (za, zb) = domain
        from .splines import gauss_rule
        rule = gauss_rule(6, np.linspace(xa, xb, n_quad // 6 + 2))
        pts = np.zeros((rule.flat_points.size, 3))
        pts[:, 0] = rule.flat_points
        area = (yb - ya) * (zb - za)
        total = 0.0
        for f in (self.e, self.b, self.y):
            vals = f(t, pts)
            total += area * np.sum(rule.flat_weights * np.sum(vals ** 2, axis=1))
        return 0.5 * total

    def exact_charge_phasor(self, domain, n_quad=2000):
        """Flux phasor of the electric field over the non-periodic faces.

        The raw-divergence total charge of the exact solution is
        ``Re(Q_hat e^{-it})``; the X-mode on the benchmark box gives
        ``8 pi^2 sin(t)``.
        """
        (xa, xb), (ya, yb), (za, zb) = domain
        area = (yb - ya) * (zb - za)
        e_right = self.e_hat(np.array([[xb, 0.0, 0.0]]))[0, 0]
        e_left = self.e_hat(np.array([[xa, 0.0, 0.0]]))[0, 0]
        return area * (e_right - e_left)

    def exact_charge(self, t, domain):
        return np.real(self.exact_charge_phasor(domain) * np.exp(-1j * t))
