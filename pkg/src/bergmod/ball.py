"""Möbius automorphisms and hyperbolic geometry of the complex unit ball.

Points are complex numpy arrays whose last axis is the ambient coordinate
axis, so every function here broadcasts over leading batch dimensions.
The Hermitian product is linear in the first slot:
``inner(w, z) = sum(w * conj(z))``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError

#: points with ``1 - |z|^2`` below this are treated as boundary points
BOUNDARY_TOL = 1e-12
#: smallest admissible ``|1 - <w, z>|`` in the Möbius denominator
DENOMINATOR_TOL = 1e-14


def as_point(x):
    """Coerce ``x`` to a complex coordinate array.

    Accepts plain complex sequences, numpy arrays, or the ``[re, im]`` pair
    encoding used in config files (a real array whose last axis has length 2
    and that is tagged by the caller; see :func:`bergmod.io.decode_complex`).
    """
    return np.array(x, dtype=complex)


def inner(w, z):
    """Hermitian product ``<w, z>``, broadcasting over leading axes."""
    return np.sum(np.asarray(w) * np.conj(z), axis=-1)


def norm_sq(z):
    z = np.asarray(z)
    return np.sum((z * np.conj(z)).real, axis=-1)


_SPLITTER = 2.0**27 + 1.0


def _two_square(x):
    """Error-free ``x*x = p + e`` by Dekker splitting."""
    p = x * x
    c = _SPLITTER * x
    hi = c - (c - x)
    lo = x - hi
    e = ((hi * hi - p) + 2.0 * hi * lo) + lo * lo
    return p, e


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def one_minus_norm_sq(z):
    """``1 - |z|^2`` with compensated arithmetic.

    Near the sphere the naive difference loses all but a few digits, and
    every Möbius quantity inherits that error through ``sqrt(1 - |z|^2)``.
    """
    z = np.asarray(z, dtype=complex)
    total = np.ones(z.shape[:-1])
    err = np.zeros(z.shape[:-1])
    for part in (z.real, z.imag):
        for k in range(z.shape[-1]):
            p, e = _two_square(part[..., k])
            total, t = _two_sum(total, -p)
            err = err + t - e
    return total + err


def _require_interior(z, name="z"):
    if np.any(one_minus_norm_sq(z) < BOUNDARY_TOL):
        raise AdmissibilityError(f"{name} must lie strictly inside the unit ball")


def _require_closed_ball(w, name="w"):
    if np.any(norm_sq(w) > 1.0 + 1e-10):
        raise AdmissibilityError(f"{name} lies outside the closed unit ball")


@dataclass(frozen=True)
class MoebiusMap:
    """The involutive automorphism exchanging ``0`` and ``base``."""

    base: np.ndarray

    def __post_init__(self):
        base = as_point(self.base)
        _require_interior(base, "base")
        base.flags.writeable = False
        object.__setattr__(self, "base", base)

    @property
    def dim(self):
        return self.base.shape[-1]

    def line_projection(self, w):
        """``P_z(w)``: orthogonal projection of ``w`` onto the line through the base."""
        return _line_projection(self.base, np.asarray(w, dtype=complex))

    def __call__(self, w):
        return moebius_apply(self, w)


def _line_projection(z, w):
    nz = np.linalg.norm(z, axis=-1, keepdims=True)
    # unit vector first: dividing by |z|^2 overflows for subnormal bases
    u = np.divide(z, nz, out=np.zeros_like(z), where=nz > 0)
    return inner(w, u)[..., None] * u


def moebius_apply(map, w):
    """Evaluate ``phi_z(w)``.

    Parameters
    ----------
    map : MoebiusMap or array_like
        The automorphism, or its base point ``z`` (batched bases allowed).
    w : array_like
        Point(s) in the closed ball.

    Raises
    ------
    AdmissibilityError
        If ``|1 - <w, z>|`` is numerically zero, which only happens when
        ``w`` is on the sphere.
    """
    z = map.base if isinstance(map, MoebiusMap) else as_point(map)
    if not isinstance(map, MoebiusMap):
        _require_interior(z, "z")
    w = as_point(w)
    _require_closed_ball(w)
    wz = inner(w, z)
    den = 1.0 - wz
    if np.any(np.abs(den) < DENOMINATOR_TOL):
        raise AdmissibilityError("degenerate Möbius denominator 1 - <w, z>")
    pw = _line_projection(z, w)
    qw = w - pw
    s = np.sqrt(one_minus_norm_sq(z))
    num = z - pw - s[..., None] * qw
    return num / den[..., None]


def moebius_identity_residuals(a, z, w):
    """Residuals of the two Möbius inner-product identities.

    Returns ``(r1, r2)`` where ``r1`` compares ``1 - <phi_a(z), phi_a(w)>``
    with ``(1-|a|^2)(1-<z,w>) / ((1-<z,a>)(1-<a,w>))`` and ``r2`` is the
    ``w = z`` specialization ``1 - |phi_a(z)|^2``. Batched inputs return the
    elementwise residual arrays.
    """
    a, z, w = as_point(a), as_point(z), as_point(w)
    for name, p in (("a", a), ("z", z), ("w", w)):
        _require_interior(p, name)
    pa_z = moebius_apply(a, z)
    pa_w = moebius_apply(a, w)
    lhs1 = 1.0 - inner(pa_z, pa_w)
    rhs1 = (1.0 - norm_sq(a)) * (1.0 - inner(z, w)) / ((1.0 - inner(z, a)) * (1.0 - inner(a, w)))
    lhs2 = 1.0 - norm_sq(pa_z)
    rhs2 = (1.0 - norm_sq(a)) * (1.0 - norm_sq(z)) / np.abs(1.0 - inner(z, a)) ** 2
    return np.abs(lhs1 - rhs1), np.abs(lhs2 - rhs2)


def moebius_jacobian_det(z, w):
    """Real Jacobian determinant of ``phi_z`` at ``w``.

    ``(1 - |z|^2)^(n+1) / |1 - <w, z>|^(2(n+1))``; since ``phi_z`` is
    holomorphic this is the squared modulus of the complex Jacobian.
    """
    z, w = as_point(z), as_point(w)
    _require_interior(z, "z")
    _require_interior(w, "w")
    n = z.shape[-1]
    return one_minus_norm_sq(z) ** (n + 1) / np.abs(1.0 - inner(w, z)) ** (2 * (n + 1))


def pseudo_distance(z, w):
    """Pseudo-hyperbolic distance ``|phi_z(w)|``.

    Expanding ``1 - rho^2 = (1-|z|^2)(1-|w|^2)/|1-<z,w>|^2`` gives
    ``rho^2 = (|z-w|^2 - |z ^ w|^2) / |1-<z,w>|^2`` with the wedge term from
    the Lagrange identity. This form has no cancellation near ``z = w`` and
    is symmetric in its arguments to the last bit.
    """
    z, w = as_point(z), as_point(w)
    _require_interior(z, "z")
    _require_interior(w, "w")
    z, w = np.broadcast_arrays(z, w)
    # real arithmetic throughout: numpy's complex multiply is not bitwise commutative
    a, b, c, d = z.real, z.imag, w.real, w.imag
    wedge = np.zeros(z.shape[:-1])
    n = z.shape[-1]
    for i in range(n):
        for j in range(i + 1, n):
            re = (a[..., i] * c[..., j] - b[..., i] * d[..., j]) - (a[..., j] * c[..., i] - b[..., j] * d[..., i])
            im = (a[..., i] * d[..., j] + b[..., i] * c[..., j]) - (a[..., j] * d[..., i] + b[..., j] * c[..., i])
            wedge = wedge + (re * re + im * im)
    diff = np.sum((a - c) ** 2 + (b - d) ** 2, axis=-1)
    den_re = 1.0 - np.sum(a * c + b * d, axis=-1)
    den_im = np.sum(b * c - a * d, axis=-1)
    den = den_re * den_re + den_im * den_im
    return np.sqrt(np.clip((diff - wedge) / den, 0.0, 1.0))


def hyperbolic_distance(z, w):
    return np.arctanh(pseudo_distance(z, w))


@dataclass(frozen=True)
class HyperbolicBall:
    """The ellipsoid ``D(z, r) = {w : beta(z, w) < r}``.

    Attributes
    ----------
    center : ndarray
        The hyperbolic center ``z``.
    radius : float
        Hyperbolic radius ``r``.
    s : float
        ``tanh(r)``, the pseudo-hyperbolic radius.
    ellipsoid_center : ndarray
        Euclidean center ``(1 - s^2) z / (1 - s^2 |z|^2)``.
    rho_ell : float
        ``(1 - |z|^2) / (1 - s^2 |z|^2)``.
    """

    center: np.ndarray
    radius: float
    s: float
    ellipsoid_center: np.ndarray
    rho_ell: float

    @property
    def axial_radius(self):
        return self.s * self.rho_ell

    @property
    def transverse_radius(self):
        return self.s * np.sqrt(self.rho_ell)

    def contains(self, w):
        """Ellipsoid membership test; broadcasts over a batch of points."""
        w = as_point(w)
        pw = _line_projection(self.center, w)
        qw = w - pw
        axial = norm_sq(pw - self.ellipsoid_center) / self.axial_radius**2
        transverse = norm_sq(qw) / self.transverse_radius**2
        return axial + transverse < 1.0


def ball_params(z, r):
    z = as_point(z)
    _require_interior(z, "z")
    if r <= 0:
        raise ValueError("hyperbolic radius must be positive")
    s = float(np.tanh(r))
    zz = float(norm_sq(z))
    denom = 1.0 - s * s * zz
    center = (1.0 - s * s) * z / denom
    return HyperbolicBall(z, float(r), s, center, (1.0 - zz) / denom)


def ball_volume(z, r):
    """Normalized volume ``s^(2n) rho_ell^(n+1)`` of ``D(z, r)``.

    The ellipsoid has one complex axis of radius ``s rho_ell`` and ``n - 1``
    of radius ``s sqrt(rho_ell)``; under the normalized measure the volume
    of an ellipsoid is the product of its squared complex radii.
    """
    ball = ball_params(z, r)
    n = ball.center.shape[-1]
    return ball.s ** (2 * n) * ball.rho_ell ** (n + 1)


def unitary_to_e1(u):
    """Unitary ``U`` with ``U @ u = |u| e_1``.

    Built from a Householder reflection followed by a phase fix on the first
    row, so the image is exactly real and positive on ``e_1``.
    """
    u = as_point(u)
    n = u.shape[-1]
    nu = np.sqrt(norm_sq(u))
    if nu == 0:
        return np.eye(n, dtype=complex)
    x = u / nu
    phase = x[0] / abs(x[0]) if abs(x[0]) > 0 else 1.0 + 0j
    # H x = -phase * e1
    v = x.copy()
    v[0] += phase
    h = np.eye(n, dtype=complex) - 2.0 * np.outer(v, v.conj()) / norm_sq(v)
    fix = np.ones(n, dtype=complex)
    fix[0] = -np.conj(phase)
    return fix[:, None] * h


def grad_sq_moebius_at_zero(z):
    """Holomorphic gradient of ``w -> |phi_z(w)|^2`` at ``w = 0``.

    The gradient is returned in the rotated basis in which ``z = (|z|, 0,
    ..., 0)``; its first entry is ``conj(z_1)(|z_1|^2 - 1)`` and the others
    vanish identically. Use :func:`unitary_to_e1` to move between frames:
    if ``U`` maps ``z`` to ``|z| e_1`` then the gradient in the original
    coordinates is ``U.T @ result``.
    """
    z = as_point(z)
    _require_interior(z, "z")
    n = z.shape[-1]
    z1 = np.sqrt(norm_sq(z))
    out = np.zeros(n, dtype=complex)
    out[0] = np.conj(z1) * (abs(z1) ** 2 - 1.0)
    return out
