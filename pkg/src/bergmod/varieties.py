"""Linear, affine and polynomial-graph varieties and their boundary behaviour."""

from dataclasses import dataclass, field

import numpy as np

from .ball import as_point, norm_sq, pseudo_distance
from .errors import NotOnVarietyError, PreconditionError

#: relative singular-value cutoff for every rank decision in this module
RANK_CUTOFF = 1e-10
ON_VARIETY_TOL = 1e-8
BOUNDARY_NORM_TOL = 1e-10
TRANSVERSALITY_TOL = 1e-6


def orthonormalize(vectors, n=None, cutoff=RANK_CUTOFF):
    """Orthonormal basis (columns) for the span of the columns of ``vectors``."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    n = vectors.shape[0] if n is None else n
    if vectors.size == 0:
        return np.zeros((n, 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((n, 0), dtype=complex)
    return u[:, s > cutoff * s[0]]


def null_space(matrix, cutoff=RANK_CUTOFF):
    """Orthonormal basis of ``ker(matrix)`` with a relative singular-value cutoff."""
    matrix = np.asarray(matrix, dtype=complex)
    ncols = matrix.shape[1]
    if matrix.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(matrix, full_matrices=True)
    if s.size == 0 or s[0] == 0:
        return np.eye(ncols, dtype=complex)
    rank = int(np.sum(s > cutoff * s[0]))
    return vh[rank:].conj().T


@dataclass(frozen=True)
class LinearVariety:
    """A complex subspace of ``C^n`` given by orthonormal basis columns."""

    basis: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=complex)
        if basis.ndim != 2:
            raise ValueError("basis must be an (n, d) array")
        n, d = basis.shape
        if d > n:
            raise ValueError("more basis vectors than ambient dimensions")
        if d and np.abs(basis.conj().T @ basis - np.eye(d)).max() > 1e-12:
            raise ValueError("basis columns are not orthonormal")
        basis.flags.writeable = False
        object.__setattr__(self, "basis", basis)

    @classmethod
    def span(cls, *vectors, n=None):
        """Subspace spanned by the given vectors (orthonormalized)."""
        if not vectors:
            if n is None:
                raise ValueError("ambient dimension needed for the zero subspace")
            return cls.zero(n)
        cols = np.stack([as_point(v) for v in vectors], axis=1)
        return cls(orthonormalize(cols))

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n):
        return cls(np.eye(n, dtype=complex))

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def projection(self):
        return projection_matrix(self)

    def residual(self, p):
        p = as_point(p)
        return float(np.linalg.norm(p - self.basis @ (self.basis.conj().T @ p)))

    def tangent_space(self, p=None):
        return self


@dataclass(frozen=True)
class AffineVariety:
    """``base + direction``; the base point is stored as given."""

    base: np.ndarray
    direction: LinearVariety

    def __post_init__(self):
        base = as_point(self.base)
        if base.shape != (self.direction.ambient_dim,):
            raise ValueError("base point and direction have different ambient dimensions")
        base.flags.writeable = False
        object.__setattr__(self, "base", base)

    @property
    def ambient_dim(self):
        return self.direction.ambient_dim

    @property
    def dim(self):
        return self.direction.dim

    def closest_to_origin(self):
        b = self.direction.basis
        return self.base - b @ (b.conj().T @ self.base)

    def residual(self, p):
        return self.direction.residual(as_point(p) - self.base)

    def tangent_space(self, p=None):
        return self.direction


@dataclass(frozen=True)
class GraphVariety:
    """Graph ``{chart @ (w', F(w')) : w' in C^d}`` of a polynomial map.

    Attributes
    ----------
    intrinsic_dim : int
        ``d``, the number of free coordinates.
    components : tuple of Polynomial
        The ``n - d`` polynomials ``F_{d+1}, ..., F_n`` in ``d`` variables.
    chart : ndarray
        Unitary ``(n, n)`` matrix mapping local to ambient coordinates.
    """

    intrinsic_dim: int
    components: tuple
    chart: np.ndarray = field(default=None)

    def __post_init__(self):
        comps = tuple(self.components)
        for f in comps:
            if f.dim != self.intrinsic_dim:
                raise ValueError("graph components must be polynomials in d variables")
        object.__setattr__(self, "components", comps)
        n = self.intrinsic_dim + len(comps)
        chart = np.eye(n, dtype=complex) if self.chart is None else np.array(self.chart, dtype=complex)
        if chart.shape != (n, n) or np.abs(chart.conj().T @ chart - np.eye(n)).max() > 1e-12:
            raise ValueError("chart must be an (n, n) unitary matrix")
        chart.flags.writeable = False
        object.__setattr__(self, "chart", chart)

    @property
    def ambient_dim(self):
        return self.chart.shape[0]

    @property
    def dim(self):
        return self.intrinsic_dim

    def lift(self, local):
        """Ambient points for an ``(m, d)`` array of free coordinates."""
        local = np.atleast_2d(as_point(local))
        values = [local] + [f(local)[:, None] for f in self.components]
        return np.hstack(values) @ self.chart.T

    def residual(self, p):
        local = self.chart.conj().T @ as_point(p)
        d = self.intrinsic_dim
        free = local[:d]
        graph = np.array([f(free) for f in self.components], dtype=complex)
        return float(np.linalg.norm(local[d:] - graph))

    def jacobian(self, free):
        """``(n - d, d)`` holomorphic Jacobian of ``F`` at ``free``."""
        return np.array([f.jacobian(free) for f in self.components], dtype=complex).reshape(
            len(self.components), self.intrinsic_dim
        )

    def tangent_space(self, p):
        return tangent_space(self, p)


def projection_matrix(v):
    """Orthogonal projection ``B B*`` onto a linear variety."""
    b = v.basis
    return b @ b.conj().T


def subspace_intersection(v1, v2):
    """Exact intersection via the common null space of ``I - M1`` and ``I - M2``."""
    n = v1.ambient_dim
    if v2.ambient_dim != n:
        raise ValueError("ambient dimensions differ")
    eye = np.eye(n, dtype=complex)
    stacked = np.vstack([eye - projection_matrix(v1), eye - projection_matrix(v2)])
    return LinearVariety(orthonormalize(null_space(stacked), n))


def orthogonal_remainder(v, modulo):
    """``v ⊖ modulo`` as a linear variety.

    The singular values of ``(I - P) B`` lie in ``[0, 1]`` for orthonormal
    ``B``, so the cutoff is absolute: a relative one would keep pure
    rounding noise when ``v`` lies inside ``modulo``.
    """
    p = np.eye(v.ambient_dim, dtype=complex) - projection_matrix(modulo)
    if v.dim == 0:
        return v
    u, s, _ = np.linalg.svd(p @ v.basis, full_matrices=False)
    return LinearVariety(u[:, s > np.sqrt(RANK_CUTOFF)])


def principal_angles(v1, v2, modulo=None):
    """Ascending principal angles between ``v1 ⊖ modulo`` and ``v2 ⊖ modulo``.

    Small angles are recovered from sines and large ones from cosines, so
    both ends of ``[0, pi/2]`` are accurate to machine precision.
    """
    if v1.ambient_dim != v2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    if modulo is not None:
        if modulo.ambient_dim != v1.ambient_dim:
            raise ValueError("modulo subspace has the wrong ambient dimension")
        for v in (v1, v2):
            if modulo.dim and np.linalg.norm((np.eye(v.ambient_dim) - projection_matrix(v)) @ modulo.basis) > 1e-8:
                raise PreconditionError("modulo subspace must lie in both subspaces")
        v1, v2 = orthogonal_remainder(v1, modulo), orthogonal_remainder(v2, modulo)
    b1, b2 = v1.basis, v2.basis
    if b1.shape[1] < b2.shape[1]:
        b1, b2 = b2, b1
    k = b2.shape[1]
    if k == 0:
        return np.zeros(0)
    cos = np.clip(np.linalg.svd(b1.conj().T @ b2, compute_uv=False), 0.0, 1.0)
    sin = np.clip(np.linalg.svd(b2 - b1 @ (b1.conj().T @ b2), compute_uv=False)[::-1], 0.0, 1.0)
    by_cos = np.arccos(cos)
    by_sin = np.arcsin(sin)
    return np.where(cos**2 > 0.5, by_sin, by_cos)


def subspace_gap(v1, v2):
    """Spectral norm ``||P1 - P2||``: 1 when dimensions differ, else sin of the largest angle."""
    return float(np.linalg.norm(projection_matrix(v1) - projection_matrix(v2), 2)) if v1.ambient_dim else 0.0


def tangent_space(v, p):
    """Tangent space of ``v`` at the point ``p`` as a linear variety."""
    p = as_point(p)
    res = v.residual(p)
    if res > ON_VARIETY_TOL:
        raise NotOnVarietyError(f"point is not on the variety (residual {res:.3e})")
    if not isinstance(v, GraphVariety):
        return v.tangent_space(p)
    d = v.intrinsic_dim
    free = (v.chart.conj().T @ p)[:d]
    cols = np.vstack([np.eye(d, dtype=complex), v.jacobian(free)])
    return LinearVariety(orthonormalize(v.chart @ cols))


def boundary_point(x):
    """Validate a point of the unit sphere and return it as an array."""
    x = as_point(x)
    if abs(np.sqrt(norm_sq(x)) - 1.0) >= BOUNDARY_NORM_TOL:
        raise PreconditionError(f"|x| = {np.sqrt(norm_sq(x)):.6g} is not on the unit sphere")
    return x


def sphere_transversality(t, x):
    """Transversality of a complex subspace ``t`` with the sphere at ``x``.

    A complex subspace lies inside the sphere's real tangent space at ``x``
    exactly when it is complex-orthogonal to ``x``, so the score is
    ``||P_t x||``.
    """
    x = boundary_point(x)
    score = float(np.linalg.norm(t.basis.conj().T @ x))
    return score, score > TRANSVERSALITY_TOL


def clean_intersection_check(t1, t2, t3, tol=1e-8):
    """Compare ``t1 ∩ t2`` with the claimed intersection tangent space ``t3``.

    Returns ``(verdict, gap)`` where ``gap = ||P_{t1∩t2} - P_{t3}||``.
    """
    eye = np.eye(t3.ambient_dim)
    for t in (t1, t2):
        if t3.dim and np.linalg.norm((eye - projection_matrix(t)) @ t3.basis) > tol:
            raise PreconditionError("t3 must be contained in both t1 and t2")
    common = subspace_intersection(t1, t2)
    gap = subspace_gap(common, t3)
    return bool(common.dim == t3.dim and gap < tol), gap


def localize(v, x):
    """Linear model ``(T_x V ∩ x^⊥) ⊕ C x`` of ``v`` at the boundary point ``x``.

    Raises
    ------
    NotOnVarietyError
        If ``x`` is not on ``v``.
    PreconditionError
        If ``v`` is not transversal to the sphere at ``x``.
    """
    x = boundary_point(x)
    x = x / np.sqrt(norm_sq(x))
    t = tangent_space(v, x)
    _, transversal = sphere_transversality(t, x)
    if not transversal:
        raise PreconditionError("variety is not transversal to the sphere at this point")
    b = t.basis
    coeffs = null_space((x.conj() @ b)[None, :])
    perp = b @ coeffs
    return LinearVariety(orthonormalize(np.hstack([perp, x[:, None]])))


def tangential_pair_witness(slope, r):
    """Witness that the lines ``{z2 = 0}`` and ``{(t, slope (t - 1))}`` are
    hyperbolically tangent at ``x = (1, 0)``.

    Returns
    -------
    w_r : ndarray
        The point ``(r, slope (r - 1))`` on the second line.
    image : ndarray
        ``phi_{r x}(w_r)``; its first coordinate is exactly zero.
    rho : float
        ``rho(r x, w_r)``.
    """
    if not 0.0 < r < 1.0:
        raise PreconditionError("r must lie in (0, 1)")
    x = np.array([1.0, 0.0], dtype=complex)
    w_r = np.array([r, slope * (r - 1.0)], dtype=complex)
    if norm_sq(w_r) >= 1.0:
        raise PreconditionError("witness point lies outside the ball; take r closer to 1")
    # base r*x sits on the first axis, so phi splits coordinatewise
    den = 1.0 - r * r
    image = np.array([(r - w_r[0]) / den, -np.sqrt(den) * w_r[1] / den], dtype=complex)
    return w_r, image, float(pseudo_distance(r * x, w_r))
