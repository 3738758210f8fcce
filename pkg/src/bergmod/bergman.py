"""Reproducing kernels and function-level tools for the Bergman space.

All inner products are taken against the normalized volume measure, so
``||1|| = 1`` and ``<K_z, K_w> = K_z(w) = (1 - <w, z>)^-(n+1)``.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial

import numpy as np
from scipy.special import roots_jacobi

from .ball import as_point, hyperbolic_distance, inner, moebius_apply, norm_sq, pseudo_distance
from .errors import PreconditionError


class SampledFunction:
    """A deterministic evaluator ``C^n -> C`` with optional metadata.

    Parameters
    ----------
    fn : callable
        Maps an ``(m, n)`` complex array to an ``(m,)`` complex array.
    dim : int
        Ambient dimension ``n``.
    degree : int, optional
        Degree bound when the function is a polynomial.
    norm_sq : float, optional
        Squared Bergman norm, when known in closed form.
    """

    def __init__(self, fn, dim, degree=None, norm_sq=None):
        self._fn = fn
        self.dim = dim
        self.degree = degree
        self.norm_sq = norm_sq

    def __call__(self, w):
        w = as_point(w)
        single = w.ndim == 1
        out = np.asarray(self._fn(np.atleast_2d(w)), dtype=complex)
        return out[0] if single else out


def monomial_norm_sq(alpha, n=None):
    """Exact ``||z^alpha||^2 = alpha! n! / (n + |alpha|)!`` as a Fraction."""
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index entries must be nonnegative")
    n = len(alpha) if n is None else n
    if len(alpha) != n:
        raise ValueError("multi-index length must equal the dimension")
    num = factorial(n)
    for a in alpha:
        num *= factorial(a)
    return Fraction(num, factorial(n + sum(alpha)))


class Polynomial(SampledFunction):
    """Holomorphic polynomial stored as ``{multi-index: coefficient}``.

    The coefficient form gives exact Bergman inner products because distinct
    monomials are orthogonal.
    """

    def __init__(self, coeffs, dim):
        clean = {}
        for alpha, c in coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim:
                raise ValueError(f"multi-index {alpha} does not match dimension {dim}")
            c = complex(c)
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
        self.coeffs = clean
        degree = max((sum(a) for a in clean), default=0)
        super().__init__(self._evaluate, dim, degree=degree, norm_sq=self.bergman_norm_sq())

    @classmethod
    def constant(cls, c, dim):
        return cls({(0,) * dim: c}, dim)

    @classmethod
    def monomial(cls, alpha, c=1.0):
        return cls({tuple(alpha): c}, len(alpha))

    @classmethod
    def random(cls, dim, degree, rng, density=1.0):
        """Random polynomial with complex Gaussian coefficients up to ``degree``."""
        coeffs = {}
        for alpha in product(range(degree + 1), repeat=dim):
            if sum(alpha) <= degree and rng.random() < density:
                coeffs[alpha] = complex(rng.normal(), rng.normal())
        if not coeffs:
            coeffs[(0,) * dim] = 1.0
        return cls(coeffs, dim)

    def _evaluate(self, w):
        out = np.zeros(w.shape[0], dtype=complex)
        for alpha, c in self.coeffs.items():
            term = np.full(w.shape[0], c, dtype=complex)
            for j, a in enumerate(alpha):
                if a:
                    term = term * w[:, j] ** a
            out += term
        return out

    def bergman_norm_sq(self):
        return sum(abs(c) ** 2 * float(monomial_norm_sq(a)) for a, c in self.coeffs.items())

    def bergman_inner(self, other):
        """Exact ``<self, other>``."""
        return sum(
            c * np.conj(other.coeffs[a]) * float(monomial_norm_sq(a))
            for a, c in self.coeffs.items()
            if a in other.coeffs
        )

    def __mul__(self, other):
        out = {}
        for a, c in self.coeffs.items():
            for b, d in other.coeffs.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0) + c * d
        return Polynomial(out, self.dim)

    def __add__(self, other):
        out = dict(self.coeffs)
        for b, d in other.coeffs.items():
            out[b] = out.get(b, 0) + d
        return Polynomial(out, self.dim)

    def compose_linear(self, matrix):
        """Polynomial ``w -> self(matrix @ w)`` in the coefficient form.

        ``matrix`` has shape ``(self.dim, m)``; the result lives on ``C^m``.
        """
        matrix = np.asarray(matrix, dtype=complex)
        m = matrix.shape[1]
        rows = [
            Polynomial({tuple(int(k == j) for k in range(m)): matrix[i, j] for j in range(m)}, m)
            for i in range(self.dim)
        ]
        result = Polynomial({}, m)
        for alpha, c in self.coeffs.items():
            term = Polynomial.constant(c, m)
            for i, a in enumerate(alpha):
                for _ in range(a):
                    term = term * rows[i]
            result = result + term
        return result

    def jacobian(self, w):
        """Holomorphic gradient at ``w`` (shape ``(dim,)``), computed symbolically."""
        w = as_point(w)
        grad = np.zeros(self.dim, dtype=complex)
        for alpha, c in self.coeffs.items():
            for j, a in enumerate(alpha):
                if a == 0:
                    continue
                term = c * a
                for k, b in enumerate(alpha):
                    power = b - 1 if k == j else b
                    if power:
                        term = term * w[k] ** power
                grad[j] += term
        return grad

    def to_table(self):
        """Serializable coefficient table ``[[alpha, [re, im]], ...]`` in sorted order."""
        return [[list(a), [c.real, c.imag]] for a, c in sorted(self.coeffs.items())]

    @classmethod
    def from_table(cls, table, dim):
        return cls({tuple(a): complex(c[0], c[1]) for a, c in table}, dim)


def kernel_inner(lam, eta):
    """``<K_lam, K_eta> = K_lam(eta) = (1 - <eta, lam>)^-(n+1)``."""
    lam, eta = as_point(lam), as_point(eta)
    n = lam.shape[-1]
    return (1.0 - inner(eta, lam)) ** (-(n + 1))


def kernel_gram(points, others=None):
    """Matrix ``G[j, k] = <K_{others[k]}, K_{points[j]}> = K_{others[k]}(points[j])``."""
    points = np.atleast_2d(as_point(points))
    others = points if others is None else np.atleast_2d(as_point(others))
    n = points.shape[1]
    return (1.0 - points @ others.conj().T) ** (-(n + 1))


def kernel_norm(z):
    z = as_point(z)
    n = z.shape[-1]
    return (1.0 - norm_sq(z)) ** (-(n + 1) / 2)


def kernel_function(z):
    z = as_point(z)
    n = z.shape[-1]
    return SampledFunction(
        lambda w: (1.0 - w @ z.conj()) ** (-(n + 1)),
        n,
        norm_sq=float((1.0 - norm_sq(z)) ** (-(n + 1))),
    )


def normalized_kernel(z):
    z = as_point(z)
    n = z.shape[-1]
    scale = (1.0 - norm_sq(z)) ** ((n + 1) / 2)
    return SampledFunction(lambda w: scale * (1.0 - w @ z.conj()) ** (-(n + 1)), n, norm_sq=1.0)


def normalized_kernel_distance(z, w):
    """``||k_z - k_w||`` from the closed-form kernel inner product."""
    z, w = as_point(z), as_point(w)
    cross = kernel_inner(z, w) / (kernel_norm(z) * kernel_norm(w))
    return np.sqrt(np.clip(2.0 - 2.0 * cross.real, 0.0, None))


def sample_ball(n, count, rng):
    """Uniform points in ``B_n``: Gaussian direction, radius ``U^(1/2n)``."""
    g = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.random(count) ** (1.0 / (2 * n))
    return g * r[:, None]


@dataclass(frozen=True)
class MCResult:
    value: complex
    stderr: float
    count: int


def mc_integrate_ball(f, count, seed, n=None):
    """Monte Carlo estimate of ``∫ f dv`` over ``B_n`` (normalized measure).

    Samples are drawn with ``numpy.random.default_rng(seed)`` so the result
    is a pure function of ``(f, count, seed)``.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    n = f.dim if n is None else n
    rng = np.random.default_rng(seed)
    vals = np.asarray(f(sample_ball(n, count, rng)), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand returned non-finite values")
    mean = vals.mean()
    if count == 1:
        return MCResult(complex(mean), float("inf"), 1)
    spread = np.sqrt(np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1))
    return MCResult(complex(mean), float(spread / np.sqrt(count)), count)


def u_z_apply(z, f):
    """``U_z f = (f o phi_z) k_z``; unitary and self-inverse."""
    z = as_point(z)
    k = normalized_kernel(z)
    return SampledFunction(lambda w: f(moebius_apply(z, w)) * k(w), f.dim, norm_sq=f.norm_sq)


def ball_quadrature(d, radial_order, angular_order, weight_exponent=0, radius=1.0):
    """Product rule for ``∫_{|t|<radius} h(t) (1 - |t|^2/radius^2)^k dv_d(t)``.

    Uses ``s_j = |t_j|^2`` (which maps the ball onto a simplex), collapsed
    Gauss-Jacobi nodes on the simplex, and equispaced angles on each
    circle. With ``angular_order > p`` and ``radial_order > (p + k)/2`` the
    rule is exact for polynomials of bidegree ``p`` in ``(t, conj t)``.

    Returns
    -------
    points : ndarray, shape (N, d)
    weights : ndarray, shape (N,)
    """
    k = weight_exponent
    # u_j in [0, 1] with weight (1 - u_j)^(k + d - j)
    axes = []
    for j in range(1, d + 1):
        a = k + d - j
        x, w = roots_jacobi(radial_order, a, 0.0)
        axes.append(((x + 1.0) / 2.0, w / 2.0 ** (a + 1)))
    grids = np.meshgrid(*[u for u, _ in axes], indexing="ij")
    wgrids = np.meshgrid(*[w for _, w in axes], indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    wu = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1) * factorial(d)
    s = np.empty_like(u)
    remaining = np.ones(u.shape[0])
    for j in range(d):
        s[:, j] = u[:, j] * remaining
        remaining = remaining * (1.0 - u[:, j])
    theta = 2.0 * np.pi * np.arange(angular_order) / angular_order
    phases = np.stack(
        [g.ravel() for g in np.meshgrid(*([theta] * d), indexing="ij")], axis=1
    )
    mod = np.sqrt(np.clip(s, 0.0, None))
    pts = (mod[:, None, :] * np.exp(1j * phases)[None, :, :]).reshape(-1, d)
    weights = np.repeat(wu, phases.shape[0]) / phases.shape[0]
    return radius * pts, weights * radius ** (2 * d)


def local_l2_mass(g, w, d, radius=1.0, radial_order=12, angular_order=24):
    """``∫_{D(w, radius)} |g|^2 dv`` by pulling back through ``phi_w``.

    ``D(w, r) = phi_w(D(0, r))`` and ``D(0, r)`` is the round ball of radius
    ``tanh r``; the Jacobian of ``phi_w`` supplies the weight.
    """
    w = as_point(w)
    pts, wts = ball_quadrature(d, radial_order, angular_order, radius=np.tanh(radius))
    image = moebius_apply(w, pts)
    jac = (1.0 - norm_sq(w)) ** (d + 1) / np.abs(1.0 - pts @ w.conj()) ** (2 * (d + 1))
    return float(np.sum(wts * jac * np.abs(g(image)) ** 2))


def oscillation_check(g, z, w, d=None):
    """Both sides of the holomorphic oscillation estimate with ``C`` factored out.

    Returns ``(lhs, rhs)`` with ``lhs = |g(z) - g(w)|^2`` and
    ``rhs = rho(z, w)^2 / (1 - |w|^2)^(d+1) * ∫_{D(w, 1)} |g|^2 dv``, so that
    the estimate reads ``lhs <= C * rhs``. ``z`` may be a batch of points
    sharing the centre ``w``; the local mass is then computed once.

    Raises
    ------
    PreconditionError
        If ``beta(z, w) >= 1/2``.
    """
    z, w = as_point(z), as_point(w)
    d = g.dim if d is None else d
    if np.any(hyperbolic_distance(z, w) >= 0.5):
        raise PreconditionError("oscillation estimate requires beta(z, w) < 1/2")
    lhs = np.abs(g(z) - g(w)) ** 2
    rho = pseudo_distance(z, w)
    if z.ndim == 1:
        if rho == 0.0:
            return float(lhs), 0.0
        mass = local_l2_mass(g, w, d)
        return float(lhs), float(rho**2 / (1.0 - float(norm_sq(w))) ** (d + 1) * mass)
    if not np.any(rho > 0):
        return lhs, np.zeros_like(rho)
    mass = local_l2_mass(g, w, d)
    return lhs, rho**2 / (1.0 - float(norm_sq(w))) ** (d + 1) * mass
