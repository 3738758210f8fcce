"""Finite kernel spans standing in for quotient modules, and equivalent measures."""

import csv
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.stats import beta, norm, qmc

from .ball import as_point, norm_sq, pseudo_distance
from .bergman import Polynomial, SampledFunction, ball_quadrature, kernel_gram
from .errors import PreconditionError, SamplingError
from .varieties import AffineVariety, GraphVariety, LinearVariety, projection_matrix

#: relative eigenvalue cutoff used when whitening kernel Gram matrices
GRAM_CUTOFF = 1e-10


@dataclass(frozen=True)
class SamplePlan:
    """How to discretize a variety.

    Attributes
    ----------
    count : int
        Number of points ``m``.
    rho_max : float
        Every sample satisfies ``|lambda| <= rho_max < 1``.
    scheme : str
        ``"stratified-random"`` or ``"separated-net"``.
    separation : float
        Minimum pairwise pseudo-hyperbolic distance for separated nets.
    seed : int
    radial : str
        Radial law on the slice ball: ``"uniform"`` (uniform in Euclidean
        radius), ``"hyperbolic"`` (uniform in hyperbolic radius) or
        ``"slice"`` (the slice measure ``(1 - |t|^2)^(n-d) dv_d``).
    """

    count: int
    rho_max: float = 0.95
    scheme: str = "stratified-random"
    separation: float = 0.2
    seed: int = 0
    radial: str = "uniform"

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if not 0.0 < self.rho_max < 1.0:
            raise ValueError("rho_max must lie in (0, 1)")
        if self.scheme not in ("stratified-random", "separated-net"):
            raise ValueError(f"unknown sampling scheme {self.scheme!r}")
        if self.radial not in ("uniform", "hyperbolic", "slice"):
            raise ValueError(f"unknown radial law {self.radial!r}")


def _slice_geometry(v):
    """Center, orthonormal directions and Euclidean radius of ``v ∩ B_n``."""
    if isinstance(v, LinearVariety):
        return np.zeros(v.ambient_dim, dtype=complex), v.basis, 1.0
    if isinstance(v, AffineVariety):
        c = v.closest_to_origin()
        cc = float(norm_sq(c))
        if cc >= 1.0:
            raise PreconditionError("affine variety misses the open ball")
        return c, v.direction.basis, float(np.sqrt(1.0 - cc))
    raise TypeError(f"no flat slice for {type(v).__name__}")


def _radial_quantiles(q, d, k, rel_max, law):
    """Map uniform quantiles ``q`` to radii in ``[0, rel_max]`` of the unit d-ball."""
    if law == "uniform":
        return rel_max * q
    if law == "hyperbolic":
        return np.tanh(q * np.arctanh(rel_max))
    # slice law: density ∝ r^(2d-1) (1 - r^2)^k, i.e. s = r^2 ~ Beta(d, k + 1)
    dist = beta(d, k + 1)
    return np.sqrt(dist.ppf(q * dist.cdf(rel_max**2)))


def _unit_directions(gauss):
    d = gauss.shape[1] // 2
    g = gauss[:, :d] + 1j * gauss[:, d:]
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _uniforms(rng, count, dims, stratified):
    """``(count, dims)`` uniforms; stratified draws come from a scrambled Halton net."""
    if stratified:
        return qmc.Halton(dims, scramble=True, seed=rng).random(count)
    return rng.random((count, dims))


def _candidates(v, plan, rng, count, stratified):
    n = v.ambient_dim
    if isinstance(v, GraphVariety):
        d = v.dim
        out = np.zeros((0, n), dtype=complex)
        for _ in range(200):
            need = count - out.shape[0]
            if need <= 0:
                break
            u = _uniforms(rng, 4 * need, 2 * d + 1, stratified=False)
            free = _unit_directions(norm.ppf(u[:, 1:])) * u[:, :1] ** (1 / (2 * d))
            pts = v.lift(free)
            out = np.vstack([out, pts[np.sqrt(norm_sq(pts)) <= plan.rho_max]])
        if out.shape[0] < count:
            raise SamplingError("graph chart rarely meets the ball", achieved=out.shape[0])
        return out[:count]
    center, dirs, radius = _slice_geometry(v)
    d = dirs.shape[1]
    if d == 0:
        return center[None, :]
    reach_sq = plan.rho_max**2 - float(norm_sq(center))
    if reach_sq <= 0:
        raise SamplingError("rho_max excludes the whole slice", achieved=0)
    rel_max = min(np.sqrt(reach_sq) / radius, 1.0 - 1e-15)
    u = _uniforms(rng, count, 2 * d + 1, stratified)
    r = _radial_quantiles(u[:, 0], d, n - d, rel_max, plan.radial)
    # clip keeps the inverse normal CDF finite at the net's corners
    local = _unit_directions(norm.ppf(np.clip(u[:, 1:], 1e-15, 1 - 1e-15))) * (radius * r)[:, None]
    return center[None, :] + local @ dirs.T


def sample_variety(v, plan):
    """Deterministic sample of ``v ∩ {|z| <= rho_max}``.

    Zero-dimensional flats yield their single point. Separated nets are
    built greedily from a stream of random candidates.

    Raises
    ------
    SamplingError
        When a separated net with ``plan.count`` points cannot be found.
    """
    rng = np.random.default_rng(plan.seed)
    if plan.scheme == "stratified-random":
        return _candidates(v, plan, rng, plan.count, stratified=True)
    accepted = []
    for _ in range(50):
        before = len(accepted)
        batch = _candidates(v, plan, rng, 20 * plan.count, stratified=False)
        for p in batch:
            if not accepted or np.min(pseudo_distance(np.array(accepted), p)) >= plan.separation:
                accepted.append(p)
                if len(accepted) == plan.count:
                    return np.array(accepted)
        # a full batch with no new point means the packing has saturated
        if batch.shape[0] == 1 or len(accepted) == before:
            break
    raise SamplingError(
        f"separated net with delta={plan.separation} reached {len(accepted)} of {plan.count} points",
        achieved=len(accepted),
    )


@dataclass(frozen=True)
class KernelSpan:
    """``span{K_lambda : lambda in points}`` with a whitening factor.

    ``gram[j, k] = <K_{points[k]}, K_{points[j]}>``. The columns of
    ``whitening`` give coefficients of an orthonormal basis of the span:
    ``whitening^* gram whitening = I`` on the retained range.
    """

    points: np.ndarray
    gram: np.ndarray
    whitening: np.ndarray
    eigenvalues: np.ndarray
    cutoff: float

    @property
    def rank(self):
        return self.whitening.shape[1]

    @property
    def dim(self):
        return self.points.shape[1]

    def evaluate(self, coefficients, w):
        """``sum_j c_j K_{lambda_j}(w)`` for a batch of points ``w``."""
        return kernel_gram(np.atleast_2d(as_point(w)), self.points) @ coefficients


def whiten(gram, cutoff=GRAM_CUTOFF):
    """Whitening factor for a Hermitian PSD Gram matrix.

    The Gram matrix is first scaled to unit diagonal (same span, far better
    conditioning), then eigenvalues below ``cutoff * max`` are discarded.
    Returns ``(W, eigenvalues)`` with ``W^* G W = I``.
    """
    diag = np.sqrt(np.real(np.diag(gram)))
    scaled = gram / np.outer(diag, diag)
    scaled = (scaled + scaled.conj().T) / 2
    vals, vecs = np.linalg.eigh(scaled)
    keep = vals > cutoff * vals[-1]
    w = vecs[:, keep] / np.sqrt(vals[keep])[None, :]
    return w / diag[:, None], vals


def build_span(points, cutoff=GRAM_CUTOFF):
    points = np.atleast_2d(as_point(points))
    if points.shape[0] == 0:
        raise ValueError("cannot build a kernel span from no points")
    gram = kernel_gram(points)
    w, vals = whiten(gram, cutoff)
    return KernelSpan(points, gram, w, vals, cutoff)


@dataclass(frozen=True)
class Projection:
    coefficients: np.ndarray
    evaluator: SampledFunction
    norm: float


def project(span, f):
    """Orthogonal projection of ``f`` onto the kernel span.

    Since ``<f, K_lambda> = f(lambda)``, the projection is the least-norm
    element of the span interpolating ``f`` on the sample points.
    """
    values = np.asarray(f(span.points), dtype=complex)
    whitened = span.whitening.conj().T @ values
    coeffs = span.whitening @ whitened
    evaluator = SampledFunction(lambda w: span.evaluate(coeffs, w), span.dim)
    return Projection(coeffs, evaluator, float(np.linalg.norm(whitened)))


def project_oracle_linear(v, f):
    """Exact quotient-module projection ``w -> f(M w)`` for a subspace ``v``.

    Polynomials are composed in coefficient form so exact norms survive.
    """
    m = projection_matrix(v)
    if isinstance(f, Polynomial):
        return f.compose_linear(m)
    return SampledFunction(lambda w: f(w @ m.T), f.dim)


@dataclass(frozen=True)
class WeightedPointMeasure:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(as_point(self.points))
        wts = np.asarray(self.weights, dtype=float)
        if wts.shape != (pts.shape[0],):
            raise ValueError("one weight per point required")
        if np.any(wts < 0) or not np.all(np.isfinite(wts)):
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def total_mass(self):
        return float(self.weights.sum())

    def integrate(self, f):
        return complex(np.sum(self.weights * np.asarray(f(self.points))))

    def reweighted(self, density):
        """Measure with weights multiplied by ``density(points)``."""
        return WeightedPointMeasure(self.points, self.weights * np.asarray(density(self.points), dtype=float))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = []
            for j in range(self.dim):
                header += [f"re{j + 1}", f"im{j + 1}"]
            writer.writerow(header + ["weight"])
            for p, w in zip(self.points, self.weights):
                row = []
                for c in p:
                    row += [repr(float(c.real)), repr(float(c.imag))]
                writer.writerow(row + [repr(float(w))])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if not header or header[-1] != "weight" or (len(header) - 1) % 2:
            raise ValueError(f"{path}: expected re/im column pairs followed by 'weight'")
        data = np.array(body, dtype=float).reshape(len(body), len(header))
        pts = data[:, :-1:2] + 1j * data[:, 1:-1:2]
        return cls(pts, data[:, -1])


def equivalent_measure(v, plan):
    """Quadrature for ``c (1 - |z|^2)^(n-d) dv_V`` on ``V ∩ B_n``.

    ``dv_V`` is normalized volume on the ``d``-dimensional slice, and
    ``c = C(n, d)`` makes the total mass 1 (the squared norm of the
    constant function). The node count is roughly ``plan.count``.
    """
    if not isinstance(v, LinearVariety):
        raise TypeError("equivalent measures are built for linear varieties")
    n, d = v.ambient_dim, v.dim
    if d == 0:
        return WeightedPointMeasure(np.zeros((1, n), dtype=complex), np.ones(1))
    per_dim = plan.count ** (1.0 / d)
    angular = max(4, int(np.ceil(np.sqrt(2 * per_dim))))
    radial = max(2, int(np.ceil(per_dim / angular)))
    local, w = ball_quadrature(d, radial, angular, weight_exponent=n - d)
    return WeightedPointMeasure(local @ v.basis.T, comb(n, d) * w)


def equivalent_measure_constant(n, d):
    return comb(n, d)
