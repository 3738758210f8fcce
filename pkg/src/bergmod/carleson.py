"""The three equivalent Carleson-measure tests on discretized measures.

A discretized measure is a :class:`~bergmod.spans.WeightedPointMeasure`.
Finite grids cannot certify that a measure fails to be Carleson; what the
ladder functions report is a growth trend as the test grid approaches the
sphere, and that trend is labeled heuristic wherever it is emitted.
"""

from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np
from scipy.special import roots_legendre

from .ball import as_point, ball_params, ball_volume, inner, norm_sq
from .bergman import Polynomial, normalized_kernel
from .spans import WeightedPointMeasure

DEFAULT_SHELLS = (0.0, 0.5, 0.9, 0.99)
DEFAULT_RADIUS = 1.0
#: a ladder is called growing when it strictly increases by at least this factor
GROWTH_FACTOR = 1.5
LINE_GRID = {"nodes": 6, "min_angles": 64, "angle_factor": 16.0, "max_angles": 4096}
BOUNDED = "bounded"
GROWING = "growing"


def direction_net(n):
    """``2 n^2`` unit directions: ``e^{i pi k}`` for ``n = 1``, otherwise
    ``(e_j + e^{i pi k / n} e_{j+1}) / sqrt(2)`` with indices mod ``n``."""
    if n == 1:
        return np.array([[1.0 + 0j], [-1.0 + 0j]])
    out = []
    for j in range(n):
        for k in range(2 * n):
            v = np.zeros(n, dtype=complex)
            v[j] = 1.0
            v[(j + 1) % n] = np.exp(1j * np.pi * k / n)
            out.append(v / np.sqrt(2.0))
    return np.array(out)


def default_zgrid(n, shells=DEFAULT_SHELLS):
    """Radial shells times the direction net; the zero shell contributes one point."""
    dirs = direction_net(n)
    pts = []
    for s in shells:
        if s == 0:
            pts.append(np.zeros((1, n), dtype=complex))
        else:
            pts.append(s * dirs)
    return np.vstack(pts)


def disc_grid(levels=16, nodes=12, min_angles=128, angle_factor=32.0, max_angles=8192):
    """Normalized area measure on the unit disc, graded toward the circle.

    In ``s = |w|^2`` the measure is ``ds dtheta / (2 pi)``. The ``s`` axis is
    cut into panels ``[0, 1/2]`` and ``[1 - 2^-k, 1 - 2^-(k+1)]`` with
    Gauss-Legendre nodes on each, and every panel gets enough equispaced
    angles to resolve features of size ``1 - |w|``. Mass lost beyond the
    last panel is ``2^-(levels+1)``.
    """
    x, w = roots_legendre(nodes)
    pts, wts = [], []
    edges = [0.0] + [1.0 - 2.0 ** (-k) for k in range(1, levels + 2)]
    for lo, hi in zip(edges[:-1], edges[1:]):
        s = lo + (hi - lo) * (x + 1.0) / 2.0
        ws = w * (hi - lo) / 2.0
        outer = np.sqrt(hi)
        count = int(min(max_angles, max(min_angles, np.ceil(angle_factor / (1.0 - outer)))))
        theta = 2.0 * np.pi * np.arange(count) / count
        pts.append((np.sqrt(s)[:, None] * np.exp(1j * theta)[None, :]).ravel())
        wts.append(np.repeat(ws, count) / count)
    return WeightedPointMeasure(np.concatenate(pts)[:, None], np.concatenate(wts))


def line_measure(direction, density_exponent=None, **grid):
    """Measure ``C(n,1) (1 - |t|^2)^(n-1) dv_1`` on the line through ``direction``.

    With the default exponent this is the equivalent measure of the line;
    other exponents give comparison measures on the same support.
    """
    u = as_point(direction)
    u = u / np.sqrt(norm_sq(u))
    n = u.shape[0]
    k = n - 1 if density_exponent is None else density_exponent
    # the coarser grid keeps C^n evaluations cheap; its stability is what gets tested
    disc = disc_grid(**{**LINE_GRID, **grid})
    t = disc.points[:, 0]
    weights = comb(n, 1) * disc.weights * (1.0 - np.abs(t) ** 2) ** k
    return WeightedPointMeasure(t[:, None] * u[None, :], weights)


def kernel_values(nu, zgrid):
    """Condition-1 integrals ``∫ (1-|z|^2)^(n+1) / |1-<w,z>|^(2(n+1)) dnu(w)`` per grid point."""
    zgrid = np.atleast_2d(as_point(zgrid))
    n = nu.dim
    out = np.empty(zgrid.shape[0])
    for i, z in enumerate(zgrid):
        integrand = (1.0 - norm_sq(z)) ** (n + 1) / np.abs(1.0 - inner(nu.points, z)) ** (2 * (n + 1))
        out[i] = float(np.sum(nu.weights * integrand))
    return out


def carleson_kernel_sup(nu, zgrid):
    return float(np.max(kernel_values(nu, zgrid)))


def ratio_values(nu, zgrid, r=DEFAULT_RADIUS):
    """``nu(D(z, r)) / v(D(z, r))`` per grid point."""
    if r <= 0:
        raise ValueError("hyperbolic radius must be positive")
    zgrid = np.atleast_2d(as_point(zgrid))
    out = np.empty(zgrid.shape[0])
    for i, z in enumerate(zgrid):
        inside = ball_params(z, r).contains(nu.points)
        out[i] = float(nu.weights[inside].sum()) / ball_volume(z, r)
    return out


def carleson_ratio_sup(nu, r=DEFAULT_RADIUS, zgrid=None):
    zgrid = default_zgrid(nu.dim) if zgrid is None else zgrid
    return float(np.max(ratio_values(nu, zgrid, r)))


def embedding_ratios(nu, corpus):
    """``∫ |f|^2 dnu / ||f||^2`` for each corpus member (norms must be known)."""
    out = []
    for f in corpus:
        if f.norm_sq is None:
            raise ValueError("corpus functions need a known Bergman norm")
        mass = float(np.sum(nu.weights * np.abs(f(nu.points)) ** 2))
        out.append(mass / float(f.norm_sq))
    return np.array(out)


def carleson_embedding_check(nu, corpus):
    """Largest embedding ratio over the corpus, a lower bound for the embedding constant."""
    return float(np.max(embedding_ratios(nu, corpus)))


def standard_corpus(n, zgrid, degree=3):
    """Normalized monomials up to ``degree`` followed by normalized kernels at ``zgrid``."""
    corpus = []
    for total in range(degree + 1):
        for alpha in _multi_indices(n, total):
            p = Polynomial.monomial(alpha)
            scale = 1.0 / np.sqrt(float(p.bergman_norm_sq()))
            corpus.append(p * Polynomial.constant(scale, n))
    corpus.extend(normalized_kernel(z) for z in np.atleast_2d(as_point(zgrid)))
    return corpus


def _multi_indices(n, total):
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _multi_indices(n - 1, total - first):
            yield (first,) + rest


def growth_trend(values, factor=GROWTH_FACTOR):
    """Heuristic: ``growing`` if strictly increasing and up by ``factor`` overall."""
    values = list(values)
    rising = all(b > a for a, b in zip(values, values[1:]))
    if len(values) >= 2 and rising and values[-1] >= factor * values[0]:
        return GROWING
    return BOUNDED


@dataclass
class CarlesonReport:
    """Values of the three tests on the largest grid plus their ladder trends.

    ``verdicts`` holds one trend per test; ``verdict`` is ``carleson`` when
    all three are bounded, ``not-carleson (heuristic)`` when all three grow
    and ``inconsistent`` otherwise.
    """

    sup_kernel: float
    sup_ratio: float
    radius: float
    embedding_ratio: float
    grid: dict
    ladder: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    verdict: str = ""

    def to_dict(self):
        return asdict(self)


def carleson_ladder(nu, shells=DEFAULT_SHELLS, r=DEFAULT_RADIUS, degree=3):
    """Run all three tests on the nested grids ``shells[:2], shells[:3], ...``.

    Grids are nested, so every per-point value is computed once on the
    largest grid and each rung takes the maximum over its prefix.
    """
    n = nu.dim
    zgrid = default_zgrid(n, shells)
    kernel = kernel_values(nu, zgrid)
    ratio = ratio_values(nu, zgrid, r)
    monomials = standard_corpus(n, np.zeros((0, n)), degree)
    floor = float(np.max(embedding_ratios(nu, monomials)))
    kernels = embedding_ratios(nu, [normalized_kernel(z) for z in zgrid])
    sizes = [default_zgrid(n, shells[:k]).shape[0] for k in range(1, len(shells) + 1)]
    rungs = sizes[1:] if len(sizes) > 1 else sizes
    ladder = {
        "kernel": [float(kernel[:m].max()) for m in rungs],
        "ratio": [float(ratio[:m].max()) for m in rungs],
        "embedding": [max(floor, float(kernels[:m].max())) for m in rungs],
    }
    verdicts = {name: growth_trend(vals) for name, vals in ladder.items()}
    trends = set(verdicts.values())
    if trends == {BOUNDED}:
        verdict = "carleson"
    elif trends == {GROWING}:
        verdict = "not-carleson (heuristic)"
    else:
        verdict = "inconsistent"
    return CarlesonReport(
        sup_kernel=ladder["kernel"][-1],
        sup_ratio=ladder["ratio"][-1],
        radius=float(r),
        embedding_ratio=ladder["embedding"][-1],
        grid={
            "shells": [float(x) for x in shells],
            "directions": int(direction_net(n).shape[0]),
            "corpus_degree": degree,
            "points": int(nu.points.shape[0]),
            "total_mass": nu.total_mass,
        },
        ladder=ladder,
        verdicts=verdicts,
        verdict=verdict,
    )
