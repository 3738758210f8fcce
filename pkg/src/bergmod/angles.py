"""Angles between subspaces, finite-section estimates for quotient modules,
and the closedness verdict built on them.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .spans import GRAM_CUTOFF, KernelSpan, build_span
from .varieties import (
    LinearVariety,
    orthonormalize,
    principal_angles,
    projection_matrix,
    subspace_intersection,
)

CLOSED = "closed"
NOT_CLOSED = "not-closed"
INCONCLUSIVE = "inconclusive"
DEFAULT_MARGIN = 0.05
#: largest tolerated ||P_a P_3 - P_3|| before a sampled report is called inconclusive
NESTING_TOL = 1e-6
REMAINDER_TOL = 1e-4
#: principal cosines within this of 1 count as a numerically common direction
INTERSECTION_TOL = 1e-8


@dataclass
class AngleReport:
    """Angle data for a triple ``H1, H2, H3 ⊆ H1 ∩ H2``.

    ``norm_21 = ||H2 H1 - H3||`` and ``norm_121 = ||H1 H2 H1 - H3||``; the
    latter equals ``||H2 H1 H2 - H3||`` and ``norm_21 ** 2``.
    """

    cos_angle: float
    norm_21: float
    norm_121: float
    ranks: dict
    residuals: dict = field(default_factory=dict)
    verdict: str = INCONCLUSIVE
    margin: float = DEFAULT_MARGIN
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    CSV_FIELDS = ("cos_angle", "norm_21", "norm_121", "verdict")

    def csv_row(self):
        return [repr(float(getattr(self, f))) if f != "verdict" else self.verdict for f in self.CSV_FIELDS]


def _spectral_norm(a):
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _remainder_basis(a, tol=REMAINDER_TOL):
    """Orthonormal basis of ``range(a)`` for ``a = (I - P3) B`` with ``B`` orthonormal.

    Singular values are near 1 off ``H3`` and near 0 on it, so an absolute
    threshold separates them where a relative one would keep rounding noise.
    """
    if a.shape[1] == 0:
        return a
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, s > tol]


def _report(p1, p2, p3, b1, b2, b3, margin, notes=None):
    """Assemble an AngleReport from projections and orthonormal bases of the triple."""
    n = p1.shape[0]
    eye = np.eye(n)
    r1 = _remainder_basis((eye - p3) @ b1)
    r2 = _remainder_basis((eye - p3) @ b2)
    cos = _spectral_norm(r1.conj().T @ r2) if r1.shape[1] and r2.shape[1] else 0.0
    d21 = p2 @ p1 - p3
    d121 = p1 @ p2 @ p1 - p3
    norm_21, norm_121 = _spectral_norm(d21), _spectral_norm(d121)
    residuals = {
        "product_identity": _spectral_norm(d21.conj().T @ d21 - d121),
        "nesting_1": _spectral_norm(p1 @ p3 - p3),
        "nesting_2": _spectral_norm(p2 @ p3 - p3),
        "cos_vs_norm_21": abs(cos - norm_21),
    }
    report = AngleReport(
        cos_angle=cos,
        norm_21=norm_21,
        norm_121=norm_121,
        ranks={"h1": b1.shape[1], "h2": b2.shape[1], "h3": b3.shape[1]},
        residuals=residuals,
        margin=margin,
        notes=dict(notes or {}),
    )
    report.verdict = closedness_verdict(report, margin)
    return report


def subspace_angle_finite(h1, h2, h3=None, margin=DEFAULT_MARGIN):
    """Angle report for two subspaces given by orthonormal basis columns.

    ``h3`` defaults to the numerical intersection; passing a strictly smaller
    subspace exhibits the ``norm_121 = 1`` degeneration.
    """
    v1, v2 = LinearVariety(h1), LinearVariety(h2)
    v3 = subspace_intersection(v1, v2) if h3 is None else LinearVariety(h3)
    p1, p2, p3 = (projection_matrix(v) for v in (v1, v2, v3))
    return _report(p1, p2, p3, v1.basis, v2.basis, v3.basis, margin)


def _column_space(a, cutoff):
    """Orthonormal basis of the span of the columns of ``a`` (columns rescaled first)."""
    if a.shape[1] == 0:
        return a
    norms = np.linalg.norm(a, axis=0)
    return orthonormalize(a / norms[None, :], cutoff=np.sqrt(cutoff))


def _extend_basis(base, a, cutoff):
    """``base`` followed by an orthonormal basis of what ``a`` adds to its span.

    Building the larger spans this way keeps ``Q3`` exactly inside them even
    after rank truncation.
    """
    if a.shape[1] == 0:
        return base
    a = a / np.linalg.norm(a, axis=0)[None, :]
    rest = a - base @ (base.conj().T @ a)
    rest = rest - base @ (base.conj().T @ rest)
    u, s, _ = np.linalg.svd(rest, full_matrices=False)
    return np.hstack([base, u[:, s > np.sqrt(cutoff)]])


def module_angle_sampled(span1, span2, span3, margin=DEFAULT_MARGIN, cutoff=GRAM_CUTOFF):
    """Finite-section estimate of the angle between two quotient modules.

    All three kernel spans are expressed in one orthonormal basis of the
    union span. The sample points of ``span3`` are adjoined to the first
    two spans so that the finite models are nested as ``Q3 ⊆ Q1 ∩ Q2``.
    """
    parts = [np.atleast_2d(s.points if isinstance(s, KernelSpan) else s) for s in (span1, span2, span3)]
    points = np.vstack(parts)
    sizes = [p.shape[0] for p in parts]
    idx1 = np.arange(sizes[0])
    idx2 = np.arange(sizes[0], sizes[0] + sizes[1])
    idx3 = np.arange(sizes[0] + sizes[1], points.shape[0])
    union = build_span(points, cutoff) if points.shape[0] else None
    if union is None or union.rank == 0:
        return AngleReport(float("nan"), float("nan"), float("nan"), {}, verdict=INCONCLUSIVE, margin=margin)
    # coordinates of every K_j in the union's orthonormal basis
    coords = union.whitening.conj().T @ union.gram
    b3 = _column_space(coords[:, idx3], cutoff)
    b1 = _extend_basis(b3, coords[:, idx1], cutoff)
    b2 = _extend_basis(b3, coords[:, idx2], cutoff)
    # Truncating the union can force the finite spans to share directions
    # that span3 does not model; they are moved into the third span.
    k3 = b3.shape[1]
    u, sv, _ = np.linalg.svd(b1[:, k3:].conj().T @ b2[:, k3:])
    shared = int(np.sum(1.0 - sv < INTERSECTION_TOL))
    if shared:
        extra = b1[:, k3:] @ u[:, :shared]
        b3 = np.hstack([b3, extra])
        b1 = np.hstack([b3, orthonormalize(b1[:, k3:] @ u[:, shared:])])
        b2 = _extend_basis(b3, b2[:, k3:], cutoff)
    p1, p2, p3 = (b @ b.conj().T for b in (b1, b2, b3))
    notes = {"union_rank": union.rank, "union_points": int(points.shape[0]), "shared_directions": shared}
    report = _report(p1, p2, p3, b1, b2, b3, margin, notes)
    if max(report.residuals["nesting_1"], report.residuals["nesting_2"]) > NESTING_TOL:
        report.verdict = INCONCLUSIVE
    return report


def linear_triple_angle_exact(v1, v2):
    """Closed-form ``(cos theta_1, cos^2 theta_1)`` for two subspaces through 0.

    ``theta_1`` is the smallest principal angle of ``v1`` and ``v2`` modulo
    their intersection. On the second quotient module ``Q2 Q1 Q2`` acts as
    composition with ``M2 M1 M2``; in the eigenbasis of that matrix it is
    diagonal on monomials, so ``||Q2 Q1 Q2 - Q3||`` is its largest
    eigenvalue below one, namely ``cos^2 theta_1``.
    """
    v3 = subspace_intersection(v1, v2)
    angles = principal_angles(v1, v2, modulo=v3)
    if angles.size == 0:
        return 0.0, 0.0
    c = float(np.cos(angles[0]))
    return c, c * c


def alternating_projection_decay(v1, v2, v, k):
    """Norms of ``(M2 M1)^j v`` for ``j = 1..k``; ``v`` must lie in ``v2``."""
    v = np.asarray(v, dtype=complex)
    if v2.residual(v) > 1e-10 * max(1.0, np.linalg.norm(v)):
        raise ValueError("starting vector must lie in the second subspace")
    step = projection_matrix(v2) @ projection_matrix(v1)
    out = []
    for _ in range(k):
        v = step @ v
        out.append(float(np.linalg.norm(v)))
    return out


def closedness_verdict(reports, margin=DEFAULT_MARGIN):
    """Closedness call from one report or a ladder of reports (increasing rho_max).

    A single finite section can certify a positive angle but never its
    absence: ``not-closed`` requires a ladder whose ``norm_121`` values
    strictly increase and end above ``1 - margin / 2``.
    """
    values = [r.norm_121 if isinstance(r, AngleReport) else float(r) for r in np.atleast_1d(reports)] \
        if not isinstance(reports, AngleReport) else [reports.norm_121]
    last = values[-1]
    if not np.isfinite(last):
        return INCONCLUSIVE
    if last < 1.0 - margin:
        return CLOSED
    if len(values) >= 2 and all(b > a for a, b in zip(values, values[1:])) and last > 1.0 - margin / 2:
        return NOT_CLOSED
    return INCONCLUSIVE
