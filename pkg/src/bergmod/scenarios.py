"""Config-driven experiments.

Every runner takes a config dict, fills in defaults, and returns a
:class:`ScenarioResult` holding the JSON results, optional sweep rows and
the list of failed checks. Runs are pure functions of the resolved config,
so identical configs give identical results.
"""

import copy
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .angles import (
    DEFAULT_MARGIN,
    NOT_CLOSED,
    closedness_verdict,
    linear_triple_angle_exact,
    module_angle_sampled,
)
from .ball import moebius_identity_residuals, pseudo_distance
from .bergman import (
    Polynomial,
    kernel_gram,
    kernel_inner,
    kernel_norm,
    normalized_kernel,
    sample_ball,
    u_z_apply,
)
from .carleson import (
    DEFAULT_SHELLS,
    carleson_ladder,
    default_zgrid,
    disc_grid,
    embedding_ratios,
    kernel_values,
    line_measure,
)
from .errors import PreconditionError
from .io import ConfigError, decode_complex, decode_variety, encode_complex
from .spans import SamplePlan, WeightedPointMeasure, sample_variety
from .varieties import (
    ON_VARIETY_TOL,
    AffineVariety,
    LinearVariety,
    boundary_point,
    clean_intersection_check,
    localize,
    sphere_transversality,
    subspace_gap,
    subspace_intersection,
    tangent_space,
    tangential_pair_witness,
)

DEFAULT_LADDER = [0.9, 0.99, 0.999]
LOCALIZED_GAP_TOL = 1e-8
THREADS_ENV = "BERGMOD_THREADS"


@dataclass
class ScenarioResult:
    results: dict
    sweep_header: list = None
    sweep_rows: list = None
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def worker_count():
    """Worker cap from ``BERGMOD_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")


def _map(fn, items):
    """Ordered map, parallel over at most ``worker_count()`` threads."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def child_seeds(seed, count):
    return [int(s) for s in np.random.SeedSequence(int(seed)).generate_state(count)]


def _merge(defaults, config):
    out = copy.deepcopy(defaults)
    for key, value in config.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _plan(config, seed, rho_max=None, count=None):
    p = config["plan"]
    return SamplePlan(
        count=int(p["count"] if count is None else count),
        rho_max=float(p["rho_max"] if rho_max is None else rho_max),
        scheme=p["scheme"],
        separation=float(p["separation"]),
        seed=int(seed),
        radial=p["radial"],
    )


def _check_expected(config, verdict, failures):
    expected = config.get("expected_verdict")
    if expected is not None and expected != verdict:
        failures.append(f"verdict {verdict!r} differs from expected {expected!r}")


_PLAN = {"count": 200, "rho_max": 0.95, "scheme": "stratified-random", "separation": 0.2, "radial": "uniform"}

DEFAULTS = {
    "identities": {
        "scenario": "identities",
        "seed": 0,
        "count": 10000,
        "dims": [2, 3],
        "tolerance": 1e-12,
        "involution_radius": 0.9,
    },
    "linear-pair": {
        "scenario": "linear-pair",
        "seed": 0,
        "ambient_dim": 2,
        "thetas": [np.pi / 6, np.pi / 4, np.pi / 3],
        "pairs": None,
        "plan": _PLAN,
        "intersection_fraction": 0.25,
        "tolerance": 0.02,
        "margin": DEFAULT_MARGIN,
    },
    "boundary-pair": {
        "scenario": "boundary-pair",
        "seed": 0,
        "slope": 1.0,
        "ladder": DEFAULT_LADDER,
        "plan": _PLAN,
        "anchors": 8,
        "margin": DEFAULT_MARGIN,
        "expected_verdict": NOT_CLOSED,
    },
    "decompose": {
        "scenario": "decompose",
        "seed": 0,
        "v1": None,
        "v2": None,
        "intersection": None,
        "boundary_points": [],
        "ladder": DEFAULT_LADDER,
        "plan": _PLAN,
        "intersection_fraction": 0.25,
        "agreement_tolerance": 0.10,
        "sampled_check": True,
    },
    "carleson": {
        "scenario": "carleson",
        "seed": 0,
        "measure": {"kind": "lebesgue-disc"},
        "measure_csv": None,
        "shells": list(DEFAULT_SHELLS),
        "radius": 1.0,
        "corpus_degree": 3,
        "identity_tolerance": 1e-10,
    },
}


def resolve(config):
    """Defaults merged with ``config``; raises ConfigError on an unknown scenario."""
    name = config.get("scenario")
    if name not in DEFAULTS:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {sorted(DEFAULTS)}")
    return _merge(DEFAULTS[name], config)


# identities -----------------------------------------------------------------


def run_identities(config):
    """Residual maxima of the ball and kernel identity suites on seeded samples."""
    config = resolve(config)
    tol = float(config["tolerance"])
    count = int(config["count"])
    residuals = {}
    for n, seed in zip(config["dims"], child_seeds(config["seed"], len(config["dims"]))):
        rng = np.random.default_rng(seed)
        a, z, w = (sample_ball(n, count, rng) for _ in range(3))
        r1, r2 = moebius_identity_residuals(a, z, w)
        sym = np.abs(pseudo_distance(z, w) - pseudo_distance(w, z))
        g = kernel_gram(z[:64])
        herm = np.abs(g - g.conj().T) / np.abs(g)
        # U_z is an involution; checked on a random polynomial at bounded radius
        f = Polynomial.random(n, 3, rng)
        r = float(config["involution_radius"])
        base = sample_ball(n, 16, rng) * r
        pts = sample_ball(n, 64, rng) * r
        inv = max(float(np.max(np.abs(u_z_apply(b, u_z_apply(b, f))(pts) - f(pts)) / np.max(np.abs(f(pts)))))
                  for b in base)
        residuals[f"n={n}"] = {
            "moebius_inner_product": float(r1.max()),
            "moebius_norm": float(r2.max()),
            "pseudo_distance_symmetry": float(sym.max()),
            "kernel_gram_hermitian": float(herm.max()),
            "u_z_involution": inv,
        }
    failures = [
        f"{dim} {name} residual {value:.3e} exceeds {tol:.1e}"
        for dim, block in residuals.items()
        for name, value in block.items()
        if not value < tol
    ]
    return ScenarioResult({"config": config, "residuals": residuals, "tolerance": tol}, failures=failures)


# linear pair ----------------------------------------------------------------


def _pair_list(config):
    if config.get("pairs"):
        pairs = []
        for k, item in enumerate(config["pairs"]):
            v1, v2 = decode_variety(item["v1"]), decode_variety(item["v2"])
            if not (isinstance(v1, LinearVariety) and isinstance(v2, LinearVariety)):
                raise ConfigError("linear-pair varieties must be linear")
            pairs.append((item.get("label", f"pair{k}"), None, v1, v2))
        return pairs
    n = int(config["ambient_dim"])
    pairs = []
    for theta in config["thetas"]:
        e1 = np.eye(n)[0]
        u = np.cos(theta) * e1 + np.sin(theta) * np.eye(n)[1]
        pairs.append((f"theta={theta!r}", float(theta), LinearVariety.span(e1), LinearVariety.span(u)))
    return pairs


def _sample_intersection(v3, config, seed, rho_max=None):
    if v3.dim == 0:
        return np.zeros((1, v3.ambient_dim), dtype=complex)
    m3 = max(1, int(round(config["plan"]["count"] * float(config["intersection_fraction"]))))
    return sample_variety(v3, _plan(config, seed, rho_max=rho_max, count=m3))


def run_linear_pair(config):
    """Sampled ``||Q2 Q1 Q2 - Q3||`` against the closed form, one sweep row per pair."""
    config = resolve(config)
    tol = float(config["tolerance"])
    pairs = _pair_list(config)
    seeds = child_seeds(config["seed"], 3 * len(pairs))

    def one(k):
        label, theta, v1, v2 = pairs[k]
        v3 = subspace_intersection(v1, v2)
        s1 = sample_variety(v1, _plan(config, seeds[3 * k]))
        s2 = sample_variety(v2, _plan(config, seeds[3 * k + 1]))
        s3 = _sample_intersection(v3, config, seeds[3 * k + 2])
        report = module_angle_sampled(s1, s2, s3, margin=float(config["margin"]))
        exact_cos, exact = linear_triple_angle_exact(v1, v2)
        err = abs(report.norm_121 - exact)
        rel = err / exact if exact > tol else err
        return label, theta, exact_cos, exact, report, rel

    rows, entries, failures = [], [], []
    for label, theta, exact_cos, exact, report, rel in _map(one, range(len(pairs))):
        entries.append({
            "label": label,
            "theta": theta,
            "exact_cos_angle": exact_cos,
            "exact_norm_121": exact,
            "error": rel,
            "report": report.to_dict(),
        })
        rows.append([label, "" if theta is None else repr(theta), repr(exact), repr(report.norm_121),
                     repr(rel), repr(report.cos_angle), report.verdict])
        if not rel <= tol:
            failures.append(f"{label}: sampled norm_121 {report.norm_121:.6g} vs exact {exact:.6g} (error {rel:.3g})")
    header = ["label", "theta", "exact_norm_121", "sampled_norm_121", "error", "cos_angle", "verdict"]
    if config.get("expected_verdict") is not None:
        for e in entries:
            _check_expected(config, e["report"]["verdict"], failures)
    return ScenarioResult({"config": config, "pairs": entries}, header, rows, failures)


# boundary pair --------------------------------------------------------------


def boundary_pair_varieties(slope):
    """The line ``{z2 = 0}`` and the line ``{(t, slope (t - 1))}``, meeting only at ``(1, 0)``."""
    if slope == 0:
        raise PreconditionError("slope 0 makes the two lines coincide")
    m1 = LinearVariety.span([1.0, 0.0])
    m2 = AffineVariety(np.array([0.0, -slope], dtype=complex), LinearVariety.span([1.0, slope]))
    return m1, m2


def run_boundary_pair(config):
    """Witness trace plus one sampled angle report per rung of the rho_max ladder.

    Each rung's samples are augmented with witness anchors ``r x`` on the
    first line and ``w_r`` on the second for radii ``r`` graded up to the
    rung, which is where the two quotient modules come together.
    """
    config = resolve(config)
    slope = float(config["slope"])
    ladder = [float(x) for x in config["ladder"]]
    m1, m2 = boundary_pair_varieties(slope)
    witness = []
    for r in ladder:
        w_r, image, rho = tangential_pair_witness(slope, r)
        base = np.array([r, 0.0], dtype=complex)
        overlap = abs(kernel_inner(base, w_r)) / (kernel_norm(base) * kernel_norm(w_r))
        witness.append({"r": r, "w_r": encode_complex(w_r), "image": encode_complex(image),
                        "rho": rho, "kernel_overlap": float(overlap)})
    seeds = child_seeds(config["seed"], 2 * len(ladder))
    anchors = int(config["anchors"])

    def rung(k):
        rho_max = ladder[k]
        s1 = sample_variety(m1, _plan(config, seeds[2 * k], rho_max=rho_max))
        s2 = sample_variety(m2, _plan(config, seeds[2 * k + 1], rho_max=rho_max))
        if anchors:
            rs = 1.0 - np.geomspace(0.5, 1.0 - rho_max, anchors)
            s1 = np.vstack([s1, np.stack([rs, np.zeros_like(rs)], axis=1)])
            s2 = np.vstack([s2, [tangential_pair_witness(slope, r)[0] for r in rs]])
        return module_angle_sampled(s1, s2, np.zeros((0, 2)), margin=float(config["margin"]))

    reports = _map(rung, range(len(ladder)))
    verdict = closedness_verdict(reports, float(config["margin"]))
    failures = []
    rhos = [w["rho"] for w in witness]
    if not all(b < a for a, b in zip(rhos, rhos[1:])):
        failures.append("witness distances do not decrease along the ladder")
    _check_expected(config, verdict, failures)
    rows = [[repr(r), repr(w["rho"]), repr(rep.norm_121), repr(rep.cos_angle), rep.verdict]
            for r, w, rep in zip(ladder, witness, reports)]
    header = ["rho_max", "witness_rho", "norm_121", "cos_angle", "rung_verdict"]
    results = {
        "config": config,
        "witness": witness,
        "rungs": [{"rho_max": r, "report": rep.to_dict()} for r, rep in zip(ladder, reports)],
        "verdict": verdict,
        "verdict_basis": "heuristic: rho_max ladder trend of finite sections",
    }
    return ScenarioResult(results, header, rows, failures)


# decompose ------------------------------------------------------------------


def _intersection_variety(config, v1, v2):
    if config.get("intersection") is not None:
        return decode_variety(config["intersection"])
    if isinstance(v1, LinearVariety) and isinstance(v2, LinearVariety):
        return subspace_intersection(v1, v2)
    raise ConfigError("decompose needs an 'intersection' variety unless both varieties are linear")


def _tangent_at(v, x):
    """Tangent space at ``x``; a single point has the zero tangent space."""
    if isinstance(v, AffineVariety) and v.dim == 0:
        if np.linalg.norm(v.base - x) > ON_VARIETY_TOL:
            raise PreconditionError("boundary point is not on the intersection")
        return LinearVariety.zero(v.ambient_dim)
    return tangent_space(v, x)


def _point_record(x, v1, v2, v3):
    x = boundary_point(x)
    for name, v in (("v1", v1), ("v2", v2)):
        res = v.residual(x)
        if res > ON_VARIETY_TOL:
            raise PreconditionError(f"boundary point {x} is not on {name} (residual {res:.3e})")
    tangents = {name: _tangent_at(v, x) for name, v in (("v1", v1), ("v2", v2), ("v3", v3))}
    scores = {name: sphere_transversality(t, x) for name, t in tangents.items()}
    clean, clean_gap = clean_intersection_check(tangents["v1"], tangents["v2"], tangents["v3"])
    record = {
        "point": encode_complex(x),
        "transversality": {name: {"score": s, "transversal": ok} for name, (s, ok) in scores.items()},
        "clean_intersection": {"verdict": clean, "gap": clean_gap},
    }
    passed = clean and all(ok for _, ok in scores.values())
    if all(scores[name][1] for name in ("v1", "v2", "v3")):
        local = {name: localize(t, x) for name, t in tangents.items()}
        common = subspace_intersection(local["v1"], local["v2"])
        gap = subspace_gap(common, local["v3"]) if common.dim == local["v3"].dim else 1.0
        cos, norm_121 = linear_triple_angle_exact(local["v1"], local["v2"])
        record["localized"] = {name: encode_complex(m.basis.T) for name, m in local.items()}
        record["localized_intersection"] = {"gap": gap, "equal": gap < LOCALIZED_GAP_TOL}
        record["localized_angle"] = {"cos_angle": cos, "norm_121": norm_121, "angle": float(np.arccos(min(1.0, cos)))}
        passed = passed and gap < LOCALIZED_GAP_TOL and cos < 1.0 - 1e-12
    else:
        record["localized"] = None
        record["localized_intersection"] = None
        record["localized_angle"] = None
    record["passed"] = bool(passed)
    return record


def run_decompose(config):
    """Per-boundary-point hypothesis pipeline and the resulting verdict.

    Each point goes through transversality, the clean-intersection check,
    localization, the localized-intersection equality and the localized
    angle. The verdict is ``positive`` only if every point passes. A
    positive verdict also triggers a sampled angle estimate on the
    original varieties at the top of the ladder, compared against the
    largest localized ``norm_121``.
    """
    config = resolve(config)
    if config["v1"] is None or config["v2"] is None:
        raise ConfigError("decompose needs varieties 'v1' and 'v2'")
    v1, v2 = decode_variety(config["v1"]), decode_variety(config["v2"])
    v3 = _intersection_variety(config, v1, v2)
    points = decode_complex(config["boundary_points"]) if config["boundary_points"] else np.zeros((0, v1.ambient_dim))
    if points.shape[0] == 0:
        raise ConfigError("decompose needs at least one boundary point")
    records = [_point_record(x, v1, v2, v3) for x in np.atleast_2d(points)]
    positive = all(r["passed"] for r in records)
    angles = [r["localized_angle"]["angle"] for r in records if r["localized_angle"] is not None]
    results = {
        "config": config,
        "points": records,
        "min_localized_angle": min(angles) if angles else None,
        "verdict": "positive" if positive else "negative",
    }
    failures = []
    if positive and config["sampled_check"]:
        predicted = max(r["localized_angle"]["norm_121"] for r in records)
        rho_max = float(config["ladder"][-1])
        seeds = child_seeds(config["seed"], 3)
        s1 = sample_variety(v1, _plan(config, seeds[0], rho_max=rho_max))
        s2 = sample_variety(v2, _plan(config, seeds[1], rho_max=rho_max))
        s3 = _sample_intersection(v3, config, seeds[2], rho_max=rho_max)
        report = module_angle_sampled(s1, s2, s3)
        rel = abs(report.norm_121 - predicted) / max(predicted, 1e-300)
        ok = rel <= float(config["agreement_tolerance"])
        results["sampled_check"] = {
            "rho_max": rho_max,
            "predicted_norm_121": predicted,
            "report": report.to_dict(),
            "relative_error": rel,
            "agrees": ok,
        }
        if not ok:
            failures.append(f"sampled norm_121 {report.norm_121:.6g} misses localized prediction {predicted:.6g}")
    _check_expected(config, results["verdict"], failures)
    return ScenarioResult(results, failures=failures)


# carleson -------------------------------------------------------------------


def build_measure(config):
    """Measure from ``measure_csv`` or a built-in ``measure.kind``.

    Kinds: ``lebesgue-disc``; ``disc-density`` with ``exponent`` (weights
    times ``(1 - |w|^2)^exponent``); ``line`` with ``direction`` and an
    optional ``exponent`` (default: the line's equivalent measure).
    """
    if config.get("measure_csv"):
        return WeightedPointMeasure.from_csv(config["measure_csv"])
    desc = config["measure"]
    kind = desc.get("kind")
    if kind == "lebesgue-disc":
        return disc_grid()
    if kind == "disc-density":
        k = float(desc["exponent"])
        return disc_grid().reweighted(lambda p: (1.0 - np.abs(p[:, 0]) ** 2) ** k)
    if kind == "line":
        direction = decode_complex(desc["direction"])
        return line_measure(direction, desc.get("exponent"))
    raise ConfigError(f"unknown measure kind {kind!r}")


def run_carleson(config):
    """All three Carleson tests on the shell ladder, plus the kernel identity check."""
    config = resolve(config)
    nu = build_measure(config)
    report = carleson_ladder(nu, tuple(config["shells"]), float(config["radius"]), int(config["corpus_degree"]))
    zgrid = default_zgrid(nu.dim, tuple(config["shells"]))
    identity = float(np.max(np.abs(
        kernel_values(nu, zgrid) - embedding_ratios(nu, [normalized_kernel(z) for z in zgrid])
    )))
    failures = []
    if not identity < float(config["identity_tolerance"]):
        failures.append(f"kernel identity residual {identity:.3e}")
    _check_expected(config, report.verdict, failures)
    rows = []
    for k in range(len(report.ladder["kernel"])):
        rows.append([repr(config["shells"][k + 1] if len(config["shells"]) > 1 else config["shells"][0]),
                     repr(report.ladder["kernel"][k]), repr(report.ladder["ratio"][k]),
                     repr(report.ladder["embedding"][k])])
    header = ["outer_shell", "kernel_sup", "ratio_sup", "embedding_ratio"]
    results = {
        "config": config,
        "report": report.to_dict(),
        "kernel_identity_residual": identity,
        "verdict": report.verdict,
        "verdict_basis": "heuristic: growth across the shell ladder",
    }
    return ScenarioResult(results, header, rows, failures)


RUNNERS = {
    "identities": run_identities,
    "linear-pair": run_linear_pair,
    "boundary-pair": run_boundary_pair,
    "decompose": run_decompose,
    "carleson": run_carleson,
}


def run(config):
    return RUNNERS[resolve(config)["scenario"]](config)

