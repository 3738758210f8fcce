"""JSON encoding for complex data, varieties and experiment configs.

Complex numbers travel as ``[re, im]`` pairs; floats are written with
Python's shortest round-trip repr, so decoding recovers them exactly.
"""

import json
import os

import numpy as np

from .bergman import Polynomial
from .errors import BergmodError
from .varieties import AffineVariety, GraphVariety, LinearVariety


class ConfigError(BergmodError):
    """A config document that does not match the schema."""


def encode_complex(x):
    """Nested lists with every complex entry replaced by ``[re, im]``."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [encode_complex(a) for a in arr]


def decode_complex(data):
    """Inverse of :func:`encode_complex`; the innermost axis must have length 2."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise ConfigError("complex data must be given as [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_variety(v):
    if isinstance(v, LinearVariety):
        return {"type": "linear", "ambient_dim": v.ambient_dim, "basis": encode_complex(v.basis.T)}
    if isinstance(v, AffineVariety):
        return {
            "type": "affine",
            "base": encode_complex(v.base),
            "directions": encode_complex(v.direction.basis.T),
            "ambient_dim": v.ambient_dim,
        }
    if isinstance(v, GraphVariety):
        return {
            "type": "graph",
            "intrinsic_dim": v.intrinsic_dim,
            "components": [f.to_table() for f in v.components],
            "chart": encode_complex(v.chart),
        }
    raise TypeError(f"cannot encode {type(v).__name__}")


def _vectors(desc, key, n):
    raw = desc.get(key, [])
    if not raw:
        return []
    return list(decode_complex(raw).reshape(-1, n))


def decode_variety(desc):
    """Build a variety from its JSON description.

    ``linear``: ``basis`` (spanning vectors, orthonormalized on load) and
    ``ambient_dim``. ``affine``: ``base`` plus spanning ``directions``.
    ``graph``: ``intrinsic_dim``, ``components`` as coefficient tables and
    an optional unitary ``chart``.
    """
    try:
        kind = desc["type"]
        if kind == "linear":
            n = int(desc["ambient_dim"])
            return LinearVariety.span(*_vectors(desc, "basis", n), n=n)
        if kind == "affine":
            base = decode_complex(desc["base"])
            n = base.shape[0]
            return AffineVariety(base, LinearVariety.span(*_vectors(desc, "directions", n), n=n))
        if kind == "graph":
            d = int(desc["intrinsic_dim"])
            comps = tuple(Polynomial.from_table(t, d) for t in desc["components"])
            chart = decode_complex(desc["chart"]) if desc.get("chart") is not None else None
            return GraphVariety(d, comps, chart)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad variety description: {exc}") from exc
    raise ConfigError(f"unknown variety type {kind!r}")


def load_config(path):
    """Read a UTF-8 JSON config; relative file references resolve against its folder."""
    with open(path, encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError(f"{path}: top level must be an object")
    base = os.path.dirname(os.path.abspath(path))
    for key in ("measure_csv",):
        if key in config and not os.path.isabs(config[key]):
            config[key] = os.path.join(base, config[key])
        if key in config and not os.path.exists(config[key]):
            raise ConfigError(f"{path}: referenced file {config[key]} does not exist")
    return config


def dumps_report(report):
    """Canonical report text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_plain(report), sort_keys=True, indent=2, allow_nan=True) + "\n"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x
