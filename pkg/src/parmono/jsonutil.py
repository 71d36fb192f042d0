"""JSON helpers: complex numbers as [re, im] pairs, run manifests.

Every number that may be complex is serialized as a two-element array
``[re, im]``; complex matrices become nested arrays of those pairs.
NaN/Inf are never emitted.
"""

from __future__ import annotations

import datetime
import json
import sys

import numpy as np

from .errors import ConfigError

__all__ = [
    "complex_to_pair", "pair_to_complex", "matrix_to_pairs", "pairs_to_matrix",
    "run_manifest", "dump_json", "load_json",
]


def complex_to_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"expected a number or [re, im] pair, got {v!r}")


def matrix_to_pairs(M) -> list:
    """Complex 2-D array -> nested lists of [re, im] pairs."""
    M = np.asarray(M, dtype=complex)
    return [[complex_to_pair(z) for z in row] for row in M]


def pairs_to_matrix(rows) -> np.ndarray:
    return np.array([[pair_to_complex(v) for v in row] for row in rows],
                    dtype=complex)


def run_manifest(tool: str, options: dict, seed=None) -> dict:
    """Provenance block embedded in every machine-readable output."""
    from . import __version__

    manifest = {
        "tool": f"parmono {tool}",
        "version": __version__,
        "python": sys.version.split()[0],
        "options": options,
        "wallclock_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    if seed is not None:
        manifest["seed"] = seed
    return manifest


def dump_json(obj, path_or_fp) -> None:
    if hasattr(path_or_fp, "write"):
        json.dump(obj, path_or_fp, indent=2, allow_nan=False)
        path_or_fp.write("\n")
    else:
        with open(path_or_fp, "w") as fp:
            json.dump(obj, fp, indent=2, allow_nan=False)
            fp.write("\n")


def load_json(path):
    with open(path) as fp:
        return json.load(fp)
