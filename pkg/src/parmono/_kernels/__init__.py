"""Contour-integration kernel with compiled and pure-Python backends.

The compiled Cython backend is preferred when importable; the NumPy fallback
is always available.  Selection can be forced with the environment variable
``PARMONO_BACKEND`` set to ``cython``, ``python`` or ``auto`` (default).
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import (
    IntegrationFailureError,
    NearPoleError,
    NonFiniteError,
    StepUnderflowError,
)
from . import _dopri_py

__all__ = ["integrate_polyline", "backend_name", "get_backend",
           "available_backends"]


def _load_cython():
    from . import _dopri_cy
    return _dopri_cy


_requested = os.environ.get("PARMONO_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "cython", "python"):
    raise ImportError(
        f"PARMONO_BACKEND must be auto, cython or python, not {_requested!r}")

if _requested == "python":
    _impl = _dopri_py
elif _requested == "cython":
    _impl = _load_cython()  # ImportError surfaces if unavailable
else:
    try:
        _impl = _load_cython()
    except ImportError:
        _impl = _dopri_py

backend_name = _impl.BACKEND_NAME


def available_backends() -> list:
    names = ["python"]
    try:
        _load_cython()
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def get_backend(name: str):
    """Fetch a backend module by name (for benchmarks and parity tests)."""
    if name == "python":
        return _dopri_py
    if name == "cython":
        return _load_cython()
    raise ValueError(f"unknown backend {name!r}")


_STATUS_ERRORS = {
    1: (NearPoleError, "integration path entered a pole guard radius"),
    2: (StepUnderflowError, "step size underflow on integration path"),
    3: (NonFiniteError, "non-finite values during integration"),
    4: (IntegrationFailureError, "integration step budget exhausted"),
}


def integrate_polyline(frozen, piece_types, piece_params, Y0, rtol, atol,
                       h0=0.01, max_steps=200000, impl=None):
    """Integrate dY/ds = (dz/ds) A(z(s)) Y along an encoded polyline.

    ``frozen`` is a FrozenSystem; ``piece_types``/``piece_params`` come from
    :func:`parmono.monodromy.encode_path`.  Returns (Y_end, err_acc); raises
    coded integration errors on failure.
    """
    mod = impl if impl is not None else _impl
    status, Y, err_acc, fail_pos = mod.integrate_polyline_raw(
        frozen.n,
        np.ascontiguousarray(frozen.locs, dtype=complex),
        np.ascontiguousarray(frozen.offsets, dtype=np.int64),
        np.ascontiguousarray(frozen.laurent, dtype=complex),
        np.ascontiguousarray(frozen.poly, dtype=complex),
        float(frozen.guard),
        np.ascontiguousarray(piece_types, dtype=np.int64),
        np.ascontiguousarray(piece_params, dtype=complex),
        np.ascontiguousarray(Y0, dtype=complex),
        float(rtol), float(atol), float(h0), int(max_steps))
    if status == 0:
        return Y, float(err_acc)
    exc_type, msg = _STATUS_ERRORS[status]
    raise exc_type(msg, position=float(fail_pos), backend=mod.BACKEND_NAME)
