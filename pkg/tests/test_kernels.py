"""Integration kernels: backend parity, status codes, adaptive controller."""

import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import moving_pole_system, upper_triangular_system
from parmono._kernels import (
    available_backends,
    backend_name,
    get_backend,
    integrate_polyline,
)
from parmono.dopri import integrate_adaptive
from parmono.errors import (
    CollisionError,
    IntegrationFailureError,
    NearPoleError,
)
from parmono.monodromy import Arc, LoopSpec, Segment, encode_path, loop_path

HAVE_CYTHON = "cython" in available_backends()
needs_cython = pytest.mark.skipif(not HAVE_CYTHON,
                                  reason="compiled backend not built")


def _loop_data(A, t, base=1.0 + 0j, pole=0):
    pieces = loop_path(A, LoopSpec(pole, base), t)
    types, params = encode_path(pieces)
    return A.freeze(t), types, params


def test_backend_registry():
    assert backend_name in available_backends()
    assert get_backend("python").BACKEND_NAME == "python"
    with pytest.raises(ValueError):
        get_backend("fortran")


@needs_cython
def test_backend_parity_on_loops():
    fixtures = [
        (upper_triangular_system(), (), 1.0 + 0j),
        (moving_pole_system(np.array([[1.0, 2.0], [0.0, -1.0]])), (0.3,),
         1.5 + 0.5j),
    ]
    for A, t, base in fixtures:
        frozen, types, params = _loop_data(A, t, base)
        Y0 = np.eye(A.dimension, dtype=complex)
        Yc, ec = integrate_polyline(frozen, types, params, Y0, 1e-10, 1e-12,
                                    impl=get_backend("cython"))
        Yp, ep = integrate_polyline(frozen, types, params, Y0, 1e-10, 1e-12,
                                    impl=get_backend("python"))
        assert np.abs(Yc - Yp).max() < 1e-12
        assert ec == pytest.approx(ep, rel=1e-6, abs=1e-14)


@needs_cython
def test_backend_parity_on_arc_only_path():
    A = upper_triangular_system()
    frozen = A.freeze(())
    pieces = [Arc(0.0, 1.0, 0.0, -2 * np.pi)]  # clockwise circle
    types, params = encode_path(pieces)
    Y0 = np.eye(2, dtype=complex)
    Yc, _ = integrate_polyline(frozen, types, params, Y0, 1e-10, 1e-12,
                               impl=get_backend("cython"))
    Yp, _ = integrate_polyline(frozen, types, params, Y0, 1e-10, 1e-12,
                               impl=get_backend("python"))
    assert np.abs(Yc - Yp).max() < 1e-12


@pytest.mark.parametrize("name", available_backends())
def test_near_pole_start_raises(name):
    A = upper_triangular_system()
    frozen = A.freeze((), guard=1e-6)
    pieces = [Segment(1e-8, 1.0)]  # starts inside the guard radius of 0
    types, params = encode_path(pieces)
    with pytest.raises(NearPoleError) as info:
        integrate_polyline(frozen, types, params, np.eye(2, dtype=complex),
                           1e-10, 1e-12, impl=get_backend(name))
    assert info.value.context.get("backend") == name


@pytest.mark.parametrize("name", available_backends())
def test_step_budget_exhaustion(name):
    A = upper_triangular_system()
    frozen, types, params = _loop_data(A, ())
    with pytest.raises(IntegrationFailureError):
        integrate_polyline(frozen, types, params, np.eye(2, dtype=complex),
                           1e-10, 1e-12, max_steps=3, impl=get_backend(name))


def test_backend_env_selection():
    code = "import parmono; print(parmono.backend_name)"
    for want in ["python"] + (["cython"] if HAVE_CYTHON else []):
        env = dict(os.environ, PARMONO_BACKEND=want)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True)
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == want
    env = dict(os.environ, PARMONO_BACKEND="fortran")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True)
    assert out.returncode != 0


# --- adaptive integrator ------------------------------------------------------

def test_adaptive_scalar_exponential():
    sol = integrate_adaptive(lambda s, y: 2j * y, 1.0,
                             np.array([1.0 + 0j]), 1e-10, 1e-12)
    assert abs(sol.end_state[0] - np.exp(2j)) < 1e-9
    assert sol.err_acc > 0.0
    # dense output at interior points
    for s in (0.125, 0.5, 0.843):
        assert abs(sol(s)[0] - np.exp(2j * s)) < 1e-8


def test_adaptive_tolerance_halving():
    def f(s, y):
        return np.array([y[1], -(1 + 0.3j) * y[0]])

    y0 = np.array([1.0 + 0j, 0.0j])
    a = integrate_adaptive(f, 2.0, y0, 1e-8, 1e-10).end_state
    b = integrate_adaptive(f, 2.0, y0, 5e-9, 5e-11).end_state
    c = integrate_adaptive(f, 2.0, y0, 1e-12, 1e-14).end_state
    assert np.abs(a - c).max() < 1e-6
    assert np.abs(b - c).max() <= np.abs(a - c).max() + 1e-12


def test_adaptive_check_callback_aborts():
    def check(s, y):
        if s > 0.5:
            raise CollisionError("synthetic abort")

    with pytest.raises(CollisionError):
        integrate_adaptive(lambda s, y: y, 1.0, np.array([1.0 + 0j]),
                           1e-10, 1e-12, check=check)


def test_adaptive_zero_length():
    sol = integrate_adaptive(lambda s, y: y, 0.0, np.array([3.0 + 0j]),
                             1e-10, 1e-12)
    assert sol.end_state[0] == 3.0
    assert sol(0.0)[0] == 3.0


def test_adaptive_step_budget():
    with pytest.raises(IntegrationFailureError):
        integrate_adaptive(lambda s, y: y, 1.0, np.array([1.0 + 0j]),
                           1e-10, 1e-12, max_steps=2)
