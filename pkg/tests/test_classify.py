"""Zero-curvature integrability, trace split, isomonodromy classification."""

import numpy as np
import pytest

from conftest import (
    NONNORMAL_C,
    constant_matrix,
    moving_pole_system,
    schlesinger_pair,
)
from parmono.classify import (
    ConnectionSystem,
    classify_monodromy,
    fuchsian_split,
    integrability_report,
    projective_split_check,
    zero_curvature_residual,
)
from parmono.errors import (
    MissingDirectionError,
    MissingRecordError,
    NotFuchsianError,
    SingularReferenceError,
)
from parmono.expr import const, eval_expr, param
from parmono.monodromy import (
    LoopSpec,
    MonodromyRecord,
    TGrid,
    monodromy_grid,
)
from parmono.sysmodel import ParamRationalMatrix, PoleLocus, eval_expr_matrix
from parmono.expr import ParameterPoint
from parmono.util import norm_inf
from scipy.linalg import expm


def _const_system(M, num_params=1):
    """Constant matrix as a pure polynomial-part system."""
    return ParamRationalMatrix(len(M), num_params, (),
                               (constant_matrix(M),))


def _scaled_matrix(M, s):
    return tuple(tuple(const(complex(v) * s) for v in row) for row in M)


def test_connection_validation():
    B = np.array(NONNORMAL_C)
    conn = schlesinger_pair(B)
    assert conn.num_directions == 2
    assert conn.direction(1) is conn.a_t[0]
    with pytest.raises(MissingDirectionError):
        conn.direction(2)
    with pytest.raises(MissingDirectionError):
        ConnectionSystem(conn.a_x, ())  # missing the t1 direction
    with pytest.raises(MissingDirectionError):
        ConnectionSystem(conn.a_x, (_const_system(np.eye(3)),))


def test_schlesinger_pair_is_exactly_integrable():
    conn = schlesinger_pair(np.array(NONNORMAL_C))
    res = zero_curvature_residual(conn, 0, 1, num_samples=30, seed=1)
    assert res < 1e-15
    report = integrability_report(conn, num_samples=30, seed=1)
    assert report.integrable
    assert report.to_dict()["verdict"] == "integrable"


def test_constant_nonabelian_residual_is_one():
    N1 = [[0.0, 1.0], [0.0, 0.0]]
    N2 = [[0.0, 0.0], [1.0, 0.0]]
    conn = ConnectionSystem(_const_system(N1), (_const_system(N2),))
    res = zero_curvature_residual(conn, 0, 1, num_samples=10, seed=0)
    # derivatives vanish, so the residual is exactly ||[N1, N2]|| = 1
    assert abs(res - 1.0) < 1e-12
    report = integrability_report(conn, num_samples=10, seed=0)
    assert not report.integrable
    d = report.to_dict()
    assert d["verdict"] == "not_integrable"
    assert d["pairs"][0]["directions"] == [0, 1]


def _fd_curvature(conn, x, t, h=1e-5):
    """Zero-curvature residual matrix at (x, t) from central differences."""
    def val(k, xx, tt):
        return conn.direction(k).freeze(tt).eval(xx)

    def deriv(k, l, xx, tt):
        if k == 0:
            return (val(l, xx + h, tt) - val(l, xx - h, tt)) / (2 * h)
        up = tuple(c + h if m == k - 1 else c for m, c in enumerate(tt))
        dn = tuple(c - h if m == k - 1 else c for m, c in enumerate(tt))
        return (val(l, xx, up) - val(l, xx, dn)) / (2 * h)

    v0, v1 = val(0, x, t), val(1, x, t)
    return deriv(0, 1, x, t) - deriv(1, 0, x, t) - (v0 @ v1 - v1 @ v0)


def _exact_curvature(conn, x, t):
    d01 = conn.derivative(0, 1).freeze(t).eval(x)
    d10 = conn.derivative(1, 0).freeze(t).eval(x)
    v0 = conn.direction(0).freeze(t).eval(x)
    v1 = conn.direction(1).freeze(t).eval(x)
    return d01 - d10 - (v0 @ v1 - v1 @ v0)


def test_randomized_curvature_matches_difference_oracle():
    xs = [1.7 + 0.4j, -1.2 + 0.9j, 0.6 - 1.5j]
    ts = [(0.25 + 0j,), (-0.35 + 0.15j,)]
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        B = rng.normal(scale=0.5, size=(2, 2)) + 1j * rng.normal(
            scale=0.2, size=(2, 2))
        conn = schlesinger_pair(B)
        if seed % 2:  # break integrability with a constant extra term
            N = rng.normal(scale=1.0, size=(2, 2))
            a_t = ParamRationalMatrix(
                2, 1, conn.a_t[0].poles, (_scaled_matrix(N, 0.05),))
            conn = ConnectionSystem(conn.a_x, (a_t,))
        for x in xs:
            for t in ts:
                gap = norm_inf(_exact_curvature(conn, x, t)
                               - _fd_curvature(conn, x, t))
                assert gap < 1e-6
        res = zero_curvature_residual(conn, 0, 1, num_samples=20, seed=seed)
        if seed % 2:
            assert res > 1e-4
        else:
            assert res < 1e-12


def test_fuchsian_split_traceless_and_scalars():
    A = moving_pole_system(np.array(NONNORMAL_C))
    split = fuchsian_split(A)
    assert len(split.scalar_parts) == 1
    b = split.scalar_at(0, (0.3,))
    assert abs(b - (0.3 - 0.2) / 2.0) < 1e-15
    for t in [(0.1,), (0.7 - 0.2j,)]:
        B0 = eval_expr_matrix(split.traceless.poles[0].laurent[0], t)
        assert abs(np.trace(B0)) < 1e-15
        full = eval_expr_matrix(A.poles[0].laurent[0], t)
        bI = eval_expr(split.scalar_parts[0], t) * np.eye(2)
        assert norm_inf(B0 + bI - full) < 1e-15


def test_fuchsian_split_rejections():
    with pytest.raises(NotFuchsianError):
        fuchsian_split(_const_system(np.eye(2)))  # polynomial part
    order2 = ParamRationalMatrix(
        1, 0, (PoleLocus(const(0.0), (((const(1.0),),), ((const(2.0),),))),),
        ())
    with pytest.raises(NotFuchsianError):
        fuchsian_split(order2)


def _single_pole_family(res_exprs):
    """n-dim family res(t)/x with expression-valued residue entries."""
    n = len(res_exprs)
    return ParamRationalMatrix(
        n, 1, (PoleLocus(const(0.0), (tuple(tuple(r) for r in res_exprs),)),),
        ())


def test_classify_isomonodromic_constant_residue():
    conn = schlesinger_pair(np.array(NONNORMAL_C))
    grid = TGrid.linear(-0.2, 0.3 + 0.1j, 5)
    records = monodromy_grid(conn.a_x, [LoopSpec(0, 2.0 + 0j)], grid)
    report = classify_monodromy(records)
    assert report.verdict == "isomonodromic"
    loop = report.loops[0]
    assert loop.iso_residual < 1e-8
    assert norm_inf(loop.reference - expm(2j * np.pi * np.array(NONNORMAL_C))
                    ) < 1e-8
    assert all(abs(c - 1) < 1e-8 for c in loop.c_samples)


def test_classify_projective_scalar_twist():
    C = np.array(NONNORMAL_C)
    res = [[const(C[0, 0]) + param(1), const(C[0, 1])],
           [const(C[1, 0]), const(C[1, 1]) + param(1)]]
    A = _single_pole_family(res)  # residue C + t1*I: scalar twist only
    grid = TGrid.linear(0.0, 0.2, 5)
    records = monodromy_grid(A, [LoopSpec(0, 1.0 + 0j)], grid)
    report = classify_monodromy(records)
    assert report.verdict == "projectively_isomonodromic"
    loop = report.loops[0]
    assert loop.iso_residual > 1e-2  # genuinely moving matrices
    assert loop.proj_residual < 1e-8
    assert loop.continuity_ok
    for c, t in zip(loop.c_samples, grid):
        assert abs(c - np.exp(2j * np.pi * t[0])) < 1e-8
    assert report.to_dict()["loops"][0]["c_samples"]


def test_classify_neither_for_opposite_twist():
    res = [[param(1), const(0.0)], [const(0.0), -param(1)]]
    A = _single_pole_family(res)  # diag(t, -t)/x
    records = monodromy_grid(A, [LoopSpec(0, 1.0 + 0j)],
                             TGrid.linear(0.0, 0.2, 5))
    report = classify_monodromy(records)
    assert report.verdict == "neither"


def test_classify_record_requirements():
    conn = schlesinger_pair(np.array(NONNORMAL_C))
    records = monodromy_grid(conn.a_x, [LoopSpec(0, 2.0 + 0j)],
                             TGrid.linear(0.0, 0.2, 2))
    bad = list(records)
    bad[1].error = "NEAR_POLE"
    with pytest.raises(MissingRecordError):
        classify_monodromy(bad)
    with pytest.raises(MissingRecordError):
        classify_monodromy([])
    with pytest.raises(MissingRecordError):
        classify_monodromy(records[:1])  # a single grid point


def test_classify_singular_reference():
    sing = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    records = [
        MonodromyRecord(t=ParameterPoint((complex(t),)), loop=0, matrix=sing)
        for t in (0.0, 0.1)]
    with pytest.raises(SingularReferenceError):
        classify_monodromy(records)


def test_projective_split_check_round_trip():
    C = np.array(NONNORMAL_C)
    res = [[const(C[0, 0]) + param(1), const(C[0, 1])],
           [const(C[1, 0]), const(C[1, 1]) + param(1)]]
    A = _single_pole_family(res)
    report = projective_split_check(A, [LoopSpec(0, 1.0 + 0j)],
                                    TGrid.linear(0.0, 0.2, 5))
    assert report.verdict == "projectively_isomonodromic"
    assert report.traceless_report.verdict == "isomonodromic"
    assert report.max_drift < 1e-8
    d = report.to_dict()
    assert d["traceless_verdict"] == "isomonodromic"
    assert "0" in d["scalar_reconstruction_drift"]
