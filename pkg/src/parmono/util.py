"""Small numeric helpers shared across modules."""

from __future__ import annotations

import numpy as np

__all__ = ["norm_inf", "eig_multiset_distance", "rel_scale"]


def norm_inf(M) -> float:
    """Max absolute entry of a matrix/vector (the entrywise sup norm)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M)))


def rel_scale(M) -> float:
    """Scale factor max(1, ||M||_inf) used for relative tolerances."""
    return max(1.0, norm_inf(M))


def eig_multiset_distance(A, B) -> float:
    """Distance between eigenvalue multisets of two square matrices.

    Greedy matching on sorted eigenvalues after lexicographic (real, imag)
    ordering; adequate for the well-separated spectra used in tests.
    """
    ea = np.sort_complex(np.linalg.eigvals(np.asarray(A, dtype=complex)))
    eb = np.sort_complex(np.linalg.eigvals(np.asarray(B, dtype=complex)))
    return float(np.max(np.abs(ea - eb))) if ea.size else 0.0
