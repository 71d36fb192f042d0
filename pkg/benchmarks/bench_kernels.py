"""Benchmark the compiled vs pure-Python contour-integration kernels.

Times full monodromy loops (segment-circle-segment) for a few system sizes
and prints a per-backend table with the speedup.  Also reports the maximum
entrywise deviation between backends as a parity check.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from parmono._kernels import available_backends, get_backend, integrate_polyline
from parmono.expr import const, param
from parmono.monodromy import LoopSpec, encode_path, loop_path
from parmono.sysmodel import make_system


def _fixture(n: int, seed: int):
    """A one-parameter Fuchsian system with three poles and size-n residues."""
    rng = np.random.default_rng(seed)
    poles = []
    for loc in (const(0), const(1), param(1)):
        res = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        res *= 0.5 / n
        mat = [[const(complex(v)) for v in row] for row in res]
        poles.append((loc, [mat]))
    return make_system(n, 1, poles=poles)


def _loop_data(A, t):
    pieces = loop_path(A, LoopSpec(0, base_point=-0.7 + 0.4j), t)
    types, params = encode_path(pieces)
    return A.freeze(t), types, params


def bench(repeats: int) -> None:
    t = (2.0 + 0.5j,)
    rows = []
    backends = available_backends()
    for n in (2, 4, 8):
        A = _fixture(n, seed=n)
        frozen, types, params = _loop_data(A, t)
        Y0 = np.eye(n, dtype=complex)
        results = {}
        times = {}
        for name in backends:
            impl = get_backend(name)
            Y, _ = integrate_polyline(frozen, types, params, Y0,
                                      1e-10, 1e-12, impl=impl)  # warm up
            best = float("inf")
            for _ in range(repeats):
                start = time.perf_counter()
                Y, _ = integrate_polyline(frozen, types, params, Y0,
                                          1e-10, 1e-12, impl=impl)
                best = min(best, time.perf_counter() - start)
            results[name] = Y
            times[name] = best
        parity = 0.0
        if len(backends) == 2:
            parity = float(np.max(np.abs(results[backends[0]]
                                         - results[backends[1]])))
        rows.append((n, times, parity))

    print(f"{'n':>3}  " + "".join(f"{name + ' (ms)':>14}" for name in backends)
          + f"{'speedup':>10}{'parity':>12}")
    for n, times, parity in rows:
        cells = "".join(f"{times[name] * 1e3:>14.3f}" for name in backends)
        if "cython" in times and "python" in times:
            speed = f"{times['python'] / times['cython']:>10.1f}"
        else:
            speed = f"{'-':>10}"
        print(f"{n:>3}  {cells}{speed}{parity:>12.2e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5,
                    help="timing repetitions per case (best-of)")
    args = ap.parse_args()
    print("backends:", ", ".join(available_backends()))
    bench(args.repeats)


if __name__ == "__main__":
    main()
