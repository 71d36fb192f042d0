"""Command-line front end.

Subcommands::

    parmono monodromy   --system F --grid G --base Z [loop flags]
    parmono classify    --system F --grid G --base Z [--tol-iso --tol-proj]
    parmono integrable  --system F [--samples N --seed S]
    parmono frobenius   --system F --pole I [--t T --order N]
    parmono halphen     --config F [--csv PATH]

Structured results are JSON (complex numbers as [re, im] pairs) with an
embedded run manifest; flow trajectories additionally get a plot-ready CSV.
Exit codes: 0 success, 1 hard error (machine-readable envelope
``{"error": CODE, "detail": ...}`` on stderr), 2 partial failure (some grid
cells flagged but the result file was written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .classify import (
    ConnectionSystem,
    ISO_TOL,
    PROJ_TOL,
    ZC_TOL,
    classify_monodromy,
    integrability_report,
    projective_split_check,
)
from .errors import ConfigError, InputFileError, MissingDirectionError, ParmonoError
from .expr import as_parameter_point
from .halphen import HalphenRun, verify_evolution_law, write_trajectory_csv
from .jsonutil import (
    complex_to_pair,
    dump_json,
    load_json,
    matrix_to_pairs,
    pair_to_complex,
    run_manifest,
)
from .local import frobenius_solution, residual_slope, series_residual
from .monodromy import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    LoopSpec,
    TGrid,
    monodromy_grid,
    records_to_dicts,
)
from .sysmodel import DEFAULT_GUARD, ParamRationalMatrix, pole_orders

__all__ = ["main"]


def _default_jobs() -> int:
    env = os.environ.get("PARMONO_JOBS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PARMONO_JOBS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _load_system(path) -> ParamRationalMatrix:
    try:
        return ParamRationalMatrix.load(path)
    except FileNotFoundError:
        raise InputFileError(f"system file not found: {path}", path=str(path))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"system file {path} is not valid JSON: {exc}")


def _load_grid(spec: str, num_params: int) -> TGrid:
    """Inline 'start:end:count' (first parameter swept on the real line) or a
    JSON file holding a list of parameter points."""
    parts = spec.split(":")
    if len(parts) == 3 and not os.path.exists(spec):
        try:
            start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"bad inline grid {spec!r}; want start:end:count")
        if num_params != 1:
            raise ConfigError(
                "inline grids sweep a single parameter; this system has "
                f"{num_params}")
        return TGrid.linear(start, end, count)
    try:
        data = load_json(spec)
    except FileNotFoundError:
        raise InputFileError(f"grid file not found: {spec}", path=str(spec))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"grid file {spec} is not valid JSON: {exc}")
    if isinstance(data, dict):
        data = data.get("points", data.get("grid"))
    if not isinstance(data, list) or not data:
        raise ConfigError(f"grid file {spec} must hold a nonempty list")
    points = []
    for entry in data:
        if isinstance(entry, list) and entry and isinstance(entry[0], list):
            coords = tuple(pair_to_complex(v) for v in entry)
        elif isinstance(entry, list) and len(entry) == 2 \
                and all(isinstance(v, (int, float)) for v in entry) \
                and num_params == 1:
            coords = (pair_to_complex(entry),)
        elif isinstance(entry, (int, float)):
            coords = (complex(entry),)
        elif isinstance(entry, list):
            coords = tuple(pair_to_complex(v) for v in entry)
        else:
            raise ConfigError(f"bad grid entry {entry!r}")
        points.append(as_parameter_point(coords, num_params))
    return TGrid(tuple(points))


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"bad complex number {text!r}")


def _parse_point(text: str, num_params: int):
    vals = tuple(_parse_complex(v) for v in text.split(",")) if text else ()
    return as_parameter_point(vals, num_params)


def _loop_specs(args, A: ParamRationalMatrix) -> list:
    base = _parse_complex(args.base)
    if args.loops.strip().lower() in ("", "all"):
        indices = list(range(len(A.poles)))
    else:
        try:
            indices = [int(v) for v in args.loops.split(",")]
        except ValueError:
            raise ConfigError(f"bad loop list {args.loops!r}")
    for i in indices:
        if not 0 <= i < len(A.poles):
            raise ConfigError(
                f"loop index {i} out of range (system has {len(A.poles)} "
                "declared poles)")
    return [LoopSpec(i, base, radius=args.radius, margin=args.margin,
                     orientation=args.orientation) for i in indices]


def _emit(payload: dict, out) -> None:
    if out in (None, "-"):
        dump_json(payload, sys.stdout)
    else:
        dump_json(payload, out)


def _manifest(args, command: str, keys) -> dict:
    options = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    return run_manifest(command, options, getattr(args, "seed", None))


# --- subcommands --------------------------------------------------------------

def cmd_monodromy(args) -> int:
    A = _load_system(args.system)
    grid = _load_grid(args.grid, A.num_params)
    loops = _loop_specs(args, A)
    records = monodromy_grid(A, loops, grid, rtol=args.rtol, atol=args.atol,
                             jobs=args.jobs, guard=args.pole_guard)
    payload = {
        "manifest": _manifest(args, "monodromy",
                              ("system", "grid", "base", "loops", "rtol",
                               "atol", "jobs", "out")),
        "records": records_to_dicts(records),
    }
    _emit(payload, args.out)
    return 0 if all(r.ok for r in records) else 2


def cmd_classify(args) -> int:
    A = _load_system(args.system)
    grid = _load_grid(args.grid, A.num_params)
    loops = _loop_specs(args, A)
    records = monodromy_grid(A, loops, grid, rtol=args.rtol, atol=args.atol,
                             jobs=args.jobs, guard=args.pole_guard)
    report = classify_monodromy(records, iso_tol=args.tol_iso,
                                proj_tol=args.tol_proj)
    payload = {
        "manifest": _manifest(args, "classify",
                              ("system", "grid", "base", "loops", "rtol",
                               "atol", "tol_iso", "tol_proj", "jobs", "out")),
        **report.to_dict(),
    }
    if report.verdict == "projectively_isomonodromic" and args.split:
        try:
            split = projective_split_check(
                A, loops, grid, iso_tol=args.tol_iso, proj_tol=args.tol_proj,
                rtol=args.rtol, atol=args.atol, jobs=args.jobs,
                guard=args.pole_guard)
            payload["split_check"] = split.to_dict()
        except ParmonoError as exc:
            payload["split_check"] = {"error": exc.code, "detail": str(exc)}
    _emit(payload, args.out)
    return 0


def cmd_integrable(args) -> int:
    try:
        data = load_json(args.system)
    except FileNotFoundError:
        raise InputFileError(f"system file not found: {args.system}",
                             path=str(args.system))
    if not isinstance(data, dict) or "A_x" not in data:
        raise ConfigError("integrability input must be a JSON object with "
                          "keys A_x and A_t")
    a_x = ParamRationalMatrix.from_dict(data["A_x"])
    a_t_list = data.get("A_t") or []
    if not a_t_list:
        raise MissingDirectionError(
            "no parameter directions: the A_t list is missing or empty")
    a_t = tuple(ParamRationalMatrix.from_dict(d) for d in a_t_list)
    conn = ConnectionSystem(a_x, a_t)
    report = integrability_report(conn, num_samples=args.samples,
                                  seed=args.seed, tol=args.tol,
                                  guard=args.pole_guard)
    payload = {
        "manifest": _manifest(args, "integrable",
                              ("system", "samples", "seed", "tol", "out")),
        **report.to_dict(),
    }
    _emit(payload, args.out)
    return 0


def cmd_frobenius(args) -> int:
    A = _load_system(args.system)
    t = _parse_point(args.t, A.num_params)
    sol = frobenius_solution(A, args.pole, t, order=args.order,
                             guard=args.pole_guard)
    # Choose the radii span so the smallest residual stays above the
    # double-precision floor: residuals scale like rho^order, so a fixed
    # ladder would bottom out for high truncation orders.
    rho = sol.radius_estimate
    top = series_residual(sol, A, rho)
    if top > 1e-12:
        shrink = min(8.0, max(1.5, (top / 1e-13) ** (1.0 / sol.order)))
        radii = [rho * shrink ** (-k / 3.0) for k in range(4)]
        slope, residuals = residual_slope(sol, A, radii)
        slope = float(slope)
    else:  # truncation error already at rounding level everywhere
        radii, residuals, slope = [rho], [top], None
    payload = {
        "manifest": _manifest(args, "frobenius",
                              ("system", "pole", "t", "order", "out")),
        "pole_index": sol.pole_index,
        "location": complex_to_pair(sol.location),
        "exponent": matrix_to_pairs(sol.exponent),
        "series": [matrix_to_pairs(H) for H in sol.series],
        "radius_estimate": sol.radius_estimate,
        "diagnostic": {
            "radii": list(map(float, radii)),
            "residuals": [float(r) for r in residuals],
            "slope": slope,
            "order": sol.order,
        },
    }
    _emit(payload, args.out)
    return 0


def cmd_halphen(args) -> int:
    try:
        data = load_json(args.config)
    except FileNotFoundError:
        raise InputFileError(f"config file not found: {args.config}",
                             path=str(args.config))
    run = HalphenRun.from_dict(data)
    manifest = _manifest(args, "halphen", ("config", "rtol", "atol", "out"))
    if run.variant == "HII_flow":
        report = verify_evolution_law(run, rtol=args.rtol, atol=args.atol)
        traj = run.integrate(args.rtol, args.atol)
        payload = {"manifest": manifest, **report.to_dict()}
        csv_mu = run.mu
    else:
        traj = run.integrate(args.rtol, args.atol)
        payload = {
            "manifest": manifest,
            "variant": run.variant,
            "t0": complex_to_pair(run.t0),
            "t_end": complex_to_pair(run.t_end),
            "final_state": [complex_to_pair(v) for v in traj.state_at(1.0)],
            "err_estimate": traj.err_estimate,
        }
        csv_mu = None
    csv_path = args.csv
    if csv_path is None and args.out not in (None, "-"):
        stem, _ = os.path.splitext(args.out)
        csv_path = stem + ".csv"
    if csv_path is not None:
        write_trajectory_csv(traj, csv_path, num_rows=args.rows, mu=csv_mu)
        payload["trajectory_csv"] = csv_path
    _emit(payload, args.out)
    return 0


# --- argument parsing ---------------------------------------------------------

def _add_common(p, *, grid=False, base=False, seed=False):
    p.add_argument("--out", default=None,
                   help="output JSON path (default: stdout)")
    p.add_argument("--rtol", type=float, default=DEFAULT_RTOL,
                   help="relative integration tolerance")
    p.add_argument("--atol", type=float, default=DEFAULT_ATOL,
                   help="absolute integration tolerance")
    p.add_argument("--pole-guard", type=float, default=DEFAULT_GUARD,
                   help="pole guard radius for evaluation/integration")
    if grid:
        p.add_argument("--grid", required=True,
                       help="inline start:end:count or JSON file of points")
        p.add_argument("--jobs", type=int, default=None,
                       help="parallel workers over grid points "
                            "(default: PARMONO_JOBS or all cores)")
    if base:
        p.add_argument("--base", required=True,
                       help="loop base point x0 (complex, e.g. '0.5' or '1+2i')")
        p.add_argument("--loops", default="all",
                       help="comma-separated pole indices (default: all)")
        p.add_argument("--radius", type=float, default=None,
                       help="fixed loop radius (default: automatic)")
        p.add_argument("--margin", type=float, default=None,
                       help="clearance margin (default: radius/4)")
        p.add_argument("--orientation", type=int, default=1, choices=(1, -1),
                       help="loop orientation, +1 counterclockwise")
    if seed:
        p.add_argument("--seed", type=int, default=0,
                       help="seed for sampling-based checks")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="parmono",
        description="Parameterized monodromy of linear ODE systems: "
                    "computation, classification, integrability and "
                    "Darboux-Halphen evolution checks.")
    ap.add_argument("--version", action="version",
                    version=f"parmono {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("monodromy",
                       help="monodromy matrices over a parameter grid")
    p.add_argument("--system", required=True, help="system JSON file")
    _add_common(p, grid=True, base=True)
    p.set_defaults(func=cmd_monodromy)

    p = sub.add_parser("classify",
                       help="isomonodromy / projective-isomonodromy verdict")
    p.add_argument("--system", required=True, help="system JSON file")
    p.add_argument("--tol-iso", type=float, default=ISO_TOL,
                   help="isomonodromy residual tolerance")
    p.add_argument("--tol-proj", type=float, default=PROJ_TOL,
                   help="projective residual tolerance")
    p.add_argument("--no-split", dest="split", action="store_false",
                   help="skip the Fuchsian scalar-shift cross-check")
    _add_common(p, grid=True, base=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("integrable",
                       help="zero-curvature residuals for a connection")
    p.add_argument("--system", required=True,
                   help="JSON file with keys A_x and A_t (list)")
    p.add_argument("--samples", type=int, default=60,
                   help="sample points per direction pair")
    p.add_argument("--tol", type=float, default=ZC_TOL,
                   help="integrability residual tolerance")
    _add_common(p, seed=True)
    p.set_defaults(func=cmd_integrable)

    p = sub.add_parser("frobenius",
                       help="local series solution at a simple pole")
    p.add_argument("--system", required=True, help="system JSON file")
    p.add_argument("--pole", type=int, required=True,
                   help="index of the target pole locus")
    p.add_argument("--t", default="",
                   help="parameter point, comma-separated complex values")
    p.add_argument("--order", type=int, default=20,
                   help="series truncation order")
    _add_common(p)
    p.set_defaults(func=cmd_frobenius)

    p = sub.add_parser("halphen",
                       help="integrate a quadratic pole flow; verify the "
                            "monodromy evolution law for Lax configs")
    p.add_argument("--config", required=True, help="flow config JSON file")
    p.add_argument("--csv", default=None,
                   help="trajectory CSV path (default: derived from --out)")
    p.add_argument("--rows", type=int, default=201,
                   help="rows in the trajectory CSV")
    _add_common(p)
    p.set_defaults(func=cmd_halphen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", None) is None and hasattr(args, "jobs"):
        try:
            args.jobs = _default_jobs()
        except ParmonoError as exc:
            print(json.dumps({"error": exc.code, "detail": str(exc)}),
                  file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except ParmonoError as exc:
        print(json.dumps({"error": exc.code, "detail": str(exc)}),
              file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": "FILE_NOT_FOUND", "detail": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
