"""Command-line entry point.

Interval modes read a CSV matrix and print one JSON object; simulation
modes run the full 3x3 grid and write CSV (plus optional histograms).
Exit codes: 0 success, 2 validation failure, 3 numeric degeneracy, each
with a one-line JSON error on stderr. Flags override --config values;
user-facing indices are 1-based.
"""

import argparse
import json
import os
import sys

import numpy as np

from .denoising import ci_md, ci_md_entrywise
from .exceptions import NumericError
from .matrixio import read_matrix, read_vector
from .montecarlo import (emit_ks_curve, emit_summary, md_grid, pca_grid,
                         resolve_direction, run_grid)
from .pca import ci_pca, ci_pca_entrywise

__all__ = ["main"]

_MODES = ("ci-md", "ci-md-entry", "ci-pca", "ci-pca-entry",
          "simulate-md", "simulate-pca", "berry-esseen")

_DEFAULTS = {"j": 1, "a": "constant", "alpha": 0.05, "seed": 0, "model": "md"}

_CONFIG_KEYS = ("input", "r", "j", "i", "a", "alpha", "out", "histograms",
                "reps", "seed", "threads", "model")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spectralci",
        description="Confidence intervals for eigenvector linear forms, "
                    "plus the coverage and normality simulations that "
                    "validate them.")
    parser.add_argument("--mode", required=True, choices=_MODES)
    parser.add_argument("--input", help="matrix or data CSV for ci-* modes")
    parser.add_argument("--r", type=int, help="signal rank")
    parser.add_argument("--j", type=int,
                        help="target eigenvector index, 1-based (default 1)")
    parser.add_argument("--i", type=int,
                        help="target entry for *-entry modes, 1-based")
    parser.add_argument("--a",
                        help="direction: constant, coord:i, or file:path")
    parser.add_argument("--alpha", type=float,
                        help="miscoverage level (default 0.05)")
    parser.add_argument("--out", help="output CSV for simulation modes")
    parser.add_argument("--histograms",
                        help="directory for per-cell statistic histograms")
    parser.add_argument("--reps", type=int, help="replicates per cell")
    parser.add_argument("--seed", type=int, help="base seed for the grid")
    parser.add_argument("--threads", type=int,
                        help="worker threads (default: SPECTRALCI_THREADS "
                             "or available parallelism)")
    parser.add_argument("--model", choices=("md", "pca"),
                        help="model family for berry-esseen")
    parser.add_argument("--config",
                        help="JSON file supplying defaults for any flag")
    return parser


def _settings(args):
    settings = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as handle:
            loaded = json.load(handle)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        settings.update(loaded)
    for key in _CONFIG_KEYS:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    for key, value in _DEFAULTS.items():
        settings.setdefault(key, value)
    return settings


def _require(settings, keys, mode):
    missing = [key for key in keys if settings.get(key) is None]
    if missing:
        raise ValueError(
            f"mode {mode} requires --{', --'.join(missing)}")


def _direction_spec(spec):
    """Normalize a CLI direction flag into a montecarlo direction spec."""
    if spec == "constant":
        return "constant"
    if isinstance(spec, str) and spec.startswith("coord:"):
        return ("coord", int(spec[len("coord:"):]) - 1)
    if isinstance(spec, str) and spec.startswith("file:"):
        a = read_vector(spec[len("file:"):])
        norm = float(np.linalg.norm(a))
        if norm == 0.0:
            raise ValueError("direction vector is zero")
        if abs(norm - 1.0) > 1e-6:
            print(f"warning: direction norm {norm:.6g} differs from 1, "
                  "normalizing", file=sys.stderr)
            a = a / norm
        return a
    raise ValueError(f"unknown direction spec {spec!r}")


def _json_number(value):
    return "%.17g" % float(value)


def _result_json(result):
    diag = ", ".join(f'"{key}": {_json_number(value)}'
                     for key, value in result.diagnostics.items())
    return ('{"point": %s, "s_hat": %s, "lower": %s, "upper": %s, '
            '"alpha": %s, "diagnostics": {%s}}'
            % (_json_number(result.point), _json_number(result.s_hat),
               _json_number(result.lower), _json_number(result.upper),
               _json_number(result.alpha), diag))


def _run_ci(mode, settings):
    _require(settings, ("input", "r"), mode)
    matrix = read_matrix(settings["input"])
    r = int(settings["r"])
    j = int(settings["j"]) - 1
    alpha = float(settings["alpha"])
    if mode in ("ci-md", "ci-pca"):
        dim = matrix.shape[0]
        a = resolve_direction(_direction_spec(settings["a"]), dim)[0]
        if mode == "ci-md":
            result = ci_md(matrix, r, j, a, alpha)
        else:
            result = ci_pca(matrix, r, j, a, alpha)
    else:
        _require(settings, ("i",), mode)
        i = int(settings["i"]) - 1
        if mode == "ci-md-entry":
            result = ci_md_entrywise(matrix, r, j, i, alpha)
        else:
            result = ci_pca_entrywise(matrix, r, j, i, alpha)
    print(_result_json(result))


def _threads(settings):
    value = settings.get("threads")
    if value is None:
        env = os.environ.get("SPECTRALCI_THREADS")
        value = int(env) if env else os.cpu_count() or 1
    value = int(value)
    if value < 1:
        raise ValueError(f"thread count must be positive, got {value}")
    return value


def _run_simulate(mode, settings):
    _require(settings, ("out",), mode)
    reps = int(settings["reps"]) if settings.get("reps") is not None else 200
    grid = md_grid if mode == "simulate-md" else pca_grid
    cells = grid(base_seed=int(settings["seed"]), reps=reps,
                 alpha=float(settings["alpha"]),
                 a_spec=_direction_spec(settings["a"]))
    results = run_grid(cells, threads=_threads(settings))
    emit_summary(results, settings["out"],
                 histogram_dir=settings.get("histograms"))


def _run_berry(settings):
    _require(settings, ("out",), "berry-esseen")
    if settings["model"] not in ("md", "pca"):
        raise ValueError(f"unknown model {settings['model']!r}")
    reps = int(settings["reps"]) if settings.get("reps") is not None else 1000
    grid = md_grid if settings["model"] == "md" else pca_grid
    cells = grid(base_seed=int(settings["seed"]), reps=reps,
                 alpha=float(settings["alpha"]),
                 a_spec=_direction_spec(settings["a"]))
    results = run_grid(cells, threads=_threads(settings))
    emit_ks_curve(results, settings["out"])


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        settings = _settings(args)
        if args.mode in ("ci-md", "ci-md-entry", "ci-pca", "ci-pca-entry"):
            _run_ci(args.mode, settings)
        elif args.mode in ("simulate-md", "simulate-pca"):
            _run_simulate(args.mode, settings)
        else:
            _run_berry(settings)
    except NumericError as exc:
        print(json.dumps({"error": "numeric", "type": type(exc).__name__,
                          "message": str(exc)}), file=sys.stderr)
        return 3
    except (ValueError, TypeError, KeyError, OSError) as exc:
        print(json.dumps({"error": "validation", "type": type(exc).__name__,
                          "message": str(exc)}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
