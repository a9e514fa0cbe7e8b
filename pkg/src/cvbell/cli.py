"""Command-line interface: ``cvbell {optimize,sweep,figure,verify,fidelity}``.

Tables are written as CSV (UTF-8, ``.`` decimal separator, full ``repr``
precision), single runs as one JSON object with ``config``, ``results`` and
``diagnostics`` keys.  Every output starts with one timestamp line (a ``#``
comment in CSV, a ``generated`` key in JSON) unless ``--no-timestamp`` is
given; everything else is a deterministic function of the flags.

Exit codes: 0 success, 1 failed acceptance checks, 2 usage error, 3 numeric
failure (a diagnostic JSON object is printed to stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, bell
from .bell import BellResult, BellSettings
from .fock import make_cat, make_ecs, make_single_photon_entangled, make_tmss
from .observables import bw_parity, cat_rotation_fidelity, make_displacement, parity_expectation_number_state
from .optimize import OptimizationError, optimize, sweep
from .problems import bell_problem
from .verify import format_table, run_checks

OUTPUT_DIR_ENV = "CVBELL_OUTPUT_DIR"
FIGURES = ("1a", "1b", "2a", "2b", "3a", "3b")

#: Column names of every figure dataset.
FIGURE_COLUMNS = {
    "1a": ["r", "B_bw", "B_gbw", "B_pseudospin"],
    "1b": ["abs_alpha", "P_n1", "P_n2", "P_n3"],
    "2a": ["gamma", "B_bw", "B_gbw", "B_pseudospin"],
    "2b": ["alpha_i", "P_even_gamma2", "P_even_gamma5", "F_gamma2", "F_gamma5"],
    "3a": ["r", "BCH_bw", "BCH_gbw", "BCH_parity"],
    "3b": ["gamma", "BCH_bw", "BCH_gbw", "BCH_parity"],
}

# above this dimension the matrix cross-check at the optimum is skipped
ORACLE_MAX_DIM = 400


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# output helpers


def _timestamp() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def render_json(config: dict, results: list, diagnostics: dict, timestamp: bool) -> str:
    doc = {}
    if timestamp:
        doc["generated"] = _timestamp()
    doc.update(config=config, results=results, diagnostics=diagnostics)
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def render_csv(columns: Sequence[str], rows: Sequence[Sequence], timestamp: bool) -> str:
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# cvbell {__version__} generated {_timestamp()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV) or ".")


def emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    p = Path(path)
    if not p.is_absolute():
        p = output_dir() / p
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# run helpers


def _validate(state: str, formalism: str, restricted: bool, imaginary: bool, method: str) -> None:
    if state == "single_photon" and formalism in bell.CHSH_FORMALISMS:
        raise UsageError(f"state 'single_photon' is only used with the CH formalisms, not {formalism!r}")
    if formalism == "ch_qubit" and state != "single_photon":
        raise UsageError("ch_qubit acts on span{|0>,|1>}; use --state single_photon")
    if formalism == "ch_parity" and state == "single_photon":
        raise UsageError("ch_parity needs --state tmss or ecs")
    if restricted and formalism not in ("gbw", "ch_q"):
        raise UsageError("--restricted applies to gbw and ch_q only")
    if imaginary and formalism not in ("bw", "gbw", "ch_q"):
        raise UsageError("--imaginary applies to displacement formalisms only")
    if method == "analytic" and formalism not in ("pseudospin", "ch_parity"):
        raise UsageError("--method analytic applies to pseudospin and ch_parity only")


def _settings_columns(s: BellSettings | None) -> tuple[list[str], list[float]]:
    if s is None:
        return [], []
    names, values = [], []
    for name, d in s.to_dict().items():
        for k, v in d.items():
            names.append(f"{name}_{k}")
            values.append(float(v))
    return names, values


def _make_state(kind: str, param: float, cutoff):
    if kind == "tmss":
        return make_tmss(param, cutoff)
    if kind == "ecs":
        return make_ecs(param, cutoff)
    return make_single_photon_entangled(cutoff if cutoff is not None else 1)


def oracle_diagnostics(res: BellResult, kind: str, param: float, cutoff, method: str) -> dict:
    """Cutoff, tail mass, unitarity defect and the closed-form vs matrix residual at the optimum."""
    out: dict = {"oracle_residual": None}
    s = res.settings
    if s is None:
        return out
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        st = _make_state(kind, param, cutoff)
    out.update(cutoff=st.cutoff.n_max, tail_mass=st.tail_mass)
    if st.cutoff.dim > ORACLE_MAX_DIM:
        out["oracle_note"] = f"matrix cross-check skipped above dimension {ORACLE_MAX_DIM}"
        return out
    f = res.formalism
    if f in ("bw", "gbw", "ch_q"):
        numeric = bell.chsh_bw_numeric(st, s) if f != "ch_q" else bell.ch_q_numeric(st, s)
        out["oracle_residual"] = abs(numeric - res.value)
        out["unitarity_defect"] = max(make_displacement(x.alpha, st.cutoff).unitarity_defect for x in s)
    elif f == "pseudospin" and kind in ("tmss", "ecs"):
        other = bell.chsh_pseudospin(st, s) if method == "analytic" else bell.chsh_pseudospin_analytic(kind, param, s)
        out["oracle_residual"] = abs(other - res.value)
    elif f == "ch_parity":
        other = bell.ch_parity_numeric(st, s) if method == "analytic" else bell.ch_parity_formalism(kind, param, s)
        out["oracle_residual"] = abs(other - res.value)
    elif f == "ch_qubit" and kind == "single_photon":
        out["oracle_residual"] = abs(bell.ch_qubit_single_photon(s) - res.value)
    return out


def _check_params(state: str, params) -> None:
    if state == "single_photon":
        return
    for p in params:
        try:
            bell._check_kind(state, float(p))
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def _spec(args, param: float):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        spec = bell_problem(
            args.formalism, args.state, param,
            restricted=args.restricted, imaginary=args.imaginary, direction=args.direction,
            restarts=args.restarts, seed=args.seed, cutoff=args.cutoff, N=args.N, method=args.method,
        )
    spec.n_jobs = args.jobs
    return spec


def _numeric_guard(fn, context: dict):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            return fn()
    except (OptimizationError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        raise NumericFailure(str(exc), {**context, "error": type(exc).__name__}) from exc


def _config(args, **extra) -> dict:
    skip = {"func", "no_timestamp", "output"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    cfg.update(extra)
    return cfg


# ---------------------------------------------------------------------------
# commands


def cmd_optimize(args) -> int:
    _validate(args.state, args.formalism, args.restricted, args.imaginary, args.method)
    _check_params(args.state, [args.param])
    spec = _spec(args, args.param)
    res = _numeric_guard(lambda: optimize(spec), {"command": "optimize", "param": args.param})
    diag = oracle_diagnostics(res, args.state, args.param, args.cutoff, args.method)
    if args.format == "csv":
        names, values = _settings_columns(res.settings)
        cols = ["param", "value", "converged", "function_evaluations"] + names
        row = [float(args.param), res.value, res.diagnostics["converged"], res.diagnostics["function_evaluations"]]
        emit(render_csv(cols, [row + values], not args.no_timestamp), args.output)
    else:
        emit(render_json(_config(args), [res.to_dict()], diag, not args.no_timestamp), args.output)
    return 0


def _grid(args) -> np.ndarray:
    if args.grid:
        return np.array([float(v) for v in args.grid.split(",")])
    if args.num < 1:
        raise UsageError("--num must be at least 1")
    return np.linspace(args.start, args.stop, args.num)


def cmd_sweep(args) -> int:
    _validate(args.state, args.formalism, args.restricted, args.imaginary, args.method)
    grid = _grid(args)
    _check_params(args.state, grid)
    results = _numeric_guard(lambda: sweep(lambda p: _spec(args, p), grid), {"command": "sweep", "grid": list(grid)})
    if args.format == "json":
        emit(render_json(_config(args, grid=list(grid)), [r.to_dict() for r in results], {}, not args.no_timestamp),
             args.output)
        return 0
    names, _ = _settings_columns(results[0].settings)
    cols = ["param", "value", "converged", "function_evaluations"] + names
    rows = []
    for p, r in zip(grid, results):
        rows.append([float(p), r.value, r.diagnostics["converged"], r.diagnostics["function_evaluations"]]
                    + _settings_columns(r.settings)[1])
    emit(render_csv(cols, rows, not args.no_timestamp), args.output)
    return 0


def _curve(formalism, kind, grid, restarts, seed, **kw) -> list[float]:
    def make(p):
        return bell_problem(formalism, kind, p, restarts=restarts, seed=seed, **kw)

    return [r.value for r in sweep(make, grid)]


def figure_data(fig: str, points: int = 61, restarts: int = 8, seed: int = 0) -> tuple[list[str], list[list]]:
    """Rows of one figure dataset; columns are :data:`FIGURE_COLUMNS`."""
    if fig not in FIGURES:
        raise UsageError(f"unknown figure {fig!r}; choose from {', '.join(FIGURES)}")
    if points < 2:
        raise UsageError("--points must be at least 2")
    r_grid = np.linspace(0.0, 3.0, points)
    g_grid = np.linspace(0.05, 3.0, points)
    a_grid = np.linspace(0.0, 3.0, points)
    opt = dict(restarts=restarts, seed=seed)

    if fig in ("1a", "2a"):
        kind, grid = ("tmss", r_grid) if fig == "1a" else ("ecs", g_grid)
        cols = [grid,
                np.abs(_curve("bw", kind, grid, **opt)),
                np.abs(_curve("gbw", kind, grid, **opt)),
                np.abs(_curve("pseudospin", kind, grid, method="analytic", **opt))]
    elif fig == "1b":
        cols = [a_grid] + [[parity_expectation_number_state(n, a, method="closed") for a in a_grid] for n in (1, 2, 3)]
    elif fig == "2b":
        cols = [a_grid]
        for g in (2.0, 5.0):
            e = make_cat(g, "even")
            c = e.cutoff
            cols.append([float(np.vdot(e.coeffs, bw_parity(1j * a, c, "exact").matrix @ e.coeffs).real) for a in a_grid])
        for g in (2.0, 5.0):
            cols.append([cat_rotation_fidelity(g, a) for a in a_grid])
    else:
        kind, grid = ("tmss", r_grid) if fig == "3a" else ("ecs", g_grid)
        cols = [grid,
                _curve("ch_q", kind, grid, restricted=True, **opt),
                _curve("ch_q", kind, grid, **opt),
                _curve("ch_parity", kind, grid, method="analytic", **opt)]
    rows = [list(r) for r in zip(*cols)]
    return FIGURE_COLUMNS[fig], rows


def cmd_figure(args) -> int:
    cols, rows = _numeric_guard(
        lambda: figure_data(args.id, args.points, args.restarts, args.seed), {"command": "figure", "id": args.id}
    )
    path = args.output or f"fig{args.id}.csv"
    emit(render_csv(cols, rows, not args.no_timestamp), path)
    return 0


def cmd_fidelity(args) -> int:
    if any(g <= 0 for g in args.gamma):
        raise UsageError("--gamma values must be positive")
    grid = np.linspace(0.0, args.alpha_max, args.points)
    cols = ["alpha_i"] + [f"F_gamma{g:g}" for g in args.gamma]
    rows = [[a] + [cat_rotation_fidelity(g, a, parity=args.parity) for g in args.gamma] for a in grid]
    emit(render_csv(cols, rows, not args.no_timestamp), args.output)
    return 0


def cmd_verify(args) -> int:
    only = [int(v) for v in args.only.split(",")] if args.only else None
    rows = run_checks(args.seed, only)
    table = format_table(rows)
    sys.stdout.write(table + "\n")
    passed = sum(r.passed for r in rows)
    sys.stdout.write(f"{passed}/{len(rows)} checks passed\n")
    if args.output:
        emit(render_json(_config(args), [r.to_dict() for r in rows], {"passed": passed, "total": len(rows)},
                         not args.no_timestamp), args.output)
    return 0 if passed == len(rows) else 1


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", help=f"output file; relative paths resolve under ${OUTPUT_DIR_ENV} (default: stdout)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp line")


def _problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--state", required=True, choices=bell.STATE_KINDS)
    p.add_argument("--formalism", required=True, choices=bell.FORMALISMS)
    p.add_argument("--restricted", action="store_true", help="pin a=b=0 (original BW form)")
    p.add_argument("--imaginary", action="store_true", help="purely imaginary displacements")
    p.add_argument("--direction", choices=("max", "min", "max_abs"))
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--cutoff", type=int, help="Fock cutoff n_max (default: chosen from the state)")
    p.add_argument("--N", type=int, help="Gisin-Peres dimension")
    p.add_argument("--method", choices=("numeric", "analytic"), default="numeric")
    p.add_argument("--jobs", type=int, default=1, help="threads for the restarts")
    p.add_argument("--format", choices=("json", "csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvbell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cvbell {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="optimize one Bell functional")
    _problem_args(p)
    p.add_argument("--param", type=float, default=0.0, help="squeezing r or ECS amplitude gamma")
    _common(p)
    p.set_defaults(func=cmd_optimize, format_default="json")

    p = sub.add_parser("sweep", help="optimize over a parameter grid")
    _problem_args(p)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=3.0)
    p.add_argument("--num", type=int, default=61)
    p.add_argument("--grid", help="comma-separated parameter values (overrides start/stop/num)")
    _common(p)
    p.set_defaults(func=cmd_sweep, format_default="csv")

    p = sub.add_parser("figure", help="data behind one of the figures")
    p.add_argument("--id", required=True, choices=FIGURES)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--restarts", type=int, default=8)
    _common(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--output", "-o", help="also write the checks as JSON")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fidelity", help="cat-rotation fidelity against alpha_i")
    p.add_argument("--gamma", type=float, nargs="+", default=[2.0, 5.0])
    p.add_argument("--alpha-max", type=float, default=3.0)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    _common(p)
    p.set_defaults(func=cmd_fidelity)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "format_default") and args.format is None:
        args.format = args.format_default
    if hasattr(args, "format_default"):
        del args.format_default
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except NumericFailure as exc:
        sys.stderr.write(json.dumps(_jsonable({"error": str(exc), "diagnostics": exc.diagnostics}), indent=2) + "\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
