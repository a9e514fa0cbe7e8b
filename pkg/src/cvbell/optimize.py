"""Multi-start Nelder-Mead maximization of Bell functionals."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .bell import BellResult, BellSettings

log = logging.getLogger(__name__)

DIRECTIONS = ("max", "min", "max_abs")


class OptimizationError(RuntimeError):
    pass


@dataclass
class OptimizeSpec:
    """What to optimize and how.

    ``functional`` maps a real parameter vector of length ``dim`` to a float.
    Start points are drawn from a scrambled Sobol sequence inside ``bounds``
    (shape ``(dim, 2)``); the local search itself is unconstrained.
    """

    functional: Callable[[np.ndarray], float]
    dim: int
    bounds: np.ndarray
    direction: str = "max_abs"
    restarts: int = 32
    tol: float = 1e-12
    seed: int = 0
    formalism: str = ""
    decode: Callable[[np.ndarray], BellSettings] | None = None
    starts: Sequence[np.ndarray] = field(default_factory=list)
    maxiter: int | None = None
    n_jobs: int = 1
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float).reshape(self.dim, 2)
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.restarts < 1:
            raise ValueError("need at least one restart")


def _objective(spec: OptimizeSpec) -> Callable[[np.ndarray], float]:
    f = spec.functional

    def checked(x):
        v = float(f(x))
        if not np.isfinite(v):
            raise OptimizationError(f"non-finite functional value {v} at x={np.array2string(np.asarray(x))}")
        return v

    if spec.direction == "max":
        return lambda x: -checked(x)
    if spec.direction == "min":
        return checked
    return lambda x: -abs(checked(x))


def start_points(spec: OptimizeSpec) -> np.ndarray:
    sampler = qmc.Sobol(d=spec.dim, scramble=True, seed=spec.seed)
    m = int(np.ceil(np.log2(max(spec.restarts, 2))))
    pts = sampler.random_base2(m)[: spec.restarts]
    lo, hi = spec.bounds[:, 0], spec.bounds[:, 1]
    pts = lo + pts * (hi - lo)
    extra = [np.asarray(x, dtype=float).reshape(spec.dim) for x in spec.starts]
    return np.vstack(extra + [pts]) if extra else pts


def _local(obj, x0, spec: OptimizeSpec):
    maxiter = spec.maxiter or 400 * spec.dim
    res = minimize(
        obj,
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": spec.tol, "maxiter": maxiter, "maxfev": 2 * maxiter, "adaptive": spec.dim > 4},
    )
    return res.x, float(res.fun), int(res.nfev)


def optimize(spec: OptimizeSpec) -> BellResult:
    """Best value over all restarts, then repeated simplex restarts from the
    incumbent until the improvement drops below ``spec.tol``."""
    obj = _objective(spec)
    x0s = start_points(spec)
    seed_vals = [obj(x) for x in x0s]

    if spec.n_jobs > 1:
        with ThreadPoolExecutor(spec.n_jobs) as pool:
            runs = list(pool.map(lambda x: _local(obj, x, spec), x0s))
    else:
        runs = [_local(obj, x, spec) for x in x0s]
    nfev = sum(r[2] for r in runs)
    best = int(np.argmin([r[1] for r in runs]))
    x, fx = runs[best][0], runs[best][1]

    converged = False
    polishes = 0
    for polishes in range(1, 11):
        x_new, f_new, n = _local(obj, x, spec)
        nfev += n
        improvement = fx - f_new
        if f_new < fx:
            x, fx = x_new, f_new
        if improvement < spec.tol:
            converged = True
            break

    # never report anything worse than the best raw start point
    i0 = int(np.argmin(seed_vals))
    if seed_vals[i0] < fx:
        x, fx = x0s[i0], seed_vals[i0]

    value = float(spec.functional(x))
    result = BellResult(
        value=value,
        settings=spec.decode(x) if spec.decode else None,
        formalism=spec.formalism,
        diagnostics={
            "x": [float(v) for v in x],
            "restarts": int(len(x0s)),
            "function_evaluations": int(nfev),
            "polish_rounds": polishes,
            "converged": converged,
            "seed": spec.seed,
            "direction": spec.direction,
            **spec.meta,
        },
    )
    if spec.formalism:
        result.check_bounds()
    log.debug("optimized %s: %.12f (%d evaluations)", spec.formalism, value, nfev)
    return result


def sweep(
    make_spec: Callable[[float], OptimizeSpec],
    param_grid: Sequence[float],
    warm_start: bool = True,
) -> list[BellResult]:
    """One optimization per grid point, each warm-started from the previous optimum."""
    if len(param_grid) == 0:
        raise ValueError("empty parameter grid")
    results: list[BellResult] = []
    prev = None
    for p in param_grid:
        spec = make_spec(float(p))
        if warm_start and prev is not None:
            spec = replace(spec, starts=[*spec.starts, np.asarray(prev.diagnostics["x"])])
        res = optimize(spec)
        res.diagnostics["param"] = float(p)
        results.append(res)
        prev = res
    return results
