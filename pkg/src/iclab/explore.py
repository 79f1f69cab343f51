"""Parameter sweeps, multistart optimization and the comparison studies.

Parameters are addressed by name:

    r1, r2      gain of the first / second squeezer in element order
    psi1, psi2  phase of the first / second squeezer
    phi0        working point of the probe phase
    alpha, beta, gamma
                real coherent amplitude in mode a, b, c (sign = phase 0 or pi)

and, for fixed-budget studies where the total coherent photon number is held
at ``budget``, the seed direction

    seed_polar, seed_azimuth   share of light in a vs (b, c), then b vs c
    chi_a, chi_c               phases of the a and c seeds relative to b
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from iclab import analytic
from iclab.elements import InterferometerSpec, TwoModeSqueezer, mandel_preset
from iclab.measurement import (
    DetectionOperator,
    Difference,
    InsensitiveWorkingPoint,
    Intensity,
    PrecisionLoss,
    best_working_point,
    evaluate,
    sensitivity,
)

SEED_MODES = {"alpha": 0, "beta": 1, "gamma": 2}
SPLIT_VARS = ("seed_polar", "seed_azimuth", "chi_a", "chi_c")
VARIABLES = ("r1", "r2", "psi1", "psi2", "phi0", *SEED_MODES, *SPLIT_VARS)

N_STARTS = 8
SIMPLEX_TOL = 1e-9
OPT_SEED = 20240917
#: penalty objective for points with no usable sensitivity
_BAD = 1e6


class ParameterError(ValueError):
    pass


def apply_params(spec: InterferometerSpec, values: dict, budget: float | None = None) -> InterferometerSpec:
    """Return ``spec`` with the named parameters overwritten."""
    unknown = set(values) - set(VARIABLES)
    if unknown:
        raise ParameterError(f"unknown parameter(s) {sorted(unknown)}; known: {list(VARIABLES)}")
    elements = list(spec.elements)
    squeezers = [n for n, e in enumerate(elements) if isinstance(e, TwoModeSqueezer)]
    for name, field_name in (("r1", "r"), ("r2", "r"), ("psi1", "psi"), ("psi2", "psi")):
        if name not in values:
            continue
        k = int(name[-1]) - 1
        if k >= len(squeezers):
            raise ParameterError(f"{name} needs at least {k + 1} squeezers in the spec")
        v = float(values[name])
        if field_name == "r" and v < 0:
            raise ParameterError(f"{name} must be >= 0, got {v}")
        n = squeezers[k]
        elements[n] = replace(elements[n], **{field_name: v})
    seeds = list(spec.seeds)
    split = [v for v in SPLIT_VARS if v in values]
    if split:
        if budget is None:
            raise ParameterError(f"{split} need a photon budget")
        if spec.mode_count != 3:
            raise ParameterError("seed direction variables need a three-mode spec")
        p = float(values.get("seed_polar", 0.0))
        az = float(values.get("seed_azimuth", 0.0))
        amp = math.sqrt(budget)
        seeds = [
            amp * math.cos(p) * np.exp(1j * float(values.get("chi_a", 0.0))),
            amp * math.sin(p) * math.cos(az),
            amp * math.sin(p) * math.sin(az) * np.exp(1j * float(values.get("chi_c", 0.0))),
        ]
    for name, m in SEED_MODES.items():
        if name in values:
            if m >= spec.mode_count:
                raise ParameterError(f"{name} addresses mode {m} of a {spec.mode_count}-mode spec")
            seeds[m] = float(values[name])
    wp = float(values.get("phi0", spec.working_point))
    return replace(spec, elements=tuple(elements), seeds=tuple(seeds), working_point=wp)


def _objective(spec, op, budget):
    """Log of the sensitivity; unusable points map to a large penalty."""

    def f(values: dict) -> float:
        try:
            _, var, der = evaluate(apply_params(spec, values, budget), op)
        except ParameterError:
            return _BAD
        if not (var > 0 and abs(der) > 0 and math.isfinite(var)):
            return _BAD
        return math.log(var) - 2.0 * math.log(abs(der))

    return f


@dataclass(frozen=True)
class OptimizeResult:
    values: dict
    phi_min_sq: float
    converged: bool
    iterations: int
    best_start: float
    starts: int


def optimize(
    spec: InterferometerSpec,
    free: dict,
    op: DetectionOperator,
    *,
    budget: float | None = None,
    n_starts: int = N_STARTS,
    tol: float = SIMPLEX_TOL,
    seed: int = OPT_SEED,
    max_iter: int | None = None,
) -> OptimizeResult:
    """Multistart Nelder-Mead over ``free = {name: (lo, hi)}``.

    Starts come from a scrambled Sobol set over the box; every run works in
    unit-box coordinates so ``tol`` is relative to each bound width. Among
    equal optima (to 1e-12 relative) the one with smallest ``r2``, then
    smallest ``phi0``, wins.
    """
    if not free:
        raise ParameterError("nothing to optimize")
    if n_starts < 1:
        raise ParameterError("need at least one start")
    names = list(free)
    lo = np.array([float(free[n][0]) for n in names])
    hi = np.array([float(free[n][1]) for n in names])
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(hi >= lo)):
        raise ParameterError(f"bounds must be finite with lo <= hi: {free}")
    f = _objective(spec, op, budget)

    def to_values(u):
        x = lo + np.clip(u, 0.0, 1.0) * (hi - lo)
        return dict(zip(names, x.tolist()))

    def g(u):
        return f(to_values(u))

    dim = len(names)
    sampler = qmc.Sobol(dim, scramble=True, seed=seed)
    m = max(0, math.ceil(math.log2(n_starts)))
    starts = sampler.random_base2(m)[:n_starts]
    start_vals = [g(u) for u in starts]
    max_iter = max_iter or 400 * dim

    runs = []
    for u0, v0 in zip(starts, start_vals):
        res = minimize(
            g, u0, method="Nelder-Mead", bounds=[(0.0, 1.0)] * dim,
            options={"xatol": tol, "fatol": tol, "maxiter": max_iter, "maxfev": 2 * max_iter},
        )
        u, v = (res.x, float(res.fun)) if res.fun <= v0 else (u0, v0)
        runs.append((v, to_values(u), bool(res.success), int(res.nit)))

    best = min(r[0] for r in runs)
    close = [r for r in runs if r[0] <= best + 1e-12 * max(1.0, abs(best))]
    close.sort(key=lambda r: (r[1].get("r2", 0.0), r[1].get("phi0", 0.0)))
    v, values, _, _ = close[0]
    value = math.exp(v) if v < _BAD else math.inf
    return OptimizeResult(
        values=values,
        phi_min_sq=value,
        converged=any(r[2] for r in runs),
        iterations=sum(r[3] for r in runs),
        best_start=math.exp(min(start_vals)) if min(start_vals) < _BAD else math.inf,
        starts=len(starts),
    )


# -- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ParameterError(f"unknown axis variable {self.name!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ParameterError(f"axis {self.name} range must be finite")
        # a single step is only meaningful for a degenerate range
        if self.n < 2 and not (self.n == 1 and self.lo == self.hi):
            raise ParameterError(f"axis {self.name} needs >= 2 steps (or lo == hi with 1)")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class SweepConfig:
    base: InterferometerSpec
    axes: tuple
    detector: DetectionOperator
    optimize: dict = field(default_factory=dict)
    n_starts: int = N_STARTS
    tol: float = SIMPLEX_TOL
    seed: int = OPT_SEED

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not 1 <= len(self.axes) <= 2:
            raise ParameterError("a sweep takes one or two axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ParameterError(f"repeated axis variable in {names}")
        overlap = set(names) & set(self.optimize)
        if overlap:
            raise ParameterError(f"variables both swept and optimized: {sorted(overlap)}")
        unknown = set(self.optimize) - set(VARIABLES)
        if unknown:
            raise ParameterError(f"unknown optimized variable(s) {sorted(unknown)}")


@dataclass(frozen=True)
class PointResult:
    coords: tuple
    phi_min_sq: float
    mean: float = math.nan
    variance: float = math.nan
    derivative: float = math.nan
    optimized: dict = field(default_factory=dict)
    converged: bool | None = None
    iterations: int = 0
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    axes: tuple
    points: tuple
    provenance: dict

    @property
    def values(self) -> np.ndarray:
        return np.array([p.phi_min_sq for p in self.points])

    def curve(self, **fixed) -> tuple[np.ndarray, np.ndarray]:
        """Slice a two-axis result at fixed values of the other axis."""
        names = [a.name for a in self.axes]
        free = [n for n in names if n not in fixed]
        if len(free) != 1:
            raise ParameterError("fix all but one axis")
        i = names.index(free[0])
        keep = [
            p for p in self.points
            if all(p.coords[names.index(k)] == v for k, v in fixed.items())
        ]
        return np.array([p.coords[i] for p in keep]), np.array([p.phi_min_sq for p in keep])


def thread_count() -> int:
    cap = os.environ.get("ICLAB_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def _run_point(cfg: SweepConfig, coords: tuple) -> PointResult:
    values = dict(zip((a.name for a in cfg.axes), coords))
    try:
        spec = apply_params(cfg.base, values)
        opt = {}
        converged, iterations = None, 0
        if cfg.optimize:
            res = optimize(spec, cfg.optimize, cfg.detector, n_starts=cfg.n_starts, tol=cfg.tol, seed=cfg.seed)
            opt, converged, iterations = res.values, res.converged, res.iterations
            spec = apply_params(spec, opt)
        s = sensitivity(spec, cfg.detector)
    except (InsensitiveWorkingPoint, PrecisionLoss, ParameterError, ValueError) as exc:
        return PointResult(coords, math.nan, error=f"{type(exc).__name__}: {exc}")
    return PointResult(
        coords, s.phi_min_sq, s.mean, s.variance, s.derivative, opt, converged, iterations
    )


def sweep(cfg: SweepConfig, threads: int | None = None) -> SweepResult:
    """Evaluate every grid point; failures are recorded, never raised.

    Points are returned in grid order (first axis outermost) whatever the
    thread count.
    """
    grid = list(product(*(a.values().tolist() for a in cfg.axes)))
    threads = thread_count() if threads is None else max(1, threads)
    if threads == 1 or len(grid) == 1:
        points = [_run_point(cfg, c) for c in grid]
    else:
        with ThreadPoolExecutor(threads) as pool:
            points = list(pool.map(lambda c: _run_point(cfg, c), grid))
    provenance = {
        "detector": repr(cfg.detector),
        "working_point": cfg.base.working_point,
        "seeds": [[s.real, s.imag] for s in cfg.base.seeds],
        "optimize": {k: list(v) for k, v in cfg.optimize.items()},
        "optimizer": {"method": "nelder-mead", "starts": cfg.n_starts, "tol": cfg.tol, "seed": cfg.seed},
    }
    return SweepResult(cfg.axes, tuple(points), provenance)


# -- comparison studies ---------------------------------------------------------

SBC = Difference(1, 2)
IB = Intensity(1)
#: per-point free parameters of the Mandel columns in the fair comparison
COMPARE_FREE = {
    "r2": (0.01, 3.0),
    "phi0": (-math.pi, math.pi),
    "seed_polar": (0.0, math.pi / 2),
    "seed_azimuth": (0.0, math.pi / 2),
    "chi_a": (-math.pi, math.pi),
    "chi_c": (-math.pi, math.pi),
}


@dataclass(frozen=True)
class CompareRow:
    gain: float
    mandel_ib: float
    mandel_sbc: float
    yurke_boosted: float
    shot_noise: float
    settings_ib: dict
    settings_sbc: dict

    COLUMNS = ("gain", "mandel_ib", "mandel_sbc", "yurke_boosted", "shot_noise")


def compare_curves(gains, beta: float = 1000.0, n_starts: int = N_STARTS, free: dict | None = None) -> list[CompareRow]:
    """Fair comparison at a coherent budget of ``beta^2`` photons.

    The Mandel columns are optimized per gain over ``free`` (default: second
    gain, working point and how the coherent light is shared between the
    three modes). The shot-noise column is ``1 / N`` with ``N`` the coherent
    light plus the light spent on both squeezers of the optimized
    subtraction setup.
    """
    free = COMPARE_FREE if free is None else free
    budget = float(beta) ** 2
    rows = []
    for r in gains:
        r = float(r)
        if not r > 0:
            raise ParameterError(f"gains must be positive, got {r}")
        base = mandel_preset(r, 0.0, seeds=(0, beta, 0))
        ib = optimize(base, free, IB, budget=budget, n_starts=n_starts)
        sbc = optimize(base, free, SBC, budget=budget, n_starts=n_starts)
        r2 = sbc.values.get("r2", 0.0)
        rows.append(
            CompareRow(
                gain=r,
                mandel_ib=ib.phi_min_sq,
                mandel_sbc=sbc.phi_min_sq,
                yurke_boosted=analytic.yurke_boosted(r, budget),
                shot_noise=analytic.shot_noise(analytic.fair_budget(beta, r, r2)),
                settings_ib=ib.values,
                settings_sbc=sbc.values,
            )
        )
    return rows


@dataclass(frozen=True)
class SeedRow:
    mode: str
    ib: float
    sbc: float


def seed_study(r1: float, r2: float, budget: float) -> list[SeedRow]:
    """Same coherent photon number placed in mode a, b or c.

    The working point is optimized separately for each entry.
    """
    if budget < 0:
        raise ParameterError(f"budget must be >= 0, got {budget}")
    amp = math.sqrt(budget)
    rows = []
    for m, name in enumerate("abc"):
        seeds = [0.0, 0.0, 0.0]
        seeds[m] = amp
        spec = mandel_preset(r1, r2, seeds=seeds)
        vals = []
        for op in (IB, SBC):
            try:
                vals.append(best_working_point(spec, op)[1].phi_min_sq)
            except InsensitiveWorkingPoint:
                vals.append(math.inf)
        rows.append(SeedRow(name, *vals))
    return rows


@dataclass(frozen=True)
class GammaScan:
    gammas: np.ndarray
    values: np.ndarray
    improvement: np.ndarray
    peak_gamma: float
    peak_improvement: float


def mode_c_scan(
    r1: float, r2: float, beta: float, gammas, op: DetectionOperator = IB, phi0: float = 0.0
) -> GammaScan:
    """Add a real seed ``gamma`` to mode c on top of ``beta`` in mode b.

    ``improvement`` is the sensitivity at ``gamma = 0`` divided by the one
    at each ``gamma``; values above 1 are better.
    """
    base = mandel_preset(r1, r2, phi=phi0, seeds=(0, beta, 0))
    ref = sensitivity(base, op).phi_min_sq
    gammas = np.asarray(gammas, dtype=float)
    vals = np.array([sensitivity(apply_params(base, {"gamma": g}), op).phi_min_sq for g in gammas])
    imp = ref / vals
    k = int(np.argmax(imp))
    return GammaScan(gammas, vals, imp, float(gammas[k]), float(imp[k]))
