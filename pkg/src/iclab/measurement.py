"""Photon-counting statistics and the minimum detectable phase.

Every supported detection operator is a real linear combination of
intensities ``O = sum_k w_k I_k``, so its mean and variance follow from the
intensity means and the intensity covariance matrix of a Gaussian state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar

from iclab import kernels
from iclab.elements import InterferometerSpec, phase_derivative
from iclab.gaussian import GaussianMoments

#: derivative magnitude below which a working point counts as insensitive
INSENSITIVE_TOL = 1e-300


class InsensitiveWorkingPoint(ArithmeticError):
    """The detected mean does not depend on the probe phase at this point."""


class PrecisionLoss(ArithmeticError):
    """Round-off wiped out the variance (it came out zero or negative).

    Happens for extreme gains where the cancelling Wick terms are ~1e16
    times larger than their sum.
    """


@dataclass(frozen=True)
class Intensity:
    mode: int


@dataclass(frozen=True)
class Difference:
    j: int
    k: int

    def __post_init__(self):
        if self.j == self.k:
            raise ValueError("difference detection needs two distinct modes")


@dataclass(frozen=True)
class Sum:
    modes: tuple

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))


DetectionOperator = Union[Intensity, Difference, Sum]

#: CLI / config names of the standard detectors
DETECTORS = {
    "ia": Intensity(0),
    "ib": Intensity(1),
    "ic": Intensity(2),
    "diff-bc": Difference(1, 2),
    "sum-bc": Sum((1, 2)),
}


def detector_from_name(name: str, mode_count: int) -> DetectionOperator:
    """Look up a detector name; ``sum`` means total intensity over all modes."""
    if name == "sum":
        return Sum(tuple(range(mode_count)))
    try:
        op = DETECTORS[name]
    except KeyError:
        raise ValueError(
            f"unknown detector {name!r}; choose from {sorted([*DETECTORS, 'sum'])}"
        ) from None
    detection_weights(op, mode_count)
    return op


def detection_weights(op: DetectionOperator, mode_count: int) -> np.ndarray:
    w = np.zeros(mode_count)
    if isinstance(op, Intensity):
        modes, signs = (op.mode,), (1.0,)
    elif isinstance(op, Difference):
        modes, signs = (op.j, op.k), (1.0, -1.0)
    elif isinstance(op, Sum):
        modes, signs = op.modes, (1.0,) * len(op.modes)
    else:
        raise TypeError(f"not a detection operator: {op!r}")
    for m, s in zip(modes, signs):
        if not 0 <= m < mode_count:
            raise ValueError(f"detector mode {m} out of range for {mode_count} modes")
        w[m] += s
    return w


def intensity_mean(state: GaussianMoments, k: int) -> float:
    return float(abs(state.d[k]) ** 2 + state.N[k, k].real)


def intensity_covariance(state: GaussianMoments, j: int, k: int) -> float:
    """Cov(I_j, I_k); for ``j == k`` this is Var(I_j)."""
    d, N, A = state.d, state.N, state.A
    c = (
        2.0 * (d[j].conjugate() * d[k] * N[j, k].conjugate()).real
        + 2.0 * (d[j].conjugate() * d[k].conjugate() * A[j, k]).real
        + abs(N[j, k]) ** 2
        + abs(A[j, k]) ** 2
    )
    if j == k:
        c += abs(d[j]) ** 2 + N[j, j].real
    return float(c)


def detection_moments(state: GaussianMoments, op: DetectionOperator) -> tuple[float, float]:
    """``(mean, variance)`` of the detection operator."""
    w = detection_weights(op, state.mode_count)
    means = np.abs(state.d) ** 2 + state.N.diagonal().real
    C = kernels.intensity_covariance(state.d, state.N, state.A)
    return float(w @ means), float(w @ C @ w)


@dataclass(frozen=True)
class SensitivityResult:
    phi_min_sq: float
    mean: float
    variance: float
    derivative: float


def evaluate(spec: InterferometerSpec, op: DetectionOperator) -> tuple[float, float, float]:
    """Raw ``(mean, variance, d mean / d phi)`` at the spec's working point."""
    M = spec.mode_count
    Us, Vs = spec.stacks()
    dU, dV = phase_derivative(spec.probe, M)
    d0 = np.asarray(spec.seeds, dtype=complex)
    zero = np.zeros((M, M), dtype=complex)
    return kernels.evaluate(
        Us, Vs, spec.probe_index, dU, dV, d0, zero, zero, detection_weights(op, M)
    )


def sensitivity(spec: InterferometerSpec, op: DetectionOperator) -> SensitivityResult:
    """Minimum detectable phase ``Var(O) / |d<O>/dphi|^2`` at ``spec.working_point``.

    Raises:
        InsensitiveWorkingPoint: if the derivative vanishes.
        PrecisionLoss: if a sensitive point reports a non-positive variance.
    """
    mean, var, der = evaluate(spec, op)
    if not abs(der) >= INSENSITIVE_TOL:
        raise InsensitiveWorkingPoint(
            f"d<O>/dphi = {der!r} at phi0 = {spec.working_point!r}"
        )
    if not var > 0:
        raise PrecisionLoss(f"variance {var!r} at phi0 = {spec.working_point!r}")
    return SensitivityResult(var / der**2, mean, var, der)


def phi_min_sq(spec: InterferometerSpec, op: DetectionOperator) -> float:
    """Like :func:`sensitivity` but returns ``inf`` at insensitive points
    and ``nan`` where the variance lost all precision."""
    _, var, der = evaluate(spec, op)
    if not abs(der) >= INSENSITIVE_TOL:
        return math.inf
    if not var > 0:
        return math.nan
    return var / der**2


def best_working_point(
    spec: InterferometerSpec, op: DetectionOperator, n_grid: int = 64
) -> tuple[float, SensitivityResult]:
    """Scan the working point over one period and polish the best bracket.

    Returns ``(phi0, result)`` with ``phi0`` in ``[-pi, pi)``.
    """
    grid = np.linspace(-math.pi, math.pi, n_grid, endpoint=False)
    def f(p):
        v = phi_min_sq(spec.at(p), op)
        return math.inf if math.isnan(v) else v

    vals = np.array([f(p) for p in grid])
    if not np.isfinite(vals).any():
        raise InsensitiveWorkingPoint("no phase-sensitive working point found")
    i = int(np.argmin(vals))
    step = grid[1] - grid[0]
    res = minimize_scalar(
        f,
        bounds=(grid[i] - step, grid[i] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    phi0 = float(res.x) if res.fun <= vals[i] else float(grid[i])
    phi0 = (phi0 + math.pi) % (2 * math.pi) - math.pi
    return phi0, sensitivity(spec.at(phi0), op)
