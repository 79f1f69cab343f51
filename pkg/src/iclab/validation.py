"""Self-check suites shared by ``iclab validate`` and the test-suite.

Each suite returns a :class:`CheckResult`; nothing here raises on a failed
check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from iclab import analytic, kernels
from iclab.elements import (
    BeamSplitter,
    InterferometerSpec,
    PhaseShift,
    TwoModeSqueezer,
    build_element,
    mandel_preset,
    phase_derivative,
)
from iclab.gaussian import compose_chain, symplectic_residuals
from iclab.measurement import Difference, Intensity, Sum, detection_weights, evaluate, sensitivity


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def random_element(rng: np.random.Generator, mode_count: int, r_max: float = 1.0):
    kind = rng.integers(3)
    i, j = (int(x) for x in rng.choice(mode_count, 2, replace=False))
    if kind == 0:
        return TwoModeSqueezer(i, j, float(rng.uniform(0, r_max)), float(rng.uniform(-math.pi, math.pi)))
    if kind == 1:
        return BeamSplitter(i, j, float(rng.uniform(-math.pi, math.pi)))
    return PhaseShift(i, float(rng.uniform(-math.pi, math.pi)))


def random_spec(
    rng: np.random.Generator,
    r_max: float = 1.0,
    seed_max: float = 3.0,
    mode_count: int | None = None,
    n_elements: int | None = None,
) -> InterferometerSpec:
    """Random element chain with one probe phase and random coherent seeds."""
    M = int(mode_count or rng.integers(2, 4))
    n = int(n_elements or rng.integers(2, 7))
    elements = [random_element(rng, M, r_max) for _ in range(n)]
    probe = int(rng.integers(n + 1))
    elements.insert(probe, PhaseShift(int(rng.integers(M)), 0.0))
    radius = seed_max * np.sqrt(rng.uniform(0, 1, M))
    seeds = radius * np.exp(1j * rng.uniform(-math.pi, math.pi, M))
    return InterferometerSpec(M, elements, seeds, probe, float(rng.uniform(-math.pi, math.pi)))


def random_detector(rng: np.random.Generator, mode_count: int):
    kind = rng.integers(3)
    if kind == 0:
        return Intensity(int(rng.integers(mode_count)))
    if kind == 1:
        j, k = (int(x) for x in rng.choice(mode_count, 2, replace=False))
        return Difference(j, k)
    return Sum(tuple(range(mode_count)))


def _timed(fn):
    def run(*args, **kwargs) -> CheckResult:
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        return CheckResult(res.name, res.passed, res.detail, time.perf_counter() - t0)

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def check_symplectic(n: int = 1000, seed: int = 1, tol: float = 1e-10) -> CheckResult:
    """Both identities on random element compositions (gains up to 1)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        M = int(rng.integers(2, 5))
        parts = [build_element(random_element(rng, M), M) for _ in range(int(rng.integers(1, 9)))]
        t = compose_chain(parts)
        worst = max(worst, *symplectic_residuals(t.U, t.V))
    return CheckResult("symplectic", worst <= tol, f"{n} compositions, worst residual {worst:.2e} (tol {tol:g})")


MANDEL_GRID_R = (0.1, 0.5, 1.0, 2.0, 3.0)
MANDEL_GRID_BETA = (0.0, 1.0, 10.0, 1000.0)


@_timed
def check_closed_form(tol: float = 1e-9) -> CheckResult:
    """Subtraction detection with a b seed against the closed form."""
    worst = 0.0
    for r1 in MANDEL_GRID_R:
        for r2 in MANDEL_GRID_R:
            for beta in MANDEL_GRID_BETA:
                v = sensitivity(mandel_preset(r1, r2, seeds=(0, beta, 0)), Difference(1, 2)).phi_min_sq
                ref = analytic.mandel_closed_form(r1, r2, beta)
                worst = max(worst, abs(v - ref) / ref)
    n = len(MANDEL_GRID_R) ** 2 * len(MANDEL_GRID_BETA)
    return CheckResult("closed-form", worst <= tol, f"{n} points, worst relative error {worst:.2e}")


@_timed
def check_high_gain(tol: float = 0.01) -> CheckResult:
    v = sensitivity(mandel_preset(5.0, 5.0, seeds=(0, 10.0, 0)), Difference(1, 2)).phi_min_sq
    ref = analytic.mandel_high_gain_limit(5.0, 10.0)
    rel = abs(v - ref) / ref
    return CheckResult("high-gain", rel <= tol, f"r=5, beta=10: {v:.6e} vs {ref:.6e} (rel {rel:.2e})")


def _intensity_stats(spec: InterferometerSpec):
    from iclab.gaussian import GaussianMoments, propagate

    st = propagate(GaussianMoments.coherent(spec.seeds), spec.transform())
    means = np.abs(st.d) ** 2 + st.N.diagonal().real
    return means, kernels.intensity_covariance(st.d, st.N, st.A)


@_timed
def check_oracle(n: int = 8, seed: int = 2, cutoff: int = 25, tol: float = 1e-8) -> CheckResult:
    """Intensity means and covariances against the truncated Fock simulator."""
    from iclab.fock import fock_moments, run_spec

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        spec = random_spec(rng, r_max=0.3, seed_max=1.0, mode_count=3, n_elements=4)
        means, cov = _intensity_stats(spec)
        fm = fock_moments(run_spec(spec, cutoff))
        worst = max(worst, float(np.abs(means - fm.n_mean).max()), float(np.abs(cov - fm.n_cov).max()))
    return CheckResult("oracle", worst <= tol, f"{n} configs at cutoff {cutoff}, worst deviation {worst:.2e}")


def fd_derivative(spec: InterferometerSpec, op, h: float = 1e-2) -> float:
    """Fourth-order central difference of the mean in the working point."""
    f = [evaluate(spec.at(spec.working_point + k * h), op)[0] for k in (-2, -1, 1, 2)]
    return (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)


@_timed
def check_derivative(n: int = 100, seed: int = 3, tol: float = 1e-6) -> CheckResult:
    """Analytic phase derivative against finite differences.

    Draws with ``|d<O>/dphi| < 1e-3 |<O>|`` are redrawn: there the relative
    error of any difference quotient is dominated by cancellation.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < n:
        spec = random_spec(rng)
        op = random_detector(rng, spec.mode_count)
        mean, _, der = evaluate(spec, op)
        if abs(der) < 1e-3 * max(abs(mean), 1e-12):
            continue
        worst = max(worst, abs(fd_derivative(spec, op) - der) / abs(der))
        done += 1
    return CheckResult("derivative", worst <= tol, f"{n} specs, worst relative error {worst:.2e}")


@_timed
def check_spdc_frame(tol: float = 1e-9) -> CheckResult:
    """Displaced-frame single-pair state against a plain Fock-space build."""
    from iclab.spdc import build_pre_bs_state, fock_cross_check, spdc_moments

    worst = 0.0
    for beta in (0.0, 0.3, 0.7 - 0.4j, 1.0):
        for phi in (-2.0, 0.3, 1.9):
            for op in (Intensity(1), Intensity(2), Difference(1, 2)):
                a = spdc_moments(build_pre_bs_state(beta, phi), op)
                b = fock_cross_check(beta, phi, op, cutoff=18)
                worst = max(worst, max(abs(x - y) for x, y in zip(a, b)))
    return CheckResult("spdc-frame", worst <= tol, f"36 points, worst deviation {worst:.2e}")


@_timed
def check_backends(n: int = 50, seed: int = 4, tol: float = 1e-10) -> CheckResult:
    """Compiled and numpy kernels give the same numbers."""
    backends = kernels.available_backends()
    if len(backends) < 2:
        return CheckResult("backends", True, "only the numpy backend is built; nothing to compare")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        spec = random_spec(rng)
        op = random_detector(rng, spec.mode_count)
        M = spec.mode_count
        Us, Vs = spec.stacks()
        dU, dV = phase_derivative(spec.probe, M)
        args = (
            Us, Vs, spec.probe_index, dU, dV, np.asarray(spec.seeds, dtype=complex),
            np.zeros((M, M), complex), np.zeros((M, M), complex), detection_weights(op, M),
        )
        a = np.array(backends["python"].evaluate(*args))
        b = np.array(backends["cython"].evaluate(*args))
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
    return CheckResult("backends", worst <= tol, f"{n} specs, worst relative deviation {worst:.2e}")


SUITES = {
    "symplectic": check_symplectic,
    "closed-form": check_closed_form,
    "high-gain": check_high_gain,
    "oracle": check_oracle,
    "derivative": check_derivative,
    "spdc-frame": check_spdc_frame,
    "backends": check_backends,
}


def run_all() -> list[CheckResult]:
    return [fn() for fn in SUITES.values()]
