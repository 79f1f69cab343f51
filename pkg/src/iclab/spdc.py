"""Single-pair (SPDC) treatment of the seeded induced-coherence interferometer.

The pre-beam-splitter state is

    |psi> = a^dag (exp(i phi) b^dag + c^dag) |0, beta, 0> / sqrt(2 + |beta|^2).

Mode b is written in the frame displaced by ``beta`` (``b = beta + db``), so
the state only ever holds one quantum per mode and a cutoff of 3 makes every
expectation value below exact, whatever the size of ``beta``. Detection
operators after the final 50:50 splitter are rewritten in pre-splitter modes:
``b_f = (b + i c) / sqrt(2)``, ``c_f = (i b + c) / sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from iclab.fock import lower, raise_
from iclab.measurement import (
    INSENSITIVE_TOL,
    DetectionOperator,
    Difference,
    InsensitiveWorkingPoint,
    Intensity,
    detection_weights,
)

CUTOFF = 3
SQRT2 = math.sqrt(2.0)

#: detectors scanned when looking for the large-seed limit
SCAN_DETECTORS = {"ib": Intensity(1), "ic": Intensity(2), "diff-bc": Difference(1, 2)}


@dataclass(frozen=True, eq=False)
class SpdcState:
    """Normalized pre-splitter state on (a, db, c) and its phi-derivative."""

    beta: complex
    phi: float
    amplitudes: np.ndarray
    d_amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


def build_pre_bs_state(beta: complex, phi: float) -> SpdcState:
    beta = complex(beta)
    n = CUTOFF + 1
    chi = np.zeros((n, n, n), dtype=complex)
    dchi = np.zeros_like(chi)
    z = math.sqrt(2.0 + abs(beta) ** 2)
    ph = np.exp(1j * phi)
    # a^dag exp(i phi) (db^dag + beta^*) |000>  +  a^dag c^dag |000>
    chi[1, 1, 0] = ph / z
    chi[1, 0, 0] = ph * beta.conjugate() / z
    chi[1, 0, 1] = 1.0 / z
    dchi[1, 1, 0] = 1j * chi[1, 1, 0]
    dchi[1, 0, 0] = 1j * chi[1, 0, 0]
    return SpdcState(beta, float(phi), chi, dchi)


def _b_out(psi, beta):
    return (beta * psi + lower(psi, 1) + 1j * lower(psi, 2)) / SQRT2


def _b_out_dag(psi, beta):
    return (np.conj(beta) * psi + raise_(psi, 1) - 1j * raise_(psi, 2)) / SQRT2


def _c_out(psi, beta):
    return (1j * beta * psi + 1j * lower(psi, 1) + lower(psi, 2)) / SQRT2


def _c_out_dag(psi, beta):
    return (-1j * np.conj(beta) * psi - 1j * raise_(psi, 1) + raise_(psi, 2)) / SQRT2


def _apply_detector(psi, beta, w) -> np.ndarray:
    out = np.zeros_like(psi)
    if w[1]:
        out += w[1] * _b_out_dag(_b_out(psi, beta), beta)
    if w[2]:
        out += w[2] * _c_out_dag(_c_out(psi, beta), beta)
    return out


def _weights(op: DetectionOperator) -> np.ndarray:
    w = detection_weights(op, 3)
    if w[0] != 0:
        raise ValueError("the SPDC treatment only detects modes b and c")
    return w


def spdc_moments(state: SpdcState, op: DetectionOperator) -> tuple[float, float, float]:
    """``(mean, variance, d mean / d phi)`` of a post-splitter detector."""
    w = _weights(op)
    psi = state.amplitudes
    o_psi = _apply_detector(psi, state.beta, w)
    mean = float(np.vdot(psi, o_psi).real)
    var = float(np.vdot(o_psi, o_psi).real) - mean**2
    deriv = float(2.0 * np.vdot(state.d_amplitudes, o_psi).real)
    return mean, var, deriv


def spdc_sensitivity(beta: complex, phi0: float, op: DetectionOperator) -> float:
    _, var, der = spdc_moments(build_pre_bs_state(beta, phi0), op)
    if not abs(der) >= INSENSITIVE_TOL:
        raise InsensitiveWorkingPoint(f"d<O>/dphi = {der!r} at phi0 = {phi0!r}")
    return var / der**2


@dataclass(frozen=True)
class SpdcScan:
    """Best working point per detector and the overall winner."""

    beta: complex
    value: float
    detector: str
    phi0: float
    per_detector: dict = field(default_factory=dict)


def spdc_scan(beta: complex, detectors=None, n_phi: int = 720) -> SpdcScan:
    """Minimize over a working-point grid (refined locally) for each detector."""
    from scipy.optimize import minimize_scalar

    detectors = SCAN_DETECTORS if detectors is None else detectors
    grid = np.linspace(-math.pi, math.pi, n_phi, endpoint=False)
    step = grid[1] - grid[0]

    def f(p, op):
        try:
            return spdc_sensitivity(beta, p, op)
        except InsensitiveWorkingPoint:
            return math.inf

    per = {}
    for name, op in detectors.items():
        vals = np.array([f(p, op) for p in grid])
        i = int(np.argmin(vals))
        res = minimize_scalar(
            f, args=(op,), bounds=(grid[i] - step, grid[i] + step), method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < vals[i]:
            per[name] = (float(res.fun), float(res.x))
        else:
            per[name] = (float(vals[i]), float(grid[i]))
    best = min(per, key=lambda k: per[k][0])
    return SpdcScan(beta, per[best][0], best, per[best][1], per)


def fock_cross_check(beta: complex, phi0: float, op: DetectionOperator, cutoff: int = 25):
    """Same quantities computed without the displaced frame.

    Builds the state on a plain truncated Fock space around ``|0, beta, 0>``,
    sends it (and its phi-derivative) through the 50:50 splitter element, and
    measures photon numbers directly. Only sensible for small ``beta``.
    """
    from iclab.elements import BeamSplitter
    from iclab.fock import FockVector, apply_element, coherent_input, number

    w = _weights(op)
    vac = coherent_input((0, beta, 0), cutoff)
    base = vac.amplitudes
    ph = np.exp(1j * phi0)
    tb = raise_(raise_(base, 1), 0)
    tc = raise_(raise_(base, 2), 0)
    psi = ph * tb + tc
    dpsi = 1j * ph * tb
    z = math.sqrt(np.vdot(psi, psi).real)
    bs = BeamSplitter(1, 2)
    out = apply_element(FockVector(psi / z, cutoff), bs).amplitudes
    dout = apply_element(FockVector(dpsi / z, cutoff), bs).amplitudes
    o_out = w[1] * number(out, 1) + w[2] * number(out, 2)
    mean = float(np.vdot(out, o_out).real)
    var = float(np.vdot(o_out, o_out).real) - mean**2
    deriv = float(2.0 * np.vdot(dout, o_out).real)
    return mean, var, deriv
