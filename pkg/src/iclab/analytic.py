"""Closed-form phase sensitivities used as regression anchors and reference curves.

All functions return the minimum detectable phase squared (rad^2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field


class DomainError(ValueError):
    """Argument outside the domain where the closed form is defined."""


def nl_photons(r: float) -> float:
    """Mean photon number produced by one two-mode squeezer from vacuum."""
    return 2.0 * math.sinh(r) ** 2


def fair_budget(beta: float, r1: float, r2: float = 0.0) -> float:
    """Coherent photons plus the light needed to make both squeezings."""
    return abs(beta) ** 2 + nl_photons(r1) + nl_photons(r2)


def shot_noise(n_total: float) -> float:
    if not n_total > 0:
        raise DomainError(f"photon number must be positive, got {n_total}")
    return 1.0 / n_total


def yurke_unseeded(r: float) -> float:
    """SU(1,1) interferometer with vacuum inputs: ``1 / (N (N + 2))``."""
    if not r > 0:
        raise DomainError(f"gain must be positive, got {r}")
    n = nl_photons(r)
    return 1.0 / (n * (n + 2.0))


def yurke_boosted(r: float, n_coh: float) -> float:
    """Coherently seeded SU(1,1): ``1 / (N_nl N_coh (N_nl + 2))``."""
    if not r > 0:
        raise DomainError(f"gain must be positive, got {r}")
    if not n_coh > 0:
        raise DomainError(f"coherent photon number must be positive, got {n_coh}")
    n = nl_photons(r)
    return 1.0 / (n * n_coh * (n + 2.0))


def mandel_closed_form(r1: float, r2: float, beta: float) -> float:
    """Seed ``beta`` in mode b, intensity difference of b and c, all phases zero.

    Singular at zero gain in either crystal.
    """
    if not (r1 > 0 and r2 > 0):
        raise DomainError(f"closed form is singular at zero gain (r1={r1}, r2={r2})")
    b2 = beta * beta
    coth1 = 1.0 / math.tanh(r1)
    coth2 = 1.0 / math.tanh(r2)
    csch1 = 1.0 / math.sinh(r1)
    sech1 = 1.0 / math.cosh(r1)
    bracket = (
        (1 + b2) * coth1**2
        + coth2**2 * (b2 * csch1**2 + sech1**2)
        + (1 + b2) * (math.tanh(r1) ** 2 - 2)
    )
    return bracket / (4 * (1 + b2) ** 2)


def mandel_high_gain_limit(r: float, beta: float) -> float:
    """Large-gain asymptote of :func:`mandel_closed_form` at ``r1 = r2 = r``.

    Expanding ``coth^2 r ~ 1 + 4 exp(-2r)`` and ``sech^2 r ~ 4 exp(-2r)`` in
    the closed form gives ``exp(-2r) / (1 + beta^2)``; the often-quoted
    ``exp(-2r) / 4(1 + beta^2)`` is off by the factor of 4.
    """
    if not r > 0:
        raise DomainError(f"gain must be positive, got {r}")
    return math.exp(-2.0 * r) / (1.0 + beta * beta)


class CurveKind(enum.Enum):
    SHOT_NOISE = "shot-noise"
    YURKE_UNSEEDED = "yurke-unseeded"
    YURKE_BOOSTED = "yurke-boosted"
    MANDEL_CLOSED_FORM = "mandel-closed-form"
    MANDEL_HIGH_GAIN = "mandel-high-gain"


@dataclass(frozen=True)
class ReferenceCurve:
    kind: CurveKind
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.parameters.items():
            if v < 0 and k != "beta":
                raise DomainError(f"parameter {k} must be nonnegative, got {v}")

    def value(self) -> float:
        p = self.parameters
        if self.kind is CurveKind.SHOT_NOISE:
            return shot_noise(p["N_coh"])
        if self.kind is CurveKind.YURKE_UNSEEDED:
            return yurke_unseeded(p["r"])
        if self.kind is CurveKind.YURKE_BOOSTED:
            return yurke_boosted(p["r"], p["N_coh"])
        if self.kind is CurveKind.MANDEL_CLOSED_FORM:
            return mandel_closed_form(p["r1"], p["r2"], p["beta"])
        return mandel_high_gain_limit(p["r"], p["beta"])
