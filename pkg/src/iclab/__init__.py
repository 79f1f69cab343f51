"""Phase sensitivity of coherently seeded nonlinear interferometers.

Gaussian moment propagation through two-mode squeezers, beam splitters and
phase shifts, with photon-counting statistics from Wick's theorem.
"""

__version__ = "0.1.0"

from iclab.kernels import BACKEND
from iclab.gaussian import (
    BogoliubovTransform,
    GaussianMoments,
    SymplecticError,
    compose,
    compose_chain,
    propagate,
)
from iclab.elements import (
    BeamSplitter,
    ConfigError,
    InterferometerSpec,
    PhaseShift,
    TwoModeSqueezer,
    mandel_preset,
    mzi_preset,
    parse_config,
    parse_spec,
    yurke_preset,
)
from iclab.measurement import (
    Difference,
    InsensitiveWorkingPoint,
    Intensity,
    PrecisionLoss,
    Sum,
    best_working_point,
    sensitivity,
)

__all__ = [
    "BACKEND",
    "BeamSplitter",
    "BogoliubovTransform",
    "ConfigError",
    "Difference",
    "GaussianMoments",
    "InsensitiveWorkingPoint",
    "Intensity",
    "InterferometerSpec",
    "PhaseShift",
    "PrecisionLoss",
    "Sum",
    "SymplecticError",
    "TwoModeSqueezer",
    "best_working_point",
    "compose",
    "compose_chain",
    "mandel_preset",
    "mzi_preset",
    "parse_config",
    "parse_spec",
    "propagate",
    "sensitivity",
    "yurke_preset",
]
