"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Setting ``ICLAB_PURE_PYTHON=1`` forces the numpy
path.
"""

import os

from iclab import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("ICLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from iclab import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

compose = _impl.compose
chain = _impl.chain
chain_derivative = _impl.chain_derivative
propagate = _impl.propagate
intensity_covariance = _impl.intensity_covariance
evaluate = _impl.evaluate


def available_backends():
    """Map of backend name to kernel module, for benchmarks and cross-checks."""
    out = {"python": _pykernels}
    try:
        from iclab import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
