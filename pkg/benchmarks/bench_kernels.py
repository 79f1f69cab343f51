"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Times one full sensitivity evaluation (chain, derivative chain, moment
propagation, intensity covariance) on the three-mode seeded setup, plus a
250-point sweep through the public API.
"""

import argparse
import time

import numpy as np

from iclab import kernels
from iclab.elements import mandel_preset, phase_derivative
from iclab.measurement import Difference, detection_weights


def kernel_args(r1=1.0, r2=0.7, beta=1000.0):
    spec = mandel_preset(r1, r2, phi=0.3, seeds=(0, beta, 0))
    Us, Vs = spec.stacks()
    dU, dV = phase_derivative(spec.probe, 3)
    z = np.zeros((3, 3), dtype=complex)
    w = detection_weights(Difference(1, 2), 3)
    return (Us, Vs, spec.probe_index, dU, dV, np.asarray(spec.seeds, dtype=complex), z, z, w)


def per_call(fn, args, repeat):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20000)
    args = ap.parse_args()

    backends = kernels.available_backends()
    call = kernel_args()
    ref = None
    print(f"{'backend':<8} {'evaluate':>12} {'covariance':>12}")
    for name, mod in backends.items():
        t_eval = per_call(mod.evaluate, call, args.repeat)
        st = (call[5], np.eye(3, dtype=complex) * 0.3, np.zeros((3, 3), dtype=complex))
        t_cov = per_call(mod.intensity_covariance, st, args.repeat)
        out = np.array(mod.evaluate(*call))
        if ref is None:
            ref = out
        dev = float(np.max(np.abs(out - ref) / np.abs(ref)))
        print(f"{name:<8} {t_eval * 1e6:>10.2f}us {t_cov * 1e6:>10.2f}us   max rel dev {dev:.1e}")
    if len(backends) == 1:
        print("compiled extension not built; only the numpy backend is available")

    from iclab import explore

    cfg = explore.SweepConfig(
        mandel_preset(1.0, 0.5, seeds=(0, 1000, 0)),
        (explore.Axis("r2", 0.01, 3.0, 250),),
        Difference(1, 2),
    )
    t0 = time.perf_counter()
    explore.sweep(cfg, threads=1)
    print(f"250-point sweep via the public API ({kernels.BACKEND}): {time.perf_counter() - t0:.3f}s")


if __name__ == "__main__":
    main()
