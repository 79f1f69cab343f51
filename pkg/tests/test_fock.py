import math

import numpy as np
import pytest

from iclab.elements import BeamSplitter, InterferometerSpec, PhaseShift, TwoModeSqueezer, mandel_preset
from iclab.fock import (
    FockVector,
    TruncationError,
    apply_element,
    coherent_input,
    fock_moments,
    lower,
    raise_,
    run_spec,
)
from iclab.gaussian import GaussianMoments, propagate
from iclab.validation import random_spec


def gaussian_moments(spec):
    return propagate(GaussianMoments.coherent(spec.seeds), spec.transform())


class TestStates:
    def test_coherent_amplitudes(self):
        psi = coherent_input([0.5], 20).amplitudes
        n = np.arange(21)
        expected = np.exp(-0.125) * 0.5**n / np.sqrt([math.factorial(k) for k in n])
        assert psi == pytest.approx(expected, rel=1e-12)

    def test_coherent_leak_detected(self):
        with pytest.raises(TruncationError) as info:
            coherent_input([3.0], 5)
        assert info.value.leak > 1e-2

    def test_ladder_commutator(self):
        rng = np.random.default_rng(0)
        psi = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        psi[-1, :] = psi[-2, :] = 0  # keep away from the cutoff
        comm = lower(raise_(psi, 0), 0) - raise_(lower(psi, 0), 0)
        assert comm == pytest.approx(psi)


class TestElements:
    @pytest.mark.parametrize(
        "element",
        [TwoModeSqueezer(0, 1, 0.2, 0.4), BeamSplitter(0, 2, 0.7), PhaseShift(1, 1.1)],
    )
    def test_norm_preserved(self, element):
        st = coherent_input([0.4, 0.3j, -0.2], 16)
        out = apply_element(st, element)
        assert out.norm() == pytest.approx(st.norm(), abs=1e-10)

    def test_zero_gain_is_identity(self):
        st = coherent_input([0.4, 0.1], 10)
        assert apply_element(st, TwoModeSqueezer(0, 1, 0.0)) is st

    def test_leak_guard(self):
        st = FockVector(coherent_input([0.0, 0.0], 4).amplitudes, 4)
        with pytest.raises(TruncationError, match="raise the cutoff"):
            apply_element(st, TwoModeSqueezer(0, 1, 1.5))

    def test_squeezed_vacuum_photon_number(self):
        spec = InterferometerSpec(2, (TwoModeSqueezer(0, 1, 0.3), PhaseShift(0)), (0, 0), 1)
        m = fock_moments(run_spec(spec, 30))
        assert m.n_mean == pytest.approx([math.sinh(0.3) ** 2] * 2, rel=1e-10)


class TestAgainstGaussianEngine:
    @pytest.mark.parametrize("seed", range(6))
    def test_moments(self, seed):
        spec = random_spec(np.random.default_rng(seed), r_max=0.3, seed_max=1.0, mode_count=3, n_elements=4)
        g = gaussian_moments(spec)
        d, N, A = fock_moments(run_spec(spec, 22)).central()
        assert d == pytest.approx(g.d, abs=1e-9)
        assert N == pytest.approx(g.N, abs=1e-9)
        assert A == pytest.approx(g.A, abs=1e-9)

    def test_mandel_intensities(self):
        from iclab import kernels

        spec = mandel_preset(0.25, 0.2, phi=0.6, seeds=(0.3, 0.8, -0.2j))
        g = gaussian_moments(spec)
        fm = fock_moments(run_spec(spec, 25))
        assert fm.n_mean == pytest.approx(np.abs(g.d) ** 2 + g.N.diagonal().real, abs=1e-10)
        assert fm.n_cov == pytest.approx(kernels.intensity_covariance(g.d, g.N, g.A), abs=1e-10)
