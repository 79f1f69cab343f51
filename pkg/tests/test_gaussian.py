"""Bogoliubov transforms, composition and moment propagation."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iclab.elements import BeamSplitter, PhaseShift, TwoModeSqueezer, build_element
from iclab.gaussian import (
    BogoliubovTransform,
    GaussianMoments,
    SymplecticError,
    compose,
    compose_chain,
    from_interleaved,
    interleaved_from_json,
    interleaved_to_json,
    propagate,
    symplectic_residuals,
    to_interleaved,
    total_photons,
)

angles = st.floats(-math.pi, math.pi)
gains = st.floats(0.0, 1.5)


@st.composite
def elements(draw, mode_count=3):
    i, j = draw(st.lists(st.integers(0, mode_count - 1), min_size=2, max_size=2, unique=True))
    kind = draw(st.sampled_from(["sq", "bs", "ph"]))
    if kind == "sq":
        return TwoModeSqueezer(i, j, draw(gains), draw(angles))
    if kind == "bs":
        return BeamSplitter(i, j, draw(angles))
    return PhaseShift(i, draw(angles))


chains = st.lists(elements(), min_size=1, max_size=8)


class TestConstruction:
    def test_identity(self):
        t = BogoliubovTransform.identity(3)
        assert t.mode_count == 3
        assert symplectic_residuals(t.U, t.V) == (0.0, 0.0)

    def test_rejects_nonunitary_u(self):
        with pytest.raises(SymplecticError, match="U U\\^dag"):
            BogoliubovTransform(2 * np.eye(2), np.zeros((2, 2)))

    def test_rejects_bad_symmetry(self):
        # U U^dag - V V^dag = I holds but U V^T - V U^T does not
        r = 0.4
        U = np.diag([math.cosh(r), 1.0])
        BogoliubovTransform(U, np.array([[math.sinh(r), 0.0], [0.0, 0.0]]))  # single-mode squeezer
        with pytest.raises(SymplecticError, match="U V\\^T"):
            BogoliubovTransform(U, np.array([[0.0, math.sinh(r)], [0.0, 0.0]]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            BogoliubovTransform(np.eye(2), np.zeros((3, 3)))

    def test_arrays_are_frozen(self):
        t = BogoliubovTransform.identity(2)
        with pytest.raises(ValueError):
            t.U[0, 0] = 2.0

    def test_high_gain_chain_is_accepted(self):
        # round-off in the identities grows like |U|^2 ~ exp(2 r_total)
        t = compose_chain([build_element(TwoModeSqueezer(0, 1, 6.0), 2)] * 2)
        assert abs(t.U[0, 0]) == pytest.approx(math.cosh(12.0), rel=1e-12)


class TestComposition:
    def test_squeezers_add(self):
        s = lambda r: build_element(TwoModeSqueezer(0, 1, r), 2)  # noqa: E731
        assert compose(s(0.3), s(0.5)).allclose(s(0.8))

    def test_anti_phased_squeezers_cancel(self):
        a = build_element(TwoModeSqueezer(0, 1, 0.9, 0.0), 2)
        b = build_element(TwoModeSqueezer(0, 1, 0.9, math.pi), 2)
        assert compose(b, a).allclose(BogoliubovTransform.identity(2), atol=1e-12)

    def test_matmul_is_compose(self):
        a = build_element(BeamSplitter(0, 1, 0.3), 2)
        b = build_element(TwoModeSqueezer(0, 1, 0.2, 1.0), 2)
        assert (b @ a).allclose(compose(b, a))

    def test_mode_mismatch(self):
        with pytest.raises(ValueError):
            compose(BogoliubovTransform.identity(2), BogoliubovTransform.identity(3))

    def test_order_matters(self):
        a = build_element(BeamSplitter(0, 1), 2)
        b = build_element(PhaseShift(0, 0.7), 2)
        assert not compose(b, a).allclose(compose(a, b))

    @given(chains)
    def test_closure(self, els):
        t = compose_chain(build_element(e, 3) for e in els)
        r1, r2 = symplectic_residuals(t.U, t.V)
        assert r1 < 1e-10 and r2 < 1e-10

    @given(chains, chains, chains)
    def test_associative(self, x, y, z):
        a, b, c = (compose_chain(build_element(e, 3) for e in els) for els in (x, y, z))
        lhs, rhs = compose(c, compose(b, a)), compose(compose(c, b), a)
        scale = max(1.0, np.abs(lhs.U).max())
        assert lhs.allclose(rhs, atol=1e-11 * scale**2)


class TestInterleaved:
    @given(chains)
    def test_round_trip(self, els):
        t = compose_chain(build_element(e, 3) for e in els)
        back = from_interleaved(to_interleaved(t))
        assert back.allclose(t, atol=0)

    def test_layout(self):
        t = build_element(TwoModeSqueezer(0, 1, 0.5, 0.2), 2)
        m = to_interleaved(t)
        assert m[0, 3] == pytest.approx(t.V[0, 1])
        assert m[1, 2] == pytest.approx(np.conj(t.V[0, 1]))
        assert m[2, 2] == pytest.approx(t.U[1, 1])

    def test_broken_mirror_rejected(self):
        m = to_interleaved(build_element(BeamSplitter(0, 1), 2)).copy()
        m[1, 1] += 0.1
        with pytest.raises(SymplecticError):
            from_interleaved(m)

    def test_json(self):
        m = to_interleaved(build_element(TwoModeSqueezer(0, 1, 0.5, 0.2), 2))
        assert np.array_equal(interleaved_from_json(interleaved_to_json(m)), m)


class TestPropagation:
    def test_two_mode_squeezed_vacuum(self):
        r = 0.8
        out = propagate(GaussianMoments.vacuum(2), build_element(TwoModeSqueezer(0, 1, r), 2))
        assert out.N[0, 0].real == pytest.approx(math.sinh(r) ** 2, rel=1e-14)
        assert abs(out.A[0, 1]) == pytest.approx(math.sinh(r) * math.cosh(r), rel=1e-14)
        assert total_photons(out) == pytest.approx(2 * math.sinh(r) ** 2, rel=1e-14)

    def test_coherent_through_beam_splitter(self):
        out = propagate(GaussianMoments.coherent([2.0, 0.0]), build_element(BeamSplitter(0, 1), 2))
        assert np.abs(out.d) ** 2 == pytest.approx([2.0, 2.0], rel=1e-14)
        assert np.abs(out.N).max() < 1e-15

    @given(chains, st.lists(st.complex_numbers(max_magnitude=3), min_size=3, max_size=3))
    def test_moments_stay_physical(self, els, seeds):
        out = propagate(GaussianMoments.coherent(seeds), compose_chain(build_element(e, 3) for e in els))
        out.check(tol=1e-9 * max(1.0, np.abs(out.N).max()))

    @given(chains, st.lists(st.complex_numbers(max_magnitude=3), min_size=3, max_size=3))
    def test_passive_chains_conserve_photons(self, els, seeds):
        passive = [e for e in els if not isinstance(e, TwoModeSqueezer)]
        st0 = GaussianMoments.coherent(seeds)
        out = propagate(st0, compose_chain([BogoliubovTransform.identity(3)] + [build_element(e, 3) for e in passive]))
        assert total_photons(out) == pytest.approx(total_photons(st0), rel=1e-12, abs=1e-12)

    def test_propagate_in_steps_equals_whole(self):
        els = [TwoModeSqueezer(0, 1, 0.7, 0.1), PhaseShift(0, 0.4), BeamSplitter(1, 2, 0.3)]
        st0 = GaussianMoments.coherent([0.3, 1 + 1j, -0.5])
        step = st0
        for e in els:
            step = propagate(step, build_element(e, 3))
        whole = propagate(st0, compose_chain(build_element(e, 3) for e in els))
        for x, y in ((step.d, whole.d), (step.N, whole.N), (step.A, whole.A)):
            assert np.allclose(x, y, atol=1e-13)
