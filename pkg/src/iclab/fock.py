"""Brute-force truncated Fock-space simulator, used as ground truth.

States are dense tensors of shape ``(cutoff + 1,) * mode_count``. Two-mode
elements are applied as the exponential of their sparse generator on the
truncated pair space (Al-Mohy & Higham action of the exponential), so they
are unitary there; the truncation error is tracked as the population that
reaches the top Fock level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from iclab.elements import (
    BeamSplitter,
    Element,
    InterferometerSpec,
    PhaseShift,
    TwoModeSqueezer,
)

LEAK_TOL = 1e-8
RELIABLE_LEAK = 1e-6


class TruncationError(RuntimeError):
    """Too much population lost to (or piled up at) the Fock cutoff."""

    def __init__(self, message: str, leak: float):
        self.leak = leak
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class FockVector:
    amplitudes: np.ndarray
    cutoff: int
    leak: float = 0.0

    @property
    def mode_count(self) -> int:
        return self.amplitudes.ndim

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


def _coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    if alpha == 0:
        c = np.zeros(cutoff + 1, dtype=complex)
        c[0] = 1.0
        return c
    logmag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def coherent_input(seeds, cutoff: int, leak_tol: float = LEAK_TOL) -> FockVector:
    """Product of coherent states truncated at ``cutoff`` photons per mode.

    A safe cutoff is about ``|seed|^2 + 5 |seed| + 10``.
    """
    psi = np.ones((), dtype=complex)
    kept = 1.0
    for s in seeds:
        c = _coherent_amplitudes(complex(s), cutoff)
        kept *= float(np.sum(np.abs(c) ** 2))
        psi = np.multiply.outer(psi, c)
    leak = max(0.0, 1.0 - kept)
    if leak > leak_tol:
        raise TruncationError(
            f"coherent input leaks {leak:.3e} beyond cutoff {cutoff} (tolerance {leak_tol:.1e})",
            leak,
        )
    return FockVector(psi, cutoff, leak)


def ladder(cutoff: int):
    """Truncated annihilation operator (sparse)."""
    return sparse.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr")


def _pair_generator(e: Element, cutoff: int):
    """Anti-Hermitian generator on the (i, j) pair space, sparse."""
    a = ladder(cutoff)
    eye = sparse.identity(cutoff + 1, format="csr")
    ai, aj = sparse.kron(a, eye, format="csr"), sparse.kron(eye, a, format="csr")
    if isinstance(e, TwoModeSqueezer):
        xi = e.r * np.exp(1j * e.psi)
        g = np.conj(xi) * (ai @ aj)
        return (g - g.conj().T).tocsr()
    h = ai.conj().T @ aj
    return (1j * e.theta * (h + h.conj().T)).tocsr()


def _boundary_population(psi: np.ndarray, modes) -> float:
    p = np.abs(psi) ** 2
    total = 0.0
    for m in modes:
        total += float(np.take(p, -1, axis=m).sum())
    return total


def apply_element(state: FockVector, e: Element, reliable_leak: float = RELIABLE_LEAK) -> FockVector:
    """Apply one element in the Schroedinger picture.

    The unitary is chosen so its Heisenberg action matches the Gaussian
    engine's transform for the same element.
    """
    psi = state.amplitudes
    n = state.cutoff + 1
    if isinstance(e, PhaseShift):
        phase = np.exp(1j * e.phi * np.arange(n))
        shape = [1] * psi.ndim
        shape[e.mode] = n
        return FockVector(psi * phase.reshape(shape), state.cutoff, state.leak)
    if isinstance(e, TwoModeSqueezer) and e.r == 0:
        return state
    i, j = e.i, e.j
    moved = np.moveaxis(psi, [i, j], [0, 1])
    rest = moved.shape[2:]
    out = expm_multiply(_pair_generator(e, state.cutoff), moved.reshape(n * n, -1))
    out = np.moveaxis(out.reshape((n, n) + rest), [0, 1], [i, j])
    leak = state.leak + _boundary_population(out, (i, j))
    if leak > reliable_leak:
        raise TruncationError(
            f"accumulated truncation leakage {leak:.3e} exceeds {reliable_leak:.1e}; "
            f"raise the cutoff ({state.cutoff})",
            leak,
        )
    return FockVector(out, state.cutoff, leak)


def run_spec(spec: InterferometerSpec, cutoff: int) -> FockVector:
    """Send the spec's coherent seeds through all its elements."""
    state = coherent_input(spec.seeds, cutoff)
    for e in spec.elements:
        state = apply_element(state, e)
    return state


def lower(psi: np.ndarray, mode: int) -> np.ndarray:
    """Apply the annihilation operator of ``mode`` to a state tensor."""
    n = psi.shape[mode]
    out = np.zeros_like(psi)
    src = [slice(None)] * psi.ndim
    dst = [slice(None)] * psi.ndim
    src[mode] = slice(1, n)
    dst[mode] = slice(0, n - 1)
    shape = [1] * psi.ndim
    shape[mode] = n - 1
    out[tuple(dst)] = psi[tuple(src)] * np.sqrt(np.arange(1, n)).reshape(shape)
    return out


def raise_(psi: np.ndarray, mode: int) -> np.ndarray:
    """Apply the creation operator of ``mode``; the top level is dropped."""
    n = psi.shape[mode]
    out = np.zeros_like(psi)
    src = [slice(None)] * psi.ndim
    dst = [slice(None)] * psi.ndim
    src[mode] = slice(0, n - 1)
    dst[mode] = slice(1, n)
    shape = [1] * psi.ndim
    shape[mode] = n - 1
    out[tuple(dst)] = psi[tuple(src)] * np.sqrt(np.arange(1, n)).reshape(shape)
    return out


def number(psi: np.ndarray, mode: int) -> np.ndarray:
    n = psi.shape[mode]
    shape = [1] * psi.ndim
    shape[mode] = n
    return psi * np.arange(n).reshape(shape)


@dataclass(frozen=True)
class FockMoments:
    """Raw moments of a Fock state.

    ``d[j] = <a_j>``, ``adag_a[j, k] = <a_j^dag a_k>``, ``a_a[j, k] = <a_j a_k>``,
    ``n_mean[j] = <n_j>``, ``n_cov[j, k] = Cov(n_j, n_k)``.
    """

    d: np.ndarray
    adag_a: np.ndarray
    a_a: np.ndarray
    n_mean: np.ndarray
    n_cov: np.ndarray

    def central(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(d, N, A)`` in the Gaussian engine's central convention."""
        d = self.d
        return d, self.adag_a - np.outer(d.conj(), d), self.a_a - np.outer(d, d)


def fock_moments(state: FockVector) -> FockMoments:
    psi = state.amplitudes
    M = psi.ndim
    z = state.norm()

    def ev(bra, ket):
        return np.vdot(bra, ket) / z

    low = [lower(psi, m) for m in range(M)]
    num = [number(psi, m) for m in range(M)]
    d = np.array([ev(psi, low[m]) for m in range(M)])
    adag_a = np.array([[ev(low[j], low[k]) for k in range(M)] for j in range(M)])
    a_a = np.array([[ev(psi, lower(low[k], j)) for k in range(M)] for j in range(M)])
    n_mean = np.array([ev(psi, num[m]).real for m in range(M)])
    n_cov = np.array(
        [[ev(num[j], num[k]).real - n_mean[j] * n_mean[k] for k in range(M)] for j in range(M)]
    )
    return FockMoments(d, adag_a, a_a, n_mean, n_cov)
