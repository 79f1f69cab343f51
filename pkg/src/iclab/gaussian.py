"""Bogoliubov transforms and Gaussian moments of coherently seeded states.

A transform on ``M`` modes is held as the pair ``(U, V)`` with

    a'_j = sum_k U[j, k] a_k + V[j, k] a_k^dagger.

The interleaved ``2M x 2M`` form acting on ``(a_1, a_1^dag, a_2, a_2^dag, ...)``
is supported for import/export only.

A state is held as its displacement ``d = <a>`` and the central correlations
``N[j, k] = <da_j^dag da_k>`` and ``A[j, k] = <da_j da_k>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from iclab import kernels

#: construction-time tolerance on the symplectic identities, relative to
#: the squared magnitude of the transform (round-off grows like |U|^2)
SYMPLECTIC_TOL = 1e-10


class SymplecticError(ValueError):
    """A (U, V) pair does not preserve the bosonic commutation relations."""


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


def symplectic_residuals(U, V):
    """Largest entry of ``U U^dag - V V^dag - I`` and of ``U V^T - V U^T``."""
    M = U.shape[0]
    r1 = np.abs(U @ U.conj().T - V @ V.conj().T - np.eye(M)).max()
    r2 = np.abs(U @ V.T - V @ U.T).max()
    return float(r1), float(r2)


@dataclass(frozen=True, eq=False)
class BogoliubovTransform:
    """Linear input-output map of ``M`` bosonic modes."""

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U = _frozen(self.U)
        V = _frozen(self.V)
        if U.ndim != 2 or U.shape[0] != U.shape[1] or V.shape != U.shape:
            raise ValueError(f"U and V must be equal square matrices, got {U.shape} and {V.shape}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)
        r1, r2 = symplectic_residuals(U, V)
        tol = SYMPLECTIC_TOL * max(1.0, float(np.abs(U).max()) ** 2)
        if r1 > tol:
            raise SymplecticError(f"U U^dag - V V^dag != I (max deviation {r1:.3e})")
        if r2 > tol:
            raise SymplecticError(f"U V^T - V U^T != 0 (max deviation {r2:.3e})")

    @property
    def mode_count(self) -> int:
        return self.U.shape[0]

    @classmethod
    def identity(cls, mode_count: int) -> "BogoliubovTransform":
        return cls(np.eye(mode_count), np.zeros((mode_count, mode_count)))

    def __matmul__(self, other: "BogoliubovTransform") -> "BogoliubovTransform":
        return compose(self, other)

    def allclose(self, other: "BogoliubovTransform", atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.U, other.U, rtol=0, atol=atol)
            and np.allclose(self.V, other.V, rtol=0, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class GaussianMoments:
    """Displacement and central second moments of a Gaussian state."""

    d: np.ndarray
    N: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        d = _frozen(self.d)
        N = _frozen(self.N)
        A = _frozen(self.A)
        M = d.shape[0]
        if d.ndim != 1 or N.shape != (M, M) or A.shape != (M, M):
            raise ValueError(f"inconsistent moment shapes {d.shape}, {N.shape}, {A.shape}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "A", A)

    @property
    def mode_count(self) -> int:
        return self.d.shape[0]

    @classmethod
    def vacuum(cls, mode_count: int) -> "GaussianMoments":
        return cls.coherent(np.zeros(mode_count))

    @classmethod
    def coherent(cls, seeds) -> "GaussianMoments":
        """Product of coherent states with the given amplitudes."""
        d = np.asarray(seeds, dtype=complex)
        M = d.shape[0]
        return cls(d, np.zeros((M, M)), np.zeros((M, M)))

    def check(self, tol: float = 1e-12) -> None:
        """Raise ``ValueError`` if hermiticity, symmetry or diag(N) >= 0 fail."""
        if np.abs(self.N - self.N.conj().T).max() > tol:
            raise ValueError("N is not Hermitian")
        if np.abs(self.A - self.A.T).max() > tol:
            raise ValueError("A is not symmetric")
        if self.N.diagonal().real.min(initial=0.0) < -tol:
            raise ValueError("N has a negative diagonal entry")


def compose(second: BogoliubovTransform, first: BogoliubovTransform) -> BogoliubovTransform:
    """Transform that applies ``first`` and then ``second``."""
    if second.mode_count != first.mode_count:
        raise ValueError(
            f"mode count mismatch: {second.mode_count} vs {first.mode_count}"
        )
    U, V = kernels.compose(second.U, second.V, first.U, first.V)
    return BogoliubovTransform(U, V)


def compose_chain(transforms) -> BogoliubovTransform:
    """Compose transforms listed in application order (first element acts first)."""
    transforms = list(transforms)
    if not transforms:
        raise ValueError("empty chain")
    M = transforms[0].mode_count
    if any(t.mode_count != M for t in transforms):
        raise ValueError("mode count mismatch in chain")
    U, V = kernels.chain(
        np.stack([t.U for t in transforms]), np.stack([t.V for t in transforms])
    )
    return BogoliubovTransform(U, V)


def propagate(state: GaussianMoments, t: BogoliubovTransform) -> GaussianMoments:
    """Moments of the output state when ``state`` is sent through ``t``."""
    if state.mode_count != t.mode_count:
        raise ValueError(
            f"state has {state.mode_count} modes, transform has {t.mode_count}"
        )
    d, N, A = kernels.propagate(t.U, t.V, state.d, state.N, state.A)
    return GaussianMoments(d, N, A)


def total_photons(state: GaussianMoments) -> float:
    return float(np.sum(np.abs(state.d) ** 2) + np.sum(state.N.diagonal().real))


# -- interleaved (a, a^dag, b, b^dag, ...) representation ----------------------


def to_interleaved(t: BogoliubovTransform) -> np.ndarray:
    M = t.mode_count
    m = np.zeros((2 * M, 2 * M), dtype=complex)
    m[0::2, 0::2] = t.U
    m[0::2, 1::2] = t.V
    m[1::2, 0::2] = t.V.conj()
    m[1::2, 1::2] = t.U.conj()
    return m


def from_interleaved(m) -> BogoliubovTransform:
    """Read ``(U, V)`` from the annihilation rows of an interleaved matrix.

    The creation rows must mirror the annihilation rows (conjugate, with the
    column pairs swapped); the result is checked for symplecticity.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ValueError(f"interleaved matrix must be square of even size, got {m.shape}")
    U = m[0::2, 0::2]
    V = m[0::2, 1::2]
    dev = max(
        np.abs(m[1::2, 0::2] - V.conj()).max(), np.abs(m[1::2, 1::2] - U.conj()).max()
    )
    if dev > SYMPLECTIC_TOL:
        raise SymplecticError(
            f"creation rows are not the conjugate mirror of annihilation rows (max deviation {dev:.3e})"
        )
    return BogoliubovTransform(U, V)


def interleaved_to_json(m) -> str:
    """Nested lists of ``[re, im]`` pairs."""
    m = np.asarray(m, dtype=complex)
    return json.dumps([[[z.real, z.imag] for z in row] for row in m])


def interleaved_from_json(text: str) -> np.ndarray:
    rows = json.loads(text)
    try:
        return np.array([[complex(re, im) for re, im in row] for row in rows])
    except (TypeError, ValueError) as exc:
        raise ValueError("expected nested arrays of [re, im] pairs") from exc
