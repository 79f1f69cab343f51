"""Pure numpy versions of the hot kernels.

Every function here has a twin of the same name and signature in
``_ckernels.pyx``. Arrays are complex128, C-contiguous, and the mode count
is taken from their shape.
"""

import numpy as np


def compose(U2, V2, U1, V1):
    """Return ``(U, V)`` for applying ``(U1, V1)`` first, then ``(U2, V2)``."""
    return U2 @ U1 + V2 @ V1.conj(), U2 @ V1 + V2 @ U1.conj()


def chain(Us, Vs):
    """Compose a stack of transforms, element 0 applied first."""
    M = Us.shape[1]
    U = np.eye(M, dtype=complex)
    V = np.zeros((M, M), dtype=complex)
    for Ue, Ve in zip(Us, Vs):
        U, V = compose(Ue, Ve, U, V)
    return U, V


def chain_derivative(Us, Vs, probe, dUp, dVp):
    """Compose the chain and its derivative w.r.t. a real parameter of one element.

    The derivative chain is the same product with element ``probe`` replaced
    by ``(dUp, dVp)``; composition is real-linear in each factor.
    """
    M = Us.shape[1]
    U = np.eye(M, dtype=complex)
    V = np.zeros((M, M), dtype=complex)
    dU = np.zeros((M, M), dtype=complex)
    dV = np.zeros((M, M), dtype=complex)
    for n, (Ue, Ve) in enumerate(zip(Us, Vs)):
        if n == probe:
            dU, dV = compose(dUp, dVp, U, V)
        else:
            dU, dV = compose(Ue, Ve, dU, dV)
        U, V = compose(Ue, Ve, U, V)
    return U, V, dU, dV


def propagate(U, V, d, N, A):
    M = U.shape[0]
    K = np.eye(M) + N.T
    Uc, Vc = U.conj(), V.conj()
    d2 = U @ d + V @ d.conj()
    N2 = Uc @ N @ U.T + Uc @ A.conj() @ V.T + Vc @ A @ U.T + Vc @ K @ V.T
    A2 = U @ A @ U.T + U @ K @ V.T + V @ N @ U.T + V @ A.conj() @ V.T
    return d2, N2, A2


def intensity_covariance(d, N, A):
    """Matrix of Cov(I_j, I_k) for a displaced Gaussian state (Wick expansion)."""
    dc = d.conj()
    C = (
        2.0 * np.real(np.outer(dc, d) * N.conj())
        + 2.0 * np.real(np.outer(dc, dc) * A)
        + np.abs(N) ** 2
        + np.abs(A) ** 2
    )
    C[np.diag_indices_from(C)] += np.abs(d) ** 2 + N.diagonal().real
    return C


def evaluate(Us, Vs, probe, dUp, dVp, d, N, A, w):
    """Mean, variance and probe derivative of the detection ``sum_k w_k I_k``.

    Returns ``(mean, variance, derivative)`` as floats.
    """
    U, V, dU, dV = chain_derivative(Us, Vs, probe, dUp, dVp)
    d2, N2, A2 = propagate(U, V, d, N, A)
    mean = float(w @ (np.abs(d2) ** 2 + N2.diagonal().real))
    var = float(w @ intensity_covariance(d2, N2, A2) @ w)

    M = U.shape[0]
    K = np.eye(M) + N.T
    dd = dU @ d + dV @ d.conj()
    # only diag(dN') enters the mean; N' is Hermitian in (U, V) so the
    # product rule gives twice the real part of one half.
    Uc, Vc, dUc, dVc = U.conj(), V.conj(), dU.conj(), dV.conj()
    dNdiag = 2.0 * np.real(
        np.einsum("kl,lm,km->k", dUc, N, U)
        + np.einsum("kl,lm,km->k", dUc, A.conj(), V)
        + np.einsum("kl,lm,km->k", dVc, A, U)
        + np.einsum("kl,lm,km->k", dVc, K, V)
    )
    deriv = float(w @ (2.0 * np.real(d2.conj() * dd) + dNdiag))
    return mean, var, deriv
