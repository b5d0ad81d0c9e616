"""Batched small-matrix exponentials and norms.

``expm`` is the degree-13 Pade scaling-and-squaring algorithm (Higham 2005)
vectorized over leading batch axes; the Pade degree is fixed at 13 for every
input so results do not depend on a norm-driven degree switch. Hermitian
inputs can instead go through ``expm_hermitian`` (eigendecomposition).
"""
from __future__ import annotations

import numpy as np

_B13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm(M: np.ndarray) -> np.ndarray:
    """exp of every ``(m, m)`` matrix in a stack of shape ``(..., m, m)``."""
    M = np.asarray(M, dtype=np.complex128)
    m = M.shape[-1]
    if m == 1:
        return np.exp(M)
    norm1 = np.max(np.sum(np.abs(M), axis=-2), axis=-1)
    with np.errstate(divide="ignore"):
        s = np.where(norm1 > _THETA13, np.ceil(np.log2(norm1 / _THETA13)), 0.0)
    s = s.astype(int)
    A = M / (2.0 ** s)[..., None, None]
    b = _B13
    I = np.broadcast_to(np.eye(m, dtype=np.complex128), A.shape)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I
    R = np.linalg.solve(V - U, V + U)
    smax = int(s.max()) if s.size else 0
    for k in range(smax):
        sq = s > k
        if sq.ndim == 0:
            R = R @ R
        else:
            R[sq] = R[sq] @ R[sq]
    return R


def expm_hermitian(H: np.ndarray, z: complex) -> np.ndarray:
    """``exp(z * H)`` for a stack of Hermitian matrices via ``eigh``."""
    H = np.asarray(H, dtype=np.complex128)
    if H.shape[-1] == 1:
        return np.exp(z * H)
    lam, U = np.linalg.eigh(H)
    return (U * np.exp(z * lam)[..., None, :]) @ np.conj(np.swapaxes(U, -1, -2))


def hermitian_defect(M: np.ndarray) -> float:
    """max-entry norm of ``M - M^dagger`` over a stack."""
    M = np.asarray(M)
    return float(np.max(np.abs(M - np.conj(np.swapaxes(M, -1, -2))), initial=0.0))


def spectral_norms(M: np.ndarray) -> np.ndarray:
    """Operator 2-norm of every matrix in a stack."""
    M = np.asarray(M, dtype=np.complex128)
    if M.shape[-1] == 1:
        return np.abs(M[..., 0, 0])
    return np.linalg.norm(M, ord=2, axis=(-2, -1))
