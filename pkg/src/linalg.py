import cmath
import dataclasses
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from src.constants import TOL
from src.error_handler import DomainError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
RealMatrix = npt.NDArray[np.float64]

IDENTITY_2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclasses.dataclass(frozen=True)
class EigenSystem:
    eigenvalues: RealMatrix
    eigenvectors: ComplexMatrix

    def __iter__(self):
        return iter((self.eigenvalues, self.eigenvectors))

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def residuals(self, m: ComplexMatrix) -> RealMatrix:
        v = self.eigenvectors
        return np.max(np.abs(m @ v - v * self.eigenvalues), axis=0)


@dataclasses.dataclass(frozen=True)
class Sym3Inverse:
    inverse: Optional[RealMatrix]
    det: float
    singular: bool


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return m.conj().T


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return a @ b - b @ a


def kron(*factors: ComplexMatrix) -> ComplexMatrix:
    result = np.array([[1.0 + 0.0j]])
    for factor in factors:
        result = np.kron(result, factor)
    return result


def projector(vector: Sequence[complex]) -> ComplexMatrix:
    v = np.asarray(vector, dtype=np.complex128)
    return np.outer(v, v.conj())


def hermitize(m: ComplexMatrix) -> ComplexMatrix:
    return (m + dagger(m)) / 2


def hermiticity_violation(m: ComplexMatrix) -> Tuple[float, Tuple[int, int]]:
    diff = np.abs(m - dagger(m))
    index = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return float(diff[index]), (int(index[0]), int(index[1]))


def assert_hermitian(m: ComplexMatrix, tol: float = TOL.hermitian) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"Expected a square matrix, got shape {m.shape}")
    violation, (i, j) = hermiticity_violation(m)
    if violation > tol:
        raise DomainError(
            f"Matrix is not Hermitian: |M[{i},{j}] - conj(M[{j},{i}])| = "
            f"{violation:.3e} exceeds {tol:.0e}"
        )


def _off_diagonal_norm(a: ComplexMatrix) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def _rotation(app: float, aqq: float, apq: complex) -> ComplexMatrix:
    r = abs(apq)
    phase = cmath.exp(-1j * cmath.phase(apq))
    tau = (aqq - app) / (2 * r)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1 + tau * tau))
    c = 1 / math.sqrt(1 + t * t)
    s = t * c
    return np.array([[c, s], [-s * phase, c * phase]], dtype=np.complex128)


def _orthonormalize_clusters(
    eigenvalues: RealMatrix, vectors: ComplexMatrix
) -> ComplexMatrix:
    vectors = vectors.copy()
    n = len(eigenvalues)
    start = 0
    while start < n:
        stop = start + 1
        while (
            stop < n
            and eigenvalues[stop] - eigenvalues[stop - 1] <= TOL.degenerate_cluster
        ):
            stop += 1
        # modified Gram-Schmidt inside the cluster
        for k in range(start, stop):
            for m in range(start, k):
                vectors[:, k] -= np.vdot(vectors[:, m], vectors[:, k]) * vectors[:, m]
            vectors[:, k] /= np.linalg.norm(vectors[:, k])
        start = stop
    return vectors


def hermitian_eig(m: npt.ArrayLike) -> EigenSystem:
    a = np.array(m, dtype=np.complex128)
    assert_hermitian(a)
    n = a.shape[0]
    if n > 4:
        raise DomainError(f"hermitian_eig supports dimension <= 4, got {n}")

    a = hermitize(a)
    v = np.eye(n, dtype=np.complex128)
    threshold = TOL.jacobi_off_diagonal * max(1.0, float(np.linalg.norm(a)))

    sweeps = 0
    while _off_diagonal_norm(a) >= threshold:
        if sweeps >= TOL.jacobi_max_sweeps:
            logger.warning(
                f"Jacobi stopped after {sweeps} sweeps, "
                f"off-diagonal norm {_off_diagonal_norm(a):.3e}"
            )
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                w = _rotation(a[p, p].real, a[q, q].real, a[p, q])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ w
                a[idx, :] = dagger(w) @ a[idx, :]
                a[p, q] = a[q, p] = 0
                v[:, idx] = v[:, idx] @ w
        sweeps += 1

    eigenvalues = np.real(np.diag(a)).copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = _orthonormalize_clusters(eigenvalues, v[:, order])
    return EigenSystem(eigenvalues=eigenvalues, eigenvectors=vectors)


def psd_sqrt(m: ComplexMatrix, clamp: float = TOL.sqrt_clamp) -> ComplexMatrix:
    eigenvalues, vectors = hermitian_eig(m)
    if np.min(eigenvalues) < -clamp:
        raise DomainError(
            f"Matrix square root needs a positive semidefinite operator, "
            f"smallest eigenvalue is {np.min(eigenvalues):.3e}"
        )
    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (vectors * roots) @ dagger(vectors)


def sym3_inverse_det(q: npt.ArrayLike) -> Sym3Inverse:
    a = np.array(q, dtype=np.float64)
    if a.shape != (3, 3):
        raise DomainError(f"Expected a 3x3 matrix, got shape {a.shape}")
    asymmetry = float(np.max(np.abs(a - a.T)))
    if asymmetry > TOL.hermitian:
        raise DomainError(f"Matrix is not symmetric: max|Q - Q^T| = {asymmetry:.3e}")

    cofactors = np.array(
        [
            [
                a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1],
                -(a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0]),
                a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0],
            ],
            [
                -(a[0, 1] * a[2, 2] - a[0, 2] * a[2, 1]),
                a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0],
                -(a[0, 0] * a[2, 1] - a[0, 1] * a[2, 0]),
            ],
            [
                a[0, 1] * a[1, 2] - a[0, 2] * a[1, 1],
                -(a[0, 0] * a[1, 2] - a[0, 2] * a[1, 0]),
                a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0],
            ],
        ]
    )
    det = float(np.dot(a[0], cofactors[0]))
    if abs(det) <= TOL.singular_det:
        return Sym3Inverse(inverse=None, det=det, singular=True)
    return Sym3Inverse(inverse=cofactors.T / det, det=det, singular=False)


def partial_trace(rho: ComplexMatrix, keep: int) -> ComplexMatrix:
    """Reduced state of a two-qubit operator; keep=0 is the leftmost factor."""
    if keep not in (0, 1):
        raise DomainError(f"keep must be 0 or 1, got {keep}")
    r = np.asarray(rho, dtype=np.complex128).reshape(2, 2, 2, 2)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijil->jl", r)
