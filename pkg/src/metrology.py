import dataclasses
import logging
import math
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from src.cartan import GENERATORS, CartanParams, apply_gate, build_gate
from src.constants import TOL
from src.error_handler import DomainError
from src.linalg import (
    ComplexMatrix,
    RealMatrix,
    commutator,
    dagger,
    hermitian_eig,
    hermitize,
    sym3_inverse_det,
)
from src.states import Basis, DensityMatrix4, TwoQubitPureState

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class Qfim:
    q: RealMatrix
    p: float
    s: float
    det: float
    singular: bool

    @classmethod
    def from_matrix(cls, q: Any) -> "Qfim":
        matrix = np.array(q, dtype=np.float64)
        if matrix.shape != (3, 3):
            raise DomainError(f"QFIM must be 3x3, got shape {matrix.shape}")
        asymmetry = float(np.max(np.abs(matrix - matrix.T)))
        if asymmetry > TOL.qfim_symmetry:
            raise DomainError(f"QFIM is not symmetric: max|Q - Q^T| = {asymmetry:.3e}")
        matrix = (matrix + matrix.T) / 2
        matrix.setflags(write=False)

        inverse = sym3_inverse_det(matrix)
        eigenvalues = hermitian_eig(matrix).eigenvalues
        rank_deficient = eigenvalues[0] <= TOL.qfim_rank * max(1.0, eigenvalues[-1])
        if inverse.singular or rank_deficient or inverse.inverse is None:
            return cls(
                q=matrix,
                p=math.inf,
                s=math.inf,
                det=max(inverse.det, 0.0),
                singular=True,
            )
        return cls(
            q=matrix,
            p=float(np.trace(inverse.inverse)),
            s=1 / inverse.det,
            det=inverse.det,
            singular=False,
        )

    @property
    def inv_s(self) -> float:
        return self.det

    @property
    def matrix_bound_gap(self) -> float:
        if self.singular:
            return math.inf
        return self.p - 3 * self.s ** (1 / 3)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "Q": self.q.tolist(),
            "p": self.p,
            "inv_s": self.inv_s,
            "s": self.s,
            "singular": self.singular,
        }


@dataclasses.dataclass(frozen=True, eq=False)
class UhlmannMatrix:
    d_matrix: RealMatrix

    def __post_init__(self):
        m = np.array(self.d_matrix, dtype=np.float64)
        skew = float(np.max(np.abs(m + m.T)))
        if skew > TOL.qfim_symmetry:
            raise DomainError(f"Uhlmann matrix is not antisymmetric: {skew:.3e}")
        m = (m - m.T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "d_matrix", m)

    @property
    def d(self) -> float:
        return float(np.linalg.det(self.d_matrix))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.d_matrix)))


def derivative_states(
    psi0: TwoQubitPureState, params: CartanParams
) -> Tuple[np.ndarray, List[np.ndarray]]:
    evolved = apply_gate(params, psi0.in_basis(Basis.CANONICAL)).amplitudes
    return evolved, [-1j * (g @ evolved) for g in GENERATORS]


def _overlap_matrix(psi: np.ndarray, derivatives: Sequence[np.ndarray]) -> np.ndarray:
    d = np.array(derivatives)
    gram = d.conj() @ d.T
    berry = d.conj() @ psi
    return gram - np.outer(berry, berry.conj())


def qfim_pure(psi0: TwoQubitPureState, params: CartanParams) -> Qfim:
    psi, derivatives = derivative_states(psi0, params)
    return Qfim.from_matrix(4 * _overlap_matrix(psi, derivatives).real)


def uhlmann_pure(psi0: TwoQubitPureState, params: CartanParams) -> UhlmannMatrix:
    psi, derivatives = derivative_states(psi0, params)
    return UhlmannMatrix(4 * _overlap_matrix(psi, derivatives).imag)


def _canonical_cosines(alpha, beta, gamma, delta, phi_beta, phi_gamma, phi_delta):
    c1 = alpha * delta * np.cos(phi_delta)
    c2 = beta * gamma * np.cos(phi_beta - phi_gamma)
    return c1, c2


def qfim_closed_canonical(
    alpha: float,
    beta: float,
    gamma: float,
    delta: float,
    phi_beta: float = 0.0,
    phi_gamma: float = 0.0,
    phi_delta: float = 0.0,
) -> Qfim:
    norm = alpha**2 + beta**2 + gamma**2 + delta**2
    if abs(norm - 1) > TOL.parameter_normalization:
        raise DomainError(f"Amplitudes are not normalized: 1 - sum = {1 - norm:.3e}")
    c1, c2 = _canonical_cosines(
        alpha, beta, gamma, delta, phi_beta, phi_gamma, phi_delta
    )
    outer = alpha**2 + delta**2
    inner = beta**2 + gamma**2

    q = np.empty((3, 3))
    q[0, 0] = 4 * (1 - 2 * c1 - 2 * c2) * (1 + 2 * c1 + 2 * c2)
    q[1, 1] = 4 * (1 - 2 * c1 + 2 * c2) * (1 + 2 * c1 - 2 * c2)
    q[2, 2] = 16 * outer * inner
    q[0, 1] = q[1, 0] = 4 * (-outer + inner + 4 * c1**2 - 4 * c2**2)
    q[0, 2] = q[2, 0] = 16 * (c1 * inner - c2 * outer)
    q[1, 2] = q[2, 1] = -16 * (c1 * inner + c2 * outer)
    return Qfim.from_matrix(q)


def closed_canonical_metrics(
    alpha: Any,
    beta: Any,
    gamma: Any,
    delta: Any,
    phi_beta: Any,
    phi_gamma: Any,
    phi_delta: Any,
) -> Tuple[np.ndarray, np.ndarray]:
    a2, b2, g2, d2 = (
        np.asarray(x, dtype=np.float64) ** 2 for x in (alpha, beta, gamma, delta)
    )
    outer_den = a2**2 - 2 * a2 * d2 * np.cos(2 * np.asarray(phi_delta)) + d2**2
    relative = np.asarray(phi_beta) - np.asarray(phi_gamma)
    inner_den = b2**2 - 2 * b2 * g2 * np.cos(2 * relative) + g2**2
    inv_s = 1024 * outer_den * inner_den
    with np.errstate(divide="ignore", invalid="ignore"):
        p = 3 / 16 * ((a2 + d2) / outer_den + (b2 + g2) / inner_den)
    singular = inv_s <= TOL.singular_det
    p = np.where(singular, np.inf, p)
    return p, np.maximum(inv_s, 0.0)


def qfim_closed_bell(b: float, c: float, d: float) -> Qfim:
    b2, c2, d2 = b * b, c * c, d * d
    if b2 + c2 + d2 > 1 + TOL.parameter_normalization:
        raise DomainError(f"b^2 + c^2 + d^2 = {b2 + c2 + d2:.12g} exceeds 1")
    q = np.empty((3, 3))
    q[0, 0] = 16 * (1 - b2 - d2) * (b2 + d2)
    q[1, 1] = 16 * (1 - b2 - c2) * (b2 + c2)
    q[2, 2] = 16 * (1 - c2 - d2) * (c2 + d2)
    q[0, 1] = q[1, 0] = 16 * (b2 * b2 + b2 * (c2 + d2 - 1) + c2 * d2)
    q[0, 2] = q[2, 0] = 16 * (d2 - (b2 + d2) * (c2 + d2))
    q[1, 2] = q[2, 1] = 16 * (c2 * (b2 + d2 - 1) + b2 * d2 + c2 * c2)
    return Qfim.from_matrix(q)


def closed_bell_metrics(b: Any, c: Any, d: Any) -> Tuple[np.ndarray, np.ndarray]:
    b2, c2, d2 = (np.asarray(x, dtype=np.float64) ** 2 for x in (b, c, d))
    a2 = np.clip(1 - b2 - c2 - d2, 0.0, None)
    #  NOTE: 1/s is 16384 times the product of the four Bell weights a^2 b^2 c^2 d^2
    inv_s = 16384 * a2 * b2 * c2 * d2
    with np.errstate(divide="ignore"):
        p = 3 / 64 * (1 / b2 + 1 / c2 + 1 / d2 + 1 / a2)
    p = np.where(inv_s <= TOL.singular_det, np.inf, p)
    return p, inv_s


def evolve_density(params: CartanParams, rho: DensityMatrix4) -> DensityMatrix4:
    u = build_gate(params).matrix_canonical
    return DensityMatrix4(u @ rho.matrix @ dagger(u))


def derivatives_rho(
    params: CartanParams, rho0: DensityMatrix4
) -> Tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    rho = evolve_density(params, rho0).matrix
    d1, d2, d3 = (hermitize(-1j * commutator(g, rho)) for g in GENERATORS)
    return d1, d2, d3


def _eigen_blocks(
    rho: DensityMatrix4, derivatives: Sequence[ComplexMatrix]
) -> Tuple[np.ndarray, np.ndarray, List[np.ndarray]]:
    eigenvalues, vectors = rho.spectrum()
    sums = eigenvalues[:, None] + eigenvalues[None, :]
    # pairs outside the support of rho are dropped
    weights = np.zeros_like(sums)
    support = sums > TOL.support
    weights[support] = 2 / sums[support]
    blocks = [dagger(vectors) @ np.asarray(d) @ vectors for d in derivatives]
    return weights, vectors, blocks


def qfim_mixed(rho: DensityMatrix4, derivatives: Sequence[ComplexMatrix]) -> Qfim:
    """Q_jk = sum over l, m of 2 Re(<l|d_j rho|m><m|d_k rho|l>) / (y_l + y_m),
    every ordered pair counted once, l = m included."""
    if len(derivatives) != 3:
        raise DomainError(f"Expected 3 derivative operators, got {len(derivatives)}")
    weights, _, blocks = _eigen_blocks(rho, derivatives)
    q = np.empty((3, 3))
    for j in range(3):
        for k in range(j, 3):
            q[j, k] = q[k, j] = float(np.sum(weights * blocks[j] * blocks[k].T).real)
    return Qfim.from_matrix(q)


def sld_pure(psi: TwoQubitPureState, derivative: np.ndarray) -> ComplexMatrix:
    v = psi.canonical
    dv = np.asarray(derivative, dtype=np.complex128)
    return 2 * (np.outer(dv, v.conj()) + np.outer(v, dv.conj()))


def sld_mixed(rho: DensityMatrix4, derivative: ComplexMatrix) -> ComplexMatrix:
    weights, vectors, (block,) = _eigen_blocks(rho, [derivative])
    return hermitize(vectors @ (weights * block) @ dagger(vectors))


def qfim_from_slds(rho: DensityMatrix4, slds: Sequence[ComplexMatrix]) -> Qfim:
    m = rho.matrix
    q = np.empty((3, 3))
    for j in range(3):
        for k in range(3):
            anti = slds[j] @ slds[k] + slds[k] @ slds[j]
            q[j, k] = float(np.trace(m @ anti).real) / 2
    return Qfim.from_matrix(q)


def uhlmann_from_slds(
    rho: DensityMatrix4, slds: Sequence[ComplexMatrix]
) -> UhlmannMatrix:
    m = rho.matrix
    d = np.empty((3, 3))
    for j in range(3):
        for k in range(3):
            d[j, k] = float((-0.5j * np.trace(m @ commutator(slds[j], slds[k]))).real)
    return UhlmannMatrix(d)
