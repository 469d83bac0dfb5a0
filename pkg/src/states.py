import dataclasses
import logging
import math
from enum import Enum
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from src.constants import TOL
from src.error_handler import DomainError
from src.linalg import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ComplexMatrix,
    EigenSystem,
    hermitian_eig,
    hermitize,
    hermiticity_violation,
    kron,
    projector,
    psd_sqrt,
)

logger = logging.getLogger(__name__)


class Basis(Enum):
    CANONICAL = "canonical"
    BELL = "bell"


_S = 1 / math.sqrt(2)
# columns are |Φ+>, |Φ->, |Ψ+>, |Ψ-> in the computational basis
BELL_TO_CANONICAL = np.array(
    [
        [_S, _S, 0, 0],
        [0, 0, _S, _S],
        [0, 0, _S, -_S],
        [_S, -_S, 0, 0],
    ],
    dtype=np.complex128,
)
CANONICAL_TO_BELL = BELL_TO_CANONICAL.conj().T

SIGMA_YY = kron(SIGMA_Y, SIGMA_Y)


@dataclasses.dataclass(frozen=True, eq=False)
class TwoQubitPureState:
    amplitudes: np.ndarray
    basis: Basis = Basis.CANONICAL

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.shape != (4,):
            raise DomainError(
                f"A two-qubit state needs 4 amplitudes, got {amplitudes.size}"
            )
        deficit = 1 - float(np.vdot(amplitudes, amplitudes).real)
        if abs(deficit) > TOL.normalization:
            raise DomainError(f"State is not normalized: 1 - <psi|psi> = {deficit:.3e}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    def __iter__(self):
        return iter(self.amplitudes)

    def __repr__(self) -> str:
        values = ", ".join(f"{a:.4g}" for a in self.amplitudes)
        return f"<TwoQubitPureState {self.basis.value} ({values})>"

    def in_basis(self, basis: Basis) -> "TwoQubitPureState":
        return change_basis(self, basis)

    @property
    def canonical(self) -> np.ndarray:
        return change_basis(self, Basis.CANONICAL).amplitudes

    def projector(self) -> "DensityMatrix4":
        return DensityMatrix4(projector(self.canonical))

    def fidelity(self, other: "TwoQubitPureState") -> float:
        return float(abs(np.vdot(self.canonical, other.canonical)))

    def expectation(self, operator: ComplexMatrix) -> float:
        return float(np.vdot(self.amplitudes, operator @ self.amplitudes).real)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
            "basis": self.basis.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TwoQubitPureState":
        try:
            pairs = data["amplitudes"]
            basis = Basis(data.get("basis", Basis.CANONICAL.value))
            amplitudes = [complex(float(re), float(im)) for re, im in pairs]
        except (KeyError, TypeError, ValueError) as ex:
            raise DomainError(f"Malformed state literal {dict(data)!r}: {ex}") from ex
        return cls(np.array(amplitudes), basis)


@dataclasses.dataclass(frozen=True, eq=False)
class DensityMatrix4:
    matrix: np.ndarray
    _spectrum: EigenSystem = dataclasses.field(init=False, repr=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.shape != (4, 4):
            raise DomainError(f"Density matrix must be 4x4, got shape {matrix.shape}")
        violation, (i, j) = hermiticity_violation(matrix)
        if violation > TOL.hermitian:
            raise DomainError(
                f"Density matrix is not Hermitian at ({i},{j}): {violation:.3e}"
            )
        trace = complex(np.trace(matrix))
        if abs(trace - 1) > TOL.trace:
            raise DomainError(f"Density matrix trace is {trace.real:.12g}, expected 1")
        matrix = hermitize(matrix)
        system = hermitian_eig(matrix)
        smallest = float(system.eigenvalues[0])
        if smallest < -TOL.positivity:
            raise DomainError(
                f"Density matrix is not positive: smallest eigenvalue {smallest:.3e}"
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "_spectrum", system)

    def spectrum(self) -> EigenSystem:
        return self._spectrum


@dataclasses.dataclass(frozen=True)
class BlochVector:
    r: Tuple[float, float, float]

    def __post_init__(self):
        if self.norm > 1 + TOL.positivity:
            raise DomainError(f"Bloch vector norm {self.norm:.12g} exceeds 1")

    @property
    def norm(self) -> float:
        return math.sqrt(sum(x * x for x in self.r))

    @property
    def purity(self) -> float:
        return (1 + self.norm**2) / 2


def from_canonical_params(
    alpha: float,
    beta: float,
    gamma: float,
    delta: float,
    phi_beta: float = 0.0,
    phi_gamma: float = 0.0,
    phi_delta: float = 0.0,
) -> TwoQubitPureState:
    return _from_params(
        (alpha, beta, gamma, delta), (phi_beta, phi_gamma, phi_delta), Basis.CANONICAL
    )


def from_bell_params(
    a: float,
    b: float,
    c: float,
    d: float,
    phi_b: float = 0.0,
    phi_c: float = 0.0,
    phi_d: float = 0.0,
) -> TwoQubitPureState:
    return _from_params((a, b, c, d), (phi_b, phi_c, phi_d), Basis.BELL)


def _from_params(
    moduli: Sequence[float], phases: Sequence[float], basis: Basis
) -> TwoQubitPureState:
    for name, value in zip("1234", moduli):
        if not -TOL.parameter_normalization <= value <= 1 + TOL.parameter_normalization:
            raise DomainError(f"Amplitude #{name} = {value} is outside [0, 1]")
    deficit = 1 - sum(m * m for m in moduli)
    if abs(deficit) > TOL.parameter_normalization:
        raise DomainError(
            f"Amplitudes are not normalized: 1 - sum of squares = {deficit:.3e}"
        )
    amplitudes = np.array(moduli, dtype=np.complex128)
    amplitudes[1:] *= np.exp(1j * np.asarray(phases, dtype=np.float64))
    amplitudes /= np.linalg.norm(amplitudes)
    return TwoQubitPureState(amplitudes, basis)


def canonical_params(psi: TwoQubitPureState) -> Tuple[float, ...]:
    """(alpha, beta, gamma, delta, phi_beta, phi_gamma, phi_delta) with the
    global phase fixed by a real first amplitude."""
    amplitudes = psi.canonical
    moduli = np.abs(amplitudes)
    phases = np.angle(amplitudes) - np.angle(amplitudes[0])
    return (*(float(m) for m in moduli), *(float(p) for p in phases[1:]))


def change_basis(psi: TwoQubitPureState, target: Basis) -> TwoQubitPureState:
    if psi.basis == target:
        return psi
    if target == Basis.BELL:
        amplitudes = CANONICAL_TO_BELL @ psi.amplitudes
    else:
        amplitudes = BELL_TO_CANONICAL @ psi.amplitudes
    return TwoQubitPureState(amplitudes, target)


def operator_to_bell(operator: ComplexMatrix) -> ComplexMatrix:
    return CANONICAL_TO_BELL @ operator @ BELL_TO_CANONICAL


def concurrence_pure(psi: TwoQubitPureState) -> float:
    a = psi.canonical
    return float(2 * abs(a[0] * a[3] - a[1] * a[2]))


def spin_flip(rho: ComplexMatrix) -> ComplexMatrix:
    return SIGMA_YY @ rho.conj() @ SIGMA_YY


def concurrence_mixed(rho: DensityMatrix4) -> float:
    root = psd_sqrt(rho.matrix)
    m = hermitize(root @ spin_flip(rho.matrix) @ root)
    eigenvalues, _ = hermitian_eig(m)
    eigenvalues = np.where(eigenvalues > TOL.concurrence_floor, eigenvalues, 0.0)
    lambdas = np.sqrt(eigenvalues)[::-1]
    value = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]
    return float(min(1.0, max(0.0, value)))


def purity(rho: DensityMatrix4) -> float:
    return float(np.trace(rho.matrix @ rho.matrix).real)


def bloch_vector(rho: ComplexMatrix) -> BlochVector:
    m = np.asarray(rho, dtype=np.complex128)
    if m.shape != (2, 2):
        raise DomainError(f"Bloch vectors need a 2x2 operator, got shape {m.shape}")
    violation, (i, j) = hermiticity_violation(m)
    if violation > TOL.hermitian:
        raise DomainError(f"Qubit state is not Hermitian at ({i},{j})")
    trace = complex(np.trace(m))
    if abs(trace - 1) > TOL.trace:
        raise DomainError(f"Qubit state trace is {trace.real:.12g}, expected 1")
    components: List[float] = [
        float(np.trace(sigma @ m).real) for sigma in (SIGMA_X, SIGMA_Y, SIGMA_Z)
    ]
    return BlochVector(r=(components[0], components[1], components[2]))


def mixture(
    weights: Sequence[float], states: Sequence[ComplexMatrix]
) -> DensityMatrix4:
    total = np.zeros((4, 4), dtype=np.complex128)
    for weight, state in zip(weights, states):
        total += weight * state
    return DensityMatrix4(total)
