import dataclasses
import logging
import math
from enum import Enum
from typing import Any, Dict, Iterable, List, Tuple

import numpy as np

from src.constants import HALF_PI, TOL
from src.error_handler import CanonicalizationError
from src.linalg import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ComplexMatrix,
    dagger,
    hermitian_eig,
    kron,
)
from src.states import (
    BELL_TO_CANONICAL,
    CANONICAL_TO_BELL,
    Basis,
    TwoQubitPureState,
)

logger = logging.getLogger(__name__)

SIGMA_XX = kron(SIGMA_X, SIGMA_X)
SIGMA_YY = kron(SIGMA_Y, SIGMA_Y)
SIGMA_ZZ = kron(SIGMA_Z, SIGMA_Z)
GENERATORS = (SIGMA_XX, SIGMA_YY, SIGMA_ZZ)

# eigenvalues of XX, YY, ZZ on |Φ+>, |Φ->, |Ψ+>, |Ψ->
BELL_GENERATOR_EIGENVALUES = np.array(
    [
        [1.0, -1.0, 1.0, -1.0],
        [-1.0, 1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0],
    ]
)


@dataclasses.dataclass(frozen=True)
class CartanParams:
    lambda1: float
    lambda2: float
    lambda3: float

    def __iter__(self):
        return iter(dataclasses.astuple(self))

    @classmethod
    def of(cls, values: Iterable[float]) -> "CartanParams":
        l1, l2, l3 = (float(v) for v in values)
        return cls(l1, l2, l3)

    @property
    def lambda_plus(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def lambda_minus(self) -> float:
        return self.lambda1 - self.lambda2

    def in_canonical_domain(self, tol: float = TOL.canonical_domain) -> bool:
        l1, l2, l3 = self
        return (
            l1 < HALF_PI
            and l1 >= l2 - tol
            and l2 >= l3 - tol
            and l3 >= -tol
            and l1 + l2 <= HALF_PI + tol
        )

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True, eq=False)
class CartanGate:
    params: CartanParams
    matrix_canonical: np.ndarray
    diag_bell: np.ndarray
    basis: Basis = Basis.CANONICAL

    @property
    def matrix(self) -> ComplexMatrix:
        if self.basis == Basis.BELL:
            return np.diag(self.diag_bell)
        return self.matrix_canonical

    def unitarity_error(self) -> float:
        u = self.matrix_canonical
        return float(np.max(np.abs(u @ dagger(u) - np.eye(4))))


def bell_phases(params: CartanParams) -> np.ndarray:
    exponents = np.asarray(list(params)) @ BELL_GENERATOR_EIGENVALUES
    return np.exp(-1j * exponents)


def build_gate(params: CartanParams, basis: Basis = Basis.CANONICAL) -> CartanGate:
    l3 = params.lambda3
    minus = params.lambda_minus
    plus = params.lambda_plus
    outer = np.exp(-1j * l3)
    inner = np.exp(1j * l3)

    u = np.zeros((4, 4), dtype=np.complex128)
    u[0, 0] = u[3, 3] = outer * math.cos(minus)
    u[0, 3] = u[3, 0] = -1j * outer * math.sin(minus)
    u[1, 1] = u[2, 2] = inner * math.cos(plus)
    u[1, 2] = u[2, 1] = -1j * inner * math.sin(plus)
    u.setflags(write=False)

    diag = bell_phases(params)
    diag.setflags(write=False)
    return CartanGate(params=params, matrix_canonical=u, diag_bell=diag, basis=basis)


def gate_from_generators(params: CartanParams) -> ComplexMatrix:
    """exp(-i sum_j lambda_j sigma_j x sigma_j) through an eigendecomposition."""
    h = sum(l * g for l, g in zip(params, GENERATORS))
    eigenvalues, vectors = hermitian_eig(h)
    return (vectors * np.exp(-1j * eigenvalues)) @ dagger(vectors)


def bell_diagonal_to_canonical(diag: np.ndarray) -> ComplexMatrix:
    return BELL_TO_CANONICAL @ np.diag(diag) @ CANONICAL_TO_BELL


def apply_gate(params: CartanParams, psi0: TwoQubitPureState) -> TwoQubitPureState:
    gate = build_gate(params)
    if psi0.basis == Basis.BELL:
        return TwoQubitPureState(gate.diag_bell * psi0.amplitudes, Basis.BELL)
    return TwoQubitPureState(gate.matrix_canonical @ psi0.amplitudes, Basis.CANONICAL)


class MoveKind(Enum):
    SHIFT = "shift"
    REVERSE = "reverse"
    SWAP = "swap"


@dataclasses.dataclass(frozen=True)
class Move:
    kind: MoveKind
    indices: Tuple[int, ...] = ()
    # multiples of pi/2 added to each component, SHIFT only
    multiples: Tuple[int, int, int] = (0, 0, 0)

    def apply(self, values: List[float]) -> List[float]:
        result = list(values)
        if self.kind == MoveKind.SHIFT:
            return [v + k * HALF_PI for v, k in zip(result, self.multiples)]
        i, j = self.indices
        if self.kind == MoveKind.REVERSE:
            result[i], result[j] = -result[i], -result[j]
        elif self.kind == MoveKind.SWAP:
            result[i], result[j] = result[j], result[i]
        else:
            raise ValueError(f"Invalid move kind: {self.kind}")
        return result

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == MoveKind.SHIFT:
            return {"move": self.kind.value, "multiples": list(self.multiples)}
        return {"move": self.kind.value, "indices": list(self.indices)}


def replay(params: CartanParams, ops: Iterable[Move]) -> CartanParams:
    values = list(params)
    for move in ops:
        values = move.apply(values)
    return CartanParams.of(values)


def _reduce_component(value: float) -> int:
    k = -math.floor(value / HALF_PI)
    if value + k * HALF_PI >= HALF_PI:
        k -= 1
    return k


def canonicalize(params: CartanParams) -> Tuple[CartanParams, List[Move]]:
    values = list(params)
    ops: List[Move] = []

    def do(move: Move) -> None:
        nonlocal values
        values = move.apply(values)
        ops.append(move)

    negatives = [i for i, v in enumerate(values) if v < 0]
    for i, j in zip(negatives[0::2], negatives[1::2]):
        do(Move(MoveKind.REVERSE, (i, j)))

    for iteration in range(TOL.canonicalize_max_iterations):
        if CartanParams.of(values).in_canonical_domain():
            break

        k1, k2, k3 = (_reduce_component(v) for v in values)
        if k1 or k2 or k3:
            do(Move(MoveKind.SHIFT, multiples=(k1, k2, k3)))

        for end in range(2, 0, -1):
            for i in range(end):
                if values[i] < values[i + 1]:
                    do(Move(MoveKind.SWAP, (i, i + 1)))

        if values[0] + values[1] > HALF_PI + TOL.canonical_domain:
            do(Move(MoveKind.REVERSE, (0, 1)))
            do(Move(MoveKind.SHIFT, multiples=(1, 1, 0)))
            if values[0] < values[1]:
                do(Move(MoveKind.SWAP, (0, 1)))
            if values[1] < values[2]:
                do(Move(MoveKind.SWAP, (1, 2)))
                if values[0] < values[1]:
                    do(Move(MoveKind.SWAP, (0, 1)))

        logger.debug(f"canonicalize iteration {iteration}: {values}")
    else:
        if not CartanParams.of(values).in_canonical_domain():
            raise CanonicalizationError(
                f"Could not reach the canonical domain from {tuple(params)} "
                f"after {TOL.canonicalize_max_iterations} iterations: {values}"
            )

    result = CartanParams.of(max(0.0, v) for v in values)
    return result, ops
