import dataclasses
import logging
import math
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from src.error_handler import DomainError
from src.states import TwoQubitPureState, from_bell_params

logger = logging.getLogger(__name__)

MIN_PRECISION = 0.75
MAX_INV_SLOPPINESS = 64.0
_INV_SQRT2 = 1 / math.sqrt(2)
_RK_SLACK = 1e-12


class OptimalFamily(Enum):
    FACTORIZED_SEP = "factorized-sep"
    ENTANGLED = "entangled"
    BELL_UNIFORM = "bell-uniform"
    SUB_OPTIMAL_AT_P = "sub-optimal-at-p"


class Pairing(Enum):
    # which rotation angle drives the |00>,|11> amplitudes
    A_OUTER = "a-outer"
    A_INNER = "a-inner"


@dataclasses.dataclass(frozen=True)
class OptimalFamilySpec:
    family: OptimalFamily
    phi: float = 0.0
    index: int = 1
    alpha: float = 0.0
    beta: float = 0.0
    plus_first: bool = True
    plus_second: bool = True
    phases: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    p: Optional[float] = None
    position: int = 1

    def to_dict(self) -> Dict[str, Any]:
        spec_dict = dataclasses.asdict(self)
        spec_dict["family"] = self.family.value
        spec_dict["phases"] = list(self.phases)
        return spec_dict

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "OptimalFamilySpec":
        try:
            fields = dict(data)
            fields["family"] = OptimalFamily(fields["family"])
            if "phases" in fields:
                ph_b, ph_c, ph_d = (float(x) for x in fields["phases"])
                fields["phases"] = (ph_b, ph_c, ph_d)
            return cls(**fields)
        except (KeyError, TypeError, ValueError) as ex:
            raise DomainError(f"Malformed optimal family spec {data!r}: {ex}") from ex


def _check_block_amplitude(name: str, value: float) -> None:
    if not 0 <= value <= _INV_SQRT2 + 1e-12:
        raise DomainError(f"{name} = {value} is outside [0, 1/sqrt(2)]")


def factorized_state(index: int, phi: float = 0.0) -> TwoQubitPureState:
    phase = complex(math.cos(phi), math.sin(phi))
    members = {
        1: (1, phase, 0, 0),
        2: (1, 0, phase, 0),
        3: (0, phase, 0, 1),
        4: (0, 0, phase, 1),
    }
    if index not in members:
        raise DomainError(f"Separable family index must be 1..4, got {index}")
    return TwoQubitPureState(np.array(members[index]) * _INV_SQRT2)


def entangled_state(
    alpha: float,
    beta: float,
    phi: float = 0.0,
    plus_first: bool = True,
    plus_second: bool = True,
) -> TwoQubitPureState:
    _check_block_amplitude("alpha", alpha)
    _check_block_amplitude("beta", beta)
    gamma = math.sqrt(max(0.0, 0.5 - beta * beta))
    delta = math.sqrt(max(0.0, 0.5 - alpha * alpha))
    s_gamma = 1 if plus_first else -1
    s_delta = 1 if plus_second else -1
    phase = np.exp(1j * phi)
    amplitudes = np.array(
        [
            alpha,
            beta * phase,
            s_gamma * 1j * gamma * phase,
            s_delta * 1j * delta,
        ]
    )
    return TwoQubitPureState(amplitudes / np.linalg.norm(amplitudes))


def bell_uniform_state(
    phases: Tuple[float, float, float] = (0.0, 0.0, 0.0)
) -> TwoQubitPureState:
    return from_bell_params(0.5, 0.5, 0.5, 0.5, *phases)


def rx_generate(
    theta_a: float,
    theta_b: float,
    pairing: Pairing = Pairing.A_OUTER,
    phi: float = 0.0,
) -> TwoQubitPureState:
    """Two R_x(theta)|0> blocks spread over the (|00>,|11>) and (|01>,|10>)
    amplitudes; every output lies on the optimal manifold."""
    if pairing == Pairing.A_OUTER:
        outer, inner = theta_a, theta_b
    elif pairing == Pairing.A_INNER:
        outer, inner = theta_b, theta_a
    else:
        raise ValueError(f"Invalid pairing: {pairing}")
    phase = np.exp(1j * phi)
    amplitudes = _INV_SQRT2 * np.array(
        [
            math.cos(outer),
            math.cos(inner) * phase,
            1j * math.sin(inner) * phase,
            1j * math.sin(outer),
        ]
    )
    return TwoQubitPureState(amplitudes)


def sin2theta(alpha: float, beta: float, gamma: float, delta: float) -> float:
    """sin(2 theta) for sin^2(theta) = alpha^2 + delta^2."""
    outer = alpha * alpha + delta * delta
    inner = beta * beta + gamma * gamma
    return 2 * math.sqrt(max(0.0, outer * inner))


def _frontier_radical(p: float) -> float:
    if p < MIN_PRECISION:
        raise DomainError(f"Precision p = {p} is below the minimum 3/4")
    return math.sqrt((p - 0.75) * (p - 3 / 16))


def frontier(p: float) -> float:
    r = _frontier_radical(p)
    # 8p - 3 - 8r rewritten as 12p / (8p - 3 + 8r) to avoid cancellation
    return (8 * p + 3 + 8 * r) ** 3 / (9 * p**3 * (8 * p - 3 + 8 * r))


def suboptimal_amplitudes(p: float) -> Tuple[float, float]:
    r = _frontier_radical(p)
    kappa1 = math.sqrt((8 * r + 8 * p + 3) / (48 * p))
    kappa2 = math.sqrt(3 / (4 * (8 * p - 3 + 8 * r)))
    return kappa1, kappa2


def suboptimal_state(
    p: float,
    position: int = 1,
    phases: Tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> TwoQubitPureState:
    if position not in (1, 2, 3, 4):
        raise DomainError(f"kappa2 position must be 1..4, got {position}")
    kappa1, kappa2 = suboptimal_amplitudes(p)
    moduli = [kappa1] * 4
    moduli[position - 1] = kappa2
    norm = math.sqrt(sum(m * m for m in moduli))
    a, b, c, d = (m / norm for m in moduli)
    return from_bell_params(a, b, c, d, *phases)


def make_optimal(spec: OptimalFamilySpec) -> TwoQubitPureState:
    if spec.family == OptimalFamily.FACTORIZED_SEP:
        return factorized_state(spec.index, spec.phi)
    elif spec.family == OptimalFamily.ENTANGLED:
        return entangled_state(
            spec.alpha, spec.beta, spec.phi, spec.plus_first, spec.plus_second
        )
    elif spec.family == OptimalFamily.BELL_UNIFORM:
        return bell_uniform_state(spec.phases)
    elif spec.family == OptimalFamily.SUB_OPTIMAL_AT_P:
        if spec.p is None:
            raise DomainError("The sub-optimal family needs a precision p")
        return suboptimal_state(spec.p, spec.position, spec.phases)
    else:
        raise ValueError(f"Invalid optimal family: {spec.family}")


def _det_grid(b: np.ndarray, c: np.ndarray, p: float) -> np.ndarray:
    """1/s at fixed p on a grid; NaN outside the admissible (b, c) region."""
    b2, c2 = b**2, c**2
    remainder = 1 - b2 - c2
    denominator = b2 * (64 * c2 * p - 3) - 3 * c2
    with np.errstate(divide="ignore", invalid="ignore"):
        k = 64 * p / 3 - 1 / b2 - 1 / c2
        valid = (
            (b > 0)
            & (c > 0)
            & (remainder > 0)
            & (denominator > 0)
            & (remainder * k >= 4 * (1 - _RK_SLACK))
        )
        value = 49152 * b2**2 * c2**2 * remainder / denominator
    return np.where(valid, value, np.nan)


def det_at_fixed_p(b: float, c: float, p: float) -> float:
    if p < MIN_PRECISION:
        raise DomainError(f"Precision p = {p} is below the minimum 3/4")
    if b <= 0 or c <= 0:
        raise DomainError(f"b and c must be positive, got b={b}, c={c}")
    b2, c2 = b * b, c * c
    remainder = 1 - b2 - c2
    if remainder <= 0:
        raise DomainError(f"b^2 + c^2 = {b2 + c2:.12g} leaves no room for a and d")
    denominator = b2 * (64 * c2 * p - 3) - 3 * c2
    if denominator <= 0:
        raise DomainError(
            f"b^2 (64 c^2 p - 3) - 3 c^2 = {denominator:.3e} is not positive"
        )
    k = 64 * p / 3 - 1 / b2 - 1 / c2
    if remainder * k < 4 * (1 - _RK_SLACK):
        raise DomainError(
            f"No real d reaches p = {p} at b={b}, c={c}: "
            f"(1 - b^2 - c^2) * K = {remainder * k:.12g} < 4"
        )
    return 49152 * b2 * b2 * c2 * c2 * remainder / denominator


def fixed_p_d(b: float, c: float, p: float, larger: bool = False) -> float:
    """The amplitude d that completes (b, c) to precision p; the two roots
    are exchanged with a."""
    remainder = 1 - b * b - c * c
    k = 64 * p / 3 - 1 / (b * b) - 1 / (c * c)
    discriminant = max(0.0, remainder * remainder - 4 * remainder / k)
    root = math.sqrt(discriminant)
    d2 = (remainder + root) / 2 if larger else (remainder - root) / 2
    return math.sqrt(d2)


@dataclasses.dataclass(frozen=True)
class FrontierPoint:
    b: float
    c: float
    inv_s: float

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


def det_map(p: float, bins: int = 256) -> Tuple[np.ndarray, np.ndarray]:
    if p < MIN_PRECISION:
        raise DomainError(f"Precision p = {p} is below the minimum 3/4")
    if bins < 2:
        raise DomainError(f"The 1/s map needs at least 2 bins per axis, got {bins}")
    axis = (np.arange(bins) + 0.5) / bins
    b, c = np.meshgrid(axis, axis, indexing="ij")
    return axis, _det_grid(b, c, p)


def maximize_det_at_fixed_p(
    p: float,
    coarse: int = 400,
    zoom: int = 21,
    iterations: int = 60,
    shrink: float = 0.5,
) -> FrontierPoint:
    axis, values = det_map(p, coarse)
    if np.all(np.isnan(values)):
        raise DomainError(f"No admissible (b, c) found at p = {p}")
    i, j = np.unravel_index(int(np.nanargmax(values)), values.shape)
    best = FrontierPoint(float(axis[i]), float(axis[j]), float(values[i, j]))
    width = 2.0 / coarse

    for _ in range(iterations):
        b_axis = np.clip(np.linspace(best.b - width, best.b + width, zoom), 0, 1)
        c_axis = np.clip(np.linspace(best.c - width, best.c + width, zoom), 0, 1)
        b, c = np.meshgrid(b_axis, c_axis, indexing="ij")
        values = _det_grid(b, c, p)
        if not np.all(np.isnan(values)):
            i, j = np.unravel_index(int(np.nanargmax(values)), values.shape)
            if values[i, j] >= best.inv_s:
                best = FrontierPoint(
                    float(b[i, j]), float(c[i, j]), float(values[i, j])
                )
        width *= shrink

    logger.debug(f"Grid maximum at p={p}: {best}")
    return best


def frontier_maxima(p: float) -> List[FrontierPoint]:
    kappa1, kappa2 = suboptimal_amplitudes(p)
    points = []
    for b, c in ((kappa1, kappa1), (kappa2, kappa1), (kappa1, kappa2)):
        points.append(FrontierPoint(b, c, det_at_fixed_p(b, c, p)))
    return points
