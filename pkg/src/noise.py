import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.cartan import CartanParams
from src.constants import TOL
from src.error_handler import DomainError
from src.linalg import IDENTITY_2, PAULIS, SIGMA_X, ComplexMatrix, dagger, kron
from src.metrology import (
    Qfim,
    UhlmannMatrix,
    derivatives_rho,
    evolve_density,
    qfim_mixed,
    sld_mixed,
    uhlmann_from_slds,
)
from src.states import DensityMatrix4, TwoQubitPureState
from src.utils import thread_count

logger = logging.getLogger(__name__)

IDENTITY_4 = np.eye(4, dtype=np.complex128)
NOISE_COLUMNS = [
    "class",
    "family",
    "scope",
    "lambda1",
    "lambda2",
    "lambda3",
    "gamma",
    "phi",
    "p",
]


class ChannelFamily(Enum):
    BIT_FLIP = "bitflip"
    DEPOLARIZING = "depolarizing"


class ChannelScope(Enum):
    #  NOTE: the single-qubit channel acts on the leftmost tensor factor
    SINGLE = "single"
    BOTH = "both"


class ProbeClass(Enum):
    PSI1 = "psi1"
    PSI2 = "psi2"
    PSI3 = "psi3"


@dataclasses.dataclass(frozen=True)
class NoiseChannel:
    family: ChannelFamily
    scope: ChannelScope
    gamma: float

    def __post_init__(self):
        if not -TOL.gamma <= self.gamma <= 1 + TOL.gamma:
            raise DomainError(f"Noise strength gamma = {self.gamma} is outside [0, 1]")
        object.__setattr__(self, "gamma", min(1.0, max(0.0, float(self.gamma))))

    def mixture(self) -> List[Tuple[float, ComplexMatrix]]:
        g = self.gamma
        if self.family == ChannelFamily.BIT_FLIP:
            if self.scope == ChannelScope.SINGLE:
                return [(1 - g, IDENTITY_4), (g, kron(SIGMA_X, IDENTITY_2))]
            return [
                (1 - 2 * g * (1 - g) - g * g, IDENTITY_4),
                (g * (1 - g), kron(SIGMA_X, IDENTITY_2)),
                (g * (1 - g), kron(IDENTITY_2, SIGMA_X)),
                (g * g, kron(SIGMA_X, SIGMA_X)),
            ]
        elif self.family == ChannelFamily.DEPOLARIZING:
            if self.scope == ChannelScope.SINGLE:
                return [(1 - g, IDENTITY_4)] + [
                    (g / 3, kron(sigma, IDENTITY_2)) for sigma in PAULIS
                ]
            terms = [((1 - g) ** 2, IDENTITY_4)]
            terms += [((1 - g) * g / 3, kron(sigma, IDENTITY_2)) for sigma in PAULIS]
            terms += [((1 - g) * g / 3, kron(IDENTITY_2, sigma)) for sigma in PAULIS]
            terms += [
                (g * g / 9, kron(first, second))
                for first in PAULIS
                for second in PAULIS
            ]
            return terms
        else:
            raise ValueError(f"Invalid channel family: {self.family}")

    def kraus_operators(self) -> List[ComplexMatrix]:
        return [math.sqrt(w) * u for w, u in self.mixture() if w > 0]

    def completeness_error(self) -> float:
        total = sum(dagger(k) @ k for k in self.kraus_operators())
        return float(np.max(np.abs(total - IDENTITY_4)))


def apply_channel(channel: NoiseChannel, rho0: DensityMatrix4) -> DensityMatrix4:
    m = rho0.matrix
    out = np.zeros((4, 4), dtype=np.complex128)
    for weight, u in channel.mixture():
        if weight > 0:
            out += weight * (u @ m @ dagger(u))
    return DensityMatrix4(out)


def probe_class_state(probe: ProbeClass, phi: float) -> TwoQubitPureState:
    phase = np.exp(1j * phi)
    if probe == ProbeClass.PSI1:
        amplitudes = np.array([1, phase, 0, 0]) / math.sqrt(2)
    elif probe == ProbeClass.PSI2:
        amplitudes = np.array([1, 0, phase, 0]) / math.sqrt(2)
    elif probe == ProbeClass.PSI3:
        amplitudes = np.array(
            [
                0.3,
                0.2 * phase,
                1j * math.sqrt(0.5 - 0.04) * phase,
                1j * math.sqrt(0.5 - 0.09),
            ]
        )
    else:
        raise ValueError(f"Invalid probe class: {probe}")
    return TwoQubitPureState(amplitudes)


def noisy_precision(
    psi0: TwoQubitPureState,
    channel: NoiseChannel,
    params: Optional[CartanParams] = None,
) -> float:
    params = params or CartanParams(0.0, 0.0, 0.0)
    rho_noisy = apply_channel(channel, psi0.projector())
    rho = evolve_density(params, rho_noisy)
    return qfim_mixed(rho, derivatives_rho(params, rho_noisy)).p


@dataclasses.dataclass(frozen=True, eq=False)
class NoisyModel:
    rho: DensityMatrix4
    qfim: Qfim
    uhlmann: UhlmannMatrix


def noisy_qfim(
    psi0: TwoQubitPureState,
    channel: NoiseChannel,
    params: Optional[CartanParams] = None,
) -> NoisyModel:
    params = params or CartanParams(0.0, 0.0, 0.0)
    rho_noisy = apply_channel(channel, psi0.projector())
    rho = evolve_density(params, rho_noisy)
    derivatives = derivatives_rho(params, rho_noisy)
    slds = [sld_mixed(rho, d) for d in derivatives]
    return NoisyModel(
        rho=rho,
        qfim=qfim_mixed(rho, derivatives),
        uhlmann=uhlmann_from_slds(rho, slds),
    )


@dataclasses.dataclass(frozen=True)
class NoiseScanGrid:
    probe: ProbeClass
    gamma_count: int = 101
    phi_count: int = 64

    def __post_init__(self):
        if self.gamma_count < 2 or self.phi_count < 2:
            raise DomainError(
                f"Noise grids need at least 2 points per axis, "
                f"got {self.gamma_count} x {self.phi_count}"
            )

    @property
    def gammas(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.gamma_count)

    @property
    def phis(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.phi_count) / self.phi_count

    def to_dict(self) -> Dict[str, Any]:
        return {
            "class": self.probe.value,
            "gamma_count": self.gamma_count,
            "gamma_range": "[0, 1]",
            "phi_count": self.phi_count,
            "phi_range": "[0, 2pi)",
        }


@dataclasses.dataclass(frozen=True, eq=False)
class NoiseScanResult:
    grid: NoiseScanGrid
    family: ChannelFamily
    scope: ChannelScope
    params: CartanParams
    p: np.ndarray

    def metadata(self) -> Dict[str, Any]:
        return {
            **self.grid.to_dict(),
            "family": self.family.value,
            "scope": self.scope.value,
            "lambda": list(self.params),
        }

    def to_frame(self) -> pd.DataFrame:
        gammas, phis = np.meshgrid(self.grid.gammas, self.grid.phis, indexing="ij")
        l1, l2, l3 = self.params
        frame = pd.DataFrame(
            {
                "class": self.grid.probe.value,
                "family": self.family.value,
                "scope": self.scope.value,
                "lambda1": l1,
                "lambda2": l2,
                "lambda3": l3,
                "gamma": gammas.ravel(),
                "phi": phis.ravel(),
                "p": self.p.ravel(),
            },
            columns=NOISE_COLUMNS,
        )
        return frame


def _scan_row(
    grid: NoiseScanGrid,
    family: ChannelFamily,
    scope: ChannelScope,
    params: CartanParams,
    gamma: float,
) -> np.ndarray:
    channel = NoiseChannel(family, scope, gamma)
    return np.array(
        [
            noisy_precision(probe_class_state(grid.probe, phi), channel, params)
            for phi in grid.phis
        ]
    )


def noise_scan(
    grid: NoiseScanGrid,
    family: ChannelFamily,
    scope: ChannelScope,
    params: Optional[CartanParams] = None,
    workers: Optional[int] = None,
) -> NoiseScanResult:
    params = params or CartanParams(0.0, 0.0, 0.0)
    workers = workers or thread_count()
    logger.info(
        f"Noise scan {grid.probe.value} {family.value}/{scope.value} "
        f"on {grid.gamma_count}x{grid.phi_count} at lambda={tuple(params)}"
    )
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(
            executor.map(
                lambda gamma: _scan_row(grid, family, scope, params, float(gamma)),
                grid.gammas,
            )
        )
    p = np.vstack(rows)
    logger.info(f"Noise scan done, {int(np.isinf(p).sum())} divergent cells")
    return NoiseScanResult(grid=grid, family=family, scope=scope, params=params, p=p)
