import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.constants import TOL
from src.error_handler import DomainError
from src.metrology import closed_canonical_metrics
from src.optimal import MAX_INV_SLOPPINESS, MIN_PRECISION
from src.states import TwoQubitPureState
from src.utils import shard_sizes, thread_count

logger = logging.getLogger(__name__)

SHARD_SIZE = 8192
SCAN_COLUMNS = ["probe_id", "kind", "p", "inv_s", "concurrence"]
DENSITY_BINS = 256
P_WINDOW = (MIN_PRECISION, 5.0)
INV_S_WINDOW = (0.0, MAX_INV_SLOPPINESS)

Records = Union[pd.DataFrame, Sequence["ScanRecord"]]


class ScanKind(Enum):
    HAAR = "haar"
    FACTORIZABLE = "factorizable"
    OPTIMAL_FAMILY = "optimal-family"


@dataclasses.dataclass(frozen=True)
class ScanRecord:
    probe_id: int
    kind: ScanKind
    p: float
    inv_s: float
    concurrence: float

    def __iter__(self):
        return iter(dataclasses.astuple(self))

    @property
    def finite(self) -> bool:
        return math.isfinite(self.p)

    def to_dict(self) -> Dict[str, Any]:
        record_dict = dataclasses.asdict(self)
        record_dict["kind"] = self.kind.value
        return record_dict


@dataclasses.dataclass(frozen=True)
class RngSpec:
    seed: int
    algorithm: str = "Philox"

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"Seed must be an unsigned 64-bit integer: {self.seed}")
        if self.algorithm not in ("Philox", "PCG64", "SFC64"):
            raise DomainError(f"Unsupported bit generator: {self.algorithm}")

    def generator(self, stream: int = 0) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(stream,))
        bit_generator = getattr(np.random, self.algorithm)(sequence)
        return np.random.Generator(bit_generator)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


def _normalize_rows(z: np.ndarray) -> np.ndarray:
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_amplitudes(gen: np.random.Generator, n: int) -> np.ndarray:
    z = gen.standard_normal((n, 8))
    return _normalize_rows(z[:, :4] + 1j * z[:, 4:])


def factorizable_amplitudes(gen: np.random.Generator, n: int) -> np.ndarray:
    z = gen.standard_normal((n, 8))
    first = _normalize_rows(z[:, 0:2] + 1j * z[:, 2:4])
    second = _normalize_rows(z[:, 4:6] + 1j * z[:, 6:8])
    return np.einsum("ni,nj->nij", first, second).reshape(n, 4)


def optimal_family_amplitudes(gen: np.random.Generator, n: int) -> np.ndarray:
    alpha, beta = gen.uniform(0, 1 / math.sqrt(2), size=(2, n))
    phi = gen.uniform(0, 2 * math.pi, size=n)
    signs = np.where(gen.random((2, n)) < 0.5, -1.0, 1.0)
    phase = np.exp(1j * phi)
    amplitudes = np.stack(
        [
            alpha + 0j,
            beta * phase,
            signs[0] * 1j * np.sqrt(np.clip(0.5 - beta**2, 0, None)) * phase,
            signs[1] * 1j * np.sqrt(np.clip(0.5 - alpha**2, 0, None)),
        ],
        axis=1,
    )
    return _normalize_rows(amplitudes)


def _amplitudes(kind: ScanKind, gen: np.random.Generator, n: int) -> np.ndarray:
    if kind == ScanKind.HAAR:
        return haar_amplitudes(gen, n)
    elif kind == ScanKind.FACTORIZABLE:
        return factorizable_amplitudes(gen, n)
    elif kind == ScanKind.OPTIMAL_FAMILY:
        return optimal_family_amplitudes(gen, n)
    else:
        raise ValueError(f"Invalid scan kind: {kind}")


def sample_haar(rng: RngSpec) -> TwoQubitPureState:
    return TwoQubitPureState(haar_amplitudes(rng.generator(), 1)[0])


def sample_factorizable(rng: RngSpec) -> TwoQubitPureState:
    return TwoQubitPureState(factorizable_amplitudes(rng.generator(), 1)[0])


def batch_metrics(amplitudes: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    moduli = np.abs(amplitudes)
    phases = np.angle(amplitudes) - np.angle(amplitudes[:, :1])
    p, inv_s = closed_canonical_metrics(
        moduli[:, 0],
        moduli[:, 1],
        moduli[:, 2],
        moduli[:, 3],
        phases[:, 1],
        phases[:, 2],
        phases[:, 3],
    )
    a = amplitudes
    concurrence = 2 * np.abs(a[:, 0] * a[:, 3] - a[:, 1] * a[:, 2])
    return p, inv_s, np.clip(concurrence, 0.0, 1.0)


def _scan_shard(kind: ScanKind, rng: RngSpec, shard: int, size: int) -> pd.DataFrame:
    amplitudes = _amplitudes(kind, rng.generator(shard), size)
    p, inv_s, concurrence = batch_metrics(amplitudes)
    logger.debug(f"Shard {shard}: {size} {kind.value} probes")
    return pd.DataFrame(
        {
            "probe_id": shard * SHARD_SIZE + np.arange(size),
            "kind": kind.value,
            "p": p,
            "inv_s": inv_s,
            "concurrence": concurrence,
        },
        columns=SCAN_COLUMNS,
    )


def scan_frame(
    n: int, kind: ScanKind, rng: RngSpec, workers: Optional[int] = None
) -> pd.DataFrame:
    if n < 1:
        raise DomainError(f"Sample count must be at least 1, got {n}")
    sizes = shard_sizes(n, SHARD_SIZE)
    workers = workers or thread_count()
    logger.info(
        f"Scanning {n} {kind.value} probes in {len(sizes)} shards "
        f"with {workers} threads (seed {rng.seed})"
    )
    with ThreadPoolExecutor(max_workers=workers) as executor:
        frames = list(
            executor.map(
                lambda args: _scan_shard(kind, rng, *args),
                enumerate(sizes),
            )
        )
    frame = pd.concat(frames, ignore_index=True)
    singular = int(np.isinf(frame["p"]).sum())
    if singular:
        logger.info(f"{singular} probes have a singular QFIM")
    return frame


def scan(n: int, kind: ScanKind, rng: RngSpec) -> List[ScanRecord]:
    frame = scan_frame(n, kind, rng)
    return [
        ScanRecord(
            probe_id=int(row.probe_id),
            kind=kind,
            p=float(row.p),
            inv_s=float(row.inv_s),
            concurrence=float(row.concurrence),
        )
        for row in frame.itertuples(index=False)
    ]


def records_frame(records: Records) -> pd.DataFrame:
    if isinstance(records, pd.DataFrame):
        return records
    return pd.DataFrame([record.to_dict() for record in records], columns=SCAN_COLUMNS)


def finite_frame(records: Records) -> pd.DataFrame:
    frame = records_frame(records)
    return frame[np.isfinite(frame["p"])]


def density_histogram(
    records: Records,
    bins: int = DENSITY_BINS,
    p_window: Tuple[float, float] = P_WINDOW,
    inv_s_window: Tuple[float, float] = INV_S_WINDOW,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    frame = finite_frame(records)
    counts, p_edges, inv_s_edges = np.histogram2d(
        frame["p"].to_numpy(),
        frame["inv_s"].to_numpy(),
        bins=bins,
        range=[list(p_window), list(inv_s_window)],
    )
    return counts, p_edges, inv_s_edges


def concurrence_histogram(
    records: Records, metric: str = "p", bins: int = DENSITY_BINS
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if metric == "p":
        window = P_WINDOW
    elif metric == "inv_s":
        window = INV_S_WINDOW
    else:
        raise DomainError(f"Concurrence maps use p or inv_s, not {metric!r}")
    frame = finite_frame(records)
    counts, c_edges, m_edges = np.histogram2d(
        frame["concurrence"].to_numpy(),
        frame[metric].to_numpy(),
        bins=bins,
        range=[[0.0, 1.0], list(window)],
    )
    return counts, c_edges, m_edges


def near_optimal(records: Records, window: float = 0.1) -> pd.DataFrame:
    """Records whose p and 1/s are both within a relative window of (3/4, 64)."""
    frame = finite_frame(records)
    close_p = np.abs(frame["p"] - MIN_PRECISION) <= window * MIN_PRECISION
    inv_s_gap = np.abs(frame["inv_s"] - MAX_INV_SLOPPINESS)
    close_inv_s = inv_s_gap <= window * MAX_INV_SLOPPINESS
    return frame[close_p & close_inv_s]


def bound_gap(records: Records) -> pd.Series:
    frame = finite_frame(records)
    inv_s = frame["inv_s"].clip(lower=TOL.precision_floor)
    return frame["p"] - 3 * inv_s ** (-1 / 3)
