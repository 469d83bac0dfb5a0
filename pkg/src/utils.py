import math
import os
import re
from itertools import islice
from typing import Iterable, Iterator, List, Tuple, TypeVar

from src.error_handler import DomainError

T = TypeVar("T")

_PI_LITERAL = re.compile(
    r"^\s*([-+]?)((?:\d+\.?\d*|\.\d+)(?:e[-+]?\d+)?)?\s*\*?\s*pi\s*$"
)


def batched(iterable: Iterable[T], n: int) -> Iterator[Tuple[T, ...]]:
    if n < 1:
        raise ValueError("n must be at least one")
    it = iter(iterable)
    while batch := tuple(islice(it, n)):
        yield batch


def shard_sizes(n: int, shard_size: int) -> List[int]:
    return [len(batch) for batch in batched(range(n), shard_size)]


def parse_angle(text: str) -> float:
    """Radians, or a multiple of pi written as "0.25pi", "-pi" or "pi"."""
    match = _PI_LITERAL.match(text.lower())
    if match:
        sign, coefficient = match.groups()
        value = float(coefficient or 1) * math.pi
        return -value if sign == "-" else value
    try:
        return float(text)
    except ValueError as ex:
        raise DomainError(f"Malformed angle literal: {text!r}") from ex


def parse_floats(text: str, angles: bool = False) -> List[float]:
    parts = [part for part in text.split(",") if part.strip()]
    if angles:
        return [parse_angle(part) for part in parts]
    try:
        return [float(part) for part in parts]
    except ValueError as ex:
        raise DomainError(f"Malformed number list: {text!r}") from ex


def thread_count() -> int:
    default = min(4, os.cpu_count() or 1)
    raw = os.getenv("CARTAN_THREADS")
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError as ex:
        raise DomainError(f"CARTAN_THREADS must be an integer, got {raw!r}") from ex
    if value < 1:
        raise DomainError(f"CARTAN_THREADS must be positive, got {value}")
    return value
