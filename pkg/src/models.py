import dataclasses
import logging
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Tuple

from src.constants import SCHEMA_VERSION, VERSION
from src.error_handler import DomainError

logger = logging.getLogger(__name__)


class Command(Enum):
    QFIM = "qfim"
    OPTIMAL = "optimal"
    FRONTIER = "frontier"
    SAMPLE = "sample"
    NOISE_SCAN = "noise-scan"
    CANONICALIZE = "canonicalize"


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


class FormatFactory:
    @staticmethod
    def allowed_formats(command: Command) -> Tuple[OutputFormat, ...]:
        if command in (Command.QFIM, Command.OPTIMAL, Command.CANONICALIZE):
            return (OutputFormat.JSON,)
        elif command == Command.FRONTIER:
            return (OutputFormat.JSON, OutputFormat.SVG)
        elif command in (Command.SAMPLE, Command.NOISE_SCAN):
            return (OutputFormat.CSV, OutputFormat.SVG)
        else:
            raise ValueError(f"Invalid command: {command}")

    @staticmethod
    def default_format(command: Command) -> OutputFormat:
        return FormatFactory.allowed_formats(command)[0]


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: Command
    options: Mapping[str, Any]
    out: Optional[str] = None
    fmt: Optional[OutputFormat] = None

    def __post_init__(self):
        fmt = self.fmt or FormatFactory.default_format(self.command)
        object.__setattr__(self, "fmt", fmt)
        allowed = FormatFactory.allowed_formats(self.command)
        if fmt not in allowed:
            names = ", ".join(f.value for f in allowed)
            raise DomainError(f"{self.command.value} writes {names}, not {fmt.value}")
        if fmt == OutputFormat.SVG and not self.out:
            raise DomainError("SVG output needs --out")

    @property
    def output_format(self) -> OutputFormat:
        assert self.fmt is not None
        return self.fmt

    def option(self, name: str, default: Any = None) -> Any:
        value = self.options.get(name)
        return default if value is None else value

    def metadata(self, **extra: Any) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "version": VERSION,
            "command": self.command.value,
            **extra,
        }
