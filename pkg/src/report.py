import dataclasses
import json
import logging
import math
import os
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src.constants import SCHEMA_VERSION, VERSION  # noqa: E402
from src.error_handler import DomainError  # noqa: E402

logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "cartan-kernel"
plt.rcParams["svg.fonttype"] = "path"

Json = Union[Dict[str, Any], List[Any]]


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, np.generic):
        return _json_safe(value.item())
    if isinstance(value, np.ndarray):
        return _json_safe(value.tolist())
    if isinstance(value, Mapping):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def base_metadata(**extra: Any) -> Dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, "version": VERSION, **extra}


def _announce(path: str) -> None:
    if os.path.exists(path):
        logger.warning(f"File already exists: {path} - overwriting")
    else:
        logger.info(f"Saving to {path}")
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)


def dumps_json(data: Json) -> str:
    return json.dumps(_json_safe(data), indent=4, ensure_ascii=False)


def save_json(data: Json, path: str) -> None:
    _announce(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_json(data))
        f.write("\n")


def _metadata_lines(metadata: Mapping[str, Any]) -> List[str]:
    lines = []
    for key, value in {"schema_version": SCHEMA_VERSION, **metadata}.items():
        text = value if isinstance(value, str) else json.dumps(_json_safe(value))
        lines.append(f"# {key}: {text}\n")
    return lines


def dumps_csv(frame: pd.DataFrame, metadata: Mapping[str, Any]) -> str:
    body = frame.to_csv(index=False, lineterminator="\n")
    return "".join(_metadata_lines(metadata)) + body


def write_csv(frame: pd.DataFrame, path: str, metadata: Mapping[str, Any]) -> None:
    _announce(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(dumps_csv(frame, metadata))
    logger.info(f"Wrote {len(frame)} rows to {path}")


def read_metadata(path: str) -> Dict[str, Any]:
    metadata: Dict[str, Any] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, text = line[1:].strip().partition(": ")
            try:
                metadata[key] = json.loads(text)
            except json.JSONDecodeError:
                metadata[key] = text
    return metadata


def read_csv(path: str) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    metadata = read_metadata(path)
    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    return frame, metadata


@dataclasses.dataclass(frozen=True)
class HeatmapAxes:
    x_label: str
    y_label: str
    x_range: Tuple[float, float]
    y_range: Tuple[float, float]
    title: str = ""
    color_label: str = ""


def emit_heatmap(
    values: np.ndarray,
    axes: HeatmapAxes,
    path: str,
    metadata: Optional[Mapping[str, Any]] = None,
) -> None:
    """Write values[i, j] (x index i, y index j) as a standalone SVG.

    Infinite cells are drawn in the colormap's "over" color.
    """
    grid = np.asarray(values, dtype=np.float64)
    if grid.size == 0:
        raise DomainError("Cannot draw a heatmap of an empty dataset")
    if grid.ndim == 1:
        grid = grid[:, None]

    finite = grid[np.isfinite(grid)]
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 1.0
    if vmax <= vmin:
        vmax = vmin + 1.0
    shown = np.where(np.isposinf(grid), vmax + abs(vmax) + 1, grid)

    cmap = matplotlib.colormaps["viridis"].copy()
    cmap.set_over("#d62728")
    cmap.set_bad("#ffffff")

    fig, ax = plt.subplots(figsize=(6, 4.5))
    image = ax.imshow(
        np.ma.masked_invalid(shown).T,
        origin="lower",
        aspect="auto",
        interpolation="nearest",
        extent=(*axes.x_range, *axes.y_range),
        cmap=cmap,
        vmin=vmin,
        vmax=vmax,
    )
    extend = "max" if np.isposinf(grid).any() else "neither"
    colorbar = fig.colorbar(image, ax=ax, extend=extend)
    colorbar.set_label(axes.color_label)
    ax.set_xlabel(axes.x_label)
    ax.set_ylabel(axes.y_label)
    if axes.title:
        ax.set_title(axes.title)
    fig.tight_layout()

    svg_metadata: Dict[str, Any] = {"Date": None}
    if metadata:
        svg_metadata["Description"] = json.dumps(
            _json_safe(base_metadata(**metadata)), sort_keys=True
        )
    _announce(path)
    fig.savefig(path, format="svg", metadata=svg_metadata)
    plt.close(fig)
