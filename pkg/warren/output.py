"""
Flat-file outputs: CSV tables, JSON summaries, plot-data CSVs and optional
figures.

Every JSON document carries ``format_version`` and the fully resolved config.
Nothing time- or host-dependent is written, so identical runs give identical
bytes.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .gt_core import PatternShape
from .sder_engine import PathEnsemble

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def write_json(path: Path, payload: Mapping[str, Any], config: Mapping[str, Any]) -> Path:
    """Write ``payload`` with the format version and config echo."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"format_version": FORMAT_VERSION, "config": _jsonable(dict(config))}
    document.update(_jsonable(dict(payload)))
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote {path}")
    return path


def _cell(value: Any) -> Any:
    # repr keeps every digit so reruns compare byte for byte
    return repr(float(value)) if isinstance(value, (float, np.floating)) else value


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.info(f"Wrote {path}")
    return path


def coordinate_names(shape: PatternShape) -> List[str]:
    """Column names ``l{n}_{i}`` (1-based particle index) in flat order."""
    return [f"l{n}_{i + 1}" for n, i in shape.iter_particles()]


def write_ensemble_csv(path: Path, ensemble: PathEnsemble) -> Path:
    """
    One row per (path, recorded time).

    Columns: path, time, failed, then every coordinate in flat order.
    """
    header = ["path", "time", "failed"] + coordinate_names(ensemble.shape)

    def rows() -> Iterable[List[Any]]:
        for b in range(ensemble.n_paths):
            failed = int(ensemble.failed[b])
            for r, t in enumerate(ensemble.times):
                yield [b, float(t), failed] + [float(v) for v in ensemble.positions[b, r]]

    return write_csv(path, header, rows())


def write_samples_csv(path: Path, samples: np.ndarray, names: Sequence[str]) -> Path:
    """One row per draw: ``draw`` followed by the named coordinates."""
    samples = np.atleast_2d(samples)
    return write_csv(
        path,
        ["draw"] + list(names),
        ([d] + [float(v) for v in row] for d, row in enumerate(samples)),
    )


def write_plot_data(path: Path, x: np.ndarray, y: np.ndarray) -> Path:
    """Two-column (x, y) CSV, e.g. an ECDF or a histogram."""
    return write_csv(path, ["x", "y"], zip(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))


def error_record(error: BaseException) -> str:
    """Single-line JSON describing a failed run."""
    return json.dumps(
        {
            "format_version": FORMAT_VERSION,
            "error": type(error).__name__,
            "message": str(error),
        },
        sort_keys=True,
    )


def create_ecdf_figure(
    curves: Mapping[str, Tuple[np.ndarray, np.ndarray]],
    output_path: Path,
    title: str,
) -> Optional[Path]:
    """
    Overlay several ECDFs in one PNG.

    Returns None (and logs a warning) when matplotlib/seaborn are missing.
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        import seaborn as sns
    except ImportError:
        logger.warning("matplotlib/seaborn not installed; skipping figure")
        return None

    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    sns.set_style("whitegrid")
    fig, ax = plt.subplots(figsize=(8, 5))
    for label, (x, y) in curves.items():
        ax.step(x, y, where="post", label=label)
    ax.set_xlabel("value")
    ax.set_ylabel("ECDF")
    ax.set_title(title)
    ax.legend()
    plt.tight_layout()
    plt.savefig(output_path, dpi=300, bbox_inches="tight")
    plt.close(fig)
    logger.info(f"Figure saved to {output_path}")
    return output_path


def summary_lines(title: str, items: Dict[str, Any]) -> str:
    """Human-readable block printed after a run."""
    width = max((len(k) for k in items), default=0)
    body = "\n".join(f"  {k.ljust(width)} : {v}" for k, v in items.items())
    return f"{title}\n{'=' * len(title)}\n{body}"
