"""Cube and ground-truth ingestion, validation, and per-band quantization.

File formats
------------
Cube: a JSON sidecar header with keys ``bands``, ``rows``, ``cols``,
``dtype`` (must be ``"u16le"``) and ``data`` (path to the payload,
relative to the header), plus a raw little-endian 16-bit payload in
band-sequential order (band, then row, then column).

Ground truth: a CSV grid of integers, one image row per line, no header.
Label 0 marks unlabeled pixels; labels 1..C are class ids. Lines starting
with ``#`` are skipped so classification maps written by the CLI can be
read back through the same parser.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CUBE_DTYPE = "u16le"
U16_MAX = 65535


@dataclass(frozen=True)
class HyperCube:
    """A (band, row, col) stack of 16-bit reflectance values."""

    values: np.ndarray  # uint16, shape (n_bands, n_rows, n_cols)

    def __post_init__(self):
        v = self.values
        if v.ndim != 3:
            raise ValueError(f"cube values must be 3-D (band,row,col), got ndim={v.ndim}")
        if any(d < 1 for d in v.shape):
            raise ValueError(f"cube dimensions must be >= 1, got {v.shape}")
        if v.dtype != np.uint16:
            raise ValueError(f"cube values must be uint16, got {v.dtype}")

    @property
    def n_bands(self) -> int:
        return self.values.shape[0]

    @property
    def n_rows(self) -> int:
        return self.values.shape[1]

    @property
    def n_cols(self) -> int:
        return self.values.shape[2]

    def band(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_bands:
            raise IndexError(f"band {index} out of range [0, {self.n_bands})")
        return self.values[index]


@dataclass(frozen=True)
class GroundTruth:
    """Per-pixel class labels aligned with a cube's spatial grid.

    Label 0 means unlabeled; 1..n_classes are class ids. All information
    estimates and classifier statistics run over labeled pixels only.
    """

    labels: np.ndarray  # int, shape (n_rows, n_cols)

    def __post_init__(self):
        lab = self.labels
        if lab.ndim != 2:
            raise ValueError(f"ground truth must be 2-D, got ndim={lab.ndim}")
        if lab.min() < 0:
            raise ValueError("ground truth contains negative labels")
        if not (lab > 0).any():
            raise ValueError("no labeled pixels (all labels are 0)")

    @property
    def n_rows(self) -> int:
        return self.labels.shape[0]

    @property
    def n_cols(self) -> int:
        return self.labels.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max())

    @property
    def labeled_count(self) -> int:
        return int((self.labels > 0).sum())

    def labeled_flat_indices(self) -> np.ndarray:
        """Row-major flat indices of labeled pixels.

        This ordering is the shared pixel order of every DiscreteSeries
        and feature matrix derived from the pair (cube, ground truth).
        """
        return np.flatnonzero(self.labels.ravel() > 0)


@dataclass(frozen=True)
class DiscreteSeries:
    """A 1-D sequence of histogram bin indices over the labeled pixels."""

    bins: np.ndarray  # int64, values in [0, n_bins)
    n_bins: int

    def __post_init__(self):
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        b = self.bins
        if b.ndim != 1:
            raise ValueError("series bins must be 1-D")
        if b.size and (b.min() < 0 or b.max() >= self.n_bins):
            raise ValueError(f"bin indices outside [0, {self.n_bins})")

    @property
    def length(self) -> int:
        return int(self.bins.size)


@dataclass(frozen=True)
class QuantizationConfig:
    """How 16-bit reflectances are mapped to histogram bins.

    strategy:
      ``per-band-min-max`` -- each band is scaled by its own min/max over
      the labeled pixels.
      ``global-min-max``   -- one min/max over all bands' labeled pixels.
    """

    n_bins: int = 256
    strategy: str = "per-band-min-max"

    STRATEGIES = ("per-band-min-max", "global-min-max")

    def __post_init__(self):
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.strategy not in self.STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}, expected one of {self.STRATEGIES}")


def quantize_values(values: np.ndarray, lo: float, hi: float, n_bins: int) -> np.ndarray:
    """Map values in [lo, hi] to bins via floor((v - lo) * n_bins / (hi - lo + 1)).

    The +1 in the denominator keeps hi inside the top bin, so the map is
    total on [lo, hi] and monotone. A degenerate range (hi <= lo) maps
    everything to bin 0.
    """
    values = np.asarray(values, dtype=np.float64)
    if hi <= lo:
        return np.zeros(values.shape, dtype=np.int64)
    bins = np.floor((values - lo) * (float(n_bins) / (hi - lo + 1.0)))
    return bins.astype(np.int64)


def quantize_series(values: np.ndarray, cfg: QuantizationConfig,
                    global_range: tuple[float, float] | None = None) -> DiscreteSeries:
    """Quantize a 1-D value series under cfg.

    For the global strategy, ``global_range`` supplies the cube-wide
    (lo, hi); per-band strategy uses the series' own min/max.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot quantize an empty series")
    if cfg.strategy == "global-min-max":
        if global_range is None:
            raise ValueError("global-min-max strategy requires global_range")
        lo, hi = global_range
    else:
        lo, hi = float(values.min()), float(values.max())
    return DiscreteSeries(quantize_values(values, lo, hi, cfg.n_bins), cfg.n_bins)


def global_value_range(cube: HyperCube, gt: GroundTruth) -> tuple[float, float]:
    """Cube-wide min/max over labeled pixels, for the global strategy."""
    _check_alignment(cube, gt)
    flat = cube.values.reshape(cube.n_bands, -1)[:, gt.labeled_flat_indices()]
    return float(flat.min()), float(flat.max())


def quantize_band(cube: HyperCube, band: int, mask: GroundTruth,
                  cfg: QuantizationConfig) -> DiscreteSeries:
    """Quantized bin indices of one band over labeled pixels, row-major order."""
    _check_alignment(cube, mask)
    values = cube.band(band).ravel()[mask.labeled_flat_indices()]
    if cfg.strategy == "global-min-max":
        return quantize_series(values, cfg, global_range=global_value_range(cube, mask))
    return quantize_series(values, cfg)


def labels_series(gt: GroundTruth) -> DiscreteSeries:
    """Class labels of labeled pixels as a series, remapped from 1..C to 0..C-1.

    Same pixel order as quantize_band, so the two series are aligned.
    """
    lab = gt.labels.ravel()[gt.labeled_flat_indices()]
    return DiscreteSeries((lab - 1).astype(np.int64), gt.n_classes)


def _check_alignment(cube: HyperCube, gt: GroundTruth) -> None:
    if (cube.n_rows, cube.n_cols) != (gt.n_rows, gt.n_cols):
        raise ValueError(
            f"cube grid {cube.n_rows}x{cube.n_cols} does not match "
            f"ground truth grid {gt.n_rows}x{gt.n_cols}"
        )


# ---------------------------------------------------------------------------
# on-disk formats
# ---------------------------------------------------------------------------

_HEADER_KEYS = ("bands", "rows", "cols", "dtype", "data")


def load_cube(header_path: str | Path) -> HyperCube:
    """Load a cube from a JSON header + raw u16le band-sequential payload.

    Raises on missing files, malformed headers, non-positive dimensions,
    and any size mismatch between the header and the payload.
    """
    header_path = Path(header_path)
    if not header_path.is_file():
        raise FileNotFoundError(f"cube header not found: {header_path}")
    with open(header_path, "r", encoding="utf-8") as fh:
        header = json.load(fh)
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise ValueError(f"cube header missing keys: {missing}")
    if header["dtype"] != CUBE_DTYPE:
        raise ValueError(f"unsupported cube dtype {header['dtype']!r}, expected {CUBE_DTYPE!r}")
    bands, rows, cols = (int(header[k]) for k in ("bands", "rows", "cols"))
    if min(bands, rows, cols) < 1:
        raise ValueError(f"non-positive cube dimensions: bands={bands} rows={rows} cols={cols}")

    payload_path = header_path.parent / header["data"]
    if not payload_path.is_file():
        raise FileNotFoundError(f"cube payload not found: {payload_path}")
    raw = payload_path.read_bytes()
    expected = bands * rows * cols * 2
    if len(raw) != expected:
        raise ValueError(
            f"cube payload size mismatch: header implies {expected} bytes, file has {len(raw)}"
        )
    values = np.frombuffer(raw, dtype="<u2").reshape(bands, rows, cols)
    return HyperCube(values.astype(np.uint16))


def save_cube(cube: HyperCube, header_path: str | Path,
              provenance: dict | None = None) -> Path:
    """Write a cube in the store format; returns the header path.

    The payload lands next to the header with a ``.u16`` suffix. Loading
    the result back yields bit-identical values.
    """
    header_path = Path(header_path)
    payload_name = header_path.stem + ".u16"
    header = {
        "bands": cube.n_bands,
        "rows": cube.n_rows,
        "cols": cube.n_cols,
        "dtype": CUBE_DTYPE,
        "data": payload_name,
    }
    if provenance:
        header["provenance"] = provenance
    header_path.parent.mkdir(parents=True, exist_ok=True)
    (header_path.parent / payload_name).write_bytes(
        np.ascontiguousarray(cube.values, dtype="<u2").tobytes()
    )
    with open(header_path, "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return header_path


def load_ground_truth(path: str | Path, n_rows: int, n_cols: int) -> GroundTruth:
    """Load a label grid from CSV and validate it against the cube grid."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"ground truth not found: {path}")
    grid = np.loadtxt(path, delimiter=",", dtype=np.int64, comments="#", ndmin=2)
    if grid.shape != (n_rows, n_cols):
        raise ValueError(
            f"ground truth grid is {grid.shape[0]}x{grid.shape[1]}, expected {n_rows}x{n_cols}"
        )
    return GroundTruth(grid)


def save_ground_truth(gt: GroundTruth, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_int_grid(gt.labels, path)
    return path


def _write_int_grid(grid: np.ndarray, path: Path, comments: list[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments or ():
            fh.write(f"# {line}\n")
        for row in grid:
            fh.write(",".join(str(int(v)) for v in row))
            fh.write("\n")
