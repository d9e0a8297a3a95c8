"""Band-file rasters and the per-pixel batch pipeline.

Rasters are stored as flat little-endian float32 planes plus a JSON sidecar,
the common convention for coherency-matrix products, so real T3 data can be
fed without converters. Batch kernels run pure per-pixel functions over row
blocks; the block layout is fixed, so outputs are bitwise identical for any
worker count. NaN input pixels propagate to NaN in every derived plane.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import CoherencyMatrix
from .errors import BadRoi, RasterIOError, SizeMismatch
from .orientation import SearchConfig, lee_oa, sd_oa
from .powers import negative_power_stats, sdy4o_decompose, y4o_decompose, y4r_decompose

T3_BANDS = (
    "T11", "T22", "T33",
    "T12_real", "T12_imag",
    "T13_real", "T13_imag",
    "T23_real", "T23_imag",
)

POWER_BANDS = ("Ps", "Pd", "Pv", "Pc")

#: Rows per work unit; independent of the worker count on purpose.
BLOCK_ROWS = 32


@dataclass
class T3Raster:
    """Nine real planes of per-pixel coherency matrices, row-major."""

    bands: np.ndarray  # shape (9, rows, cols), float32, T3_BANDS order
    looks: Optional[int] = None
    description: str = ""

    def __post_init__(self):
        self.bands = np.asarray(self.bands, dtype=np.float32)
        if self.bands.ndim != 3 or self.bands.shape[0] != len(T3_BANDS):
            raise ValueError("bands must have shape (9, rows, cols)")

    @property
    def rows(self) -> int:
        return self.bands.shape[1]

    @property
    def cols(self) -> int:
        return self.bands.shape[2]

    def matrix_at(self, row: int, col: int) -> CoherencyMatrix:
        v = self.bands[:, row, col].astype(np.float64)
        return CoherencyMatrix(
            v[0], v[1], v[2],
            complex(v[3], v[4]), complex(v[5], v[6]), complex(v[7], v[8]),
        )

    def invalid_mask(self) -> np.ndarray:
        return ~np.isfinite(self.bands).all(axis=0)


@dataclass
class PowerRaster:
    """Decomposition power planes plus optional per-pixel diagnostics."""

    ps: np.ndarray
    pd: np.ndarray
    pv: np.ndarray
    pc: np.ndarray
    theta0_deg: Optional[np.ndarray] = None
    delta_h_max: Optional[np.ndarray] = None
    method: str = ""

    def __post_init__(self):
        for name in ("ps", "pd", "pv", "pc", "theta0_deg", "delta_h_max"):
            plane = getattr(self, name)
            if plane is not None:
                setattr(self, name, np.asarray(plane, dtype=np.float32))

    @property
    def rows(self) -> int:
        return self.ps.shape[0]

    @property
    def cols(self) -> int:
        return self.ps.shape[1]

    @property
    def total(self) -> np.ndarray:
        return self.ps + self.pd + self.pv + self.pc

    def negative_percentage(self) -> float:
        return negative_power_stats(self.ps, self.pd)


def _write_plane(path: Path, plane: np.ndarray) -> None:
    np.ascontiguousarray(plane, dtype="<f4").tofile(path)


def _read_plane(path: Path, rows: int, cols: int) -> np.ndarray:
    if not path.exists():
        raise RasterIOError(f"missing band file: {path}")
    expected = rows * cols * 4
    actual = path.stat().st_size
    if actual != expected:
        raise SizeMismatch(
            f"{path.name}: {actual} bytes on disk, metadata implies {expected}"
        )
    return np.fromfile(path, dtype="<f4").reshape(rows, cols)


def _read_metadata(directory: Path) -> dict:
    meta_path = directory / "metadata.json"
    if not meta_path.exists():
        raise RasterIOError(f"missing metadata.json in {directory}")
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
        rows, cols = int(meta["rows"]), int(meta["cols"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise RasterIOError(f"unreadable metadata in {directory}: {exc}") from exc
    if rows <= 0 or cols <= 0:
        raise RasterIOError(f"non-positive raster dimensions in {meta_path}")
    return meta


def write_t3(raster: T3Raster, directory) -> None:
    """Write the nine band files plus metadata.json. Lossless at float32."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, name in enumerate(T3_BANDS):
        _write_plane(directory / f"{name}.bin", raster.bands[i])
    meta = {
        "rows": raster.rows,
        "cols": raster.cols,
        "looks": raster.looks,
        "description": raster.description,
    }
    with open(directory / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2)


def read_t3(directory) -> T3Raster:
    directory = Path(directory)
    meta = _read_metadata(directory)
    rows, cols = int(meta["rows"]), int(meta["cols"])
    bands = np.stack(
        [_read_plane(directory / f"{name}.bin", rows, cols) for name in T3_BANDS]
    )
    looks = meta.get("looks")
    return T3Raster(
        bands=bands,
        looks=None if looks is None else int(looks),
        description=str(meta.get("description", "")),
    )


def write_power(raster: PowerRaster, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    planes = dict(zip(POWER_BANDS, (raster.ps, raster.pd, raster.pv, raster.pc)))
    if raster.theta0_deg is not None:
        planes["theta0_degrees"] = raster.theta0_deg
    if raster.delta_h_max is not None:
        planes["delta_h_max"] = raster.delta_h_max
    for name, plane in planes.items():
        _write_plane(directory / f"{name}.bin", plane)
    meta = {
        "rows": raster.rows,
        "cols": raster.cols,
        "method": raster.method,
        "bands": sorted(planes),
    }
    with open(directory / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2)


def read_power(directory) -> PowerRaster:
    directory = Path(directory)
    meta = _read_metadata(directory)
    rows, cols = int(meta["rows"]), int(meta["cols"])
    planes = {
        name: _read_plane(directory / f"{name}.bin", rows, cols)
        for name in POWER_BANDS
    }
    optional = {}
    for name in ("theta0_degrees", "delta_h_max"):
        path = directory / f"{name}.bin"
        if path.exists():
            optional[name] = _read_plane(path, rows, cols)
    return PowerRaster(
        ps=planes["Ps"],
        pd=planes["Pd"],
        pv=planes["Pv"],
        pc=planes["Pc"],
        theta0_deg=optional.get("theta0_degrees"),
        delta_h_max=optional.get("delta_h_max"),
        method=str(meta.get("method", "")),
    )


# --- batch kernels -----------------------------------------------------------


def default_workers() -> int:
    """Worker count from the POLSAR_SD_THREADS environment variable."""
    try:
        return max(1, int(os.environ.get("POLSAR_SD_THREADS", "1")))
    except ValueError:
        return 1


def _row_blocks(rows: int) -> list[tuple[int, int]]:
    return [(r, min(r + BLOCK_ROWS, rows)) for r in range(0, rows, BLOCK_ROWS)]


def _decompose_block(args) -> tuple[int, dict[str, np.ndarray]]:
    start, block, method, cfg = args
    n_rows, n_cols = block.shape[1], block.shape[2]
    out = {
        name: np.full((n_rows, n_cols), np.nan, dtype=np.float32)
        for name in ("ps", "pd", "pv", "pc", "theta0_deg", "delta")
    }
    sub = T3Raster(bands=block)
    valid = ~sub.invalid_mask()
    for r in range(n_rows):
        for c in range(n_cols):
            if not valid[r, c]:
                continue
            t = sub.matrix_at(r, c)
            if method == "y4o":
                p = y4o_decompose(t)
            elif method == "y4r":
                p = y4r_decompose(t)
            else:
                p, est, params = sdy4o_decompose(t, cfg)
                out["theta0_deg"][r, c] = np.rad2deg(est.theta0)
                out["delta"][r, c] = params.delta_h_max
            out["ps"][r, c] = p.ps
            out["pd"][r, c] = p.pd
            out["pv"][r, c] = p.pv
            out["pc"][r, c] = p.pc
    return start, out


def _oa_block(args) -> tuple[int, dict[str, np.ndarray]]:
    start, block, method, cfg = args
    n_rows, n_cols = block.shape[1], block.shape[2]
    theta = np.full((n_rows, n_cols), np.nan, dtype=np.float32)
    sub = T3Raster(bands=block)
    valid = ~sub.invalid_mask()
    for r in range(n_rows):
        for c in range(n_cols):
            if not valid[r, c]:
                continue
            t = sub.matrix_at(r, c)
            angle = lee_oa(t) if method == "lee" else sd_oa(t, cfg).theta0
            theta[r, c] = np.rad2deg(angle)
    return start, {"theta0_deg": theta}


def _run_blocks(kernel, raster: T3Raster, method: str, cfg: SearchConfig,
                workers: int) -> dict[str, np.ndarray]:
    tasks = [
        (start, raster.bands[:, start:stop, :], method, cfg)
        for start, stop in _row_blocks(raster.rows)
    ]
    results = {}
    if workers <= 1 or len(tasks) <= 1:
        pieces = map(kernel, tasks)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            pieces = list(pool.map(kernel, tasks))
    for start, block_out in pieces:
        results[start] = block_out
    merged = {}
    for name in results[0]:
        merged[name] = np.concatenate(
            [results[start][name] for start, _ in _row_blocks(raster.rows)]
        )
    return merged


def decompose_raster(
    raster: T3Raster,
    method: str,
    cfg: SearchConfig = SearchConfig(),
    workers: Optional[int] = None,
) -> PowerRaster:
    """Apply a decomposition per pixel. method is one of y4o, y4r, sdy4o."""
    if method not in ("y4o", "y4r", "sdy4o"):
        raise ValueError(f"unknown method {method!r}")
    workers = default_workers() if workers is None else workers
    merged = _run_blocks(_decompose_block, raster, method, cfg, workers)
    return PowerRaster(
        ps=merged["ps"],
        pd=merged["pd"],
        pv=merged["pv"],
        pc=merged["pc"],
        theta0_deg=merged["theta0_deg"] if method == "sdy4o" else None,
        delta_h_max=merged["delta"] if method == "sdy4o" else None,
        method=method,
    )


def oa_raster(
    raster: T3Raster,
    method: str,
    cfg: SearchConfig = SearchConfig(),
    workers: Optional[int] = None,
) -> np.ndarray:
    """Per-pixel orientation angle plane in degrees. method: lee or sd."""
    if method not in ("lee", "sd"):
        raise ValueError(f"unknown method {method!r}")
    workers = default_workers() if workers is None else workers
    merged = _run_blocks(_oa_block, raster, method, cfg, workers)
    return merged["theta0_deg"]


def write_angle_plane(theta_deg: np.ndarray, directory, method: str) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write_plane(directory / "theta0_degrees.bin", theta_deg)
    meta = {
        "rows": int(theta_deg.shape[0]),
        "cols": int(theta_deg.shape[1]),
        "method": method,
        "bands": ["theta0_degrees"],
    }
    with open(directory / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2)


# --- products ----------------------------------------------------------------


def rgb_compose(power: PowerRaster) -> np.ndarray:
    """8-bit RGBA composite: R = Pd, G = Pv, B = Ps.

    Each channel is clipped at its 1st-99th percentile over valid pixels and
    square-root stretched; negative powers render as black. NaN pixels come
    out fully transparent.
    """
    channels = [power.pd, power.pv, power.ps]
    valid = np.isfinite(power.ps) & np.isfinite(power.pd) & np.isfinite(power.pv)
    out = np.zeros((power.rows, power.cols, 4), dtype=np.uint8)
    for k, plane in enumerate(channels):
        v = np.where(plane < 0.0, 0.0, plane.astype(np.float64))
        if valid.any():
            lo, hi = np.percentile(v[valid], [1.0, 99.0])
        else:
            lo, hi = 0.0, 0.0
        if hi - lo < 1e-30:
            stretched = np.zeros_like(v)
        else:
            stretched = np.sqrt(np.clip((v - lo) / (hi - lo), 0.0, 1.0))
        out[..., k] = np.where(valid, np.round(stretched * 255.0), 0).astype(np.uint8)
    out[..., 3] = np.where(valid, 255, 0).astype(np.uint8)
    return out


def write_rgb_png(power: PowerRaster, path) -> None:
    from PIL import Image

    Image.fromarray(rgb_compose(power), mode="RGBA").save(path)


@dataclass(frozen=True)
class RoiStats:
    """Mean powers over one rectangular region of interest."""

    roi: tuple[int, int, int, int]
    mean_ps: float
    mean_pd: float
    mean_pv: float
    mean_pc: float
    frac_ps: float
    frac_pd: float
    frac_pv: float
    negative_percent: float

    def as_dict(self) -> dict:
        return {
            "roi": list(self.roi),
            "mean_ps": self.mean_ps,
            "mean_pd": self.mean_pd,
            "mean_pv": self.mean_pv,
            "mean_pc": self.mean_pc,
            "frac_ps": self.frac_ps,
            "frac_pd": self.frac_pd,
            "frac_pv": self.frac_pv,
            "negative_percent": self.negative_percent,
        }


def roi_stats(power: PowerRaster, rois: Sequence[tuple[int, int, int, int]]
              ) -> list[RoiStats]:
    """Mean powers, their fractions of the mean total, and negative-pixel
    percentage for each half-open ROI (r0, c0, r1, c1)."""
    results = []
    for roi in rois:
        r0, c0, r1, c1 = roi
        if not (0 <= r0 < r1 <= power.rows and 0 <= c0 < c1 <= power.cols):
            raise BadRoi(f"roi {roi} outside raster {power.rows}x{power.cols}")
        sel = np.s_[r0:r1, c0:c1]
        planes = [p[sel].astype(np.float64) for p in
                  (power.ps, power.pd, power.pv, power.pc)]
        valid = np.isfinite(planes[0])
        for p in planes[1:]:
            valid &= np.isfinite(p)
        if not valid.any():
            means = [math.nan] * 4
            neg = math.nan
        else:
            means = [float(p[valid].mean()) for p in planes]
            neg = negative_power_stats(planes[0][valid], planes[1][valid])
        total = sum(means)
        fracs = [m / total if total else math.nan for m in means[:3]]
        results.append(
            RoiStats(
                roi=tuple(roi),
                mean_ps=means[0],
                mean_pd=means[1],
                mean_pv=means[2],
                mean_pc=means[3],
                frac_ps=fracs[0],
                frac_pd=fracs[1],
                frac_pv=fracs[2],
                negative_percent=neg,
            )
        )
    return results
