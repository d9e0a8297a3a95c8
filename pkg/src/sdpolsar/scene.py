"""Synthetic scene generation with per-pixel ground truth.

Builds rectangular-region scenes from named archetype matrices (or explicit
matrices), embeds a known orientation per region, and speckles each pixel
with an independent Wishart draw. Ground truth is defined as the angle the
estimators should report, which requires the region bases to be deoriented
before the scene rotation is applied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .core import CoherencyMatrix, rotate_coherency, wishart_sample
from .errors import BadSceneSpec
from .orientation import t33_min_angle


def builtin_archetypes() -> dict[str, CoherencyMatrix]:
    """Named base matrices for the land-cover classes used in scenes.

    "urban" is a measured oriented-urban coherency matrix; the others are
    canonical pure-mechanism matrices (surface-dominant, exactly the
    balanced volume model, double-bounce dominant).
    """
    return {
        "urban": CoherencyMatrix(
            t11=4.56,
            t22=6.06,
            t33=3.50,
            t12=2.28 + 0.72j,
            t13=0.02 + 0.67j,
            t23=1.90 + 0.27j,
        ),
        "surface": CoherencyMatrix(1.0, 0.05, 0.02, 0j, 0j, 0j),
        "volume": CoherencyMatrix(0.5, 0.25, 0.25, 0j, 0j, 0j),
        "dihedral": CoherencyMatrix(0.1, 1.0, 0.05, 0j, 0j, 0j),
    }


def deorient(t: CoherencyMatrix) -> CoherencyMatrix:
    """Rotate a matrix so its own orientation estimate becomes zero.

    At the cross-pol minimum the rotated Re(t23) is exactly zero in exact
    arithmetic; the rounding residual is zeroed so estimators see a clean
    reflection-symmetric target.
    """
    rotated = rotate_coherency(t, t33_min_angle(t))
    return replace(rotated, t23=complex(0.0, rotated.t23.imag))


@dataclass(frozen=True)
class Region:
    """Rectangular patch [r0, r1) x [c0, c1) with a base matrix and truth angle."""

    rect: tuple[int, int, int, int]
    base: CoherencyMatrix
    theta_deg: float
    label: int


@dataclass(frozen=True)
class SceneSpec:
    """Declarative scene description.

    ``looks`` of None means noise-free: pixels carry the region covariance
    exactly. Regions are painted in order over the background (label 0);
    later regions win on overlap.
    """

    rows: int
    cols: int
    regions: tuple[Region, ...]
    looks: Optional[int]
    seed: int
    background: CoherencyMatrix
    normalize_bases: bool = True

    def validate(self) -> None:
        if self.rows <= 0 or self.cols <= 0:
            raise BadSceneSpec(f"grid {self.rows}x{self.cols} is empty")
        if self.looks is not None and int(self.looks) < 1:
            raise BadSceneSpec(f"looks must be a positive integer, got {self.looks}")
        for region in self.regions:
            r0, c0, r1, c1 = region.rect
            if not (0 <= r0 < r1 <= self.rows and 0 <= c0 < c1 <= self.cols):
                raise BadSceneSpec(f"region rect {region.rect} outside grid")
            if not np.isfinite(region.theta_deg):
                raise BadSceneSpec("region angle must be finite")
        for m in [self.background] + [r.base for r in self.regions]:
            if not m.is_positive_definite():
                raise BadSceneSpec("base matrices must be positive definite")

    @classmethod
    def from_json(cls, source: Union[str, dict]) -> "SceneSpec":
        """Load a scene from a JSON document (path or already-parsed dict)."""
        if isinstance(source, dict):
            doc = source
        else:
            with open(source) as fh:
                doc = json.load(fh)
        try:
            regions = tuple(
                Region(
                    rect=tuple(int(v) for v in entry["rect"]),
                    base=_matrix_from_json(entry["base"]),
                    theta_deg=float(entry["theta_deg"]),
                    label=int(entry.get("label", i + 1)),
                )
                for i, entry in enumerate(doc.get("regions", []))
            )
            spec = cls(
                rows=int(doc["rows"]),
                cols=int(doc["cols"]),
                regions=regions,
                looks=None if doc.get("looks") is None else int(doc["looks"]),
                seed=int(doc.get("seed", 0)),
                background=_matrix_from_json(doc.get("background", "volume")),
                normalize_bases=bool(doc.get("normalize_bases", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BadSceneSpec(f"malformed scene document: {exc}") from exc
        spec.validate()
        return spec


def _matrix_from_json(entry) -> CoherencyMatrix:
    if isinstance(entry, str):
        archetypes = builtin_archetypes()
        if entry not in archetypes:
            raise BadSceneSpec(
                f"unknown archetype {entry!r}; available: {sorted(archetypes)}"
            )
        return archetypes[entry]
    return CoherencyMatrix(
        t11=float(entry["t11"]),
        t22=float(entry["t22"]),
        t33=float(entry["t33"]),
        t12=complex(*entry.get("t12", (0.0, 0.0))),
        t13=complex(*entry.get("t13", (0.0, 0.0))),
        t23=complex(*entry.get("t23", (0.0, 0.0))),
    )


@dataclass(frozen=True)
class GroundTruth:
    """Per-pixel truth: the angle estimators should report, and class labels."""

    theta_deg: np.ndarray
    labels: np.ndarray


def pixel_rng(seed: int, row: int, col: int) -> np.random.Generator:
    """Independent per-pixel generator derived from (seed, row, col).

    Seeding by the coordinate triple makes the output independent of pixel
    visiting order, so any parallel schedule reproduces the same scene.
    """
    return np.random.default_rng([seed, row, col])


def generate_scene(spec: SceneSpec) -> tuple["T3Raster", GroundTruth]:
    """Realise a scene: per-pixel coherency matrices plus ground truth.

    Each pixel carries the region covariance rotated by the negative of its
    truth angle (so compensation recovers the angle), then — unless
    noise-free — one Wishart draw at the configured look count.
    """
    from .raster import T3Raster  # local import to keep layering one-way

    spec.validate()
    theta_truth = np.zeros((spec.rows, spec.cols), dtype=np.float32)
    labels = np.zeros((spec.rows, spec.cols), dtype=np.int32)

    # Paint the region index map; -1 marks background.
    index_map = np.full((spec.rows, spec.cols), -1, dtype=np.int32)
    for i, region in enumerate(spec.regions):
        r0, c0, r1, c1 = region.rect
        index_map[r0:r1, c0:c1] = i
        theta_truth[r0:r1, c0:c1] = region.theta_deg
        labels[r0:r1, c0:c1] = region.label

    def scene_matrix(base: CoherencyMatrix, theta_deg: float) -> CoherencyMatrix:
        if spec.normalize_bases:
            base = deorient(base)
        return rotate_coherency(base, -np.deg2rad(theta_deg))

    sigmas = [scene_matrix(r.base, r.theta_deg) for r in spec.regions]
    sigma_bg = scene_matrix(spec.background, 0.0)

    bands = np.empty((9, spec.rows, spec.cols), dtype=np.float32)
    for row in range(spec.rows):
        for col in range(spec.cols):
            i = index_map[row, col]
            sigma = sigma_bg if i < 0 else sigmas[i]
            if spec.looks is None:
                m = sigma
            else:
                m = wishart_sample(sigma, spec.looks, pixel_rng(spec.seed, row, col))
            bands[:, row, col] = (
                m.t11, m.t22, m.t33,
                m.t12.real, m.t12.imag,
                m.t13.real, m.t13.imag,
                m.t23.real, m.t23.imag,
            )

    raster = T3Raster(bands=bands, looks=spec.looks, description="simulated scene")
    return raster, GroundTruth(theta_deg=theta_truth, labels=labels)
