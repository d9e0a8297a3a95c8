"""Polarization orientation angle estimation.

Two estimators over the same target: the closed-form cross-pol minimiser
(quadrant-resolved arctangent) and the stochastic-distance grid search that
maximises the distance between rotated and un-rotated diagonal channels.
Both report an angle wrapped into [-pi/8, pi/8]; the unwrapped candidate is
kept alongside because downstream power modification evaluates there.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass
from typing import List

import numpy as np

from .core import CoherencyMatrix, rotated_diagonal
from .divergence import (
    DistanceFamily,
    DistanceValue,
    gamma_bhattacharyya_coefficient,
)
from .errors import InvalidParams, InvalidVariance, OutOfRange

_QUARTER_PI = np.pi / 4.0
_EIGHTH_PI = np.pi / 8.0

#: Curves whose maximum distance stays below this are treated as flat.
FLAT_TOL = 1e-12


@dataclass(frozen=True)
class SearchConfig:
    """Grid-search configuration for the stochastic-distance estimator.

    ``l_eval`` only scales reported distance values; the located angle is
    independent of it. ``l_cap`` bounds the look-parameter maximisation used
    by the power-modification stage.
    """

    grid_step: float = np.deg2rad(0.1)
    l_eval: float = 4.0
    distance_family: DistanceFamily = DistanceFamily.HELLINGER
    l_cap: float = 1e4

    def __post_init__(self):
        if not 0.0 < self.grid_step <= np.pi / 180.0:
            raise InvalidParams("grid_step must be in (0, 1 degree]")
        if not self.l_eval > 0.0:
            raise InvalidParams("l_eval must be positive")
        if not self.l_cap > 0.0:
            raise InvalidParams("l_cap must be positive")


@dataclass(frozen=True)
class OaEstimate:
    """Result of the stochastic-distance orientation search.

    ``phi`` is the selected unwrapped candidate in [-pi/4, pi/4]; ``theta0``
    its wrapped label in [-pi/8, pi/8]. ``delta_h`` is the relative distance
    between the cross-pol and co-pol curves at ``phi`` (non-negative whenever
    the cross-pol branch was selectable). ``criterion_met`` is False only for
    the fallback path where neither candidate satisfied the selection rule.
    """

    phi: float
    theta0: float
    dh33_at_phi: DistanceValue
    dh22_at_phi: DistanceValue
    delta_h: float
    chosen_channel: str
    criterion_met: bool = True


@dataclass(frozen=True)
class OaCurves:
    """Distance curves on the search grid, for diagnostics and plotting."""

    theta: np.ndarray
    dh33: np.ndarray
    dh22: np.ndarray
    family: DistanceFamily
    looks: float

    @property
    def theta_deg(self) -> np.ndarray:
        return np.rad2deg(self.theta)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta_deg", "dH3", "dH2"])
            for t, a, b in zip(self.theta_deg, self.dh33, self.dh22):
                writer.writerow([f"{t:.6f}", f"{a:.12g}", f"{b:.12g}"])


def wrap_oa(phi: float) -> float:
    """Wrap an angle from [-pi/4, pi/4] into [-pi/8, pi/8] by +-pi/4."""
    if abs(phi) > _QUARTER_PI + 1e-12:
        raise OutOfRange(f"angle {phi} rad outside [-pi/4, pi/4]")
    if phi < -_EIGHTH_PI:
        return phi + _QUARTER_PI
    if phi > _EIGHTH_PI:
        return phi - _QUARTER_PI
    return phi


def t33_min_angle(t: CoherencyMatrix) -> float:
    """Angle in (-pi/4, pi/4] that globally minimises the rotated t33.

    Quadrant-resolved closed form; returns 0 for the degenerate case
    t22 == t33 with Re(t23) == 0, where every angle is stationary.
    """
    return 0.25 * float(np.arctan2(2.0 * t.t23.real, t.t22 - t.t33))


def lee_oa(t: CoherencyMatrix) -> float:
    """Closed-form orientation estimate, wrapped into [-pi/8, pi/8].

    The wrap relabels the minimising angle by +-pi/4 when it falls outside
    the reporting range (which happens exactly when t33 exceeds t22).
    """
    return wrap_oa(t33_min_angle(t))


@functools.lru_cache(maxsize=8)
def _grid(step: float) -> np.ndarray:
    """Circular angle grid over [-pi/4, pi/4) with an exact tiling step."""
    n = max(8, round((np.pi / 2.0) / step))
    return -_QUARTER_PI + (np.pi / 2.0) * np.arange(n) / n


def _value_curve(base: float, rotated: np.ndarray, family: DistanceFamily,
                 looks: float) -> np.ndarray:
    if family is DistanceFamily.HELLINGER:
        bc = gamma_bhattacharyya_coefficient(base, rotated)
        return 1.0 - bc**looks
    ratio = rotated / base
    return np.maximum(0.0, 0.5 * looks * (ratio + 1.0 / ratio - 2.0))


def _distance_value(base: float, rotated: float, cfg: SearchConfig) -> DistanceValue:
    value = float(_value_curve(base, np.asarray(rotated), cfg.distance_family,
                               cfg.l_eval))
    return DistanceValue(value, cfg.distance_family, cfg.l_eval)


def _curves(t: CoherencyMatrix, cfg: SearchConfig):
    if not (t.t22 > 0.0 and t.t33 > 0.0):
        raise InvalidVariance("t22 and t33 must be positive for the search")
    theta = _grid(cfg.grid_step)
    t22_r, t33_r = rotated_diagonal(t.t22, t.t33, t.t23.real, theta)
    return theta, t22_r, t33_r


def oa_curves(t: CoherencyMatrix, cfg: SearchConfig = SearchConfig()) -> OaCurves:
    """Evaluate both channel distance curves over the full grid.

    The returned table includes the +pi/4 endpoint (a copy of -pi/4, since
    the rotation is pi/2-periodic in theta) so plots span the closed range.
    """
    theta, t22_r, t33_r = _curves(t, cfg)
    dh33 = _value_curve(t.t33, t33_r, cfg.distance_family, cfg.l_eval)
    dh22 = _value_curve(t.t22, t22_r, cfg.distance_family, cfg.l_eval)
    theta_full = np.append(theta, _QUARTER_PI)
    return OaCurves(
        theta_full,
        np.append(dh33, dh33[0]),
        np.append(dh22, dh22[0]),
        cfg.distance_family,
        cfg.l_eval,
    )


def _circular_peaks(values: np.ndarray) -> List[int]:
    """Indices of local maxima on a circular sequence.

    Plateaus (runs of equal values) count as a single peak at their midpoint.
    A constant sequence has no peaks.
    """
    n = len(values)
    change = [j for j in range(n) if values[j] != values[j - 1]]
    if not change:
        return []
    start = change[0]
    peaks = []
    j = start
    while True:
        run_val = values[j]
        k = j
        run_len = 0
        while values[k] == run_val and run_len < n:
            run_len += 1
            k = (k + 1) % n
        prev_val = values[(j - 1) % n]
        next_val = values[k]
        if run_val > prev_val and run_val > next_val:
            peaks.append((j + (run_len - 1) // 2) % n)
        j = k
        if j == start:
            break
    return peaks


def _flat_estimate(cfg: SearchConfig) -> OaEstimate:
    zero = DistanceValue(0.0, cfg.distance_family, cfg.l_eval)
    return OaEstimate(0.0, 0.0, zero, zero, 0.0, "t33", True)


def sd_oa(t: CoherencyMatrix, cfg: SearchConfig = SearchConfig()) -> OaEstimate:
    """Estimate the orientation angle by maximising a stochastic distance.

    Evaluates the distance between un-rotated and rotated t33 (and t22) over
    [-pi/4, pi/4], takes the top two cross-pol peaks (they sit ~pi/4 apart),
    and keeps the candidate where the cross-pol distance dominates the co-pol
    one; that is the candidate at which t33 is minimised rather than
    maximised. The peak location is found on the per-look Bhattacharyya
    coefficient, so it is exactly independent of ``l_eval`` and of the
    distance family.
    """
    theta, t22_r, t33_r = _curves(t, cfg)
    bc33 = gamma_bhattacharyya_coefficient(t.t33, t33_r)
    bc22 = gamma_bhattacharyya_coefficient(t.t22, t22_r)
    if float(np.max(1.0 - bc33)) < FLAT_TOL:
        return _flat_estimate(cfg)

    peaks = _circular_peaks(-bc33)
    if not peaks:
        return _flat_estimate(cfg)
    peaks.sort(key=lambda i: bc33[i])
    candidates = peaks[:2]

    selected = [i for i in candidates if bc33[i] <= bc22[i]]
    if selected:
        # Tie-break on the wrapped magnitude so mirror-symmetric targets
        # deterministically report zero.
        idx = min(selected, key=lambda i: (abs(wrap_oa(theta[i])), wrap_oa(theta[i]), i))
        channel, met = "t33", True
    else:
        idx = candidates[0]
        channel, met = "t22", False

    phi = float(theta[idx])
    dh33 = _distance_value(t.t33, float(t33_r[idx]), cfg)
    dh22 = _distance_value(t.t22, float(t22_r[idx]), cfg)
    return OaEstimate(
        phi=phi,
        theta0=wrap_oa(phi),
        dh33_at_phi=dh33,
        dh22_at_phi=dh22,
        delta_h=dh33.value - dh22.value,
        chosen_channel=channel,
        criterion_met=met,
    )
