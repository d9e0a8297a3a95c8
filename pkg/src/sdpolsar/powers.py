"""Four-component scattering powers and their stochastic-distance variant.

Implements the Yamaguchi-style four-component decomposition (surface,
double-bounce, volume, helix) in the coherency basis, its rotated variant,
and the modification that redistributes volume power into double-bounce and
surface using the maximum relative distance between the rotated diagonal
channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CoherencyMatrix, rotate_coherency, rotated_diagonal
from .divergence import gamma_bhattacharyya_coefficient
from .errors import (
    DegenerateInput,
    EmptyRaster,
    InternalInvariantViolation,
    InvalidParams,
    InvalidVariance,
    OutOfRange,
)
from .orientation import SearchConfig, OaEstimate, sd_oa, t33_min_angle

_QUARTER_PI = np.pi / 4.0
_EPS = 1e-12


@dataclass(frozen=True)
class PowerComponents:
    """Surface, double-bounce, volume and helix powers in linear units.

    ``ps`` and ``pd`` may be negative (negative-power pixels are a real and
    counted phenomenon, never clipped); ``pv`` and ``pc`` are non-negative by
    construction. The four components always sum to ``total``.
    """

    ps: float
    pd: float
    pv: float
    pc: float
    total: float

    def __post_init__(self):
        parts = (self.ps, self.pd, self.pv, self.pc, self.total)
        if all(math.isfinite(x) for x in parts):
            residual = abs(self.ps + self.pd + self.pv + self.pc - self.total)
            if residual > 1e-9 * max(abs(self.total), 1.0):
                raise InternalInvariantViolation(
                    f"components sum to {self.total - residual}, expected {self.total}"
                )

    @property
    def fractions(self) -> tuple[float, float, float, float]:
        """(ps, pd, pv, pc) as fractions of the total power."""
        return (
            self.ps / self.total,
            self.pd / self.total,
            self.pv / self.total,
            self.pc / self.total,
        )


@dataclass(frozen=True)
class ModulationParams:
    """Parameters of the power redistribution step.

    ``alpha`` and ``beta`` split the removed volume power between
    double-bounce and surface and must sum to one exactly; ``delta_h_max``
    is the maximum relative distance over the look parameter, attained at
    ``l_m``.
    """

    alpha: float
    beta: float
    delta_h_max: float
    l_m: float

    def __post_init__(self):
        if not (0.5 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 0.5):
            raise InvalidParams(f"alpha={self.alpha}, beta={self.beta} out of range")
        if self.alpha + self.beta != 1.0:
            raise InvalidParams("alpha + beta must equal 1 exactly")
        if not 0.0 <= self.delta_h_max <= 1.0:
            raise InvalidParams(f"delta_h_max={self.delta_h_max} outside [0, 1]")
        if not self.l_m > 0.0:
            raise InvalidParams("l_m must be positive")


def y4o_decompose(t: CoherencyMatrix) -> PowerComponents:
    """Four-component decomposition of an un-rotated coherency matrix.

    Pipeline: helix power from the imaginary cross-correlation (clamped so
    branch volumes stay non-negative), volume model chosen by the co-pol
    power ratio in dB, then a surface / double-bounce split of the remainder.
    Negative ps/pd are kept as-is; the total equals the input trace.
    """
    tp = t.trace
    if not tp > 0.0:
        raise DegenerateInput(f"trace must be positive, got {tp}")

    # Helix power, clamped against the smallest cross-pol power reachable by
    # rotation (a rotation invariant), so branch volumes stay non-negative
    # and the helix component is exactly roll-invariant.
    mean23 = 0.5 * (t.t22 + t.t33)
    radius23 = math.hypot(0.5 * (t.t22 - t.t33), t.t23.real)
    pc = min(2.0 * abs(t.t23.imag), max(0.0, 2.0 * (mean23 - radius23)))

    # Co-pol powers reconstructed from the coherency representation.
    half = 0.5 * (t.t11 + t.t22)
    c11 = max(half + t.t12.real, _EPS * tp)
    c33 = max(half - t.t12.real, _EPS * tp)
    ratio = 10.0 * math.log10(c11 / c33)

    if abs(ratio) <= 2.0:
        # The clamp on pc keeps both branch volumes non-negative; the floor
        # only absorbs the rounding residue when the clamp binds exactly.
        pv = max(0.0, 4.0 * t.t33 - 2.0 * pc)
        s_rem = t.t11 - 0.5 * pv
        d_rem = t.t22 - 0.5 * pc - 0.25 * pv
        c_rem = t.t12
    else:
        pv = max(0.0, (15.0 / 8.0) * (2.0 * t.t33 - pc))
        s_rem = t.t11 - 0.5 * pv
        d_rem = t.t22 - 0.5 * pc - (7.0 / 30.0) * pv
        c_rem = t.t12 - math.copysign(pv / 6.0, ratio)

    c_pow = abs(c_rem) ** 2
    if 2.0 * t.t11 + pc - tp > 0.0:
        if s_rem < _EPS * tp:
            ps, pd = s_rem + d_rem, 0.0
        else:
            ps = s_rem + c_pow / s_rem
            pd = d_rem - c_pow / s_rem
    else:
        if d_rem < _EPS * tp:
            pd, ps = s_rem + d_rem, 0.0
        else:
            pd = d_rem + c_pow / d_rem
            ps = s_rem - c_pow / d_rem

    return PowerComponents(ps=ps, pd=pd, pv=pv, pc=pc, total=tp)


def y4r_decompose(t: CoherencyMatrix) -> PowerComponents:
    """Four-component decomposition after compensating the orientation.

    Rotates by the angle that genuinely minimises the rotated cross-pol
    power before decomposing. The helix power is roll-invariant, so it
    matches the un-rotated decomposition exactly.
    """
    return y4o_decompose(rotate_coherency(t, t33_min_angle(t)))


def relative_distance_max(r2: float, r3: float, l_cap: float = 1e4
                          ) -> tuple[float, float]:
    """Maximise r2**L - r3**L over the look parameter L in (0, l_cap].

    For 0 < r3 < r2 < 1 the unique stationary point is
    L* = ln(ln r3 / ln r2) / ln(r2 / r3); the curve rises to it and then
    decays toward zero. Degenerate orderings (r2 <= r3) return (0, 1), and
    r2 == 1 pushes the maximiser to the cap.
    """
    if not (0.0 < r3 <= 1.0 and 0.0 < r2 <= 1.0):
        raise InternalInvariantViolation(
            f"per-look coefficients outside (0, 1]: r2={r2}, r3={r3}"
        )
    if r2 - r3 <= 1e-15:
        return 0.0, 1.0
    if r2 >= 1.0:
        # Co-pol channel unchanged by the rotation: the distance gap grows
        # monotonically with L, so the cap is the maximiser.
        delta = min(1.0, max(0.0, 1.0 - r3**l_cap))
        return delta, l_cap
    l_star = math.log(math.log(r3) / math.log(r2)) / math.log(r2 / r3)
    l_m = min(l_star, l_cap)
    delta = min(1.0, max(0.0, r2**l_m - r3**l_m))
    return delta, l_m


def delta_h_max(
    t: CoherencyMatrix, phi: float, l_cap: float = 1e4
) -> tuple[float, float]:
    """Maximum relative distance between the channel curves over looks.

    Evaluates the per-look coefficients r3 (cross-pol) and r2 (co-pol) at
    the unwrapped angle ``phi`` and hands them to
    :func:`relative_distance_max`. Returns (delta_max, l_at_max).
    """
    if not (t.t22 > 0.0 and t.t33 > 0.0):
        raise InvalidVariance("t22 and t33 must be positive")
    t22_r, t33_r = rotated_diagonal(t.t22, t.t33, t.t23.real, phi)
    r3 = float(gamma_bhattacharyya_coefficient(t.t33, t33_r))
    r2 = float(gamma_bhattacharyya_coefficient(t.t22, t22_r))
    return relative_distance_max(r2, r3, l_cap)


def alpha_beta_map(phi: float) -> tuple[float, float]:
    """Linear map from the orientation magnitude to the split parameters.

    |phi| in [0, pi/4] maps to alpha in [0.5, 1.0]; beta = 1 - alpha. The
    sign of phi is immaterial: positive and negative orientations are
    physically symmetric.
    """
    if abs(phi) > _QUARTER_PI + 1e-12:
        raise OutOfRange(f"angle {phi} rad outside [-pi/4, pi/4]")
    alpha = 0.5 + 0.5 * min(1.0, abs(phi) / _QUARTER_PI)
    return alpha, 1.0 - alpha


def sdy4o_modify(p: PowerComponents, m: ModulationParams) -> PowerComponents:
    """Redistribute volume power into double-bounce and surface.

    pv' = pv (1 - delta); pd' = pd + alpha pv delta; ps' = ps + beta pv
    delta; pc unchanged. Because alpha + beta = 1 the total is conserved.
    """
    if m.alpha + m.beta != 1.0 or not 0.0 <= m.delta_h_max <= 1.0:
        raise InvalidParams("modulation parameters violate their invariants")
    shift = p.pv * m.delta_h_max
    return PowerComponents(
        ps=p.ps + m.beta * shift,
        pd=p.pd + m.alpha * shift,
        pv=p.pv * (1.0 - m.delta_h_max),
        pc=p.pc,
        total=p.total,
    )


def sdy4o_decompose(
    t: CoherencyMatrix, cfg: SearchConfig = SearchConfig()
) -> tuple[PowerComponents, OaEstimate, ModulationParams]:
    """Full stochastic-distance pipeline on one coherency matrix.

    Estimates the orientation, maximises the relative distance over looks at
    the unwrapped angle, maps the angle to the split parameters, and applies
    the redistribution to the powers of the *un-rotated* decomposition (the
    method modifies powers, it does not rotate the matrix).
    """
    est = sd_oa(t, cfg)
    delta, l_m = delta_h_max(t, est.phi, cfg.l_cap)
    alpha, beta = alpha_beta_map(est.phi)
    params = ModulationParams(alpha=alpha, beta=beta, delta_h_max=delta, l_m=l_m)
    return sdy4o_modify(y4o_decompose(t), params), est, params


def negative_power_stats(ps: np.ndarray, pd: np.ndarray) -> float:
    """Percentage of valid pixels whose surface or double-bounce power is negative.

    Volume and helix are non-negative by construction, so they never
    contribute. NaN pixels are excluded from the population.
    """
    ps = np.asarray(ps, dtype=float)
    pd = np.asarray(pd, dtype=float)
    if ps.shape != pd.shape:
        raise ValueError("ps and pd planes must have the same shape")
    valid = np.isfinite(ps) & np.isfinite(pd)
    n = int(valid.sum())
    if n == 0:
        raise EmptyRaster("no valid pixels to summarise")
    negative = ((ps < 0.0) | (pd < 0.0)) & valid
    return 100.0 * float(negative.sum()) / n
