"""Coherency-matrix primitives.

Domain types for scattering vectors and 3x3 Hermitian coherency matrices,
plus the operations every other module builds on: Pauli basis conversion,
multilooking, unitary rotation about the line of sight, and scaled complex
Wishart sampling / log-density evaluation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

from .errors import EmptySampleSet, NotPositiveDefinite

_SQRT2 = np.sqrt(2.0)

#: Relative eigenvalue tolerance used when checking positive semi-definiteness.
#: Multilooked estimates can carry tiny negative eigenvalues from rounding.
PSD_TOL = 1e-9


class Basis(enum.Enum):
    LEXICOGRAPHIC = "lexicographic"
    PAULI = "pauli"


@dataclass(frozen=True)
class ScatteringVector:
    """Single-look scattering vector with its basis tag.

    In the lexicographic basis the components are (S_HH, sqrt(2)*S_HV, S_VV);
    in the Pauli basis they are (S_HH+S_VV, S_HH-S_VV, 2*S_HV) / sqrt(2).
    """

    s1: complex
    s2: complex
    s3: complex
    basis: Basis = Basis.LEXICOGRAPHIC

    @property
    def span(self) -> float:
        """Total power; identical in both bases."""
        return abs(self.s1) ** 2 + abs(self.s2) ** 2 + abs(self.s3) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.s1, self.s2, self.s3], dtype=complex)


def pauli_from_lexicographic(v: ScatteringVector) -> ScatteringVector:
    """Convert a lexicographic scattering vector to the Pauli basis.

    The 1/sqrt(2) normalisation makes the conversion unitary, so the span is
    conserved exactly. Note the lexicographic cross term already carries the
    sqrt(2) weight, hence it maps to the third Pauli component unchanged.
    """
    if v.basis is not Basis.LEXICOGRAPHIC:
        raise ValueError("input vector must be in the lexicographic basis")
    return ScatteringVector(
        (v.s1 + v.s3) / _SQRT2,
        (v.s1 - v.s3) / _SQRT2,
        v.s2,
        Basis.PAULI,
    )


@dataclass(frozen=True)
class CoherencyMatrix:
    """Upper triangle of a 3x3 Hermitian coherency (or covariance) matrix.

    Only six scalars are stored; the lower triangle is implied, so the value
    is Hermitian by construction. Diagonal entries are channel powers.
    """

    t11: float
    t22: float
    t33: float
    t12: complex
    t13: complex
    t23: complex

    @classmethod
    def from_array(cls, m: np.ndarray) -> "CoherencyMatrix":
        """Build from a full 3x3 array, folding any rounding asymmetry."""
        m = np.asarray(m, dtype=complex)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
        h = 0.5 * (m + m.conj().T)
        return cls(
            float(h[0, 0].real),
            float(h[1, 1].real),
            float(h[2, 2].real),
            complex(h[0, 1]),
            complex(h[0, 2]),
            complex(h[1, 2]),
        )

    def to_array(self) -> np.ndarray:
        t12, t13, t23 = self.t12, self.t13, self.t23
        return np.array(
            [
                [self.t11, t12, t13],
                [np.conj(t12), self.t22, t23],
                [np.conj(t13), np.conj(t23), self.t33],
            ],
            dtype=complex,
        )

    @property
    def trace(self) -> float:
        return self.t11 + self.t22 + self.t33

    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues in ascending order."""
        return np.linalg.eigvalsh(self.to_array())

    def is_positive_semidefinite(self, tol: float = PSD_TOL) -> bool:
        return bool(self.eigenvalues()[0] >= -tol * abs(self.trace))

    def is_positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.to_array())
        except np.linalg.LinAlgError:
            return False
        return True


MatrixLike = Union[CoherencyMatrix, np.ndarray]


def _as_array(m: MatrixLike) -> np.ndarray:
    if isinstance(m, CoherencyMatrix):
        return m.to_array()
    return np.asarray(m, dtype=complex)


def _cholesky_or_raise(m: np.ndarray, what: str) -> np.ndarray:
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"{what} is not positive definite") from None


def multilook(samples: Sequence[ScatteringVector]) -> tuple[CoherencyMatrix, int]:
    """Average outer products of scattering vectors.

    Returns the L-look coherency matrix (1/L) * sum_l z_l z_l^H together with
    the look count L = len(samples). Hermitian PSD by construction.
    """
    if len(samples) == 0:
        raise EmptySampleSet("cannot multilook an empty sample list")
    bases = {s.basis for s in samples}
    if len(bases) > 1:
        raise ValueError("all samples must share one basis")
    z = np.array([[s.s1, s.s2, s.s3] for s in samples], dtype=complex)
    m = z.T @ z.conj() / len(samples)
    return CoherencyMatrix.from_array(m), len(samples)


def rotated_diagonal(t22, t33, re_t23, theta):
    """Second and third diagonal entries after rotating by ``theta``.

    Works elementwise on arrays; this closed form is what the per-pixel grid
    search evaluates, so it must stay consistent with :func:`rotate_coherency`.
    """
    c = np.cos(2.0 * theta)
    s = np.sin(2.0 * theta)
    cross = 2.0 * c * s * re_t23
    t22_r = t22 * c * c + t33 * s * s + cross
    t33_r = t22 * s * s + t33 * c * c - cross
    return t22_r, t33_r


def rotate_coherency(t: CoherencyMatrix, theta: float) -> CoherencyMatrix:
    """Unitary rotation of the coherency matrix about the line of sight.

    The rotation acts on the second and third Pauli channels with angle
    2*theta; t11, the trace and Im(t23) are invariant.
    """
    c = np.cos(2.0 * theta)
    s = np.sin(2.0 * theta)
    t22_r, t33_r = rotated_diagonal(t.t22, t.t33, t.t23.real, theta)
    re23 = (t.t33 - t.t22) * c * s + (c * c - s * s) * t.t23.real
    return CoherencyMatrix(
        t.t11,
        float(t22_r),
        float(t33_r),
        c * t.t12 + s * t.t13,
        -s * t.t12 + c * t.t13,
        complex(re23, t.t23.imag),
    )


def wishart_sample(
    sigma: MatrixLike,
    looks: int,
    rng: Union[int, Sequence[int], np.random.Generator],
) -> CoherencyMatrix:
    """Draw one L-look sample matrix from the scaled complex Wishart law.

    The draw averages ``looks`` outer products of independent circular complex
    Gaussian vectors with covariance ``sigma`` (Cholesky factor applied to
    unit-variance draws). Deterministic for a given seed or generator state.
    """
    looks = int(looks)
    if looks < 1:
        raise ValueError("looks must be a positive integer")
    a = _cholesky_or_raise(_as_array(sigma), "sigma")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    p = a.shape[0]
    w = rng.standard_normal((looks, p)) + 1j * rng.standard_normal((looks, p))
    z = (w / _SQRT2) @ a.T
    m = z.T @ z.conj() / looks
    return CoherencyMatrix.from_array(m)


def wishart_log_density(z: MatrixLike, sigma: MatrixLike, looks: float) -> float:
    """Log density of the scaled complex Wishart distribution.

    Includes the full multivariate gamma normaliser. Requires looks > p - 1
    for the density to be proper.
    """
    zm = _as_array(z)
    sm = _as_array(sigma)
    if zm.shape != sm.shape:
        raise ValueError("z and sigma must have the same shape")
    p = zm.shape[0]
    if not looks > p - 1:
        raise ValueError(f"looks must exceed p - 1 = {p - 1}")
    _cholesky_or_raise(zm, "z")
    _cholesky_or_raise(sm, "sigma")
    _, logdet_z = np.linalg.slogdet(zm)
    _, logdet_s = np.linalg.slogdet(sm)
    tr = float(np.trace(np.linalg.solve(sm, zm)).real)
    log_gamma_p = p * (p - 1) / 2.0 * np.log(np.pi) + sum(
        gammaln(looks - nu + 1) for nu in range(1, p + 1)
    )
    return float(
        p * looks * np.log(looks)
        + (looks - p) * logdet_z
        - looks * tr
        - log_gamma_p
        - looks * logdet_s
    )
