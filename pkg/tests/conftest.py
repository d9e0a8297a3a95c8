import numpy as np
import pytest

from sdpolsar import CoherencyMatrix
from sdpolsar.scene import builtin_archetypes


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def urban():
    return builtin_archetypes()["urban"]


def random_psd(rng, scale=1.0, ridge=0.0):
    """Random Hermitian PSD 3x3 matrix from a complex factor product."""
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    m = a @ a.conj().T / 3.0 * scale + ridge * np.eye(3)
    return CoherencyMatrix.from_array(m)


def random_hermitian(rng, scale=1.0):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    return CoherencyMatrix.from_array(0.5 * (a + a.conj().T) * scale)


def rotation_matrix(theta):
    """Independent oracle: the rotation as an explicit matrix product."""
    c, s = np.cos(2.0 * theta), np.sin(2.0 * theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]], dtype=complex)


def rotate_by_matmul(t: CoherencyMatrix, theta: float) -> np.ndarray:
    """U T U^-1 with an actual matrix inverse; used to check the closed form."""
    u = rotation_matrix(theta)
    return u @ t.to_array() @ np.linalg.inv(u)
