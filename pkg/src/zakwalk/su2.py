"""2x2 complex algebra for coins and composed rotations.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype
``complex128``; spinors are arrays of shape ``(2,)`` on the basis
H = (1, 0), V = (0, 1).

Sign convention: ``rotation_n(n, theta) == expm(-1j * theta * pauli_dot(n))``
where ``pauli_dot(n) = -n_x sx + n_y sy + n_z sz``. This is the only generator
for which the displayed rotation matrix, ``rotation_x`` and ``rotation_y`` all
agree, and it is also the matrix diagonalized by the closed-form eigenvectors
in :mod:`zakwalk.bloch`.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "IDENTITY",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "H",
    "V",
    "rotation_n",
    "rotation_x",
    "rotation_y",
    "pauli_dot",
    "compose",
    "dagger",
    "is_unitary",
    "unitarity_error",
    "global_phase_ratio",
    "spinor",
    "is_normalized",
]

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

H = np.array([1, 0], dtype=complex)
V = np.array([0, 1], dtype=complex)

_AXIS_TOL = 1e-9
PROPORTIONALITY_TOL = 1e-10


def _freeze(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


for _m in (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, H, V):
    _freeze(_m)


def rotation_n(axis: Sequence[float], theta: float) -> np.ndarray:
    """Rotation by ``theta`` about the unit vector ``axis``.

    Returns::

        [[cos t - i n_z sin t, (i n_x - n_y) sin t],
         [(i n_x + n_y) sin t, cos t + i n_z sin t]]

    Raises
    ------
    InvalidArgumentError
        If ``axis`` is not a unit 3-vector to within 1e-9.
    """
    nx, ny, nz = (float(x) for x in axis)
    norm = math.sqrt(nx * nx + ny * ny + nz * nz)
    if not math.isfinite(norm) or abs(norm - 1.0) > _AXIS_TOL:
        raise InvalidArgumentError(f"rotation axis must be a unit vector, got norm {norm!r}")
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [complex(c, -nz * s), complex(-ny * s, nx * s)],
            [complex(ny * s, nx * s), complex(c, nz * s)],
        ]
    )


def rotation_y(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation_x(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)


def pauli_dot(n: Sequence[float]) -> np.ndarray:
    """Hermitian generator of :func:`rotation_n` for direction ``n``.

    ``[[n_z, -(n_x + i n_y)], [-(n_x - i n_y), -n_z]]``; its eigenvalues are
    ``+-|n|``.
    """
    nx, ny, nz = (float(x) for x in n)
    return np.array(
        [[nz, complex(-nx, -ny)], [complex(-nx, ny), -nz]],
        dtype=complex,
    )


def compose(m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    """Matrix product ``m1 @ m2`` (``m2`` acts first)."""
    return np.asarray(m1, dtype=complex) @ np.asarray(m2, dtype=complex)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def unitarity_error(m: np.ndarray) -> float:
    """Max-entry norm of ``M^dagger M - I``."""
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(dagger(m) @ m - IDENTITY)))


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    return unitarity_error(m) <= tol


def global_phase_ratio(
    m1: np.ndarray, m2: np.ndarray, tol: float = PROPORTIONALITY_TOL
) -> float | None:
    """Phase ``alpha`` in [0, 2pi) with ``m2 == exp(i alpha) * m1``, else ``None``.

    The entrywise comparison is made after scaling both matrices by the
    largest entry modulus of the pair.

    Raises
    ------
    InvalidArgumentError
        If both matrices are zero.
    """
    m1 = np.asarray(m1, dtype=complex)
    m2 = np.asarray(m2, dtype=complex)
    scale = max(float(np.max(np.abs(m1))), float(np.max(np.abs(m2))))
    if scale == 0.0:
        raise InvalidArgumentError("global phase of two zero matrices is undefined")
    a, b = m1 / scale, m2 / scale
    # least-squares phase: b ~ z a with z = <a, b> / <a, a>
    denom = np.vdot(a, a)
    overlap = np.vdot(a, b)
    if abs(denom) == 0.0 or abs(overlap) == 0.0:
        return None
    z = overlap / abs(overlap)
    if float(np.max(np.abs(b - z * a))) > tol:
        return None
    alpha = math.atan2(z.imag, z.real) % (2.0 * math.pi)
    # the modulo can round a tiny negative angle up to exactly 2pi
    return 0.0 if alpha >= 2.0 * math.pi else alpha


def spinor(h: complex, v: complex) -> np.ndarray:
    return np.array([h, v], dtype=complex)


def is_normalized(s: np.ndarray, tol: float = 1e-12) -> bool:
    s = np.asarray(s, dtype=complex)
    return abs(float(np.vdot(s, s).real) - 1.0) <= tol
