"""Position-space evolution of the walks.

A :class:`WalkState` stores a dense block of spinor amplitudes for the sites
``offset, offset + 1, ...``. Each shift grows the block by one site on each
side: H components move to ``x + 1``, V components to ``x - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import Family, WalkProtocol
from .errors import InvalidArgumentError, NotPurePhaseError
from .su2 import compose, rotation_x, rotation_y

__all__ = [
    "WalkState",
    "Distribution",
    "coin_sequence",
    "initial_state",
    "step",
    "evolve",
    "distribution",
    "overlap",
    "overlap_phase",
    "CIRCULAR_SPINOR",
]

CIRCULAR_SPINOR = np.array([1.0, 1.0j]) / math.sqrt(2.0)
_NORM_TOL = 1e-12
_TRIM = 1e-15
_PURE_PHASE_TOL = 1e-9


@dataclass(frozen=True)
class WalkState:
    offset: int
    amps: np.ndarray  # shape (n_sites, 2), columns (h, v)
    step_count: int = 0

    def __post_init__(self) -> None:
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 2 or amps.shape[1] != 2:
            raise InvalidArgumentError(f"amps must have shape (n, 2), got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.amps.shape[0])

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def amplitude(self, x: int) -> np.ndarray:
        j = x - self.offset
        if 0 <= j < self.amps.shape[0]:
            return self.amps[j].copy()
        return np.zeros(2, dtype=complex)


@dataclass(frozen=True)
class Distribution:
    positions: np.ndarray
    probabilities: np.ndarray

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(p) for x, p in zip(self.positions, self.probabilities)}

    def variance(self) -> float:
        p = self.probabilities
        x = self.positions.astype(float)
        mean = float(np.dot(p, x))
        return float(np.dot(p, (x - mean) ** 2))


def initial_state(position: int, spinor) -> WalkState:
    """Walker localized at ``position`` with coin state ``spinor``.

    Raises
    ------
    InvalidArgumentError
        If ``|h|^2 + |v|^2`` differs from 1 by more than 1e-12.
    """
    s = np.asarray(spinor, dtype=complex).reshape(2)
    n2 = float(np.vdot(s, s).real)
    if not abs(n2 - 1.0) <= _NORM_TOL:
        raise InvalidArgumentError(f"initial spinor must be normalized, |s|^2 = {n2!r}")
    return WalkState(int(position), s[None, :], 0)


def coin_sequence(p: WalkProtocol) -> list[np.ndarray]:
    """Coins applied in one step, each followed by a shift, in time order."""
    if p.family is Family.NON_COMMUTING:
        # U = T R_x(phi) R_y(theta): R_y acts first
        return [compose(rotation_x(p.angle2), rotation_y(p.angle1))]
    if p.family is Family.SPLIT_STEP:
        # U = T R(theta1) T R(theta2)
        return [rotation_y(p.angle2), rotation_y(p.angle1)]
    return [rotation_y(p.angle1)]


def _shift(amps: np.ndarray) -> np.ndarray:
    n = amps.shape[0]
    out = np.zeros((n + 2, 2), dtype=complex)
    out[2:, 0] = amps[:, 0]
    out[:n, 1] = amps[:, 1]
    return out


def step(s: WalkState, p: WalkProtocol) -> WalkState:
    amps = s.amps
    offset = s.offset
    for coin in coin_sequence(p):
        amps = _shift(amps @ coin.T)
        offset -= 1
    return WalkState(offset, amps, s.step_count + 1)


def evolve(s: WalkState, p: WalkProtocol, n: int) -> WalkState:
    if n < 0:
        raise InvalidArgumentError(f"number of steps must be >= 0, got {n!r}")
    coins = [c.T for c in coin_sequence(p)]
    amps = np.array(s.amps)
    offset = s.offset
    for _ in range(n):
        for coin_t in coins:
            amps = _shift(amps @ coin_t)
            offset -= 1
    return WalkState(offset, amps, s.step_count + n)


def distribution(s: WalkState) -> Distribution:
    probs = np.sum(np.abs(s.amps) ** 2, axis=1)
    keep = probs >= _TRIM
    return Distribution(s.positions[keep], probs[keep])


def _aligned(s1: WalkState, s2: WalkState):
    lo = min(s1.offset, s2.offset)
    hi = max(s1.offset + s1.amps.shape[0], s2.offset + s2.amps.shape[0])
    out = []
    for s in (s1, s2):
        a = np.zeros((hi - lo, 2), dtype=complex)
        j = s.offset - lo
        a[j : j + s.amps.shape[0]] = s.amps
        out.append(a)
    return out


def overlap(s1: WalkState, s2: WalkState) -> complex:
    """Inner product ``<s1|s2>``."""
    a1, a2 = _aligned(s1, s2)
    return complex(np.vdot(a1, a2))


def overlap_phase(s1: WalkState, s2: WalkState) -> float:
    """``|arg <s1|s2>|`` for states equal up to a global phase.

    The result lies in [0, pi]. States are zero-padded to a common site range.

    Raises
    ------
    NotPurePhaseError
        If ``|<s1|s2>| < 1 - 1e-9``.
    """
    z = overlap(s1, s2)
    if abs(z) < 1.0 - _PURE_PHASE_TOL:
        raise NotPurePhaseError(f"states are not related by a global phase (|overlap| = {abs(z):.12g})")
    return abs(math.atan2(z.imag, z.real))
