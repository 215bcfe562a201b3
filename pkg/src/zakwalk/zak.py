"""Zak phases of the walk bands.

The Berry connection ``A(k) = i <V|dV/dk>`` is evaluated in the gauge of
:func:`zakwalk.bloch.eigenpair`. With ``m = sin(E) n`` and
``D^2 = 2|m|(|m| -+ m_z)`` it reduces to::

    A_pm(k) = -(m_x m_y' - m_y m_x') / D_pm^2

and for the non-commuting walk, where ``|m_x + i m_y|^2 = a^2 + b^2`` is
independent of ``k``, to ``(a^2 + b^2) / D_pm^2``.

Two independent routes are provided: adaptive quadrature of ``A`` and a
discrete Wilson line built from eigenvector overlaps.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bloch import (
    GAP_TOL,
    Family,
    WalkProtocol,
    _gauge_norms,
    _kernel,
    closure_momentum,
    eigenpair_arrays,
    gap,
    min_gap,
)
from .errors import GapClosureError, InvalidArgumentError, PoleError
from .quadrature import adaptive_simpson
from .walk import CIRCULAR_SPINOR, WalkState, evolve, initial_state, overlap_phase

__all__ = [
    "BANDS",
    "ZakResult",
    "LandscapeGrid",
    "TrajectoryPair",
    "default_interval",
    "berry_connection",
    "connection_arrays",
    "zak_quadrature",
    "zak_splitstep_analytic",
    "zak_wilson",
    "zak_landscape",
    "zak_difference",
]

BANDS = ("plus", "minus")
QUAD_TOL = 1e-9
_POLE_TOL = 1e-9


def _check_band(band: str) -> str:
    if band not in BANDS:
        raise InvalidArgumentError(f"band must be 'plus' or 'minus', got {band!r}")
    return band


def default_interval(family: "Family | str") -> tuple[float, float]:
    """``[0, pi]`` for the non-commuting walk, ``[-pi/2, pi/2]`` otherwise."""
    if Family.parse(family) is Family.NON_COMMUTING:
        return 0.0, math.pi
    return -math.pi / 2, math.pi / 2


def connection_arrays(p: WalkProtocol, k, band: str) -> np.ndarray:
    """Vectorized Berry connection; no gap check. Singular-gauge points give 0."""
    _check_band(band)
    k = np.asarray(k, dtype=float)
    (mx, my, mz, _), (dmx, dmy, _) = _kernel(p.family, p.angle1, p.angle2, k)
    r, qp, qm = _gauge_norms(mx, my, mz)
    q = qp if band == "plus" else qm
    d2 = 2.0 * r * q
    if p.family is Family.NON_COMMUTING:
        st, ct = math.sin(p.angle1), math.cos(p.angle1)
        sp, cp = math.sin(p.angle2), math.cos(p.angle2)
        num = (sp * ct) ** 2 + (cp * st) ** 2
        num = np.broadcast_to(num, np.shape(d2))
    else:
        num = -(mx * dmy - my * dmx)
    rho = np.hypot(mx, my)
    singular = rho < 1e-9 * r
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(singular, 0.0, num / np.where(singular, 1.0, d2))
    return out


def berry_connection(p: WalkProtocol, k: float, band: str) -> float:
    """``i <V_band|d/dk V_band>`` at one momentum (always real).

    Raises
    ------
    GapClosureError
        If the gap at ``k`` is at most 1e-6.
    """
    _check_band(band)
    if gap(p, float(k)) <= GAP_TOL:
        raise GapClosureError(f"gap closes at k={k!r} for {p}")
    return float(connection_arrays(p, float(k), band))


@dataclass(frozen=True)
class ZakResult:
    z_plus: float | None
    z_minus: float | None
    z_total: float | None
    method: str
    k_lo: float
    k_hi: float
    defined: bool

    def as_dict(self) -> dict:
        return {
            "z_plus": self.z_plus,
            "z_minus": self.z_minus,
            "z_total": self.z_total,
            "method": self.method,
            "k_lo": self.k_lo,
            "k_hi": self.k_hi,
            "defined": self.defined,
        }


def _interval(p: WalkProtocol, k_lo, k_hi) -> tuple[float, float]:
    lo, hi = default_interval(p.family)
    return (lo if k_lo is None else float(k_lo)), (hi if k_hi is None else float(k_hi))


def _interval_gapped(p: WalkProtocol, k_lo: float, k_hi: float) -> bool:
    # |dE/dk| <= 1, so samples well above the spacing rule out a closure between them
    spacing = abs(k_hi - k_lo) / 511
    _, g = min_gap(p, k_lo, k_hi, samples=512, polish_below=4.0 * spacing + GAP_TOL)
    return g > GAP_TOL


def zak_quadrature(
    p: WalkProtocol,
    k_lo: float | None = None,
    k_hi: float | None = None,
    tol: float = QUAD_TOL,
) -> ZakResult:
    """Per-band Zak phases by adaptive Simpson quadrature of the connection.

    If the gap closes anywhere on the interval the result has
    ``defined=False`` and no values.
    """
    k_lo, k_hi = _interval(p, k_lo, k_hi)
    if not _interval_gapped(p, k_lo, k_hi):
        return ZakResult(None, None, None, "quadrature", k_lo, k_hi, False)
    zp = float(adaptive_simpson(lambda k: connection_arrays(p, k, "plus"), k_lo, k_hi, tol))
    zm = float(adaptive_simpson(lambda k: connection_arrays(p, k, "minus"), k_lo, k_hi, tol))
    return ZakResult(zp, zm, zp + zm, "quadrature", k_lo, k_hi, True)


def zak_splitstep_analytic(theta1: float, theta2: float) -> float:
    """Closed-form split-step Zak phase ``tan(theta2) / tan(theta1)``.

    Raises
    ------
    PoleError
        If ``theta1`` is within 1e-9 of a multiple of pi.
    """
    if abs(math.remainder(theta1, math.pi)) <= _POLE_TOL:
        raise PoleError(f"tan(theta1) vanishes at theta1={theta1!r}")
    return math.tan(theta2) / math.tan(theta1)


def zak_wilson(
    p: WalkProtocol,
    k_lo: float | None = None,
    k_hi: float | None = None,
    n_points: int = 2048,
    band: str = "plus",
) -> float:
    """Discrete Berry phase ``-arg prod_j <V(k_j)|V(k_j+1)>`` in [0, 2pi).

    The open path uses the closed-form eigenvector gauge at every sample,
    including both endpoints, so it approximates the same quantity as
    :func:`zak_quadrature` modulo 2pi.

    Raises
    ------
    GapClosureError
        If the gap closes on the interval.
    """
    _check_band(band)
    if n_points < 64:
        raise InvalidArgumentError(f"n_points must be >= 64, got {n_points!r}")
    k_lo, k_hi = _interval(p, k_lo, k_hi)
    if not _interval_gapped(p, k_lo, k_hi):
        raise GapClosureError(f"gap closes on [{k_lo}, {k_hi}] for {p}")
    ks = np.linspace(k_lo, k_hi, n_points)
    vp, vm, _ = eigenpair_arrays(p, ks)
    v = vp if band == "plus" else vm
    links = np.sum(v[:, :-1].conj() * v[:, 1:], axis=0)
    links = links / np.abs(links)
    # sequential product keeps the reduction order fixed
    total = complex(1.0)
    for z in links.tolist():
        total *= z
    phase = (-math.atan2(total.imag, total.real)) % (2.0 * math.pi)
    return 0.0 if phase >= 2.0 * math.pi else phase


# --------------------------------------------------------------------------- #
# landscapes
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class LandscapeGrid:
    family: Family
    method: str
    axis1: np.ndarray
    axis2: np.ndarray
    values: list = field(repr=False)  # values[i][j] is the ZakResult at (axis1[i], axis2[j])

    def cell(self, i: int, j: int) -> ZakResult:
        return self.values[i][j]

    def defined_mask(self) -> np.ndarray:
        return np.array([[v.defined for v in row] for row in self.values], dtype=bool)

    def rows(self):
        """Row-major iteration: ``(angle1, angle2, ZakResult)``."""
        for i, a1 in enumerate(self.axis1):
            for j, a2 in enumerate(self.axis2):
                yield float(a1), float(a2), self.values[i][j]


def _analytic_cell(a1: float, a2: float, k_lo: float, k_hi: float) -> ZakResult:
    try:
        z = zak_splitstep_analytic(a1, a2)
    except PoleError:
        return ZakResult(None, None, None, "analytic", k_lo, k_hi, False)
    return ZakResult(None, None, z, "analytic", k_lo, k_hi, True)


def _landscape_row(args) -> list[ZakResult]:
    family, method, a1, axis2, k_lo, k_hi, tol = args
    row = []
    for a2 in axis2:
        if method == "analytic":
            row.append(_analytic_cell(a1, a2, k_lo, k_hi))
        else:
            row.append(zak_quadrature(WalkProtocol(family, a1, a2), k_lo, k_hi, tol))
    return row


def zak_landscape(
    family: "Family | str",
    axis1: Sequence[float],
    axis2: Sequence[float],
    k_lo: float | None = None,
    k_hi: float | None = None,
    method: str = "quadrature",
    jobs: int = 1,
    tol: float = QUAD_TOL,
) -> LandscapeGrid:
    """Zak phase over a grid of coin angles.

    ``method="analytic"`` is only valid for the split-step family and
    evaluates ``tan(theta2)/tan(theta1)`` with pole cells undefined. Cells are
    computed row by row; with ``jobs > 1`` rows are farmed out to worker
    processes and reassembled in order.
    """
    family = Family.parse(family)
    if method not in ("quadrature", "analytic"):
        raise InvalidArgumentError(f"unknown landscape method {method!r}")
    if method == "analytic" and family is not Family.SPLIT_STEP:
        raise InvalidArgumentError("the analytic Zak formula exists only for the split-step walk")
    ax1 = np.asarray(axis1, dtype=float).ravel()
    ax2 = np.asarray(axis2, dtype=float).ravel()
    if ax1.size == 0 or ax2.size == 0:
        raise InvalidArgumentError("landscape axes must be non-empty")
    lo, hi = default_interval(family)
    k_lo = lo if k_lo is None else float(k_lo)
    k_hi = hi if k_hi is None else float(k_hi)
    tasks = [(family, method, float(a1), ax2.tolist(), k_lo, k_hi, tol) for a1 in ax1]
    if jobs is None or jobs <= 0:
        jobs = os.cpu_count() or 1
    if jobs == 1 or len(tasks) == 1:
        values = [_landscape_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_landscape_row, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return LandscapeGrid(family, method, ax1, ax2, values)


# --------------------------------------------------------------------------- #
# trajectory phase differences
# --------------------------------------------------------------------------- #


def _branch(start: WalkProtocol, end: WalkProtocol) -> str:
    k0 = closure_momentum(start)
    k1 = closure_momentum(end)
    if k1 is None:
        raise InvalidArgumentError(f"{end} is not a Dirac point")
    dk = k1 - (0.0 if k0 is None else k0)
    return "positive" if dk > 0 else "negative" if dk < 0 else "zero"


@dataclass(frozen=True)
class TrajectoryPair:
    """Two walks started from the same state and steered to Dirac points.

    ``branch_a``/``branch_b`` are the signs of the closure momentum relative
    to ``start``; :meth:`from_endpoints` fills them in.
    """

    start: WalkProtocol
    end_a: WalkProtocol
    end_b: WalkProtocol
    branch_a: str
    branch_b: str

    def __post_init__(self) -> None:
        for end in (self.end_a, self.end_b):
            if closure_momentum(end) is None:
                raise InvalidArgumentError(f"trajectory end {end} is not a Dirac point")

    @classmethod
    def from_endpoints(
        cls, start: WalkProtocol, end_a: WalkProtocol, end_b: WalkProtocol
    ) -> "TrajectoryPair":
        return cls(start, end_a, end_b, _branch(start, end_a), _branch(start, end_b))

    @property
    def opposite_branches(self) -> bool:
        return {self.branch_a, self.branch_b} == {"positive", "negative"}


def zak_difference(
    pair: TrajectoryPair, steps: int, initial: WalkState | None = None
) -> float:
    """Phase of ``<psi_b|psi_a>`` after ``steps`` steps from a common state.

    The default initial state is the walker at ``x = 0`` with coin
    ``(1, i)/sqrt(2)``. Returns a value in [0, pi].

    Raises
    ------
    NotPurePhaseError
        If the two evolved states are not equal up to a global phase.
    """
    if steps < 1:
        raise InvalidArgumentError(f"steps must be >= 1, got {steps!r}")
    s0 = initial_state(0, CIRCULAR_SPINOR) if initial is None else initial
    psi_a = evolve(s0, pair.end_a, steps)
    psi_b = evolve(s0, pair.end_b, steps)
    return overlap_phase(psi_b, psi_a)
