"""Band structure of the three walk families.

Each family is described by a quasi-energy dispersion ``cos E(k) = f(k)`` and
an unnormalized Bloch vector ``m(k) = sin E(k) * n(k)`` whose components are
trigonometric polynomials in ``k``. Working with ``m`` instead of ``n`` keeps
everything finite at the gap closures; ``E`` is recovered as
``atan2(|m|, f)``, which equals ``arccos(f)`` but stays accurate near 0 and pi.

Families
--------
single
    ``U = T R_y(theta)``; evaluated as the split-step formulas with theta2 = 0.
split-step
    ``U = T R(theta1) T R(theta2)``.
non-commuting
    ``U = T R_x(phi) R_y(theta)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import GapClosureError, InvalidArgumentError, NumericalInconsistencyError

__all__ = [
    "Family",
    "WalkProtocol",
    "BlochPoint",
    "AngularCoeffs",
    "EigenPair",
    "DiracPoint",
    "GAP_TOL",
    "fold_angle",
    "dispersion",
    "dispersion_rhs",
    "gap",
    "bloch_point",
    "bloch_vector",
    "bloch_numerators",
    "angular_coeffs",
    "eigenpair",
    "eigenpair_arrays",
    "dirac_scan",
    "golden_section",
    "min_gap",
    "closure_momentum",
]

GAP_TOL = 1e-6
_CLAMP_TOL = 1e-12
_SINGULAR_TOL = 1e-9
_TWO_PI = 2.0 * math.pi


class Family(str, enum.Enum):
    SINGLE = "single"
    SPLIT_STEP = "splitstep"
    NON_COMMUTING = "noncommuting"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for member in cls:
            if member.value == key:
                return member
        raise InvalidArgumentError(f"unknown walk family {value!r}")


def fold_angle(x: float) -> float:
    """Fold into [-pi, pi]; values already inside (including +-pi) are kept."""
    x = float(x)
    if not math.isfinite(x):
        raise InvalidArgumentError(f"angle must be finite, got {x!r}")
    if -math.pi <= x <= math.pi:
        return x
    y = math.remainder(x, _TWO_PI)
    return math.pi if y == -math.pi else y


@dataclass(frozen=True)
class WalkProtocol:
    """A walk family together with its coin angles.

    ``angle1`` is theta (single, non-commuting) or theta1 (split-step);
    ``angle2`` is phi (non-commuting) or theta2 (split-step) and is forced to
    zero for the single-rotation walk.
    """

    family: Family
    angle1: float
    angle2: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "angle1", fold_angle(self.angle1))
        a2 = 0.0 if self.family is Family.SINGLE else fold_angle(self.angle2)
        object.__setattr__(self, "angle2", a2)

    @classmethod
    def single(cls, theta: float) -> "WalkProtocol":
        return cls(Family.SINGLE, theta, 0.0)

    @classmethod
    def split_step(cls, theta1: float, theta2: float) -> "WalkProtocol":
        return cls(Family.SPLIT_STEP, theta1, theta2)

    @classmethod
    def non_commuting(cls, theta: float, phi: float) -> "WalkProtocol":
        return cls(Family.NON_COMMUTING, theta, phi)

    def with_angles(self, angle1: float, angle2: float) -> "WalkProtocol":
        return WalkProtocol(self.family, angle1, angle2)


class AngularCoeffs(NamedTuple):
    a: float
    b: float
    c: float
    d: float


def angular_coeffs(theta: float, phi: float) -> AngularCoeffs:
    """Coefficients of the non-commuting walk.

    ``a = sin(phi)cos(theta)``, ``b = cos(phi)sin(theta)``,
    ``c = sin(phi)sin(theta)``, ``d = cos(phi)cos(theta)``.
    """
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    return AngularCoeffs(sp * ct, cp * st, sp * st, cp * ct)


# --------------------------------------------------------------------------- #
# vectorized kernels; angles and k broadcast against each other
# --------------------------------------------------------------------------- #


def _kernel(family: Family, angle1, angle2, k):
    """Return ``(mx, my, mz, rhs)`` and the k-derivatives ``(dmx, dmy, dmz)``."""
    ck, sk = np.cos(k), np.sin(k)
    if family is Family.NON_COMMUTING:
        st, ct = np.sin(angle1), np.cos(angle1)
        sp, cp = np.sin(angle2), np.cos(angle2)
        a, b, c, d = sp * ct, cp * st, sp * st, cp * ct
        mx = -ck * a + sk * b
        my = ck * b + sk * a
        mz = ck * c - sk * d
        rhs = ck * d + sk * c
        dmx = sk * a + ck * b
        dmy = -sk * b + ck * a
        dmz = -sk * c - ck * d
    else:
        t2 = 0.0 if family is Family.SINGLE else angle2
        s1, c1 = np.sin(angle1), np.cos(angle1)
        s2, c2 = np.sin(t2), np.cos(t2)
        mx = sk * s1 * c2
        my = ck * s1 * c2 + s2 * c1
        mz = -sk * c2 * c1
        rhs = ck * c1 * c2 - s1 * s2
        dmx = ck * s1 * c2
        dmy = -sk * s1 * c2
        dmz = -ck * c2 * c1
    return (mx, my, mz, rhs), (dmx, dmy, dmz)


def _energy(mx, my, mz, rhs):
    if np.any(np.abs(rhs) > 1.0 + _CLAMP_TOL):
        raise NumericalInconsistencyError("dispersion right-hand side outside [-1, 1]")
    sin_e = np.sqrt(mx * mx + my * my + mz * mz)
    return np.arctan2(sin_e, np.clip(rhs, -1.0, 1.0)), sin_e


def bloch_numerators(p: WalkProtocol, k):
    """``(m, dm/dk, cos E)`` with ``m = sin(E) n`` as arrays of shape (3, ...)."""
    (mx, my, mz, rhs), (dmx, dmy, dmz) = _kernel(p.family, p.angle1, p.angle2, np.asarray(k, float))
    return np.stack([mx, my, mz]), np.stack([dmx, dmy, dmz]), rhs


def dispersion_rhs(p: WalkProtocol, k):
    """Right-hand side ``f(k)`` of ``cos E(k) = f(k)``."""
    return _kernel(p.family, p.angle1, p.angle2, np.asarray(k, float))[0][3]


def dispersion(p: WalkProtocol, k):
    """Quasi-energy ``E(k)`` in [0, pi]; scalar in, float out.

    Raises
    ------
    NumericalInconsistencyError
        If ``|cos E| > 1 + 1e-12``.
    """
    (mx, my, mz, rhs), _ = _kernel(p.family, p.angle1, p.angle2, np.asarray(k, float))
    e, _ = _energy(mx, my, mz, rhs)
    return float(e) if np.ndim(e) == 0 else e


def gap(p: WalkProtocol, k):
    """``min(E, pi - E)``: distance of the band from either closure."""
    e = dispersion(p, k)
    return np.minimum(e, math.pi - e) if np.ndim(e) else min(e, math.pi - e)


@dataclass(frozen=True)
class BlochPoint:
    k: float
    energy: float
    n: tuple[float, float, float] | None
    gap: float


def bloch_point(p: WalkProtocol, k: float) -> BlochPoint:
    """Energy, gap and (where defined) unit Bloch vector at one momentum."""
    (mx, my, mz, rhs), _ = _kernel(p.family, p.angle1, p.angle2, float(k))
    e, sin_e = _energy(mx, my, mz, rhs)
    e = float(e)
    g = min(e, math.pi - e)
    n = None
    if g > GAP_TOL:
        s = float(sin_e)
        n = (float(mx) / s, float(my) / s, float(mz) / s)
    return BlochPoint(float(k), e, n, g)


def bloch_vector(p: WalkProtocol, k: float) -> np.ndarray:
    """Unit Bloch vector ``n(k)``.

    Raises
    ------
    GapClosureError
        If the gap at ``k`` is at most 1e-6.
    """
    pt = bloch_point(p, k)
    if pt.n is None:
        raise GapClosureError(f"gap closes at k={k!r} for {p} (gap={pt.gap:.3e})")
    return np.array(pt.n)


# --------------------------------------------------------------------------- #
# eigenvectors
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class EigenPair:
    v_plus: np.ndarray
    v_minus: np.ndarray
    singular: bool


def _gauge_norms(mx, my, mz):
    """Return ``(r, q_plus, q_minus)`` with ``q_pm = r -+ m_z`` computed stably."""
    rho2 = mx * mx + my * my
    r = np.sqrt(rho2 + mz * mz)
    with np.errstate(divide="ignore", invalid="ignore"):
        q_plus = np.where(mz > 0, rho2 / (r + mz), r - mz)
        q_minus = np.where(mz < 0, rho2 / (r - mz), r + mz)
    return r, q_plus, q_minus


def eigenpair_arrays(p: WalkProtocol, k):
    """Vectorized eigenvectors in the closed-form gauge.

    Returns ``(v_plus, v_minus, singular)`` with spinor arrays of shape
    ``(2, ...)``. Caller is responsible for gap checks.
    """
    (mx, my, mz, _), _ = _kernel(p.family, p.angle1, p.angle2, np.asarray(k, float))
    r, qp, qm = _gauge_norms(mx, my, mz)
    n1 = mx + 1j * my
    singular = np.abs(n1) < _SINGULAR_TOL * r
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = np.sqrt(2.0 * r * qp)
        dm = np.sqrt(2.0 * r * qm)
        v_plus = np.stack([n1 / dp, -qp / dp + 0j])
        v_minus = np.stack([n1 / dm, qm / dm + 0j])
    if np.any(singular):
        up = mz > 0
        e1 = np.stack([np.ones_like(mz), np.zeros_like(mz)]).astype(complex)
        e2 = np.stack([np.zeros_like(mz), np.ones_like(mz)]).astype(complex)
        fb_plus = np.where(up, e1, e2)
        fb_minus = np.where(up, e2, e1)
        v_plus = np.where(singular, fb_plus, v_plus)
        v_minus = np.where(singular, fb_minus, v_minus)
    return v_plus, v_minus, singular


def eigenpair(p: WalkProtocol, k: float) -> EigenPair:
    """Normalized eigenvectors ``|V+->`` of ``pauli_dot(n)`` for eigenvalues ``+-1``.

    Gauge: first component ``(n_x + i n_y) / D+-``, second component
    ``(n_z -+ |n|) / D+-`` (real). Where ``n_x + i n_y`` vanishes the gauge is
    undefined; the pair is then flagged ``singular`` and the basis vectors
    are returned, ``v_plus = (1, 0)`` when ``n_z > 0`` and ``(0, 1)`` otherwise.

    Raises
    ------
    GapClosureError
        If the gap at ``k`` is at most 1e-6.
    """
    pt = bloch_point(p, k)
    if pt.n is None:
        raise GapClosureError(f"gap closes at k={k!r} for {p} (gap={pt.gap:.3e})")
    vp, vm, sing = eigenpair_arrays(p, float(k))
    return EigenPair(vp.copy(), vm.copy(), bool(sing))


# --------------------------------------------------------------------------- #
# gap closures
# --------------------------------------------------------------------------- #

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo: float, hi: float, max_iter: int = 60, xtol: float = 0.0, x0=None):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The endpoints (and ``x0`` if given) are included in the final comparison
    so that a minimum sitting exactly on a grid point is not lost.
    """
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    trials = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    if x0 is not None:
        trials.insert(0, (f(x0), x0))
    best = min(trials, key=lambda t: t[0])
    return best[1], best[0]


@dataclass(frozen=True)
class DiracPoint:
    angle1: float
    angle2: float
    k_star: float
    residual_gap: float
    kind: str = "dirac"


def _k_label(k: float) -> float:
    """Snap to the nearest multiple of pi/2 when within 1e-6; -pi maps to pi."""
    q = round(k / (math.pi / 2.0))
    snapped = q * (math.pi / 2.0)
    if abs(k - snapped) <= 1e-6:
        k = snapped
    if abs(abs(k) - math.pi) <= 1e-12:
        k = math.pi
    return 0.0 if k == 0.0 else k


def _closure_measure(family: Family, closure: str):
    """Vectorized ``(angle1, angle2, k) -> E`` (or ``pi - E``)."""

    def measure(a1, a2, k):
        (mx, my, mz, rhs), _ = _kernel(family, a1, a2, k)
        e, _ = _energy(mx, my, mz, rhs)
        return e if closure == "zero" else math.pi - e

    return measure


def dirac_scan(
    family: "Family | str",
    grid_n: int = 201,
    k_samples: int = 129,
    tol: float = GAP_TOL,
    *,
    closure: str = "zero",
    refine_tol: float = 1e-9,
) -> list[DiracPoint]:
    """Locate gap closures on the ``[-pi, pi]^2`` coin-angle torus.

    For every grid point the quasi-energy is minimized over a k-sample set
    made of a uniform sweep plus the candidates ``{0, +-pi/2, +-pi}``. Grid
    points with ``min E <= tol`` and local minima of ``min E`` within a few
    grid spacings of zero are refined by coordinate-wise golden-section
    search (angle1, angle2, k) inside one grid cell, merged per cell and kept
    if the refined residual is ``<= tol``.

    ``closure="zero"`` finds ``E = 0`` Dirac points; ``closure="pi"`` finds
    ``E = pi`` closures, returned with ``kind="pi_closure"``. The single-
    rotation family has no second angle and is scanned along ``angle1`` only.
    ``-pi`` and ``pi`` are kept as distinct grid values.

    Results are sorted by ``(angle1, angle2, k_star)``.
    """
    family = Family.parse(family)
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol!r}")
    if grid_n < 41 or grid_n % 2 == 0:
        raise InvalidArgumentError(f"grid_n must be odd and >= 41, got {grid_n!r}")
    if k_samples < 2:
        raise InvalidArgumentError(f"k_samples must be >= 2, got {k_samples!r}")
    if closure not in ("zero", "pi"):
        raise InvalidArgumentError(f"closure must be 'zero' or 'pi', got {closure!r}")

    measure = _closure_measure(family, closure)
    axis = np.linspace(-math.pi, math.pi, grid_n)
    h = axis[1] - axis[0]
    ks = np.union1d(
        np.linspace(-math.pi, math.pi, k_samples),
        np.array([-math.pi, -math.pi / 2, 0.0, math.pi / 2, math.pi]),
    )
    hk = float(np.max(np.diff(ks)))
    one_d = family is Family.SINGLE
    axis2 = np.array([0.0]) if one_d else axis

    vals = measure(axis[:, None, None], axis2[None, :, None], ks[None, None, :])
    kidx = np.argmin(vals, axis=2)
    gmin = np.take_along_axis(vals, kidx[..., None], axis=2)[..., 0]

    # local minima of the min-gap field (edges padded with +inf)
    padded = np.pad(gmin, 1, constant_values=np.inf)
    neigh = np.stack(
        [
            padded[1 + di : 1 + di + gmin.shape[0], 1 + dj : 1 + dj + gmin.shape[1]]
            for di in (-1, 0, 1)
            for dj in (-1, 0, 1)
            if (di, dj) != (0, 0)
        ]
    )
    local_min = gmin <= neigh.min(axis=0)
    candidates = (gmin <= tol) | (local_min & (gmin <= 3.0 * h))

    cells: dict[tuple[int, int, float], DiracPoint] = {}
    for i, j in zip(*np.nonzero(candidates)):
        a1, a2 = float(axis[i]), float(axis2[j])
        k0 = float(ks[kidx[i, j]])
        pt = _refine(measure, a1, a2, k0, h, hk, one_d, refine_tol)
        if pt[3] > tol:
            continue
        r1, r2, rk, res = pt
        label = _k_label(rk)
        key = (int(round((r1 + math.pi) / h)), int(round((r2 + math.pi) / h)), label)
        prev = cells.get(key)
        if prev is None or res < prev.residual_gap:
            kind = "dirac" if closure == "zero" else "pi_closure"
            cells[key] = DiracPoint(r1, r2, label, res, kind)
    return sorted(cells.values(), key=lambda d: (d.angle1, d.angle2, d.k_star))


def _refine(measure, a1, a2, k, h, hk, one_d, refine_tol, sweeps=8):
    """Coordinate-wise golden-section refinement of a closure candidate."""

    def f(x1, x2, kk):
        return float(measure(x1, x2, kk))

    lo1, hi1 = max(a1 - h, -math.pi), min(a1 + h, math.pi)
    lo2, hi2 = max(a2 - h, -math.pi), min(a2 + h, math.pi)
    best = f(a1, a2, k)
    for _ in range(sweeps):
        if best <= refine_tol * 1e-3:
            break
        before = best
        k, best = golden_section(lambda kk: f(a1, a2, kk), k - hk, k + hk, x0=k)
        a1, best = golden_section(lambda x: f(x, a2, k), lo1, hi1, x0=a1)
        if not one_d:
            a2, best = golden_section(lambda x: f(a1, x, k), lo2, hi2, x0=a2)
        if before - best <= 1e-3 * refine_tol:
            break
    k, best = golden_section(lambda kk: f(a1, a2, kk), k - hk, k + hk, x0=k)
    return a1, a2, k, best


def min_gap(
    p: WalkProtocol,
    k_lo: float = -math.pi,
    k_hi: float = math.pi,
    samples: int = 512,
    closure: str = "either",
    polish_below: float | None = None,
) -> tuple[float, float]:
    """Smallest closure distance on ``[k_lo, k_hi]``; returns ``(k, value)``.

    ``closure`` selects the measure: ``"zero"`` uses ``E``, ``"pi"`` uses
    ``pi - E`` and ``"either"`` uses ``min(E, pi - E)``. The interval is
    sampled uniformly together with any of ``{0, +-pi/2, +-pi}`` it contains,
    then the best sample is polished by golden-section search over its
    neighbouring sample spacing. With ``polish_below`` set, polishing is
    skipped when the best sample already exceeds that value.
    """
    if closure not in ("zero", "pi", "either"):
        raise InvalidArgumentError(f"unknown closure kind {closure!r}")
    lo, hi = min(k_lo, k_hi), max(k_lo, k_hi)
    special = np.array([-math.pi, -math.pi / 2, 0.0, math.pi / 2, math.pi])
    ks = np.union1d(np.linspace(lo, hi, samples), special[(special >= lo) & (special <= hi)])

    def measure(k):
        e = dispersion(p, k)
        if closure == "zero":
            return e
        if closure == "pi":
            return math.pi - e
        return np.minimum(e, math.pi - e)

    vals = measure(ks)
    i = int(np.argmin(vals))
    best_k, best = float(ks[i]), float(vals[i])
    if best > 0.0 and (polish_below is None or best < polish_below):
        a = float(ks[max(i - 1, 0)])
        b = float(ks[min(i + 1, ks.size - 1)])
        k_ref, v_ref = golden_section(lambda k: float(measure(k)), a, b, x0=best_k)
        if v_ref < best:
            best_k, best = k_ref, v_ref
    return best_k, best


def closure_momentum(p: WalkProtocol, tol: float = GAP_TOL) -> float | None:
    """Momentum label of an ``E = 0`` closure of ``p``, or ``None`` if gapped."""
    k, value = min_gap(p, closure="zero")
    return _k_label(k) if value <= tol else None
