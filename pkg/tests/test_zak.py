from __future__ import annotations

import math

import numpy as np
import pytest

from zakwalk.bloch import Family, WalkProtocol, bloch_vector, dirac_scan, eigenpair
from zakwalk.errors import (
    GapClosureError,
    InvalidArgumentError,
    NotPurePhaseError,
    PoleError,
)
from zakwalk.walk import WalkState
from zakwalk.zak import (
    TrajectoryPair,
    berry_connection,
    default_interval,
    zak_difference,
    zak_landscape,
    zak_quadrature,
    zak_splitstep_analytic,
    zak_wilson,
)

PI = math.pi
START = WalkProtocol.non_commuting(0.0, 0.0)


def fd_connection(p, k, band, h=1e-5):
    """i <V|dV/dk> by central differences of the closed-form eigenvectors."""
    pick = (lambda e: e.v_plus) if band == "plus" else (lambda e: e.v_minus)
    v = pick(eigenpair(p, k))
    dv = (pick(eigenpair(p, k + h)) - pick(eigenpair(p, k - h))) / (2 * h)
    return 1j * np.vdot(v, dv)


def random_gapped(rng, family, n):
    out = []
    while len(out) < n:
        t1, t2 = rng.uniform(-PI, PI, 2)
        p = WalkProtocol(family, t1, t2)
        if zak_quadrature(p).defined:
            out.append(p)
    return out


# --------------------------------------------------------------------------- #
# connection


def test_connection_trivial_case():
    # normalized gauge: |N1|^2 / D^2 = 1 / 2 on both bands
    p = WalkProtocol.non_commuting(PI / 2, 0.0)
    for k in np.linspace(0.05, PI - 0.05, 17):
        for band in ("plus", "minus"):
            assert berry_connection(p, k, band) == pytest.approx(0.5, abs=1e-14)
            assert fd_connection(p, k, band).real == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("family", list(Family))
def test_connection_matches_finite_differences(family):
    rng = np.random.default_rng(40)
    n = 0
    while n < 60:
        t1, t2, k = rng.uniform(-PI, PI, 3)
        p = WalkProtocol(family, t1, t2)
        try:
            ep = eigenpair(p, k)
            ep_l, ep_r = eigenpair(p, k - 1e-5), eigenpair(p, k + 1e-5)
        except GapClosureError:
            continue
        if ep.singular or ep_l.singular or ep_r.singular or abs(bloch_vector(p, k)[2]) > 0.99:
            continue
        for band in ("plus", "minus"):
            z = fd_connection(p, k, band)
            assert abs(z.imag) <= 1e-6
            assert berry_connection(p, k, band) == pytest.approx(z.real, abs=1e-6)
        n += 1


def test_connection_is_half_azimuth_derivative_when_nz_vanishes():
    p = WalkProtocol.split_step(PI / 2, 0.6)
    ks = np.linspace(-PI / 2, PI / 2, 401)
    n = np.array([bloch_vector(p, k) for k in ks])
    np.testing.assert_allclose(n[:, 2], 0.0, atol=1e-15)
    azimuth = np.unwrap(np.arctan2(n[:, 1], n[:, 0]))
    dphi = np.gradient(azimuth, ks, edge_order=2)
    for band in ("plus", "minus"):
        a = np.array([berry_connection(p, k, band) for k in ks])
        np.testing.assert_allclose(a, -0.5 * dphi, atol=1e-4)
    r = zak_quadrature(p)
    assert r.z_total == pytest.approx(azimuth[0] - azimuth[-1], abs=1e-8)


def test_connection_errors():
    with pytest.raises(GapClosureError):
        berry_connection(WalkProtocol.non_commuting(PI / 2, PI / 2), PI / 2, "plus")
    with pytest.raises(InvalidArgumentError):
        berry_connection(WalkProtocol.non_commuting(0.3, 0.2), 0.1, "up")


# --------------------------------------------------------------------------- #
# quadrature and Wilson line


def test_default_intervals():
    assert default_interval("noncommuting") == (0.0, PI)
    assert default_interval(Family.SPLIT_STEP) == (-PI / 2, PI / 2)


def test_quadrature_trivial_case():
    r = zak_quadrature(WalkProtocol.non_commuting(PI / 2, 0.0), 0.0, PI)
    assert r.defined and r.method == "quadrature"
    assert r.z_plus == pytest.approx(PI / 2, abs=1e-9)
    assert r.z_minus == pytest.approx(PI / 2, abs=1e-9)
    assert r.z_total == pytest.approx(PI, abs=1e-9)


def test_quadrature_undefined_across_dirac_point():
    r = zak_quadrature(WalkProtocol.non_commuting(PI / 2, PI / 2), 0.0, PI)
    assert not r.defined
    assert r.z_plus is None and r.z_total is None
    r = zak_quadrature(WalkProtocol.single(0.0), -0.5, 0.5)
    assert not r.defined


def test_quadrature_total_is_sum():
    rng = np.random.default_rng(41)
    for p in random_gapped(rng, Family.NON_COMMUTING, 10):
        r = zak_quadrature(p)
        assert abs(r.z_total - (r.z_plus + r.z_minus)) <= 1e-8


def test_quadrature_example_against_wilson():
    p = WalkProtocol.non_commuting(PI / 4, PI / 8)
    r = zak_quadrature(p, 0.0, PI)
    w = zak_wilson(p, 0.0, PI, 2048, "plus")
    assert abs(math.remainder(r.z_plus - w, 2 * PI)) <= 1e-5


@pytest.mark.parametrize("family", list(Family))
def test_quadrature_matches_wilson_random(family):
    rng = np.random.default_rng(42)
    for p in random_gapped(rng, family, 20):
        r = zak_quadrature(p)
        for band, z in (("plus", r.z_plus), ("minus", r.z_minus)):
            w = zak_wilson(p, n_points=2048, band=band)
            assert abs(math.remainder(z - w, 2 * PI)) <= 1e-5


def test_wilson_trivial_case():
    p = WalkProtocol.non_commuting(PI / 2, 0.0)
    for band in ("plus", "minus"):
        assert zak_wilson(p, 0.0, PI, 1024, band) == pytest.approx(PI / 2, abs=1e-6)


@pytest.mark.parametrize("family", list(Family))
def test_wilson_refinement(family):
    rng = np.random.default_rng(43)
    for p in random_gapped(rng, family, 10):
        a = zak_wilson(p, n_points=512)
        b = zak_wilson(p, n_points=1024)
        assert abs(math.remainder(a - b, 2 * PI)) < 1e-8


def test_wilson_bands_equal_when_nz_vanishes():
    p = WalkProtocol.split_step(PI / 2, 0.6)
    assert zak_wilson(p, band="plus") == pytest.approx(zak_wilson(p, band="minus"), abs=1e-12)


def test_wilson_errors():
    p = WalkProtocol.non_commuting(PI / 2, PI / 2)
    with pytest.raises(GapClosureError):
        zak_wilson(p, 0.0, PI)
    with pytest.raises(InvalidArgumentError):
        zak_wilson(WalkProtocol.non_commuting(0.3, 0.2), n_points=32)


def test_endpoint_shift_is_continuous():
    p = WalkProtocol.non_commuting(0.9, 0.4)
    base = zak_quadrature(p, 0.0, PI).z_plus
    for delta in (1e-3, 1e-4, 1e-5):
        moved = zak_quadrature(p, delta, PI + delta).z_plus
        assert abs(moved - base) <= 4 * delta


# --------------------------------------------------------------------------- #
# analytic split-step formula


def test_analytic_examples():
    assert zak_splitstep_analytic(PI / 4, PI / 4) == pytest.approx(1.0, abs=1e-15)
    assert zak_splitstep_analytic(PI / 4, 0.0) == 0.0
    assert zak_splitstep_analytic(PI / 4, PI / 3) == pytest.approx(math.sqrt(3), abs=1e-15)


@pytest.mark.parametrize("theta1", [0.0, PI, -PI, 1e-10, 2 * PI])
def test_analytic_pole(theta1):
    with pytest.raises(PoleError):
        zak_splitstep_analytic(theta1, 0.3)


# --------------------------------------------------------------------------- #
# landscapes


def test_landscape_undefined_cells_match_dirac_scan():
    axis = np.linspace(-PI, PI, 21)
    grid = zak_landscape(Family.NON_COMMUTING, axis, axis)
    mask = grid.defined_mask()
    undefined = {(round(axis[i], 12), round(axis[j], 12)) for i, j in zip(*np.nonzero(~mask))}
    dirac = {(round(d.angle1, 12), round(d.angle2, 12)) for d in dirac_scan(Family.NON_COMMUTING, 41)}
    assert len(dirac) == 13
    assert undefined == dirac


def test_landscape_sign_symmetry():
    axis = np.linspace(-PI, PI, 13)
    grid = zak_landscape(Family.NON_COMMUTING, axis, axis)
    n = axis.size
    for i in range(n):
        for j in range(n):
            a, b = grid.cell(i, j), grid.cell(n - 1 - i, n - 1 - j)
            assert a.defined == b.defined
            if a.defined:
                assert a.z_plus == pytest.approx(b.z_plus, abs=1e-8)
                assert a.z_minus == pytest.approx(b.z_minus, abs=1e-8)


def test_landscape_single_cell():
    grid = zak_landscape(Family.NON_COMMUTING, [0.7], [-0.2])
    assert grid.cell(0, 0) == zak_quadrature(WalkProtocol.non_commuting(0.7, -0.2))


def test_landscape_parallel_is_identical():
    axis = np.linspace(-PI, PI, 9)
    serial = zak_landscape(Family.SPLIT_STEP, axis, axis, jobs=1)
    parallel = zak_landscape(Family.SPLIT_STEP, axis, axis, jobs=2)
    assert serial.values == parallel.values


def test_landscape_row_major_order():
    grid = zak_landscape(Family.SPLIT_STEP, [0.1, 0.2], [0.3, 0.4, 0.5])
    assert [(a, b) for a, b, _ in grid.rows()] == [
        (0.1, 0.3), (0.1, 0.4), (0.1, 0.5), (0.2, 0.3), (0.2, 0.4), (0.2, 0.5)
    ]


def test_analytic_landscape_shape():
    axis = np.linspace(-PI, PI, 41)
    grid = zak_landscape(Family.SPLIT_STEP, axis, axis, method="analytic")
    for i, a1 in enumerate(axis):
        for j, a2 in enumerate(axis):
            r = grid.cell(i, j)
            if abs(math.remainder(a1, PI)) <= 1e-9:
                assert not r.defined
            else:
                assert r.defined and r.z_total == math.tan(a2) / math.tan(a1)
                if a2 in (0.0, PI, -PI):
                    assert abs(r.z_total) <= 1e-15


def test_landscape_errors():
    with pytest.raises(InvalidArgumentError):
        zak_landscape(Family.NON_COMMUTING, [0.1], [0.2], method="analytic")
    with pytest.raises(InvalidArgumentError):
        zak_landscape(Family.NON_COMMUTING, [], [0.2])
    with pytest.raises(InvalidArgumentError):
        zak_landscape(Family.NON_COMMUTING, [0.1], [0.2], method="simpson")


# --------------------------------------------------------------------------- #
# trajectory pairs


def nc(t, f):
    return WalkProtocol.non_commuting(t, f)


def test_branches():
    pair = TrajectoryPair.from_endpoints(START, nc(PI / 2, PI / 2), nc(PI / 2, -PI / 2))
    assert (pair.branch_a, pair.branch_b) == ("positive", "negative")
    assert pair.opposite_branches
    same = TrajectoryPair.from_endpoints(START, nc(PI / 2, PI / 2), nc(-PI / 2, -PI / 2))
    assert (same.branch_a, same.branch_b) == ("positive", "positive")
    assert not same.opposite_branches


def test_trajectory_end_must_be_dirac_point():
    with pytest.raises(InvalidArgumentError):
        TrajectoryPair.from_endpoints(START, nc(0.3, 0.2), nc(PI / 2, PI / 2))


def test_zak_difference_examples():
    opp = TrajectoryPair.from_endpoints(START, nc(PI / 2, PI / 2), nc(PI / 2, -PI / 2))
    assert zak_difference(opp, 7) == pytest.approx(PI, abs=1e-9)
    same = TrajectoryPair.from_endpoints(START, nc(PI / 2, PI / 2), nc(-PI / 2, -PI / 2))
    assert zak_difference(same, 7) == pytest.approx(0.0, abs=1e-9)
    ident = TrajectoryPair.from_endpoints(START, nc(PI / 2, PI / 2), nc(PI / 2, PI / 2))
    for n in (1, 4, 7):
        assert zak_difference(ident, n) == pytest.approx(0.0, abs=1e-12)


def test_zak_difference_step_parity():
    opp = TrajectoryPair.from_endpoints(START, nc(PI / 2, PI / 2), nc(PI / 2, -PI / 2))
    for n in range(1, 13):
        assert zak_difference(opp, n) == pytest.approx(PI * (n % 2), abs=1e-9)


def random_state(rng, width):
    amps = rng.normal(size=(width, 2)) + 1j * rng.normal(size=(width, 2))
    return amps / np.linalg.norm(amps)


def test_zak_difference_origin_invariance():
    rng = np.random.default_rng(44)
    opp = TrajectoryPair.from_endpoints(START, nc(PI / 2, PI / 2), nc(PI / 2, -PI / 2))
    amps = random_state(rng, 5)
    base = zak_difference(opp, 7, WalkState(-2, amps))
    assert base == pytest.approx(PI, abs=1e-9)
    for shift in (-13, 4, 40):
        assert zak_difference(opp, 7, WalkState(-2 + shift, amps)) == pytest.approx(base, abs=1e-9)
    x = np.arange(-2, 3)
    for delta in rng.uniform(-PI, PI, 5):
        boosted = amps * np.exp(1j * delta * x)[:, None]
        assert zak_difference(opp, 7, WalkState(-2, boosted)) == pytest.approx(base, abs=1e-9)


def test_zak_difference_errors():
    opp = TrajectoryPair.from_endpoints(START, nc(PI / 2, PI / 2), nc(PI / 2, -PI / 2))
    with pytest.raises(InvalidArgumentError):
        zak_difference(opp, 0)
    # distinct Dirac points whose evolutions are not phase-related
    other = TrajectoryPair.from_endpoints(START, nc(PI / 2, PI / 2), nc(0.0, 0.0))
    with pytest.raises(NotPurePhaseError):
        zak_difference(other, 3)
