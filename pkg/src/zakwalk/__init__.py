"""Quasi-energy bands, Dirac points and Zak phases of 1D discrete-time quantum walks."""

__version__ = "0.1.0"

from .bloch import (
    AngularCoeffs,
    BlochPoint,
    DiracPoint,
    EigenPair,
    Family,
    WalkProtocol,
    angular_coeffs,
    bloch_vector,
    dirac_scan,
    dispersion,
    eigenpair,
)
from .walk import WalkState, distribution, evolve, initial_state, overlap_phase, step
from .zak import (
    TrajectoryPair,
    ZakResult,
    berry_connection,
    zak_difference,
    zak_landscape,
    zak_quadrature,
    zak_splitstep_analytic,
    zak_wilson,
)

__all__ = [
    "AngularCoeffs",
    "BlochPoint",
    "DiracPoint",
    "EigenPair",
    "Family",
    "TrajectoryPair",
    "WalkProtocol",
    "WalkState",
    "ZakResult",
    "angular_coeffs",
    "berry_connection",
    "bloch_vector",
    "dirac_scan",
    "dispersion",
    "distribution",
    "eigenpair",
    "evolve",
    "initial_state",
    "overlap_phase",
    "step",
    "zak_difference",
    "zak_landscape",
    "zak_quadrature",
    "zak_splitstep_analytic",
    "zak_wilson",
]
