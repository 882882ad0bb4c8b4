"""Dimensionless feature vector shared by the physics path and the surrogate.

The stability outcome of a rigid rotor on two identical grooved bearings
is fully determined by eleven dimensionless groups; both the surrogate
inputs and the dimensionless oracle below use exactly this vector, in
this order:

====  ==========  =====================================================
 idx   name        definition
====  ==========  =====================================================
  0    alpha       groove-ridge width ratio
  1    beta_pi     groove angle / pi
  2    gamma       grooved region ratio
  3    hg_hr       groove depth / clearance
  4    L_D         bearing length / diameter
  5    Lambda      compressibility number 6 mu Omega (R/h_r)^2 / p_a
  6    m_bar       m Omega^2 h_r / (p_a D L)
  7    It_bar      I_t Omega^2 h_r / (p_a D L l^2),  l = z2 - z1
  8    Ip_It       I_p / I_t
  9    z1_bar      z1 / l
 10    z2_bar      z2 / l  (= z1_bar + 1 by construction)
====  ==========  =====================================================
"""

from __future__ import annotations

import math

import numpy as np

from .bearing import (GroovedFilmSolver, HGJBGeometry, OperatingPoint,
                      compressibility_number)
from .errors import InvariantError
from .fluids import FluidRegistry, fluid_properties
from .rotor import MassProperties, Rotor, mass_properties
from .rotordyn import ModeStabilityResult, RigidRotorModel, intersection_sweep

FEATURE_NAMES = ("alpha", "beta_pi", "gamma", "hg_hr", "L_D", "Lambda",
                 "m_bar", "It_bar", "Ip_It", "z1_bar", "z2_bar")
N_FEATURES = len(FEATURE_NAMES)


def features_from_properties(mp: MassProperties, geom: HGJBGeometry,
                             op: OperatingPoint, mu: float) -> np.ndarray:
    """The 11-entry feature vector from precomputed mass properties."""
    omega = op.omega
    if omega <= 0:
        raise InvariantError("dimensionless groups undefined at zero speed",
                             path="operating.N")
    z1, z2 = mp.bearing_offsets
    span = z2 - z1
    if span <= 0:
        raise InvariantError("bearing span must be positive", path="rotor.journal_b")
    lam = compressibility_number(mu, omega, geom.R, op.p_a, geom.h_r)
    denom = op.p_a * geom.D * geom.L
    m_bar = mp.mass * omega**2 * geom.h_r / denom
    it_bar = mp.I_transverse * omega**2 * geom.h_r / (denom * span**2)
    return np.array([
        geom.alpha, geom.beta / math.pi, geom.gamma, geom.hg_hr, geom.L_D,
        lam, m_bar, it_bar, mp.I_polar / mp.I_transverse, z1 / span, z2 / span,
    ])


def featureize(rotor: Rotor, geom: HGJBGeometry, op: OperatingPoint,
               registry: FluidRegistry | None = None) -> np.ndarray:
    """Feature vector of a dimensional design at its operating point."""
    props = fluid_properties(op.fluid, op.T, op.p_a, registry=registry)
    return features_from_properties(mass_properties(rotor), geom, op, props.mu)


class DimensionlessBearingProvider:
    """Per-bearing dimensionless (K, C) for the feature-space rotor model."""

    def __init__(self, solver: GroovedFilmSolver):
        self._solver = solver

    def __call__(self, nu: float):
        K, C = self._solver.coefficients(np.array([nu]))
        return ((K[0], C[0]), (K[0], C[0]))

    def batch(self, nu_grid: np.ndarray):
        K, C = self._solver.coefficients(nu_grid)
        return [(K, C), (K, C)]


def feature_model(x: np.ndarray) -> RigidRotorModel:
    """Unit-speed rigid-rotor model equivalent to a feature vector.

    With time scaled by the rotation frequency and bearing offsets by the
    span, the dimensional eigenproblem maps onto ``Omega = 1`` with
    translational mass ``2 m_bar`` and tilt inertia ``2 It_bar`` (the
    factor 2 absorbs D = 2R from the force scale ``p_a R L / h_r``).
    """
    m_bar, it_bar, ip_it, z1, z2 = x[6], x[7], x[8], x[9], x[10]
    return RigidRotorModel(mass=2.0 * m_bar, I_transverse=2.0 * it_bar,
                           I_polar=2.0 * it_bar * ip_it, z1=z1, z2=z2, Omega=1.0)


def evaluate_feature_vector(x: np.ndarray, grid_n: int = 101,
                            nu_grid: np.ndarray | None = None,
                            mac_min: float = 0.9) -> list[ModeStabilityResult]:
    """Physics labels (4 mode results) for one feature vector.

    This is the oracle behind dataset generation: the film problem and the
    rotor eigenproblem are solved entirely in dimensionless form.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (N_FEATURES,) or not np.all(np.isfinite(x)):
        raise InvariantError("feature vector must hold 11 finite entries", path="features")
    solver = GroovedFilmSolver(alpha=float(x[0]), beta=float(x[1]) * math.pi,
                               gamma=float(x[2]), hg_hr=float(x[3]),
                               L_D=float(x[4]), Lambda=float(x[5]), grid_n=grid_n)
    provider = DimensionlessBearingProvider(solver)
    model = feature_model(x)
    return intersection_sweep(model, provider, nu_grid=nu_grid, mac_min=mac_min)
