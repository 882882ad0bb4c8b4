"""Gas-bearing rotor evaluation toolkit.

Layered rotors on herringbone-grooved journal bearings: groove-averaged
film physics, rigid-rotor whirl stability, an ensemble network surrogate
for interactive-speed evaluation, and manufacturing-robustness maps,
exposed as a library, a CLI and an HTTP service.
"""

__version__ = "0.1.0"

from .bearing import (BearingCoefficients, HGJBGeometry, OperatingPoint,  # noqa: E402
                      compressibility_number, dimensionalize, dynamic_coefficients,
                      load_capacity_proxy, power_loss, solve_zeroth_order)
from .features import FEATURE_NAMES, evaluate_feature_vector, featureize  # noqa: E402
from .fluids import FluidProperties, FluidRegistry, fluid_properties  # noqa: E402
from .rotor import (Layer, MassProperties, Rotor, RotorElement,  # noqa: E402
                    assign_bearings, mass_properties, parse_rotor,
                    rotor_from_document, serialize_rotor, update_element)
from .rotordyn import (ModeStabilityResult, RigidRotorModel, assemble,  # noqa: E402
                       eigen_at, intersection_sweep, log_decrement)
from .sweep import (DesignPerformance, FeasibilityMap, OracleEvaluator,  # noqa: E402
                    SurrogateEvaluator, SweepSpec, ToleranceSpec, default_speeds,
                    export_contours, feasible_fraction, parse_contours, run_sweep)

__all__ = [
    "BearingCoefficients", "DesignPerformance", "FEATURE_NAMES", "FeasibilityMap",
    "FluidProperties", "FluidRegistry", "HGJBGeometry", "Layer", "MassProperties",
    "ModeStabilityResult", "OperatingPoint", "OracleEvaluator", "RigidRotorModel",
    "Rotor", "RotorElement", "SurrogateEvaluator", "SweepSpec", "ToleranceSpec",
    "assemble", "assign_bearings", "compressibility_number", "default_speeds",
    "dimensionalize", "dynamic_coefficients", "eigen_at", "evaluate_feature_vector",
    "export_contours", "feasible_fraction", "featureize", "fluid_properties",
    "intersection_sweep", "load_capacity_proxy", "log_decrement", "mass_properties",
    "parse_contours", "parse_rotor", "power_loss", "rotor_from_document", "run_sweep",
    "serialize_rotor", "solve_zeroth_order", "update_element",
]
