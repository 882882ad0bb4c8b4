"""Lubricant gas properties: Sutherland viscosity plus a named-fluid registry.

The registry ships with air and nitrogen; other fluids come from a JSON
file mapping name -> {mu_ref, T_ref, S, R_gas} (SI units throughout).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import FormatError, InvariantError, UnknownFluidError

#: Validated temperature window for the viscosity correlation, in K.
T_RANGE = (150.0, 600.0)

#: Built-in Sutherland constants: mu_ref [Pa s] at T_ref [K], Sutherland
#: temperature S [K], specific gas constant R_gas [J/(kg K)].
DEFAULT_FLUIDS: dict[str, dict[str, float]] = {
    "air": {"mu_ref": 1.716e-5, "T_ref": 273.15, "S": 110.4, "R_gas": 287.05},
    "nitrogen": {"mu_ref": 1.663e-5, "T_ref": 273.15, "S": 106.7, "R_gas": 296.80},
}


@dataclass(frozen=True)
class FluidProperties:
    """Dynamic viscosity [Pa s] and specific gas constant [J/(kg K)]."""

    mu: float
    R_gas: float

    def __post_init__(self):
        if not (self.mu > 0 and self.R_gas > 0):
            raise ValueError("fluid properties must be positive")


def sutherland_viscosity(T: float, mu_ref: float, T_ref: float, S: float) -> float:
    """mu(T) = mu_ref (T/T_ref)^(3/2) (T_ref + S)/(T + S)."""
    return mu_ref * (T / T_ref) ** 1.5 * (T_ref + S) / (T + S)


class FluidRegistry:
    """Named fluids resolvable to :class:`FluidProperties` at a temperature."""

    def __init__(self, fluids: dict[str, dict[str, float]] | None = None):
        self._fluids = {name: dict(entry) for name, entry in (fluids or DEFAULT_FLUIDS).items()}

    @classmethod
    def from_file(cls, path: str) -> "FluidRegistry":
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(
                    f"invalid fluid registry: {exc.msg}", line=exc.lineno, column=exc.colno
                ) from None
        fluids = dict(DEFAULT_FLUIDS)
        for name, entry in raw.items():
            missing = {"mu_ref", "T_ref", "S", "R_gas"} - set(entry)
            if missing:
                raise FormatError(f"fluid {name!r} is missing {sorted(missing)}")
            fluids[name] = {k: float(entry[k]) for k in ("mu_ref", "T_ref", "S", "R_gas")}
        return cls(fluids)

    def names(self) -> list[str]:
        return sorted(self._fluids)

    def properties(self, fluid: str, T: float) -> FluidProperties:
        """Viscosity and gas constant of ``fluid`` at temperature ``T`` [K]."""
        if fluid not in self._fluids:
            raise UnknownFluidError(f"unknown fluid {fluid!r}", path="operating.fluid")
        if not (T_RANGE[0] <= T <= T_RANGE[1]):
            raise InvariantError(
                f"temperature {T} K outside validated range {T_RANGE}",
                path="operating.T")
        entry = self._fluids[fluid]
        mu = sutherland_viscosity(T, entry["mu_ref"], entry["T_ref"], entry["S"])
        return FluidProperties(mu=mu, R_gas=entry["R_gas"])


def fluid_properties(fluid: str, T: float, p_a: float | None = None,
                     registry: FluidRegistry | None = None) -> FluidProperties:
    """Module-level convenience over a default registry.

    ``p_a`` is accepted for interface symmetry; the ideal-gas film model
    needs no pressure dependence of mu or R_gas.
    """
    return (registry or _DEFAULT_REGISTRY).properties(fluid, T)


_DEFAULT_REGISTRY = FluidRegistry()
