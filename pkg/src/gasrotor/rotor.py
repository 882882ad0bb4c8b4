"""Layered cylindrical rotor model: parsing, validation, editing, mass properties.

A rotor is an ordered stack of cylindrical elements, each made of one to
three contiguous annular layers.  Two elements carry the journal bearings
and an optional third one the thrust collar.  The axial origin sits at the
rotor's left face and elements stack left to right.

The on-disk representation is a JSON document (``format_version: 1``)::

    {
      "format_version": 1,
      "elements": [
        {"L_m": 0.01, "layers": [{"d_m": 0.0, "D_m": 0.01, "material": "steel"}]},
        ...
      ],
      "journal_a": 0,
      "journal_b": 2,
      "thrust": 3
    }

Layers give either a ``material`` name resolved through :data:`MATERIALS`
or an explicit ``rho_kg_m3``; an explicit density wins when both appear.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

from .errors import FormatError, InvariantError, UnknownMaterialError

#: Default material densities in kg/m^3.  Extend at parse time via the
#: ``materials`` argument when project-specific alloys are needed.
MATERIALS: dict[str, float] = {
    "steel": 7800.0,
    "titanium": 4500.0,
    "ceramic": 3200.0,
}

_UNSET = object()


@dataclass(frozen=True)
class Layer:
    """One annulus: inner/outer diameter in m and density in kg/m^3."""

    d_inner: float
    D_outer: float
    density: float
    material: str | None = None

    def __post_init__(self):
        if not (0.0 <= self.d_inner < self.D_outer):
            raise InvariantError(
                f"layer diameters must satisfy 0 <= d_inner < D_outer, "
                f"got d_inner={self.d_inner}, D_outer={self.D_outer}",
                path="layer",
            )
        if not self.density > 0.0:
            raise InvariantError(f"density must be positive, got {self.density}", path="layer.density")

    @property
    def area(self) -> float:
        return math.pi / 4.0 * (self.D_outer**2 - self.d_inner**2)


@dataclass(frozen=True)
class RotorElement:
    """A cylindrical element of length ``L`` with 1-3 layers ordered inside-out."""

    L: float
    layers: tuple[Layer, ...]

    def __post_init__(self):
        if not self.L > 0.0:
            raise InvariantError(f"element length must be positive, got {self.L}", path="element.L_m")
        if not 1 <= len(self.layers) <= 3:
            raise InvariantError(
                f"element must have 1 to 3 layers, got {len(self.layers)}", path="element.layers"
            )
        for k in range(len(self.layers) - 1):
            outer, inner = self.layers[k].D_outer, self.layers[k + 1].d_inner
            if outer != inner:
                raise InvariantError(
                    f"layers {k + 1} and {k + 2} are not contiguous: "
                    f"D_m={outer} != d_m={inner}",
                    path=f"element.layers[{k + 1}].d_m",
                )


@dataclass(frozen=True)
class Rotor:
    """Ordered elements plus bearing assignments (element indices, 0-based)."""

    elements: tuple[RotorElement, ...]
    journal_a: int
    journal_b: int
    thrust: int | None = None

    def __post_init__(self):
        n = len(self.elements)
        if n == 0:
            raise InvariantError("rotor needs at least one element", path="elements")
        for name, idx in (("journal_a", self.journal_a), ("journal_b", self.journal_b)):
            if not (isinstance(idx, int) and 0 <= idx < n):
                raise InvariantError(f"{name}={idx} is out of range [0, {n - 1}]", path=name)
        if self.journal_a == self.journal_b:
            raise InvariantError("journal_a and journal_b must be distinct elements", path="journal_b")
        mids = self.element_midplanes()
        if not mids[self.journal_a] < mids[self.journal_b]:
            raise InvariantError(
                "journal_a must sit left of journal_b along the axis", path="journal_a"
            )
        if self.thrust is not None:
            if not (isinstance(self.thrust, int) and 0 <= self.thrust < n):
                raise InvariantError(f"thrust={self.thrust} is out of range [0, {n - 1}]", path="thrust")
            if self.thrust in (self.journal_a, self.journal_b):
                raise InvariantError("thrust element must differ from the journals", path="thrust")

    @property
    def total_length(self) -> float:
        return sum(e.L for e in self.elements)

    def element_midplanes(self) -> list[float]:
        """Axial midplane of every element, measured from the left face."""
        mids, z = [], 0.0
        for e in self.elements:
            mids.append(z + e.L / 2.0)
            z += e.L
        return mids


@dataclass(frozen=True)
class MassProperties:
    """Rigid-body properties; inertias about the centre of gravity."""

    mass: float
    z_cg: float
    I_polar: float
    I_transverse: float
    bearing_offsets: tuple[float, float]  # journal midplanes relative to CG

    def __post_init__(self):
        if not (self.mass > 0 and self.I_polar > 0 and self.I_transverse > 0):
            raise InvariantError("mass and inertias must be positive", path="mass_properties")


def mass_properties(rotor: Rotor) -> MassProperties:
    """Mass, CG, polar/transverse inertia and journal offsets of the rotor.

    Every layer contributes ``rho * pi/4 * (D^2 - d^2) * L`` of mass,
    ``m * (D^2 + d^2) / 8`` of polar inertia and
    ``m * (3 (D^2 + d^2) / 4 + L^2) / 12`` of transverse inertia about its
    own centroid; transverse terms are shifted to the rotor CG with the
    parallel-axis theorem.  Reductions use exact summation so the results
    do not depend on element order.
    """
    masses, z_mids, polars, transverses = [], [], [], []
    z = 0.0
    for e in rotor.elements:
        z_mid = z + e.L / 2.0
        for layer in e.layers:
            m = layer.density * layer.area * e.L
            d2 = layer.D_outer**2 + layer.d_inner**2
            masses.append(m)
            z_mids.append(z_mid)
            polars.append(m * d2 / 8.0)
            transverses.append(m * (3.0 * d2 / 4.0 + e.L**2) / 12.0)
        z += e.L
    mass = math.fsum(masses)
    z_cg = math.fsum(m * zm for m, zm in zip(masses, z_mids)) / mass
    I_polar = math.fsum(polars)
    I_transverse = math.fsum(
        it + m * (zm - z_cg) ** 2 for it, m, zm in zip(transverses, masses, z_mids)
    )
    mids = rotor.element_midplanes()
    return MassProperties(
        mass=mass,
        z_cg=z_cg,
        I_polar=I_polar,
        I_transverse=I_transverse,
        bearing_offsets=(mids[rotor.journal_a] - z_cg, mids[rotor.journal_b] - z_cg),
    )


# ---------------------------------------------------------------------------
# document parsing / serialization

def _layer_from_doc(doc: dict, path: str, materials: dict[str, float]) -> Layer:
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: layer must be an object")
    try:
        d = float(doc["d_m"])
        D = float(doc["D_m"])
    except KeyError as exc:
        raise FormatError(f"{path}: missing layer field {exc}") from None
    except (TypeError, ValueError):
        raise FormatError(f"{path}: layer diameters must be numbers") from None
    material = doc.get("material")
    if "rho_kg_m3" in doc:
        try:
            rho = float(doc["rho_kg_m3"])
        except (TypeError, ValueError):
            raise FormatError(f"{path}: rho_kg_m3 must be a number") from None
    elif material is not None:
        if material not in materials:
            raise UnknownMaterialError(f"{path}: unknown material {material!r}", path=path)
        rho = materials[material]
    else:
        raise FormatError(f"{path}: layer needs either material or rho_kg_m3")
    try:
        return Layer(d_inner=d, D_outer=D, density=rho, material=material)
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc.message}", path=path) from None


def parse_rotor(text: str, materials: dict[str, float] | None = None) -> Rotor:
    """Parse and validate a rotor document; see the module docstring for the schema."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid rotor document: {exc.msg}", line=exc.lineno, column=exc.colno) from None
    return rotor_from_document(doc, materials)


def rotor_from_document(doc, materials: dict[str, float] | None = None) -> Rotor:
    """Validate an already-decoded rotor document object."""
    reg = dict(MATERIALS)
    if materials:
        reg.update(materials)
    if not isinstance(doc, dict):
        raise FormatError("rotor document must be a JSON object")
    version = doc.get("format_version")
    if version != 1:
        raise FormatError(f"unsupported format_version {version!r} (expected 1)")
    raw_elements = doc.get("elements")
    if not isinstance(raw_elements, list) or not raw_elements:
        raise FormatError("elements must be a non-empty array")
    elements = []
    for i, raw in enumerate(raw_elements):
        path = f"elements[{i}]"
        if not isinstance(raw, dict):
            raise FormatError(f"{path}: element must be an object")
        try:
            L = float(raw["L_m"])
        except KeyError:
            raise FormatError(f"{path}: missing L_m") from None
        except (TypeError, ValueError):
            raise FormatError(f"{path}: L_m must be a number") from None
        raw_layers = raw.get("layers")
        if not isinstance(raw_layers, list) or not raw_layers:
            raise FormatError(f"{path}: layers must be a non-empty array")
        layers = tuple(
            _layer_from_doc(l, f"{path}.layers[{k}]", reg) for k, l in enumerate(raw_layers)
        )
        try:
            elements.append(RotorElement(L=L, layers=layers))
        except InvariantError as exc:
            raise InvariantError(f"{path}: {exc.message}", path=f"{path}.{exc.path}") from None
    for key in ("journal_a", "journal_b"):
        if key not in doc:
            raise FormatError(f"missing required field {key}")
    return Rotor(
        elements=tuple(elements),
        journal_a=doc["journal_a"],
        journal_b=doc["journal_b"],
        thrust=doc.get("thrust"),
    )


def serialize_rotor(rotor: Rotor) -> str:
    """Emit the versioned rotor document; inverse of :func:`parse_rotor`."""
    elements = []
    for e in rotor.elements:
        layers = []
        for layer in e.layers:
            entry: dict = {"d_m": layer.d_inner, "D_m": layer.D_outer}
            if layer.material is not None:
                entry["material"] = layer.material
            else:
                entry["rho_kg_m3"] = layer.density
            layers.append(entry)
        elements.append({"L_m": e.L, "layers": layers})
    doc = {"format_version": 1, "elements": elements, "journal_a": rotor.journal_a,
           "journal_b": rotor.journal_b}
    if rotor.thrust is not None:
        doc["thrust"] = rotor.thrust
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# editing

def update_element(rotor: Rotor, index: int, field: str, value) -> Rotor:
    """Apply one table edit and return a new, re-validated rotor.

    ``field`` is one of ``L_m``, ``d<k>_m``, ``D<k>_m``, ``rho<k>_kg_m3`` or
    ``material<k>`` with the 1-based layer number ``k``.  Rejected edits raise
    and leave the original untouched.
    """
    if not (0 <= index < len(rotor.elements)):
        raise InvariantError(f"element index {index} out of range", path=f"elements[{index}]")
    element = rotor.elements[index]
    path = f"elements[{index}]"

    try:
        if field == "L_m":
            new_element = replace(element, L=float(value))
        else:
            new_element = _edit_layer_field(element, field, value, path)
        elements = list(rotor.elements)
        elements[index] = new_element
        return replace(rotor, elements=tuple(elements))
    except InvariantError as exc:
        if exc.path and exc.path.startswith("elements["):
            raise
        raise InvariantError(f"{path}: {exc.message}", path=f"{path}.{field}") from None


_LAYER_FIELDS = {"d": ("d_inner", "_m"), "D": ("D_outer", "_m"),
                 "rho": ("density", "_kg_m3"), "material": ("material", "")}


def _edit_layer_field(element: RotorElement, field: str, value, path: str) -> RotorElement:
    for prefix, (attr, suffix) in _LAYER_FIELDS.items():
        tail = field[len(prefix):]
        if not (field.startswith(prefix) and tail[:1].isdigit() and tail[1:] == suffix):
            continue
        k = int(tail[0])
        if not (1 <= k <= len(element.layers)):
            raise InvariantError(f"no layer {k}", path=f"{path}.layers[{k - 1}]")
        layer = element.layers[k - 1]
        if attr == "material":
            if value not in MATERIALS:
                raise UnknownMaterialError(f"unknown material {value!r}", path=path)
            new_layer = replace(layer, material=value, density=MATERIALS[value])
        else:
            new_layer = replace(layer, **{attr: float(value)})
        layers = list(element.layers)
        layers[k - 1] = new_layer
        return replace(element, layers=tuple(layers))
    raise InvariantError(f"unknown field {field!r}", path=f"{path}.{field}")


def assign_bearings(rotor: Rotor, journal_a=_UNSET, journal_b=_UNSET, thrust=_UNSET) -> Rotor:
    """Reassign bearing elements; unspecified assignments keep their value."""
    return replace(
        rotor,
        journal_a=rotor.journal_a if journal_a is _UNSET else journal_a,
        journal_b=rotor.journal_b if journal_b is _UNSET else journal_b,
        thrust=rotor.thrust if thrust is _UNSET else thrust,
    )
