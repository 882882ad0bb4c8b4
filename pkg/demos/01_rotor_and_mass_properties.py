"""Load the example rotor, inspect it, edit it, and round-trip the document.

Run from the repository root:  python demos/01_rotor_and_mass_properties.py
"""

import pathlib

from gasrotor import mass_properties, parse_rotor, serialize_rotor, update_element

HERE = pathlib.Path(__file__).parent

text = (HERE / "example.rotor.json").read_text()
rotor = parse_rotor(text)

print(f"elements: {len(rotor.elements)}, total length {rotor.total_length * 1e3:.1f} mm")
print(f"journals on elements {rotor.journal_a} and {rotor.journal_b}, "
      f"thrust collar on {rotor.thrust}")

mp = mass_properties(rotor)
print(f"mass           {mp.mass * 1e3:8.2f} g")
print(f"centre of mass {mp.z_cg * 1e3:8.2f} mm from the left face")
print(f"I_polar        {mp.I_polar:8.3e} kg m^2")
print(f"I_transverse   {mp.I_transverse:8.3e} kg m^2")
z1, z2 = mp.bearing_offsets
print(f"journal midplanes at {z1 * 1e3:+.2f} / {z2 * 1e3:+.2f} mm from the CG")

# table edits return a new, re-validated rotor; the original is untouched
longer = update_element(rotor, 2, "L_m", 0.014)
print(f"\nafter stretching the motor section: mass "
      f"{mass_properties(longer).mass * 1e3:.2f} g")

# the document serializer round-trips exactly
assert parse_rotor(serialize_rotor(rotor)) == rotor
print("serialize -> parse round trip OK")
