import pathlib

import pytest

from gasrotor.bearing import HGJBGeometry, OperatingPoint
from gasrotor.rotor import parse_rotor

ROOT = pathlib.Path(__file__).resolve().parent.parent
EXAMPLE_ROTOR = ROOT / "demos" / "example.rotor.json"

#: Nominal reference design used across the suite: 23 g rotor on 8 mm
#: journals at 40 krpm in ambient air, stable at nominal with a finite
#: feasibility margin against clearance growth.
REFERENCE_GEOMETRY = dict(alpha=0.5, beta=2.44, gamma=0.8, h_g=1.6e-5, h_r=8e-6,
                          L=0.012, D=0.008)
REFERENCE_OPERATING = dict(fluid="air", p_a=1e5, T=293.15, N=40000.0)


@pytest.fixture(scope="session")
def example_rotor_text() -> str:
    return EXAMPLE_ROTOR.read_text()


@pytest.fixture(scope="session")
def example_rotor(example_rotor_text):
    return parse_rotor(example_rotor_text)


@pytest.fixture(scope="session")
def reference_geometry() -> HGJBGeometry:
    return HGJBGeometry(**REFERENCE_GEOMETRY)


@pytest.fixture(scope="session")
def reference_operating() -> OperatingPoint:
    return OperatingPoint(**REFERENCE_OPERATING)
