import numpy as np
import pytest

from schiffer.geometry import CurveSpec, SurfaceDescriptor, build_complex

SPHERE = SurfaceDescriptor("sphere")
TORUS = SurfaceDescriptor("torus", 2j)


def circle_complex(radius=1.0, center=0.0):
    return build_complex(SPHERE, [CurveSpec("circle", center=center, radius=radius)])


def annulus_complex(inner=0.5):
    return build_complex(SPHERE, [CurveSpec("circle", radius=inner), CurveSpec("circle", radius=1.0)])


def bands_complex(tau=2j, heights=(0.0, 1.0)):
    return build_complex(SurfaceDescriptor("torus", tau),
                         [CurveSpec("horizontal_torus_circle", height=h) for h in heights])


def capped_complex(radius=0.3, center=0.5 + 1j):
    return build_complex(TORUS, [CurveSpec("circle", center=center, radius=radius)])


@pytest.fixture(scope="session")
def circle_cx():
    return circle_complex()


@pytest.fixture(scope="session")
def annulus_cx():
    return annulus_complex()


@pytest.fixture(scope="session")
def bands_cx():
    return bands_complex()


@pytest.fixture(scope="session")
def capped_cx():
    return capped_complex()


@pytest.fixture(autouse=True)
def _quiet_numpy():
    with np.errstate(all="ignore"):
        yield


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
