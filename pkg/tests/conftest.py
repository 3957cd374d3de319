"""Shared fixtures: the expensive reports are computed once per session."""

import math
import time

import pytest

from maxconst import domain
from maxconst.constants import compute_constants
from maxconst.derham import assemble_operators

PI = math.pi

# [0,2]x[0,2]x[0,1] minus [1,2]x[1,2]x[0,1], as three unit-footprint boxes
L_SHAPE_BOXES = (
    ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
    ((1.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
    ((0.0, 1.0, 0.0), (1.0, 1.0, 1.0)),
)


def make_lshape(h):
    return domain.make_union_of_boxes(L_SHAPE_BOXES, h)


def make_bundle(spec):
    return assemble_operators(domain.enumerate_dofs(spec))


@pytest.fixture(scope="session")
def cube_reports():
    """Constants of the pi-cube at pi/8, pi/16, pi/32 plus wall times."""
    reports = {}
    seconds = {}
    for n in (8, 16, 32):
        h = PI / n
        t0 = time.perf_counter()
        reports[n] = compute_constants(domain.make_box((PI, PI, PI), h), tol=1e-8)
        seconds[n] = time.perf_counter() - t0
    return reports, seconds


@pytest.fixture(scope="session")
def brick_reports():
    return {
        n: compute_constants(domain.make_box((1.0, 2.0, 3.0), 1.0 / n), tol=1e-8)
        for n in (8, 16)
    }


@pytest.fixture(scope="session")
def brick_doubled_report():
    return compute_constants(domain.make_box((2.0, 4.0, 6.0), 1.0 / 4), tol=1e-8)


@pytest.fixture(scope="session")
def lshape_report():
    return compute_constants(make_lshape(1.0 / 8), tol=1e-8)


@pytest.fixture(scope="session")
def cube_pi8_bundle():
    return make_bundle(domain.make_box((PI, PI, PI), PI / 8))


@pytest.fixture(scope="session")
def cube_pi16_bundle():
    return make_bundle(domain.make_box((PI, PI, PI), PI / 16))


@pytest.fixture(scope="session")
def small_cube_bundle():
    """Unit cube at h=1/4: big enough to be nontrivial, small enough for dense."""
    return make_bundle(domain.make_box((1.0, 1.0, 1.0), 0.25))
