"""Shared fixtures: expensive constructions built once per session."""
import numpy as np
import pytest

import heisembed as he
from heisembed import foliation as fo, laakso as lk, surfaces as su

PRODUCTION_DEPTH = 12


@pytest.fixture(scope="session")
def phi():
    return he.build_snowflake_line(PRODUCTION_DEPTH)


@pytest.fixture(scope="session")
def circle():
    return he.build_snowflake_circle(PRODUCTION_DEPTH)


@pytest.fixture(scope="session")
def torus_chart():
    return fo.build_chart(fo.torus_surface(0.5, 2.0), np.array([2.5, 0.0, 0.0]), 0.12)


@pytest.fixture(scope="session")
def koranyi_chart():
    return su.build_koranyi_sphere()


@pytest.fixture(scope="session")
def euclid_chart():
    return su.build_euclidean_sphere()


@pytest.fixture(scope="session")
def laakso3():
    g = lk.build_laakso(3)
    return g, lk.embed_laakso(g)
