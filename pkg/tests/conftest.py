# -*- coding: utf-8 -*-
"""
Shared fixtures for the spinframe test suite.
"""

import numpy as np
import pytest

from src.business.dirac_service import DiracService
from src.business.framing_service import FramingService
from src.business.geometry_service import GeometryService
from src.business.verification_service import VerificationService
from src.data.data_models import ConformalFactor, FourierTerm, Grid, Lattice, SpinStructure


@pytest.fixture
def unit_lattice():
    return Lattice.cubic()


@pytest.fixture
def stretched_lattice():
    return Lattice.diagonal(1.0, 1.0, 2.0)


@pytest.fixture
def periodic():
    return SpinStructure((0, 0, 0))


@pytest.fixture
def grid4():
    return Grid((4, 4, 4))


@pytest.fixture
def grid8():
    return Grid((8, 8, 8))


@pytest.fixture
def bump_factor():
    """h = 1.5 + 0.4 cos(2πx)."""
    return ConformalFactor(1.5, (FourierTerm((1, 0, 0), 0.4),))


@pytest.fixture
def geometry_service():
    return GeometryService()


@pytest.fixture
def dirac_service(geometry_service):
    return DiracService(geometry_service)


@pytest.fixture
def framing_service(dirac_service):
    return FramingService(dirac_service)


@pytest.fixture
def verification_service(dirac_service):
    return VerificationService(dirac_service)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
