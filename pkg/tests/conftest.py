import numpy as np
import pytest

from dunkl import StandardConnection, dihedral_connection, three_line_connection
from flat_forms import FlatnessReport, flatness_report, q_operator
from monodromy import MonodromyRep, monodromy_rep


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def dihedral_03() -> StandardConnection:
    return dihedral_connection(0.3)


@pytest.fixture(scope="session")
def dihedral_03_rep(dihedral_03: StandardConnection) -> MonodromyRep:
    return monodromy_rep(dihedral_03)


@pytest.fixture(scope="session")
def dihedral_03_report(dihedral_03_rep: MonodromyRep) -> FlatnessReport:
    return flatness_report(q_operator(dihedral_03_rep))


@pytest.fixture(scope="session")
def three_line_half_rep() -> MonodromyRep:
    return monodromy_rep(three_line_connection(0.5, 0.5, 0.5))
