import numpy as np
import pytest

from entanglement_compass.entanglement_compass import EntanglementCompass
from entanglement_compass.fixtures import (
    bell_optimal_witness,
    bell_state,
    fixture_path,
    ghz_state,
    rho_ab,
    rho_ab_witness,
    sigma_ab,
)
from entanglement_compass.parsers import MatrixFileParser


@pytest.fixture
def rng():
    """Seeded generator so random-input tests are reproducible"""
    return np.random.default_rng(20240611)


@pytest.fixture
def bell():
    return bell_state()


@pytest.fixture
def rho():
    """The entangled member of the isospectral pair"""
    return rho_ab()


@pytest.fixture
def sigma():
    """The separable member of the isospectral pair"""
    return sigma_ab()


@pytest.fixture
def ghz():
    return ghz_state(3)


@pytest.fixture
def bell_oew():
    return bell_optimal_witness()


@pytest.fixture
def printed_witness():
    return rho_ab_witness()


@pytest.fixture
def data_file():
    """Path lookup for the bundled MatrixFile documents"""
    return fixture_path


@pytest.fixture
def write_matrix(tmp_path):
    """Write a MatrixFile document to a temporary path and return the path"""

    def _write(matrix, dims, name="state.json"):
        return MatrixFileParser.write(tmp_path / name, MatrixFileParser.matrix_document(matrix, dims))

    return _write


@pytest.fixture
def compass():
    """Workflow without checkpointing and with light validation settings"""
    return EntanglementCompass(enable_checkpointing=False, defaults={"samples": 50, "restarts": 4})
