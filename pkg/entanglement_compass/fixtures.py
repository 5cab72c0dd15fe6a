"""Reference states and witnesses, built in code and shipped as MatrixFile documents in data/."""

from pathlib import Path
from typing import Dict

import numpy as np

from .hermitian import DensityOperator, HermitianOperator
from .parsers import MatrixFile, MatrixFileParser

DATA_DIR = Path(__file__).resolve().parent / "data"

FIXTURE_FILES: Dict[str, str] = {
    "bell": "bell.json",
    "rho_ab": "rho_ab.json",
    "sigma_ab": "sigma_ab.json",
    "rho_ab_witness": "rho_ab_witness.json",
    "bell_optimal_witness": "bell_optimal_witness.json",
    "bell_relaxation_witness": "bell_relaxation_witness.json",
    "ghz": "ghz.json",
}

# printed to four decimals; the entries sum to 0.9999
RHO_AB_WITNESS_PRINTED = np.array([
    [0.1752, 0.0, 0.0, 0.0],
    [0.0, 0.1752, -0.2478, 0.0],
    [0.0, -0.2478, 0.0513, 0.0],
    [0.0, 0.0, 0.0, 0.5982],
])


def fixture_path(name: str) -> Path:
    if name not in FIXTURE_FILES:
        raise KeyError(f"unknown fixture {name!r}; available: {sorted(FIXTURE_FILES)}")
    return DATA_DIR / FIXTURE_FILES[name]


def load_fixture(name: str) -> MatrixFile:
    return MatrixFileParser.load(fixture_path(name))


def bell_state() -> DensityOperator:
    """(|00> + |11>)/sqrt(2)"""
    return DensityOperator.from_pure([1.0, 0.0, 0.0, 1.0], (2, 2))


def rho_ab() -> DensityOperator:
    matrix = np.zeros((4, 4))
    matrix[0, 0] = 1.0
    matrix[1:3, 1:3] = 1.0
    return DensityOperator.from_matrix(matrix / 3.0, (2, 2))


def sigma_ab() -> DensityOperator:
    return DensityOperator.from_matrix(np.diag([1.0, 0.0, 0.0, 2.0]) / 3.0, (2, 2))


def ghz_state(n: int = 3) -> DensityOperator:
    psi = np.zeros(2 ** n)
    psi[0] = psi[-1] = 1.0
    return DensityOperator.from_pure(psi, (2,) * n)


def bell_optimal_witness() -> HermitianOperator:
    matrix = np.zeros((4, 4))
    matrix[0, 3] = matrix[3, 0] = -0.5
    matrix[1, 1] = matrix[2, 2] = 0.5
    return HermitianOperator(matrix)


def bell_relaxation_witness() -> HermitianOperator:
    a, b, c = 0.1057, 0.3943, -0.2887
    matrix = np.diag([a, b, b, a]).astype(float)
    matrix[0, 3] = matrix[3, 0] = c
    return HermitianOperator(matrix)


def rho_ab_witness() -> HermitianOperator:
    """The printed witness for rho_AB rescaled to unit trace"""
    return HermitianOperator(RHO_AB_WITNESS_PRINTED / np.trace(RHO_AB_WITNESS_PRINTED))
