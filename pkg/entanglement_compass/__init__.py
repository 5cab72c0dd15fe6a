from .entanglement_compass import EntanglementCompass, create_certifying_compass, create_screening_compass
from .hermitian import DensityOperator, HermitianOperator
from .state import DetectionState
from .scenarios import run_compass_scenarios
from .witness import Verdict, VerdictKind, Witness, detect_entanglement

__version__ = "1.0.0"
__title__ = "Entanglement Compass - Entanglement witnesses from semidefinite relaxations"
__description__ = "Decides entangled vs inconclusive for density operators with robust-SDP relaxations"
__all__ = [
    "EntanglementCompass",
    "create_certifying_compass",
    "create_screening_compass",
    "DensityOperator",
    "HermitianOperator",
    "DetectionState",
    "Verdict",
    "VerdictKind",
    "Witness",
    "detect_entanglement",
    "run_compass_scenarios",
]
