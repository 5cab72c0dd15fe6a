from typing import TypedDict, Annotated, List, Dict, Any, Optional, Literal
import operator

Method = Literal["theorem2", "sprocedure", "cuts", "auto"]


class DetectionConfig(TypedDict, total=False):
    """Tunables carried in RunnableConfig["configurable"]"""
    gap_tol: float
    feas_tol: float
    max_iterations: int
    detect_eps: float
    seed: int
    samples: int
    multiplier_samples: int
    restarts: int
    seesaw_iterations: int
    validate: bool


class DetectionState(TypedDict):
    """Core state of the detection workflow; every field stays JSON-compatible"""
    events: Annotated[List[Dict[str, Any]], operator.add]
    matrix_document: Dict[str, Any]
    multiplier_document: Optional[Dict[str, Any]]
    method: Method
    started: float
    state_metadata: Dict[str, Any]
    ppt_screen: Dict[str, Any]
    detection: Dict[str, Any]
    validation: Dict[str, Any]
    report: Dict[str, Any]
    processing_stage: str
    error_context: Optional[str]
    error_kind: Optional[str]  # "invalid_input", "solver_failure", "invalid_multiplier"
