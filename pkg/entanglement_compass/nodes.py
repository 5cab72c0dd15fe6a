import logging
import time
from typing import Any, Dict, List, Optional

import numpy as np
from langchain_core.runnables import RunnableConfig

from .hermitian import DensityOperator, HermitianOperator, InvariantError, eigenvalues
from .lfr import IllPosedError
from .multipartite import detect_multipartite
from .parsers import MatrixFileParser
from .sdp import SolverError, SolverSettings
from .sprocedure import InvalidMultiplierError, Multiplier, detect_with_sprocedure
from .state import DetectionConfig, DetectionState
from .utils import format_verdict_line, validate_report_schema
from .witness import (
    DetectionSettings,
    Verdict,
    detect_entanglement,
    min_separable_value,
    ppt_check,
    verify_witness,
)

logger = logging.getLogger(__name__)

METHODS = ("theorem2", "sprocedure", "cuts")

DEFAULT_CONFIG: DetectionConfig = {
    "gap_tol": 1e-8,
    "feas_tol": 1e-8,
    "max_iterations": 200,
    "detect_eps": 1e-6,
    "seed": 0,
    "samples": 1000,
    "multiplier_samples": 1000,
    "restarts": 8,
    "seesaw_iterations": 500,
    "validate": True,
}


def _event(stage: str, message: str) -> List[Dict[str, Any]]:
    return [{"stage": stage, "message": message}]


def _plain(value: Any) -> Any:
    """Numpy scalars to Python numbers so the state stays checkpointable"""
    if isinstance(value, dict):
        return {key: _plain(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _error_kind(error: Exception) -> str:
    if isinstance(error, InvalidMultiplierError):
        return "invalid_multiplier"
    if isinstance(error, (SolverError, IllPosedError)):
        return "solver_failure"
    return "invalid_input"


class DetectionNodes:
    """LangGraph workflow nodes for entanglement detection"""

    def __init__(self, defaults: Optional[Dict[str, Any]] = None):
        self.defaults = {**DEFAULT_CONFIG, **(defaults or {})}
        self.parser = MatrixFileParser()

    def update_defaults(self, updates: Dict[str, Any]):
        unknown = set(updates) - set(DEFAULT_CONFIG)
        if unknown:
            raise ValueError(f"Unknown detection settings: {sorted(unknown)}")
        self.defaults.update(updates)
        logger.info(f"Updated detection defaults: {updates}")

    def _get_detection_config(self, config: Optional[RunnableConfig] = None) -> Dict[str, Any]:
        """Extract detection tunables from workflow config, falling back to defaults"""
        if not config or "configurable" not in config:
            return dict(self.defaults)

        configurable = config["configurable"]
        return {key: configurable.get(key, default) for key, default in self.defaults.items()}

    @staticmethod
    def _settings(cfg: Dict[str, Any]) -> DetectionSettings:
        solver = SolverSettings(
            gap_tol=cfg["gap_tol"],
            feas_tol=cfg["feas_tol"],
            max_iterations=cfg["max_iterations"],
        )
        return DetectionSettings(solver=solver, detect_eps=cfg["detect_eps"])

    def _failed(self, state: DetectionState, stage: str, error: Exception) -> DetectionState:
        kind = _error_kind(error)
        logger.error(f"{stage} failed ({kind}): {error}")
        return {
            **state,
            "events": _event(stage, f"failed: {error}"),
            "error_context": f"{stage} failed: {error}",
            "error_kind": kind,
            "processing_stage": "error",
        }

    def _density(self, state: DetectionState) -> DensityOperator:
        return self.parser.parse_document(state["matrix_document"]).to_density()

    def load_state(self, state: DetectionState, config: Optional[RunnableConfig] = None) -> DetectionState:
        """Parse the matrix document and check the density-operator invariants"""
        logger.info("Loading density operator...")

        try:
            parsed = self.parser.parse_document(state.get("matrix_document"))
            rho = parsed.to_density()

            method = state.get("method", "theorem2")
            if method == "auto":
                method = "theorem2" if rho.is_bipartite else "cuts"
            if method not in METHODS:
                raise InvariantError(f"unknown method {method!r}; expected one of {list(METHODS)}")
            if method in ("theorem2", "sprocedure") and not rho.is_bipartite:
                raise InvariantError(f"method {method} needs a bipartite state, got dims {list(rho.dims)}")

            metadata = {
                "name": parsed.name,
                "dims": list(rho.dims),
                "dim": rho.dim,
                "parties": len(rho.dims),
                "trace": rho.op.trace(),
                "min_eigenvalue": float(eigenvalues(rho.op)[0]),
            }
            return {
                **state,
                "events": _event("load_state", f"loaded {parsed.name or 'state'} with dims {list(rho.dims)}"),
                "method": method,
                "state_metadata": metadata,
                "processing_stage": "state_loaded",
            }

        except Exception as e:
            return self._failed(state, "load_state", e)

    def screen_ppt(self, state: DetectionState, config: Optional[RunnableConfig] = None) -> DetectionState:
        """Partial-transpose screen; reported alongside the relaxation verdict"""
        logger.info("Screening with the partial transpose...")

        try:
            rho = self._density(state)
            if rho.is_bipartite:
                is_ppt, min_eig = ppt_check(rho)
                screen = {"applicable": True, "is_ppt": is_ppt, "min_eigenvalue": min_eig}
                message = "PPT" if is_ppt else f"NPT min_eig={min_eig:.6g}"
            else:
                screen = {"applicable": False}
                message = "skipped for a multipartite state"
            return {
                **state,
                "events": _event("screen_ppt", message),
                "ppt_screen": screen,
                "processing_stage": "ppt_screened",
            }

        except Exception as e:
            return self._failed(state, "screen_ppt", e)

    def _detection_payload(self, verdict: Verdict, rho: DensityOperator) -> Dict[str, Any]:
        certificates = verdict.solution.certificates() if verdict.solution is not None else {}
        witness = None
        if verdict.witness is not None:
            witness = self.parser.matrix_document(verdict.witness.matrix, rho.dims, name="witness")
        return {
            "method": verdict.method,
            "verdict": verdict.kind.value,
            "value": float(verdict.value),
            "detect_eps": verdict.detect_eps,
            "certificates": _plain(certificates),
            "witness": witness,
            "details": _plain(verdict.details),
        }

    def _solve(self, state: DetectionState, config: Optional[RunnableConfig], stage: str, run) -> DetectionState:
        logger.info(f"Running {stage}...")

        try:
            cfg = self._get_detection_config(config)
            rho = self._density(state)
            verdict = run(rho, cfg)
            payload = self._detection_payload(verdict, rho)
            return {
                **state,
                "events": _event(stage, format_verdict_line(verdict.kind.value, verdict.value)),
                "detection": payload,
                "processing_stage": "detected",
            }

        except Exception as e:
            return self._failed(state, stage, e)

    def solve_theorem2(self, state: DetectionState, config: Optional[RunnableConfig] = None) -> DetectionState:
        """Pairwise block relaxation on a bipartite state"""
        return self._solve(state, config, "solve_theorem2",
                           lambda rho, cfg: detect_entanglement(rho, self._settings(cfg)))

    def solve_sprocedure(self, state: DetectionState, config: Optional[RunnableConfig] = None) -> DetectionState:
        """S-procedure relaxation with the supplied (or simple) multiplier"""

        def run(rho, cfg):
            multiplier = None
            document = state.get("multiplier_document")
            if document is not None:
                try:
                    multiplier = Multiplier.from_matrix(self.parser.parse_document(document).to_hermitian())
                except InvariantError as e:
                    raise InvalidMultiplierError(f"malformed multiplier: {e}") from e
            return detect_with_sprocedure(rho, multiplier, self._settings(cfg),
                                          samples=cfg["multiplier_samples"], seed=cfg["seed"])

        return self._solve(state, config, "solve_sprocedure", run)

    def solve_cuts(self, state: DetectionState, config: Optional[RunnableConfig] = None) -> DetectionState:
        """Pairwise relaxation across every bipartite cut"""
        return self._solve(state, config, "solve_cuts",
                           lambda rho, cfg: detect_multipartite(rho, self._settings(cfg)))

    def validate_witness(self, state: DetectionState, config: Optional[RunnableConfig] = None) -> DetectionState:
        """Product-state see-saw and separable sampling on the returned witness"""
        logger.info("Validating witness...")

        try:
            cfg = self._get_detection_config(config)
            rho = self._density(state)
            document = state.get("detection", {}).get("witness")
            if not cfg["validate"] or document is None:
                reason = "disabled" if not cfg["validate"] else "no witness"
                return {
                    **state,
                    "events": _event("validate_witness", f"skipped ({reason})"),
                    "validation": {"performed": False, "reason": reason},
                    "processing_stage": "witness_validated",
                }

            w = HermitianOperator(self.parser.parse_document(document).matrix)
            check = verify_witness(w.matrix, rho.dims, rho, cfg["restarts"], cfg["seesaw_iterations"], cfg["seed"])
            separable_min = min_separable_value(w, rho.dims, cfg["samples"], cfg["seed"])
            failures = list(check.failures)
            if separable_min < -1e-7:
                failures.append(f"negative on a sampled separable state: {separable_min:.3e}")
            if failures:
                logger.warning(f"Witness validation flagged: {failures}")
            validation = {
                "performed": True,
                "trace": check.trace,
                "min_eigenvalue": check.min_eigenvalue,
                "seesaw_value": check.seesaw_value,
                "state_value": check.state_value,
                "separable_min": separable_min,
                "samples": cfg["samples"],
                "failures": failures,
                "passes": not failures,
            }
            return {
                **state,
                "events": _event("validate_witness", "passed" if not failures else "; ".join(failures)),
                "validation": _plain(validation),
                "processing_stage": "witness_validated",
            }

        except Exception as e:
            return self._failed(state, "validate_witness", e)

    def synthesize_report(self, state: DetectionState, config: Optional[RunnableConfig] = None) -> DetectionState:
        """Assemble and validate the ReportFile payload"""
        logger.info("Synthesizing report...")

        try:
            cfg = self._get_detection_config(config)
            detection = state.get("detection", {})
            validation = state.get("validation", {})
            started = state.get("started")
            wall_time = time.perf_counter() - started if started is not None else 0.0

            extra = {
                "state": state.get("state_metadata", {}),
                "ppt": state.get("ppt_screen", {}),
                "validation": validation,
                "details": detection.get("details", {}),
            }
            report = self.parser.report_document(
                method=detection.get("method", state.get("method", "unknown")),
                verdict=detection.get("verdict", "Inconclusive"),
                value=detection.get("value"),
                detect_eps=detection.get("detect_eps", cfg["detect_eps"]),
                certificates=detection.get("certificates", {}),
                witness=detection.get("witness"),
                seesaw_value=validation.get("seesaw_value"),
                seed=cfg["seed"],
                wall_time=wall_time,
                extra=extra,
            )
            validate_report_schema(report)

            return {
                **state,
                "events": _event("synthesize_report", "report ready"),
                "report": report,
                "processing_stage": "report_ready",
            }

        except Exception as e:
            return self._failed(state, "synthesize_report", e)
