import logging
import time
import uuid
from pathlib import Path
from typing import Any, Dict, Optional, Union

from langgraph.checkpoint.memory import MemorySaver
from langgraph.graph import END, START, StateGraph

from .hermitian import DensityOperator, HermitianOperator
from .nodes import DEFAULT_CONFIG, DetectionNodes
from .parsers import MatrixFileParser
from .state import DetectionState
from .utils import format_verdict_line, generate_detection_summary

logger = logging.getLogger(__name__)

StateInput = Union[Dict[str, Any], DensityOperator, str, Path]


class EntanglementCompass:
    """Entanglement detection workflow: load, screen, relax, validate, report"""

    def __init__(self, enable_checkpointing: bool = True, defaults: Optional[Dict[str, Any]] = None):
        self.nodes = DetectionNodes(defaults)
        self.parser = MatrixFileParser()

        self.checkpointer = MemorySaver() if enable_checkpointing else None
        self.workflow = None
        self._build_detection_workflow()

        logger.info(f"Entanglement Compass initialized (checkpointing={'on' if self.checkpointer else 'off'})")

    @property
    def defaults(self) -> Dict[str, Any]:
        return self.nodes.defaults

    def update_defaults(self, updates: Dict[str, Any]):
        """Change the default tunables used when a run does not override them"""
        self.nodes.update_defaults(updates)

    def _build_detection_workflow(self):
        workflow = StateGraph(DetectionState)

        workflow.add_node("load_state", self.nodes.load_state)
        workflow.add_node("screen_ppt", self.nodes.screen_ppt)
        workflow.add_node("solve_theorem2", self.nodes.solve_theorem2)
        workflow.add_node("solve_sprocedure", self.nodes.solve_sprocedure)
        workflow.add_node("solve_cuts", self.nodes.solve_cuts)
        workflow.add_node("validate_witness", self.nodes.validate_witness)
        workflow.add_node("synthesize_report", self.nodes.synthesize_report)

        workflow.add_edge(START, "load_state")
        workflow.add_conditional_edges(
            "load_state",
            self._route_on_error,
            {"continue": "screen_ppt", "error": END},
        )
        workflow.add_conditional_edges(
            "screen_ppt",
            self._route_method,
            {
                "theorem2": "solve_theorem2",
                "sprocedure": "solve_sprocedure",
                "cuts": "solve_cuts",
                "error": END,
            },
        )
        for solver in ("solve_theorem2", "solve_sprocedure", "solve_cuts"):
            workflow.add_conditional_edges(
                solver,
                self._route_on_error,
                {"continue": "validate_witness", "error": END},
            )
        workflow.add_conditional_edges(
            "validate_witness",
            self._route_on_error,
            {"continue": "synthesize_report", "error": END},
        )
        workflow.add_edge("synthesize_report", END)

        self.workflow = workflow.compile(checkpointer=self.checkpointer)

    def _route_on_error(self, state: DetectionState) -> str:
        if state.get("processing_stage") == "error":
            return "error"
        return "continue"

    def _route_method(self, state: DetectionState) -> str:
        if state.get("processing_stage") == "error":
            return "error"
        return state.get("method", "theorem2")

    def _as_document(self, source: StateInput) -> Dict[str, Any]:
        if isinstance(source, DensityOperator):
            return self.parser.matrix_document(source.matrix, source.dims)
        if isinstance(source, (str, Path)):
            parsed = self.parser.load(source)
            return self.parser.matrix_document(parsed.matrix, parsed.dims, parsed.name)
        return source

    def analyze_state(
        self,
        source: StateInput,
        method: str = "theorem2",
        multiplier: Optional[Union[Dict[str, Any], HermitianOperator]] = None,
        thread_id: Optional[str] = None,
        **tunables: Any,
    ) -> Dict[str, Any]:
        """Run the detection workflow on a state given as a document, an operator or a file path"""
        unknown = set(tunables) - set(DEFAULT_CONFIG)
        if unknown:
            raise ValueError(f"Unknown detection settings: {sorted(unknown)}")

        config = {
            "configurable": {
                "thread_id": thread_id or str(uuid.uuid4()),
                **{key: tunables.get(key, default) for key, default in self.defaults.items()},
            }
        }
        logger.info(f"Starting {method} analysis (thread {config['configurable']['thread_id']})")

        try:
            document = self._as_document(source)
        except Exception as e:
            logger.error(f"Could not read input: {e}")
            return {
                "error": str(e),
                "error_kind": "invalid_input",
                "status": "analysis_failed",
                "thread_id": config["configurable"]["thread_id"],
            }
        if isinstance(multiplier, HermitianOperator):
            multiplier = self.parser.matrix_document(multiplier.matrix, [multiplier.dim])

        initial_state = DetectionState(
            events=[],
            matrix_document=document,
            multiplier_document=multiplier,
            method=method,
            started=time.perf_counter(),
            state_metadata={},
            ppt_screen={},
            detection={},
            validation={},
            report={},
            processing_stage="initialized",
            error_context=None,
            error_kind=None,
        )

        try:
            final_state = self.workflow.invoke(initial_state, config=config)
        except Exception as e:
            logger.error(f"Workflow execution failed: {e}")
            return {
                "error": f"Workflow execution failed: {str(e)}",
                "error_kind": "solver_failure",
                "status": "execution_failed",
                "thread_id": config["configurable"]["thread_id"],
            }

        return self._result(final_state, config["configurable"]["thread_id"])

    def _result(self, final_state: Dict[str, Any], thread_id: str) -> Dict[str, Any]:
        if final_state.get("processing_stage") == "error":
            return {
                "error": final_state.get("error_context"),
                "error_kind": final_state.get("error_kind"),
                "status": "analysis_failed",
                "events": final_state.get("events", []),
                "thread_id": thread_id,
            }

        report = final_state.get("report", {})
        return {
            "report": report,
            "verdict_line": format_verdict_line(report.get("verdict", "Inconclusive"), report.get("value")),
            "summary": generate_detection_summary(final_state),
            "events": final_state.get("events", []),
            "status": "success",
            "thread_id": thread_id,
        }

    def analyze_file(self, path: Union[str, Path], method: str = "theorem2", **kwargs: Any) -> Dict[str, Any]:
        return self.analyze_state(path, method=method, **kwargs)

    def get_workflow_state(self, thread_id: str) -> Optional[Dict[str, Any]]:
        """Get the current state of a workflow thread (requires checkpointing)"""
        if not self.checkpointer:
            logger.warning("Checkpointing not enabled. Cannot retrieve workflow state.")
            return None

        try:
            config = {"configurable": {"thread_id": thread_id}}
            state = self.workflow.get_state(config)
            return state.values if state else None
        except Exception as e:
            logger.error(f"Failed to retrieve workflow state: {e}")
            return None

    def resume_workflow(self, thread_id: str, additional_input: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Resume a workflow from checkpoint (requires checkpointing)"""
        if not self.checkpointer:
            raise ValueError("Checkpointing not enabled. Cannot resume workflow.")

        config = {"configurable": {"thread_id": thread_id, **self.defaults}}

        try:
            state = self.workflow.get_state(config)
            if not state or not state.values:
                raise ValueError(f"No checkpoint found for thread_id: {thread_id}")
            result = self.workflow.invoke(additional_input, config=config)
            return self._result(result, thread_id)

        except Exception as e:
            logger.error(f"Failed to resume workflow: {e}")
            return {
                "error": f"Failed to resume workflow: {str(e)}",
                "status": "resume_failed",
                "thread_id": thread_id,
            }


def create_screening_compass() -> EntanglementCompass:
    """Factory for quick screening: no witness validation, no checkpointing"""
    return EntanglementCompass(enable_checkpointing=False, defaults={"validate": False})


def create_certifying_compass(samples: int = 1000, restarts: int = 16) -> EntanglementCompass:
    """Factory for runs that validate every witness thoroughly"""
    return EntanglementCompass(defaults={"validate": True, "samples": samples, "restarts": restarts})
