import math
from typing import Any, Dict, Optional


def validate_report_schema(report: Dict[str, Any]):
    """Validate a ReportFile payload against the expected schema"""
    required_sections = [
        "method", "verdict", "value", "detect_eps",
        "certificates", "witness", "seesaw_value", "seed", "wall_time",
    ]

    for section in required_sections:
        if section not in report:
            raise ValueError(f"Missing report section: {section}")

    if report["verdict"] not in ("Entangled", "Inconclusive"):
        raise ValueError(f"Unknown verdict kind: {report['verdict']}")

    # a null value stands for an infeasible relaxation
    value = report["value"]
    entangled = value is not None and value < -report["detect_eps"]
    if entangled != (report["verdict"] == "Entangled"):
        raise ValueError(
            f"Verdict {report['verdict']} inconsistent with value {value} and detect_eps {report['detect_eps']}"
        )
    if report["verdict"] == "Entangled" and report["witness"] is None:
        raise ValueError("Entangled verdict without a witness")

    for key in ("duality_gap", "iterations"):
        if key not in report["certificates"]:
            raise ValueError(f"Missing solver certificate: {key}")


def format_value(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isinf(value)):
        return "inf"
    return f"{value:.6g}"


def format_verdict_line(verdict: str, value: Optional[float]) -> str:
    """One-line console verdict, e.g. 'ENTANGLED value=-0.183503'"""
    return f"{verdict.upper()} value={format_value(value)}"


def generate_detection_summary(state) -> str:
    """Human-readable summary of a finished detection run"""
    metadata = state.get("state_metadata", {})
    detection = state.get("detection", {})
    validation = state.get("validation", {})
    ppt = state.get("ppt_screen", {})

    if ppt.get("applicable"):
        ppt_line = "PPT" if ppt.get("is_ppt") else f"NPT (min eigenvalue {ppt.get('min_eigenvalue', 0.0):.4g})"
    else:
        ppt_line = "not applicable"

    lines = [
        "ENTANGLEMENT COMPASS REPORT",
        "",
        f"• State: {metadata.get('name') or 'unnamed'} with dims {metadata.get('dims')}",
        f"• Method: {detection.get('method', 'unknown')}",
        f"• Verdict: {format_verdict_line(detection.get('verdict', 'unknown'), detection.get('value'))}",
        f"• Partial transpose: {ppt_line}",
    ]
    certificates = detection.get("certificates", {})
    if certificates:
        lines.append(
            f"• Solver: {certificates.get('status')} in {certificates.get('iterations')} iterations, "
            f"gap {certificates.get('duality_gap')}"
        )
    if validation.get("performed"):
        lines.append(f"• Product-state minimum of the witness: {format_value(validation.get('seesaw_value'))}")
        lines.append(f"• Smallest value on {validation.get('samples')} separable samples: "
                     f"{format_value(validation.get('separable_min'))}")
        for failure in validation.get("failures", []):
            lines.append(f"  ! {failure}")
    return "\n".join(lines)
