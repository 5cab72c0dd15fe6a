from dataclasses import dataclass
from typing import List, Optional, Tuple

from .entanglement_compass import EntanglementCompass
from .fixtures import fixture_path
from .utils import format_value


@dataclass(frozen=True)
class Scenario:
    name: str
    fixture: str
    method: str
    expected_verdict: str
    value_range: Optional[Tuple[float, float]] = None


CASE_STUDIES = (
    Scenario("Bell state, pairwise relaxation", "bell", "theorem2", "Entangled", (-0.1845, -0.1825)),
    Scenario("Isospectral pair: rho_AB", "rho_ab", "theorem2", "Entangled", (-0.0323, -0.0303)),
    Scenario("Isospectral pair: sigma_AB", "sigma_ab", "theorem2", "Inconclusive", (-1e-6, 1e-3)),
    Scenario("GHZ state across cuts", "ghz", "cuts", "Entangled", (-1.0, -1e-3)),
    Scenario("Bell state, simple multiplier", "bell", "sprocedure", "Inconclusive"),
)


def run_compass_scenarios(compass: Optional[EntanglementCompass] = None, scenarios=CASE_STUDIES) -> bool:
    print("ENTANGLEMENT COMPASS - bundled case studies")
    print("=" * 80)

    compass = compass or EntanglementCompass(enable_checkpointing=False, defaults={"samples": 200})
    results = [run_scenario(compass, scenario) for scenario in scenarios]
    print_scenario_summary(results)
    return all(r["status"] == "PASSED" for r in results)


def run_scenario(compass: EntanglementCompass, scenario: Scenario) -> dict:
    print(f"\nScenario: {scenario.name}")
    print("-" * 40)

    try:
        result = compass.analyze_file(fixture_path(scenario.fixture), method=scenario.method)
        if result["status"] != "success":
            print(f"Analysis failed: {result.get('error', 'Unknown error')}")
            return {"scenario": scenario.name, "status": "FAILED", "error": result.get("error", "Unknown error")}

        report = result["report"]
        print(result["verdict_line"])
        print(result["summary"])

        problems = []
        if report["verdict"] != scenario.expected_verdict:
            problems.append(f"expected {scenario.expected_verdict}, got {report['verdict']}")
        if scenario.value_range is not None:
            low, high = scenario.value_range
            value = report["value"]
            if value is None or not low <= value <= high:
                problems.append(f"value {format_value(value)} outside [{low:g}, {high:g}]")
        return {
            "scenario": scenario.name,
            "status": "FAILED" if problems else "PASSED",
            "value": report["value"],
            "verdict": report["verdict"],
            "error": "; ".join(problems) or None,
        }

    except Exception as e:
        print(f"Scenario raised: {str(e)}")
        return {"scenario": scenario.name, "status": "ERROR", "error": str(e)}


def print_scenario_summary(results: List[dict]):
    print("\n" + "=" * 80)
    print("SCENARIO SUMMARY")
    print("=" * 80)

    passed = [r for r in results if r["status"] == "PASSED"]
    failed = [r for r in results if r["status"] in ("FAILED", "ERROR")]
    print(f"Passed: {len(passed)}/{len(results)}")
    for result in passed:
        print(f"  • {result['scenario']}: {result['verdict']} value={format_value(result['value'])}")
    if failed:
        print("\nFailures:")
        for result in failed:
            print(f"  • {result['scenario']}: {result.get('error', 'Unknown error')}")
