"""Score inferred measurements against catalog ground truth and contracts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from ..engine import (
    MODE_B1,
    MODE_B2,
    MODE_B3,
    MODES,
    MeasurementObject,
    PlaneClosure,
    compute_plane_closure,
    infer_measurement,
)
from ..registry import RegistryBundle
from .catalog import Scenario, catalog
from .generate import bundle_for_mode, scenario_bundle

_ATTR_KEYS = ("completeness", "fragmented", "coalesced")
_MODE_SETS = {
    "B1": (MODE_B1,),
    "B2": (MODE_B2,),
    "B3": (MODE_B3,),
    "B2+": (MODE_B2, MODE_B3),
    "all": tuple(MODES),
}


def _normalize(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, Mapping):
        return {k: _normalize(v) for k, v in value.items()}
    return value


def evaluate_exact(measurement: MeasurementObject, truth: Mapping[str, Any]) -> list[str]:
    """Mismatches between resolved fields and ground truth.

    Truth value None means the field is structurally absent and must read
    not-applicable if it resolves at all. Unknown or ambiguous fields are
    never wrong here; whether they should have resolved is the contracts'
    concern.
    """
    errors: list[str] = []
    for name, expected in truth.items():
        if name in _ATTR_KEYS:
            actual = getattr(measurement, name)
            if actual != expected:
                errors.append(f"{name}: expected {expected!r}, measured {actual!r}")
            continue
        if name not in measurement.fields:
            errors.append(f"{name}: not tracked by the measurement")
            continue
        value = measurement.field(name)
        if value.is_known:
            if expected is None:
                errors.append(f"{name}: resolved {value.value!r} where none applies")
            elif _normalize(value.value) != _normalize(expected):
                errors.append(f"{name}: expected {expected!r}, measured {value.value!r}")
        elif value.is_not_applicable and expected is not None:
            errors.append(f"{name}: read not-applicable, expected {expected!r}")
    return errors


def check_assertion(contract: Mapping[str, Any], m: MeasurementObject) -> str | None:
    """First reason the assertion does not hold against m, or None.

    A populated value fails an unknown-state assertion: over-resolution is
    a defect here, not a bonus.
    """
    check = contract["check"]
    if check == "field":
        if contract["field"] not in m.fields:
            return "missing_path"
        value = m.field(contract["field"])
        if value.state.value != contract["state"]:
            return f"state {value.state.value}"
        if "value" in contract and _normalize(value.value) != _normalize(contract["value"]):
            return f"value {value.value!r}"
        if "reason" in contract and contract["reason"] not in value.reasons:
            return f"reasons {value.reasons}"
        return None
    if check == "plane":
        closed = m.plane_closures[contract["plane"]]
        return None if closed == contract["closed"] else f"closed={closed}"
    if check == "flag":
        actual = getattr(m, contract["flag"])
        return None if actual == contract["value"] else f"{contract['flag']}={actual}"
    if check == "contradicts":
        fields = {r["field"] for r in m.contradiction_records}
        missing = [f for f in contract["fields"] if f not in fields]
        return None if not missing else f"missing {missing}, have {sorted(fields)}"
    if check == "contradiction_free":
        if m.contradiction_records:
            fields = sorted({r["field"] for r in m.contradiction_records})
            return f"records on {fields}"
        return None
    if check == "unresolved_contains":
        if contract["identifier"] not in m.unresolved_offer_identifiers:
            return f"unresolved {m.unresolved_offer_identifiers}"
        return None
    return "unknown check"


def evaluate_contracts(
    scn: Scenario, measurements: Mapping[str, MeasurementObject]
) -> list[str]:
    """Contract clauses that do not hold, one line each."""
    failures: list[str] = []
    for contract in scn.contracts:
        for mode in _MODE_SETS[contract["mode"]]:
            got = check_assertion(contract, measurements[mode])
            if got is not None:
                failures.append(f"{mode}: {dict(contract)} -> {got}")
    return failures


def contract_tally(
    scn: Scenario, measurements: Mapping[str, MeasurementObject]
) -> dict[str, tuple[int, int]]:
    """Per mode: (assertions held, assertions applicable)."""
    tally = {mode: [0, 0] for mode in MODES}
    for contract in scn.contracts:
        for mode in _MODE_SETS[contract["mode"]]:
            tally[mode][1] += 1
            if check_assertion(contract, measurements[mode]) is None:
                tally[mode][0] += 1
    return {mode: (matched, total) for mode, (matched, total) in tally.items()}


@dataclass(frozen=True)
class ScenarioResult:
    scenario_id: str
    family: str
    measurements: Mapping[str, MeasurementObject]
    exact_errors: tuple[str, ...]
    contract_failures: tuple[str, ...]
    closures: Mapping[str, PlaneClosure]
    contract_stats: Mapping[str, tuple[int, int]]

    @property
    def ok(self) -> bool:
        return not self.exact_errors and not self.contract_failures


def run_scenario(
    scn: Scenario,
    *,
    registry: RegistryBundle | None = None,
    seed: int = 0,
) -> ScenarioResult:
    full = scenario_bundle(scn, registry=registry, seed=seed)
    measurements = {
        mode: infer_measurement(bundle_for_mode(full, mode), mode, registry=registry)
        for mode in MODES
    }
    exact: list[str] = []
    for mode in MODES:
        exact.extend(f"{mode}: {e}" for e in evaluate_exact(measurements[mode], scn.truth))
    return ScenarioResult(
        scenario_id=scn.scenario_id,
        family=scn.family,
        measurements=measurements,
        exact_errors=tuple(exact),
        contract_failures=tuple(evaluate_contracts(scn, measurements)),
        closures={
            mode: compute_plane_closure(measurements[mode], scn.required_fields)
            for mode in MODES
        },
        contract_stats=contract_tally(scn, measurements),
    )


def run_suite(
    scenarios: Iterable[Scenario] | None = None,
    *,
    registry: RegistryBundle | None = None,
    seed: int = 0,
) -> list[ScenarioResult]:
    return [
        run_scenario(s, registry=registry, seed=seed)
        for s in (catalog() if scenarios is None else scenarios)
    ]
