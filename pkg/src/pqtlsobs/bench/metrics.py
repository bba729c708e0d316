"""Per-mode closure and outcome counts over a scenario set."""

from __future__ import annotations

from typing import Iterable, Mapping

from ..engine import MODES, PLANES, MeasurementObject, load_rules
from ..errors import BenchError
from .evaluate import ScenarioResult


def _count(measurements: Iterable[MeasurementObject], predicate) -> int:
    return sum(1 for m in measurements if predicate(m))


def primary_score(summary: Mapping, weights: Mapping[str, float] | None = None) -> float:
    """Weighted average of closure fractions; a headline, not a target.

    Components and their default equal weights come from the rules file's
    score_components list; pass weights keyed by component name to
    reprioritise. There is no canonical weighting, so two deployments may
    legitimately report different scores over identical measurements.
    """
    components = load_rules()["score_components"]
    merged = dict.fromkeys(components, 1.0) | dict(weights or {})
    unknown = sorted(set(merged) - set(components))
    if unknown:
        raise BenchError("unknown score component(s)", components=unknown)
    den = summary["denominator"]
    if den == 0:
        return 0.0
    total = sum(merged.values())
    if total <= 0:
        raise BenchError("score weights must sum to a positive value")
    score = 0.0
    for name, weight in merged.items():
        count = summary["planes"][name] if name in summary["planes"] else summary[name]
        score += weight * (count / den)
    return score / total


def mode_summary(
    results: list[ScenarioResult], mode: str, *, score_weights: Mapping[str, float] | None = None
) -> dict:
    ms = [r.measurements[mode] for r in results]
    matched = sum(r.contract_stats[mode][0] for r in results)
    applicable = sum(r.contract_stats[mode][1] for r in results)
    summary = {
        "denominator": len(ms),
        "planes": {
            plane: _count(ms, lambda m, p=plane: m.plane_closures[p]) for plane in PLANES
        },
        "observability_ok": _count(ms, lambda m: m.observability_ok),
        "object_complete": _count(ms, lambda m: m.object_complete),
        "clear_for_migration": _count(ms, lambda m: m.clear_for_migration),
        "ambiguity_flag": _count(ms, lambda m: m.ambiguity_flag),
        "contradiction": _count(ms, lambda m: bool(m.contradiction_records)),
        "capability_broader": _count(
            ms, lambda m: m.field("capability_broader").is_known and m.field("capability_broader").value
        ),
        # vacuous contracts match by convention
        "contract_match": matched / applicable if applicable else 1.0,
        "contract_coverage": sum(1 for r in results if r.contract_stats[mode][1]),
    }
    summary["primary_score"] = primary_score(summary, score_weights)
    return summary


def summary_table(
    results: list[ScenarioResult], *, score_weights: Mapping[str, float] | None = None
) -> dict[str, dict]:
    return {mode: mode_summary(results, mode, score_weights=score_weights) for mode in MODES}


def split_by_family(results: list[ScenarioResult]) -> dict[str, list[ScenarioResult]]:
    out: dict[str, list[ScenarioResult]] = {}
    for r in results:
        out.setdefault(r.family, []).append(r)
    return out


def render_table(table: Mapping[str, Mapping], title: str = "") -> str:
    """Fixed-width text rendering of a summary table."""
    rows = [
        ("session_core", lambda s: s["planes"]["session_core"]),
        ("session_hidden_detail", lambda s: s["planes"]["session_hidden_detail"]),
        ("key_establishment", lambda s: s["planes"]["key_establishment"]),
        ("capability", lambda s: s["planes"]["capability"]),
        ("authentication", lambda s: s["planes"]["authentication"]),
        ("lifecycle", lambda s: s["planes"]["lifecycle"]),
        ("observability_ok", lambda s: s["observability_ok"]),
        ("object_complete", lambda s: s["object_complete"]),
        ("clear_for_migration", lambda s: s["clear_for_migration"]),
        ("ambiguity_flag", lambda s: s["ambiguity_flag"]),
        ("contradiction", lambda s: s["contradiction"]),
        ("capability_broader", lambda s: s["capability_broader"]),
        ("contract_coverage", lambda s: s["contract_coverage"]),
    ]
    modes = list(table)
    lines = []
    if title:
        lines.append(title)
    header = f"{'':24}" + "".join(f"{m:>18}" for m in modes)
    lines.append(header)
    for label, pick in rows:
        cells = []
        for m in modes:
            s = table[m]
            cells.append(f"{pick(s)}/{s['denominator']}")
        lines.append(f"{label:24}" + "".join(f"{c:>18}" for c in cells))
    for label in ("contract_match", "primary_score"):
        cells = [f"{table[m][label]:.2f}" for m in modes]
        lines.append(f"{label:24}" + "".join(f"{c:>18}" for c in cells))
    return "\n".join(lines)
