"""Command-line frontend: decode, probe, infer, bench, campaign, report.

Every file read or written crosses a schema boundary. Exit codes: 0 when
the operation completed and all outputs validated; 2 for malformed input
or output documents; 1 for every other deliberate failure (guardrail
refusals, inventory violations, contract failures). Failures print one
machine-readable JSON object to stderr.
"""

from __future__ import annotations

import base64
import functools
import json
import sys
from dataclasses import dataclass
from hashlib import sha256
from pathlib import Path
from typing import Any, Mapping

import click

from . import schemas, wire
from .bench import metrics
from .bench.catalog import catalog
from .bench.emulator import EndpointConfig
from .bench.evaluate import run_suite
from .bench.generate import bundle_for_mode, scenario_bundle, scenario_transcript
from .campaign import (
    TIERS,
    RoundResult,
    TargetRecord,
    compare_rounds,
    run_round,
    validate_inventory,
)
from .engine import (
    MODE_B1,
    MODE_B2,
    MODE_B3,
    EvidenceBundle,
    apply_policy_profile,
    infer_measurement,
)
from .errors import EngineConfigError, PqtlsError, SchemaError
from .registry import load_registry_payload
from .surfaces import (
    ChainObservation,
    GuardrailPolicy,
    PassiveObservation,
    ProbeResult,
    ProbeTarget,
    build_passive_observation,
    builtin_profiles,
    run_probe_with_capture,
)

_MODE_FLAGS = {"b1": MODE_B1, "b2": MODE_B2, "b3": MODE_B3}
_TLS_VERSION_NAMES = {"TLS1.3": wire.TLS13, "TLS1.2": wire.TLS12}


def _handles_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except SchemaError as error:
            click.echo(json.dumps(error.to_json(), sort_keys=True, default=str), err=True)
            sys.exit(2)
        except PqtlsError as error:
            click.echo(json.dumps(error.to_json(), sort_keys=True, default=str), err=True)
            sys.exit(1)

    return wrapper


def _load(path: str, kind: str | None = None) -> Any:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as error:
        raise SchemaError(f"{path} is not valid JSON: {error}", path=str(path)) from error
    if kind is not None:
        schemas.validate(payload, kind)
    return payload


def _emit(payload: Mapping, kind: str, out: str | None) -> None:
    """Validate then write; outputs never skip the schema boundary."""
    schemas.validate(payload, kind)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _config(ctx: click.Context) -> dict:
    return (ctx.obj or {}).get("config", {})


def _setting(ctx: click.Context, value: Any, key: str, fallback: Any) -> Any:
    if value is not None:
        return value
    return _config(ctx).get(key, fallback)


def _registry(ctx: click.Context):
    path = _config(ctx).get("registry")
    if not path:
        return None
    return load_registry_payload(json.loads(Path(path).read_text()))


def _guardrails(ctx: click.Context, timeout: float | None, retries: int | None, backoff: float | None) -> GuardrailPolicy:
    base = GuardrailPolicy()
    return GuardrailPolicy(
        timeout_s=_setting(ctx, timeout, "timeout_s", base.timeout_s),
        max_retries=_setting(ctx, retries, "max_retries", base.max_retries),
        backoff_s=_setting(ctx, backoff, "backoff_s", base.backoff_s),
    )


@click.group()
@click.option(
    "--config",
    "config_file",
    type=click.Path(exists=True, dir_okay=False),
    help="JSON file with defaults: seed, concurrency, registry, policy, probe budgets.",
)
@click.pass_context
@_handles_errors
def main(ctx: click.Context, config_file: str | None) -> None:
    """Multi-surface TLS observability: decode, probe, infer, benchmark, compare."""
    ctx.ensure_object(dict)
    if config_file:
        ctx.obj["config"] = _load(config_file, "cli_config")


# -- single-session commands ---------------------------------------------------


@main.command()
@click.argument("transcript_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--observed-at", type=float, default=None, help="Override the capture timestamp.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write JSON here instead of stdout.")
@click.pass_context
@_handles_errors
def decode(ctx: click.Context, transcript_file: str, observed_at: float | None, out: str | None) -> None:
    """Decode a captured transcript into a passive observation."""
    payload = _load(transcript_file, "transcript")
    transcript = wire.Transcript.from_json(payload)
    observation = build_passive_observation(
        transcript, observed_at=observed_at, registry=_registry(ctx)
    )
    _emit(observation.to_json(), "passive_observation", out)


@main.command()
@click.argument("host")
@click.option("--port", type=int, default=443, show_default=True)
@click.option(
    "--profile",
    "profile_name",
    type=click.Choice(sorted(builtin_profiles())),
    default="classical",
    show_default=True,
)
@click.option("--sni", default=None, help="Server name to offer; required for DNS-named targets.")
@click.option("--tier", type=click.Choice(TIERS), default="public_blind", show_default=True)
@click.option("--timeout", type=float, default=None, help="Per-attempt timeout in seconds.")
@click.option("--retries", type=int, default=None, help="Max retries on timeout or reset.")
@click.option("--backoff", type=float, default=None, help="Seconds between attempts.")
@click.option("--capture", type=click.Path(dir_okay=False), help="Also write the probe's own session transcript.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@_handles_errors
def probe(
    ctx: click.Context,
    host: str,
    port: int,
    profile_name: str,
    sni: str | None,
    tier: str,
    timeout: float | None,
    retries: int | None,
    backoff: float | None,
    capture: str | None,
    out: str | None,
) -> None:
    """Probe one endpoint with a client profile."""
    target = ProbeTarget(host=host, port=port, sni=sni, tier=tier)
    result, transcript = run_probe_with_capture(
        target,
        builtin_profiles()[profile_name],
        policy=_guardrails(ctx, timeout, retries, backoff),
        registry=_registry(ctx),
    )
    if capture:
        _emit(transcript.to_json(), "transcript", capture)
    _emit(result.to_json(), "probe_result", out)


@main.command()
@click.argument("observations", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--mode",
    required=True,
    type=click.Choice(sorted(_MODE_FLAGS), case_sensitive=False),
    help="Reporting mode: which surfaces may contribute.",
)
@click.option(
    "--policy",
    "policy_file",
    type=click.Path(exists=True, dir_okay=False),
    help="Append a read-only policy review to the measurement.",
)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@_handles_errors
def infer(
    ctx: click.Context,
    observations: tuple[str, ...],
    mode: str,
    policy_file: str | None,
    out: str | None,
) -> None:
    """Fuse observation files into one measurement object.

    Accepts transcripts, passive observations, probe results, chain
    observations and whole evidence bundles; kinds are sniffed per file.
    Evidence outside the mode's surfaces is narrowed away, so one bundle
    can be replayed under b1, b2 and b3 for ablation.
    """
    registry = _registry(ctx)
    passive: PassiveObservation | None = None
    probes: list[ProbeResult] = []
    chains: list[ChainObservation] = []

    def set_passive(observation: PassiveObservation, path: str) -> None:
        nonlocal passive
        if passive is not None:
            raise EngineConfigError("more than one passive observation supplied", path=path)
        passive = observation

    for path in observations:
        payload = _load(path)
        kind = schemas.sniff_observation_kind(payload)
        if kind == "measurement":
            raise SchemaError("a measurement is an output, not evidence", path=path)
        schemas.validate(payload, kind)
        if kind == "transcript":
            set_passive(build_passive_observation(wire.Transcript.from_json(payload), registry=registry), path)
        elif kind == "passive_observation":
            set_passive(PassiveObservation.from_json(payload), path)
        elif kind == "probe_result":
            probes.append(ProbeResult.from_json(payload))
        elif kind == "chain_observation":
            chains.append(ChainObservation.from_json(payload))
        else:
            bundle = EvidenceBundle.from_json(payload)
            if bundle.passive is not None:
                set_passive(bundle.passive, path)
            probes.extend(bundle.probes)
            chains.extend(bundle.chains)

    mode_name = _MODE_FLAGS[mode.lower()]
    bundle = bundle_for_mode(
        EvidenceBundle(passive=passive, probes=tuple(probes), chains=tuple(chains)), mode_name
    )
    measurement = infer_measurement(bundle, mode_name, registry=registry)
    if policy_file is None:
        default_policy = _config(ctx).get("policy")
        policy_file = default_policy
    if policy_file:
        policy = _load(policy_file, "policy")
        review = apply_policy_profile(measurement, policy)
        _emit({"measurement": measurement.to_json(), "policy_review": review}, "measurement_review", out)
    else:
        _emit(measurement.to_json(), "measurement", out)


# -- benchmark suite -----------------------------------------------------------


@main.group()
def bench() -> None:
    """Generate, run, or score the 29-scenario suite."""


@bench.command("generate")
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.pass_context
@_handles_errors
def bench_generate(ctx: click.Context, seed: int | None, out_dir: str) -> None:
    """Write every scenario's transcript and evidence bundle plus a digest manifest."""
    seed = _setting(ctx, seed, "seed", 0)
    registry = _registry(ctx)
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"suite": "v1", "seed": seed, "files": {}}

    def write(name: str, payload: Mapping, kind: str) -> None:
        schemas.validate(payload, kind)
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        (directory / name).write_text(text)
        manifest["files"][name] = sha256(text.encode()).hexdigest()

    for scn in catalog():
        write(f"{scn.scenario_id}.transcript.json", scenario_transcript(scn, seed=seed).to_json(), "transcript")
        write(f"{scn.scenario_id}.bundle.json", scenario_bundle(scn, registry=registry, seed=seed).to_json(), "evidence_bundle")
    _emit(manifest, "bench_manifest", str(directory / "manifest.json"))
    click.echo(f"{len(manifest['files'])} files under {directory}", err=True)


@bench.command("run")
@click.option("--seed", type=int, default=None)
@click.option(
    "--family",
    type=click.Choice(["canonical", "stress", "all"]),
    default="all",
    show_default=True,
)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@_handles_errors
def bench_run(ctx: click.Context, seed: int | None, family: str, out: str | None) -> None:
    """Infer all scenarios under B1/B2/B3 and emit per-mode suite metrics."""
    seed = _setting(ctx, seed, "seed", 0)
    results = run_suite(registry=_registry(ctx), seed=seed)
    if family != "all":
        results = [r for r in results if r.family == family]
    payload = {
        "suite": "v1",
        "seed": seed,
        "family": family,
        "modes": metrics.summary_table(results),
    }
    _emit(payload, "suite_metrics", out)


@bench.command("evaluate")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@_handles_errors
def bench_evaluate(ctx: click.Context, seed: int | None, out: str | None) -> None:
    """Score the suite against ground truth and contracts; exit 1 on any failure."""
    seed = _setting(ctx, seed, "seed", 0)
    results = run_suite(registry=_registry(ctx), seed=seed)
    failures = [
        {
            "scenario": r.scenario_id,
            "exact_errors": list(r.exact_errors),
            "contract_failures": list(r.contract_failures),
        }
        for r in results
        if not r.ok
    ]
    payload = {
        "suite": "v1",
        "seed": seed,
        "scenarios": len(results),
        "failed": len(failures),
        "failures": failures,
    }
    _emit(payload, "bench_evaluation", out)
    if failures:
        sys.exit(1)


# -- campaigns -----------------------------------------------------------------


@main.group("campaign")
def campaign_group() -> None:
    """Inventory validation, probe rounds, round-to-round drift."""


@campaign_group.command("validate")
@click.argument("inventory", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@_handles_errors
def campaign_validate(ctx: click.Context, inventory: str, out: str | None) -> None:
    """Check an inventory against the probe guardrails; exit 1 on violations."""
    payload = _load(inventory, "inventory")
    records = [TargetRecord.from_json(t) for t in payload["targets"]]
    accepted, violations = validate_inventory(records)
    _emit({"accepted": len(accepted), "violations": [dict(v) for v in violations]}, "inventory_check", out)
    if violations:
        sys.exit(1)


def _endpoint_config(target_id: str, cfg: Mapping) -> EndpointConfig:
    defaults = EndpointConfig(name=target_id)
    return EndpointConfig(
        name=cfg.get("name", target_id),
        tls_versions=tuple(_TLS_VERSION_NAMES[v] for v in cfg.get("tls_versions", ("TLS1.3", "TLS1.2"))),
        supported_groups=tuple(cfg.get("supported_groups", defaults.supported_groups)),
        cipher_suites_tls13=tuple(cfg.get("cipher_suites_tls13", defaults.cipher_suites_tls13)),
        cipher_suites_tls12=tuple(cfg.get("cipher_suites_tls12", defaults.cipher_suites_tls12)),
        chain=tuple(base64.b64decode(entry) for entry in cfg.get("chain", ())),
        client_auth=cfg.get("client_auth", False),
        session_tickets=cfg.get("session_tickets", 0),
        accept_resumption=cfg.get("accept_resumption", False),
        server_preference=cfg.get("server_preference", False),
        failure=cfg.get("failure"),
    )


@campaign_group.command("run")
@click.argument("inventory", type=click.Path(exists=True, dir_okay=False))
@click.option("--round-id", required=True)
@click.option(
    "--setup",
    "setup_file",
    type=click.Path(exists=True, dir_okay=False),
    help="Emulated endpoint configs and artifact chains, keyed by target id.",
)
@click.option("--mode", type=click.Choice(["b2", "b3"]), default="b3", show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--concurrency", type=int, default=None)
@click.option("--base-time", type=float, default=None, help="Epoch origin for offline round timestamps.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@_handles_errors
def campaign_run(
    ctx: click.Context,
    inventory: str,
    round_id: str,
    setup_file: str | None,
    mode: str,
    seed: int | None,
    concurrency: int | None,
    base_time: float | None,
    out: str | None,
) -> None:
    """Probe every accepted target and emit the round's results."""
    payload = _load(inventory, "inventory")
    records = [TargetRecord.from_json(t) for t in payload["targets"]]
    endpoints = None
    artifact_chains = None
    if setup_file:
        setup = _load(setup_file, "round_setup")
        endpoints = {
            tid: _endpoint_config(tid, cfg) for tid, cfg in setup.get("endpoints", {}).items()
        }
        artifact_chains = {
            tid: [[base64.b64decode(cert) for cert in chain] for chain in chain_list]
            for tid, chain_list in setup.get("artifact_chains", {}).items()
        }
    extra: dict = {}
    if base_time is not None:
        extra["base_time"] = base_time
    result = run_round(
        records,
        round_id=round_id,
        endpoints=endpoints,
        artifact_chains=artifact_chains,
        mode=_MODE_FLAGS[mode],
        seed=_setting(ctx, seed, "seed", 0),
        concurrency=_setting(ctx, concurrency, "concurrency", 8),
        registry=_registry(ctx),
        **extra,
    )
    _emit(result.to_json(), "round_result", out)


@campaign_group.command("compare")
@click.argument("round_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("round_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@_handles_errors
def campaign_compare(ctx: click.Context, round_a: str, round_b: str, out: str | None) -> None:
    """Drift report between two stored rounds."""
    first = RoundResult.from_json(_load(round_a, "round_result"))
    second = RoundResult.from_json(_load(round_b, "round_result"))
    _emit(compare_rounds(first, second).to_json(), "drift_report", out)


# -- reporting -----------------------------------------------------------------


@dataclass(frozen=True)
class ReportView:
    """Flat metric rows plus the format they render in."""

    rows: tuple[dict, ...]  # {metric_name, value, denominator, scope}
    format: str

    def render(self) -> str:
        if self.format == "structured":
            return json.dumps({"rows": list(self.rows)}, sort_keys=True, separators=(",", ":")) + "\n"
        lines = [f"{'metric':<40}{'scope':<24}{'value':>14}"]
        for row in self.rows:
            value = row["value"]
            if row["denominator"] is not None:
                cell = f"{value}/{row['denominator']}"
            elif isinstance(value, float):
                cell = f"{value:.2f}"
            else:
                cell = str(value)
            lines.append(f"{row['metric_name']:<40}{str(row['scope']):<24}{cell:>14}")
        return "\n".join(lines) + "\n"


def _row(metric_name: str, value: Any, denominator: int | None, scope: str) -> dict:
    return {"metric_name": metric_name, "value": value, "denominator": denominator, "scope": scope}


def _suite_rows(payload: Mapping) -> list[dict]:
    rows = []
    for mode, summary in payload["modes"].items():
        den = summary["denominator"]
        for plane in sorted(summary["planes"]):
            rows.append(_row(plane, summary["planes"][plane], den, mode))
        rows.append(_row("observability_ok", summary["observability_ok"], den, mode))
        rows.append(_row("object_complete", summary["object_complete"], den, mode))
        rows.append(_row("object_complete_clear", summary["clear_for_migration"], den, mode))
        rows.append(_row("ambiguity_flag", summary["ambiguity_flag"], den, mode))
        rows.append(_row("contradiction", summary["contradiction"], den, mode))
        rows.append(_row("capability_broader", summary["capability_broader"], den, mode))
        if "contract_coverage" in summary:
            rows.append(_row("contract_coverage", summary["contract_coverage"], den, mode))
        if "contract_match" in summary:
            rows.append(_row("contract_match", summary["contract_match"], None, mode))
        if "primary_score" in summary:
            rows.append(_row("primary_score", summary["primary_score"], None, mode))
    return rows


def _round_summary_rows(payload: Mapping) -> list[dict]:
    scope = payload["round_id"]
    return [
        _row(name, payload[name], None, scope)
        for name in (
            "targets",
            "probes",
            "complete_handshakes",
            "chain_artifacts",
            "hybrid_confirmed",
            "classical_only_under_tested_profiles",
            "capability_broader",
            "contradiction_bearing",
            "clear_complete",
        )
    ]


def _drift_rows(payload: Mapping) -> list[dict]:
    return [
        _row(name, payload[name], None, "round_pair")
        for name in (
            "comparable_targets",
            "capability_drift_pct",
            "certificate_drift_pct",
            "lifecycle_drift_pct",
            "signature_algorithm_drift_pct",
            "clear_complete_stability_pct",
        )
    ]


_ROW_BUILDERS = {
    "suite_metrics": _suite_rows,
    "round_summary": _round_summary_rows,
    "round_result": lambda payload: _round_summary_rows(payload["summary"]),
    "drift_report": _drift_rows,
}


def render_report(payload: Mapping, fmt: str = "table_text", kind: str | None = None) -> ReportView:
    """Build the row view for any report document; validates first."""
    if kind is None:
        kind = schemas.sniff_report_kind(payload)
    schemas.validate(payload, kind)
    return ReportView(rows=tuple(_ROW_BUILDERS[kind](payload)), format=fmt)


@main.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["table_text", "structured"]),
    default="table_text",
    show_default=True,
)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@_handles_errors
def report(ctx: click.Context, source: str, fmt: str, out: str | None) -> None:
    """Render a metrics, round or drift document for reading or diffing."""
    payload = _load(source)
    view = render_report(payload, fmt=fmt)
    text = view.render()
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
