"""Command-line front end: run the pipeline headless, inspect bundles, serve the API.

Exit codes for ``run``: 0 on success, 2 when safety review rejected every
attempt (verdicts.json is written for inspection), 1 for anything else.
"""
from __future__ import annotations

import contextlib
import json
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Optional

import click

from .bundle import BundleError, read_bundle
from .errors import XrAuthorError
from .idclock import SeededIdClock, SystemIdClock
from .models import AuthoringRequest, GradeBand, validate_model
from .pipeline import (
    ApprovalDecision,
    FailureReason,
    FileJobStore,
    JobEvent,
    JobState,
    StageDependencies,
    resolve_approval,
    run_to_completion,
    submit,
)
from .providers import ProviderConfig, build_providers

GRADE_CHOICES = [band.value for band in GradeBand]


def _provider_config(mode: Optional[str], fixture_dir: Optional[Path]) -> ProviderConfig:
    config = ProviderConfig.from_env()
    updates: dict = {}
    if mode:
        updates["mode"] = mode
    if fixture_dir:
        updates["fixture_dir"] = fixture_dir
    if updates:
        config = ProviderConfig(**{**config.__dict__, **updates})
    return config


def _event_printer(as_json: bool):
    def show(event: JobEvent) -> None:
        if as_json:
            click.echo(json.dumps(event.model_dump(mode="json")))
        else:
            detail = f"  {event.detail}" if event.detail else ""
            click.echo(
                f"{event.timestamp:%H:%M:%S} [{event.stage.value}] {event.kind.value}{detail}"
            )

    return show


def _show_spec(spec) -> None:
    click.echo(f"\nConcept: {spec.core_concept}")
    click.echo("Objectives:")
    for objective in spec.learning_objectives:
        click.echo(f"  - {objective}")
    click.echo("Required visual features:")
    for feature in spec.required_visual_features:
        click.echo(f"  - {feature}")
    click.echo(f"Refined prompt:\n{spec.refined_prompt}\n")


@click.group()
def cli() -> None:
    """Authoring pipeline for safety-reviewed educational XR scene bundles."""


@cli.command()
@click.option("--prompt", required=True, help="Teacher request in plain language.")
@click.option("--grade", type=click.Choice(GRADE_CHOICES), default="6-8", show_default=True)
@click.option("--subject", default="General", show_default=True)
@click.option("--topic", default="")
@click.option(
    "--out",
    "out_dir",
    type=click.Path(path_type=Path),
    default=Path("bundle"),
    show_default=True,
    help="Directory the finished bundle (or verdicts.json) is written to.",
)
@click.option(
    "--no-approval/--require-approval",
    "no_approval",
    default=True,
    help="Skip or enforce the interactive approval gate (skipped by default).",
)
@click.option("--max-attempts", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--provider-mode", type=click.Choice(["live", "mock"]), default=None)
@click.option("--fixture-dir", type=click.Path(path_type=Path), default=None)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None,
              help="Persist job state here instead of a temporary directory.")
@click.option("--seed", type=int, default=None,
              help="Fix id generation and the event clock for reproducible output.")
@click.option("--json", "as_json", is_flag=True, help="Emit events as JSON lines.")
def run(
    prompt: str,
    grade: str,
    subject: str,
    topic: str,
    out_dir: Path,
    no_approval: bool,
    max_attempts: int,
    provider_mode: Optional[str],
    fixture_dir: Optional[Path],
    data_dir: Optional[Path],
    seed: Optional[int],
    as_json: bool,
) -> int:
    """Run the full pipeline in-process and write the bundle to --out."""
    try:
        request = validate_model(
            AuthoringRequest,
            {
                "prompt_text": prompt,
                "grade_band": grade,
                "subject": subject,
                "topic": topic,
                "require_approval": not no_approval,
                "max_safety_attempts": max_attempts,
            },
        )
        config = _provider_config(provider_mode, fixture_dir)
        providers = build_providers(config)
        clock = SeededIdClock(seed) if seed is not None else SystemIdClock()
        mock = config.mode == "mock"

        with contextlib.ExitStack() as stack:
            if data_dir is None:
                data_dir = Path(stack.enter_context(tempfile.TemporaryDirectory()))
            store = FileJobStore(data_dir)
            deps = StageDependencies(
                chat=providers.chat,
                generation=providers.generation,
                search=providers.search,
                store=store,
                clock=clock,
                poll_interval=0.001 if mock else 5.0,
                poll_deadline=30.0 if mock else 600.0,
                secrets=config.secret_values(),
                on_event=_event_printer(as_json),
            )
            job_id = submit(request, store, clock)
            for event in store.read_events(job_id):
                deps.on_event(event)
            job = run_to_completion(store.load(job_id), deps)
            while job.state == JobState.AWAITING_APPROVAL:
                assert job.spec is not None
                _show_spec(job.spec)
                approved = click.confirm("Approve this interpretation and continue?")
                decision = ApprovalDecision.APPROVE if approved else ApprovalDecision.REJECT
                job = resolve_approval(job, decision, deps)
                if not job.terminal:
                    job = run_to_completion(job, deps)

            out_dir.mkdir(parents=True, exist_ok=True)
            if job.state == JobState.COMPLETE:
                shutil.copytree(store.bundle_dir(job_id), out_dir, dirs_exist_ok=True)
                manifest = read_bundle(out_dir)
                click.echo(f"bundle written to {out_dir} ({manifest.bundle_id})")
                return 0
            if job.failure_reason == FailureReason.SAFETY_EXHAUSTED:
                verdicts = [v.model_dump(mode="json") for v in job.verdict_history]
                (out_dir / "verdicts.json").write_text(
                    json.dumps(verdicts, indent=2) + "\n", encoding="utf-8"
                )
                click.echo(
                    f"safety review rejected all {len(verdicts)} attempts; "
                    f"verdicts written to {out_dir / 'verdicts.json'}",
                    err=True,
                )
                return 2
            click.echo(f"job failed: {job.failure_reason.value if job.failure_reason else job.state.value}", err=True)
            return 1
    except KeyboardInterrupt:
        click.echo("interrupted; persisted job state is intact", err=True)
        return 1
    except XrAuthorError as exc:
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        return 1


@cli.command()
@click.argument("bundle_dir", type=click.Path(path_type=Path))
def inspect(bundle_dir: Path) -> int:
    """Validate a bundle directory and print a human-readable summary."""
    try:
        manifest = read_bundle(bundle_dir)
    except BundleError as exc:
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        return 1
    final = manifest.verdicts[-1]
    click.echo(f"bundle:   {manifest.bundle_id}")
    click.echo(f"concept:  {manifest.spec.core_concept} (grades {manifest.spec.grade_band.value})")
    click.echo(f"verdicts: {len(manifest.verdicts)} review(s); final approved={final.approved}")
    for criterion in final.criteria:
        mark = "pass" if criterion.passed else "FAIL"
        click.echo(f"  [{mark}] {criterion.key.value}: {criterion.rationale}")
    click.echo(
        f"asset:    {manifest.asset.mesh_count} mesh(es), "
        f"{manifest.asset.triangle_count} triangles, {manifest.asset.byte_length} bytes"
    )
    click.echo(
        f"tutor:    {len(manifest.tutor_pack.annotations)} annotation(s), "
        f"{len(manifest.tutor_pack.vocabulary)} term(s), "
        f"{len(manifest.tutor_pack.quiz)} quiz question(s), "
        f"{len(manifest.tutor_pack.readings)} reading(s)"
    )
    return 0


@cli.command()
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"), show_default=True)
@click.option("--provider-mode", type=click.Choice(["live", "mock"]), default=None)
@click.option("--fixture-dir", type=click.Path(path_type=Path), default=None)
@click.option("--max-jobs", type=click.IntRange(min=1), default=2, show_default=True,
              help="Concurrent pipeline executions.")
@click.option("--cors-origin", "cors_origins", multiple=True, default=("*",), show_default=True)
@click.option("--ui-dir", type=click.Path(path_type=Path), default=None,
              help="Optionally serve a built web console from this directory.")
def serve(
    port: int,
    data_dir: Path,
    provider_mode: Optional[str],
    fixture_dir: Optional[Path],
    max_jobs: int,
    cors_origins: tuple[str, ...],
    ui_dir: Optional[Path],
) -> int:
    """Start the HTTP API (and optionally the web console)."""
    import uvicorn

    from .service import create_app

    config = _provider_config(provider_mode, fixture_dir)
    app = create_app(
        data_dir=data_dir,
        provider_config=config,
        max_jobs=max_jobs,
        cors_origins=list(cors_origins),
        ui_dir=ui_dir,
    )
    uvicorn.run(app, host="0.0.0.0", port=port)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    try:
        result = cli.main(args=argv, standalone_mode=False)
        return result if isinstance(result, int) else 0
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
