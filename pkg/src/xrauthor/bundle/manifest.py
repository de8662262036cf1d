"""The persisted scene bundle: manifest schema plus directory read/write.

A bundle directory holds exactly three files:

    manifest.json   the complete record (request, spec, verdicts, tutor pack, asset meta)
    model.glb       the approved binary glTF asset
    tutor.json      the tutor pack alone, for direct consumption by viewers

Writes are atomic per file (temp + rename); reads re-verify every invariant
including the asset digest.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import datetime
from pathlib import Path

import pydantic
from pydantic import BaseModel, Field, model_validator

from ..errors import XrAuthorError
from ..models import AssetMeta, AuthoringRequest, ContentSpec, SafetyVerdict, TutorPack

SCHEMA_VERSION = 1
KNOWN_SCHEMA_VERSIONS = {1}

MANIFEST_FILE = "manifest.json"
MODEL_FILE = "model.glb"
TUTOR_FILE = "tutor.json"
BUNDLE_FILES = (MANIFEST_FILE, MODEL_FILE, TUTOR_FILE)


class BundleError(XrAuthorError):
    pass


class MissingFile(BundleError):
    pass


class DigestMismatch(BundleError):
    pass


class SchemaVersionUnknown(BundleError):
    pass


class InvariantViolation(BundleError):
    pass


class IoError(BundleError):
    pass


class BundleManifest(BaseModel):
    bundle_id: str = Field(min_length=1)
    schema_version: int = SCHEMA_VERSION
    request: AuthoringRequest
    spec: ContentSpec
    verdicts: list[SafetyVerdict] = Field(min_length=1)
    tutor_pack: TutorPack
    asset: AssetMeta
    asset_file: str = MODEL_FILE
    created_at: datetime

    @model_validator(mode="after")
    def _last_verdict_approved(self) -> "BundleManifest":
        if not self.verdicts[-1].approved:
            raise ValueError("a bundle may only be written for an approved final verdict")
        return self


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except OSError:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _dump_json(model: BaseModel) -> bytes:
    return (json.dumps(model.model_dump(mode="json"), indent=2) + "\n").encode("utf-8")


def write_bundle(
    directory: Path,
    *,
    bundle_id: str,
    request: AuthoringRequest,
    spec: ContentSpec | None,
    verdicts: list[SafetyVerdict],
    tutor_pack: TutorPack | None,
    asset: AssetMeta | None,
    asset_bytes: bytes | None,
    created_at: datetime,
) -> BundleManifest:
    """Write a complete bundle directory; all parts must be present and
    consistent. Raises InvariantViolation on missing/inconsistent parts and
    IoError on filesystem trouble."""
    missing = [
        name
        for name, value in (
            ("spec", spec),
            ("tutor_pack", tutor_pack),
            ("asset", asset),
            ("asset_bytes", asset_bytes),
        )
        if value is None
    ]
    if missing or not verdicts:
        missing += [] if verdicts else ["verdicts"]
        raise InvariantViolation(f"bundle is missing parts: {', '.join(missing)}")
    assert asset is not None and asset_bytes is not None  # narrowed above
    digest = hashlib.sha256(asset_bytes).hexdigest()
    if digest != asset.sha256:
        raise InvariantViolation(
            f"asset bytes hash to {digest[:12]}… but metadata says {asset.sha256[:12]}…"
        )
    try:
        manifest = BundleManifest(
            bundle_id=bundle_id,
            request=request,
            spec=spec,
            verdicts=verdicts,
            tutor_pack=tutor_pack,
            asset=asset,
            created_at=created_at,
        )
    except pydantic.ValidationError as exc:
        raise InvariantViolation(f"manifest invariants violated: {exc}") from exc
    try:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        _atomic_write(directory / MODEL_FILE, asset_bytes)
        _atomic_write(directory / TUTOR_FILE, _dump_json(manifest.tutor_pack))
        _atomic_write(directory / MANIFEST_FILE, _dump_json(manifest))
    except OSError as exc:
        raise IoError(f"could not write bundle to {directory}: {exc}") from exc
    return manifest


def read_bundle(directory: Path) -> BundleManifest:
    """Load and fully re-validate a bundle directory.

    Raises MissingFile, SchemaVersionUnknown, DigestMismatch, or
    InvariantViolation depending on what is wrong.
    """
    directory = Path(directory)
    for name in BUNDLE_FILES:
        if not (directory / name).is_file():
            raise MissingFile(f"bundle is missing {name} in {directory}")
    try:
        raw = json.loads((directory / MANIFEST_FILE).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvariantViolation(f"manifest.json unreadable: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvariantViolation("manifest.json is not a JSON object")
    version = raw.get("schema_version")
    if version not in KNOWN_SCHEMA_VERSIONS:
        raise SchemaVersionUnknown(f"unknown bundle schema_version {version!r}")
    try:
        manifest = BundleManifest.model_validate(raw)
    except pydantic.ValidationError as exc:
        raise InvariantViolation(f"manifest invariants violated: {exc}") from exc
    try:
        asset_bytes = (directory / manifest.asset_file).read_bytes()
    except OSError as exc:
        raise MissingFile(f"asset file {manifest.asset_file} unreadable: {exc}") from exc
    digest = hashlib.sha256(asset_bytes).hexdigest()
    if digest != manifest.asset.sha256:
        raise DigestMismatch(
            f"{manifest.asset_file} hashes to {digest[:12]}… but the manifest "
            f"records {manifest.asset.sha256[:12]}…"
        )
    try:
        tutor_raw = json.loads((directory / TUTOR_FILE).read_text(encoding="utf-8"))
        tutor = TutorPack.model_validate(tutor_raw)
    except (OSError, json.JSONDecodeError, pydantic.ValidationError) as exc:
        raise InvariantViolation(f"tutor.json invalid: {exc}") from exc
    if tutor != manifest.tutor_pack:
        raise InvariantViolation("tutor.json diverges from the manifest's tutor pack")
    return manifest
