"""Scene bundle artifact: GLB validation, manifest schema, directory I/O."""

from .glb import (
    BadMagic,
    GlbError,
    LengthMismatch,
    MalformedJsonChunk,
    NoMeshes,
    UnsupportedVersion,
    validate_glb,
)
from .manifest import (
    BUNDLE_FILES,
    BundleError,
    BundleManifest,
    DigestMismatch,
    InvariantViolation,
    IoError,
    MANIFEST_FILE,
    MissingFile,
    MODEL_FILE,
    SchemaVersionUnknown,
    TUTOR_FILE,
    read_bundle,
    write_bundle,
)

__all__ = [
    "BUNDLE_FILES",
    "BadMagic",
    "BundleError",
    "BundleManifest",
    "DigestMismatch",
    "GlbError",
    "InvariantViolation",
    "IoError",
    "LengthMismatch",
    "MANIFEST_FILE",
    "MODEL_FILE",
    "MalformedJsonChunk",
    "MissingFile",
    "NoMeshes",
    "SchemaVersionUnknown",
    "TUTOR_FILE",
    "UnsupportedVersion",
    "read_bundle",
    "validate_glb",
    "write_bundle",
]
