"""Binary glTF (GLB) validation.

Checks the 12-byte header (magic "glTF", version 2, declared length), parses
the JSON chunk, counts meshes and triangles, and unions accessor min/max into
a bounding box. Geometry beyond that is out of scope here; the serving path
treats the asset as an opaque blob once validated.
"""
from __future__ import annotations

import hashlib
import json
import struct

from ..errors import XrAuthorError
from ..models import AssetMeta, AssetSource, BoundingBox

GLB_MAGIC = b"glTF"
HEADER_LEN = 12
CHUNK_HEADER_LEN = 8
CHUNK_TYPE_JSON = 0x4E4F534A  # ascii "JSON"
CHUNK_TYPE_BIN = 0x004E4942  # ascii "BIN\0"
TRIANGLES_MODE = 4


class GlbError(XrAuthorError):
    """Base class for GLB validation failures."""


class BadMagic(GlbError):
    pass


class UnsupportedVersion(GlbError):
    pass


class LengthMismatch(GlbError):
    pass


class MalformedJsonChunk(GlbError):
    pass


class NoMeshes(GlbError):
    pass


def _parse_json_chunk(data: bytes) -> dict:
    if len(data) < HEADER_LEN + CHUNK_HEADER_LEN:
        raise MalformedJsonChunk("file ends before the first chunk header")
    chunk_len, chunk_type = struct.unpack_from("<II", data, HEADER_LEN)
    if chunk_type != CHUNK_TYPE_JSON:
        raise MalformedJsonChunk(
            f"first chunk must be JSON (0x{CHUNK_TYPE_JSON:08X}), got 0x{chunk_type:08X}"
        )
    start = HEADER_LEN + CHUNK_HEADER_LEN
    end = start + chunk_len
    if end > len(data):
        raise MalformedJsonChunk("JSON chunk extends past end of file")
    try:
        doc = json.loads(data[start:end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedJsonChunk(f"JSON chunk does not parse: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedJsonChunk("JSON chunk is not an object")
    return doc


def _accessor(gltf: dict, index: object) -> dict:
    accessors = gltf.get("accessors", [])
    if not isinstance(index, int) or not 0 <= index < len(accessors):
        raise MalformedJsonChunk(f"accessor reference {index!r} out of range")
    return accessors[index]


def _count_triangles(gltf: dict) -> int:
    triangles = 0
    for mesh in gltf.get("meshes", []):
        for prim in mesh.get("primitives", []):
            if prim.get("mode", TRIANGLES_MODE) != TRIANGLES_MODE:
                continue
            if "indices" in prim:
                count = _accessor(gltf, prim["indices"]).get("count", 0)
            else:
                position = prim.get("attributes", {}).get("POSITION")
                if position is None:
                    continue
                count = _accessor(gltf, position).get("count", 0)
            triangles += int(count) // 3
    return triangles


def _bounding_box(gltf: dict) -> BoundingBox:
    mins: list[list[float]] = []
    maxs: list[list[float]] = []
    for mesh in gltf.get("meshes", []):
        for prim in mesh.get("primitives", []):
            position = prim.get("attributes", {}).get("POSITION")
            if position is None:
                continue
            acc = _accessor(gltf, position)
            lo, hi = acc.get("min"), acc.get("max")
            if isinstance(lo, list) and isinstance(hi, list) and len(lo) == 3 and len(hi) == 3:
                mins.append([float(v) for v in lo])
                maxs.append([float(v) for v in hi])
    if not mins:
        return BoundingBox(min=(0.0, 0.0, 0.0), max=(0.0, 0.0, 0.0))
    lo = tuple(min(m[axis] for m in mins) for axis in range(3))
    hi = tuple(max(m[axis] for m in maxs) for axis in range(3))
    return BoundingBox(min=lo, max=hi)  # type: ignore[arg-type]


def validate_glb(data: bytes, source: AssetSource = AssetSource.GENERATED) -> AssetMeta:
    """Validate GLB bytes and summarize them as AssetMeta.

    Raises BadMagic, UnsupportedVersion, LengthMismatch, MalformedJsonChunk,
    or NoMeshes, in that order of precedence.
    """
    if len(data) < HEADER_LEN or data[:4] != GLB_MAGIC:
        raise BadMagic(f"not a GLB file (magic {data[:4]!r}, expected {GLB_MAGIC!r})")
    version, declared_length = struct.unpack_from("<II", data, 4)
    if version != 2:
        raise UnsupportedVersion(f"GLB container version {version}, only 2 is supported")
    if declared_length != len(data):
        raise LengthMismatch(
            f"header declares {declared_length} bytes but file has {len(data)}"
        )
    gltf = _parse_json_chunk(data)
    meshes = gltf.get("meshes", [])
    if not meshes:
        raise NoMeshes("glTF document contains no meshes")
    return AssetMeta(
        byte_length=len(data),
        gltf_version=version,
        mesh_count=len(meshes),
        triangle_count=_count_triangles(gltf),
        bounding_box=_bounding_box(gltf),
        source=source,
        sha256=hashlib.sha256(data).hexdigest(),
    )
