"""Portable checkpoints.

Layout: an 8-byte little-endian length header, a UTF-8 JSON manifest, then a
raw little-endian float32 blob holding every parameter array in spec order
followed (when present) by the Adam first- and second-moment arrays in the
same order. The manifest records layer names/shapes/byte extents, the total
parameter count, the training step, the optimizer step, a serialized RNG
state, and a SHA-256 of the blob.

Nothing time- or path-dependent is written, and the manifest is serialized
with sorted keys, so identical inputs produce byte-identical files.
"""

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import CheckpointError
from .adam import AdamState

_HEADER = struct.Struct("<Q")
_F4 = np.dtype("<f4")


@dataclass
class CheckpointBundle:
    kind: str
    params: dict
    adam: "AdamState | None"
    step: int
    rng_state: "dict | None"
    meta: dict
    manifest: dict


# -- RNG state <-> JSON ------------------------------------------------------


def encode_rng_state(generator):
    """numpy Generator state as a plain JSON-able structure (lossless)."""
    return _encode(generator.bit_generator.state)


def decode_rng_state(encoded):
    """Inverse of encode_rng_state; assign to generator.bit_generator.state."""
    return _decode(encoded)


def _encode(obj):
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return {"__array__": obj.dtype.str, "data": [int(x) for x in obj.ravel()], "shape": list(obj.shape)}
    if isinstance(obj, np.integer):
        return {"__int__": obj.dtype.str, "data": int(obj)}
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__array__" in obj:
            return np.array(obj["data"], dtype=np.dtype(obj["__array__"])).reshape(obj["shape"])
        if "__int__" in obj:
            return np.dtype(obj["__int__"]).type(obj["data"])
        return {k: _decode(v) for k, v in obj.items()}
    return obj


# -- save / load -------------------------------------------------------------


def _param_keys(spec):
    keys = []
    for name in spec.layer_names():
        keys.append(f"{name}.W")
        keys.append(f"{name}.b")
    return keys


def save_checkpoint(path, spec, params, adam=None, step=0, rng_state=None, meta=None):
    """Write params (+ optional Adam moments) under `spec`'s canonical order.

    `meta` must already be JSON-able and deterministic; timestamps or other
    run-varying values would break byte-identical reproducibility.
    """
    keys = _param_keys(spec)
    chunks = []
    layers = []
    offset = 0
    total_params = 0
    for key in keys:
        arr = np.ascontiguousarray(params[key], dtype=_F4)
        raw = arr.tobytes()
        layers.append({"name": key, "shape": list(arr.shape), "offset": offset, "len": len(raw)})
        chunks.append(raw)
        offset += len(raw)
        total_params += arr.size
    if adam is not None:
        for moments in (adam.m, adam.v):
            for key in keys:
                raw = np.ascontiguousarray(moments[key], dtype=_F4).tobytes()
                chunks.append(raw)
                offset += len(raw)
    blob = b"".join(chunks)

    manifest = {
        "kind": spec.name,
        "layers": layers,
        "total_params": total_params,
        "step": int(step),
        "adam_t": int(adam.t) if adam is not None else None,
        "has_adam": adam is not None,
        "rng": rng_state,
        "sha256": hashlib.sha256(blob).hexdigest(),
        "meta": meta or {},
    }
    if spec.expected_params and total_params != spec.expected_params:
        raise CheckpointError(
            f"parameter count {total_params} != expected {spec.expected_params} for {spec.name}"
        )
    payload = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(len(payload)))
        fh.write(payload)
        fh.write(blob)
    return path


def load_checkpoint(path, spec=None):
    """Read a checkpoint; validate integrity and (if given) the target spec."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise CheckpointError("truncated header")
        (manifest_len,) = _HEADER.unpack(header)
        payload = fh.read(manifest_len)
        if len(payload) != manifest_len:
            raise CheckpointError("truncated manifest")
        try:
            manifest = json.loads(payload.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"unreadable manifest: {exc}") from exc
        blob = fh.read()

    layers = manifest.get("layers")
    if not isinstance(layers, list) or not layers:
        raise CheckpointError("manifest has no layer table")
    param_bytes = sum(layer["len"] for layer in layers)
    expected_blob = param_bytes * (3 if manifest.get("has_adam") else 1)
    if len(blob) != expected_blob:
        raise CheckpointError(f"blob length {len(blob)} != expected {expected_blob}")
    digest = hashlib.sha256(blob).hexdigest()
    if digest != manifest.get("sha256"):
        raise CheckpointError("blob checksum mismatch")

    total = 0
    params = {}
    for layer in layers:
        shape = tuple(layer["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if layer["len"] != count * 4:
            raise CheckpointError(f"layer {layer['name']!r} extent does not match its shape")
        arr = np.frombuffer(blob, dtype=_F4, count=count, offset=layer["offset"]).reshape(shape)
        params[layer["name"]] = arr.copy()
        total += count
    if total != manifest.get("total_params"):
        raise CheckpointError(f"summed parameter count {total} != manifest {manifest['total_params']}")

    if spec is not None:
        if manifest.get("kind") != spec.name:
            raise CheckpointError(f"checkpoint kind {manifest.get('kind')!r} != expected {spec.name!r}")
        if spec.expected_params and total != spec.expected_params:
            raise CheckpointError(f"parameter count {total} != expected {spec.expected_params}")
        expected_keys = _param_keys(spec)
        if [l["name"] for l in layers] != expected_keys:
            raise CheckpointError("layer table does not match the target network")

    adam = None
    if manifest.get("has_adam"):
        m, v = {}, {}
        for block, store in ((1, m), (2, v)):
            for layer in layers:
                shape = tuple(layer["shape"])
                count = int(np.prod(shape, dtype=np.int64)) if shape else 1
                off = block * param_bytes + layer["offset"]
                store[layer["name"]] = np.frombuffer(blob, dtype=_F4, count=count, offset=off).reshape(shape).copy()
        adam = AdamState(m=m, v=v, t=int(manifest.get("adam_t") or 0))

    return CheckpointBundle(
        kind=manifest.get("kind"),
        params=params,
        adam=adam,
        step=int(manifest.get("step", 0)),
        rng_state=manifest.get("rng"),
        meta=manifest.get("meta", {}),
        manifest=manifest,
    )
