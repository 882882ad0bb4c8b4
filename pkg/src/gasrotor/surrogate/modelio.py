"""Versioned binary container for the surrogate model.

Layout (all integers little-endian)::

    magic   b"GRSM"
    u32     format version (1)
    32 B    sha256 digest of the payload
    u64     payload length in bytes
    payload:
        u32 metadata length, metadata JSON (sorted keys, utf-8)
        16 x block:
            u8  mode index (0..3), u8 task index, u8 activation, u8 head
            u8  n_widths, u32[n_widths] widths
            f64[n_in] normalizer mean, f64[n_in] normalizer std
            f64 target mean, f64 target std, u8 target transform
            u8  n_members, then per member the W and b tensors of every
                layer in declared order as raw little-endian float64

A flipped payload byte fails the digest check; a short file fails the
length check; an unknown version is rejected before any payload parsing.
Serialisation is canonical, so save -> load -> save reproduces the file
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from ..errors import ModelIntegrityError
from .ensemble import (EnsembleBlock, Normalizer, SurrogateModel, TASKS,
                       TARGET_TRANSFORMS, N_MEMBERS, N_MODES)
from .net import ACTIVATIONS, HEADS, MLPSpec

MAGIC = b"GRSM"
FORMAT_VERSION = 1


def _pack_block(mode_idx: int, block: EnsembleBlock) -> bytes:
    out = bytearray()
    out += struct.pack("<BBBB", mode_idx, TASKS.index(block.task),
                       ACTIVATIONS.index(block.spec.activation),
                       HEADS.index(block.spec.head))
    widths = block.spec.widths
    out += struct.pack("<B", len(widths))
    out += struct.pack(f"<{len(widths)}I", *widths)
    out += np.asarray(block.normalizer.mean, "<f8").tobytes()
    out += np.asarray(block.normalizer.std, "<f8").tobytes()
    out += struct.pack("<dd", block.target_mean, block.target_std)
    out += struct.pack("<B", TARGET_TRANSFORMS.index(block.target_transform))
    out += struct.pack("<B", len(block.members))
    for params in block.members:
        for arr in params:
            out += np.ascontiguousarray(arr, "<f8").tobytes()
    return bytes(out)


def serialize_model(model: SurrogateModel) -> bytes:
    meta = json.dumps(model.metadata, sort_keys=True, separators=(",", ":")).encode()
    payload = bytearray()
    payload += struct.pack("<I", len(meta))
    payload += meta
    for mode_idx, pipeline in enumerate(model.pipelines):
        for task in TASKS:
            payload += _pack_block(mode_idx, pipeline[task])
    digest = hashlib.sha256(bytes(payload)).digest()
    return MAGIC + struct.pack("<I", FORMAT_VERSION) + digest + \
        struct.pack("<Q", len(payload)) + bytes(payload)


def save_model(model: SurrogateModel, path: str) -> None:
    blob = serialize_model(model)
    with open(path, "wb") as fh:
        fh.write(blob)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelIntegrityError("model file truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * n), dtype="<f8").copy()


def deserialize_model(blob: bytes) -> SurrogateModel:
    r = _Reader(blob)
    if r.take(4) != MAGIC:
        raise ModelIntegrityError("not a surrogate model file (bad magic)")
    (version,) = r.unpack("<I")
    if version != FORMAT_VERSION:
        raise ModelIntegrityError(f"unsupported model format version {version}")
    digest = r.take(32)
    (payload_len,) = r.unpack("<Q")
    payload = r.take(payload_len)
    if r.pos != len(blob):
        raise ModelIntegrityError("trailing bytes after model payload")
    if hashlib.sha256(payload).digest() != digest:
        raise ModelIntegrityError("model payload digest mismatch")

    r = _Reader(payload)
    (meta_len,) = r.unpack("<I")
    try:
        metadata = json.loads(r.take(meta_len).decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelIntegrityError(f"corrupt model metadata: {exc}") from None
    pipelines: list[dict[str, EnsembleBlock]] = [dict() for _ in range(N_MODES)]
    for _ in range(N_MODES * len(TASKS)):
        mode_idx, task_idx, act_idx, head_idx = r.unpack("<BBBB")
        if mode_idx >= N_MODES or task_idx >= len(TASKS) \
                or act_idx >= len(ACTIVATIONS) or head_idx >= len(HEADS):
            raise ModelIntegrityError("corrupt block header")
        (n_widths,) = r.unpack("<B")
        widths = r.unpack(f"<{n_widths}I")
        spec = MLPSpec(widths=tuple(widths), activation=ACTIVATIONS[act_idx],
                       head=HEADS[head_idx])
        n_in = widths[0]
        normalizer = Normalizer(mean=r.floats(n_in), std=r.floats(n_in))
        target_mean, target_std = r.unpack("<dd")
        (transform_idx,) = r.unpack("<B")
        if transform_idx >= len(TARGET_TRANSFORMS):
            raise ModelIntegrityError("corrupt block header (target transform)")
        (n_members,) = r.unpack("<B")
        if n_members != N_MEMBERS:
            raise ModelIntegrityError(f"expected {N_MEMBERS} members, found {n_members}")
        members = []
        for _ in range(n_members):
            params = []
            for fan_in, fan_out in zip(widths[:-1], widths[1:]):
                params.append(r.floats(fan_in * fan_out).reshape(fan_in, fan_out))
                params.append(r.floats(fan_out))
            members.append(params)
        pipelines[mode_idx][TASKS[task_idx]] = EnsembleBlock(
            task=TASKS[task_idx], spec=spec, normalizer=normalizer,
            members=members, target_mean=target_mean, target_std=target_std,
            target_transform=TARGET_TRANSFORMS[transform_idx])
    if r.pos != len(payload):
        raise ModelIntegrityError("unexpected bytes at end of payload")
    return SurrogateModel(pipelines=pipelines, metadata=metadata)


def load_model(path: str) -> SurrogateModel:
    with open(path, "rb") as fh:
        return deserialize_model(fh.read())


def model_digest(path: str) -> str:
    """Hex digest stored in a model file (fails on malformed header)."""
    with open(path, "rb") as fh:
        head = fh.read(40)
    if len(head) < 40 or head[:4] != MAGIC:
        raise ModelIntegrityError("not a surrogate model file")
    return head[8:40].hex()
