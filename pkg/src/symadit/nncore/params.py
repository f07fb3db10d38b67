"""Named parameter store with adaptive-moment updates and checkpoint I/O.

Checkpoint layout (little-endian):

    b"CKPT v1\\n"
    uint32  parameter count
    per parameter: uint16 name length, utf-8 name, uint8 ndim,
                   uint32 dims..., float64 raw data
    uint8   optimizer-state flag
    if set: uint64 step count, then per parameter the first- and
            second-moment arrays (same order and shapes as the parameters)

A JSON manifest (same path + ".json") records config, seed and a content
hash so downstream stages can detect a modified checkpoint.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .tensor import Tensor

__all__ = ["ParameterStore", "adam_step", "checkpoint_hash"]

_MAGIC = b"CKPT v1\n"


class ParameterStore:
    """Insertion-ordered named parameters plus optimizer state."""

    def __init__(self, seed: int = 0):
        self.params: dict[str, Tensor] = {}
        self.rng = np.random.default_rng(seed)
        self.moment1: dict[str, np.ndarray] = {}
        self.moment2: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, shape: tuple[int, ...], scale: str | float = "auto") -> Tensor:
        if name in self.params:
            raise KeyError(f"parameter {name!r} already registered")
        if scale == "auto":
            fan_in = shape[0] if len(shape) > 1 else max(shape[0], 1)
            scale = 1.0 / np.sqrt(fan_in)
        if scale == 0.0:
            data = np.zeros(shape)
        else:
            data = self.rng.normal(0.0, scale, size=shape)
        t = Tensor(data, requires_grad=True)
        self.params[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def names(self) -> list[str]:
        return list(self.params)

    def n_parameters(self) -> int:
        return sum(p.data.size for p in self.params.values())

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def grad_check(self) -> None:
        for name, p in self.params.items():
            if p.grad is not None and not np.all(np.isfinite(p.grad)):
                raise FloatingPointError(f"non-finite gradient in {name}")

    # -- persistence ---------------------------------------------------------

    def save(self, path, config: dict | None = None, seed: int | None = None) -> str:
        path = Path(path)
        blobs = [_MAGIC, struct.pack("<I", len(self.params))]
        for name, p in self.params.items():
            enc = name.encode("utf-8")
            blobs.append(struct.pack("<H", len(enc)))
            blobs.append(enc)
            blobs.append(struct.pack("<B", p.data.ndim))
            blobs.append(struct.pack(f"<{p.data.ndim}I", *p.data.shape))
            blobs.append(p.data.astype("<f8").tobytes())
        if self.step_count:
            blobs.append(struct.pack("<B", 1))
            blobs.append(struct.pack("<Q", self.step_count))
            for name, p in self.params.items():
                blobs.append(self.moment1.get(
                    name, np.zeros_like(p.data)).astype("<f8").tobytes())
                blobs.append(self.moment2.get(
                    name, np.zeros_like(p.data)).astype("<f8").tobytes())
        else:
            blobs.append(struct.pack("<B", 0))
        payload = b"".join(blobs)
        path.write_bytes(payload)
        digest = hashlib.sha256(payload).hexdigest()
        manifest = {
            "hash": digest,
            "n_parameters": self.n_parameters(),
            "config": config or {},
            "seed": seed,
        }
        path.with_suffix(path.suffix + ".json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return digest

    @classmethod
    def load(cls, path) -> tuple["ParameterStore", dict]:
        path = Path(path)
        raw = path.read_bytes()
        if not raw.startswith(_MAGIC):
            raise ValueError(f"{path}: not a checkpoint file")
        off = len(_MAGIC)
        (count,) = struct.unpack_from("<I", raw, off)
        off += 4
        store = cls()
        for _ in range(count):
            (nlen,) = struct.unpack_from("<H", raw, off)
            off += 2
            name = raw[off:off + nlen].decode("utf-8")
            off += nlen
            (ndim,) = struct.unpack_from("<B", raw, off)
            off += 1
            shape = struct.unpack_from(f"<{ndim}I", raw, off)
            off += 4 * ndim
            size = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(raw, dtype="<f8", count=size, offset=off)
            off += 8 * size
            store.params[name] = Tensor(
                data.reshape(shape).copy(), requires_grad=True)
        (has_state,) = struct.unpack_from("<B", raw, off)
        off += 1
        if has_state:
            (store.step_count,) = struct.unpack_from("<Q", raw, off)
            off += 8
            for name, p in store.params.items():
                size = p.data.size
                store.moment1[name] = np.frombuffer(
                    raw, dtype="<f8", count=size, offset=off
                ).reshape(p.data.shape).copy()
                off += 8 * size
                store.moment2[name] = np.frombuffer(
                    raw, dtype="<f8", count=size, offset=off
                ).reshape(p.data.shape).copy()
                off += 8 * size
        manifest_path = path.with_suffix(path.suffix + ".json")
        manifest = {}
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text())
        return store, manifest


def adam_step(
    store: ParameterStore,
    lr: float = 3e-4,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    warmup: int = 100,
) -> None:
    """Adaptive-moment update; deterministic given gradient contents."""
    store.step_count += 1
    t = store.step_count
    if warmup > 0:
        lr = lr * min(1.0, t / warmup)
    # bias-corrected update folded into scalar factors (fewer temporaries)
    alpha = lr * np.sqrt(1.0 - beta2**t) / (1.0 - beta1**t)
    eps_hat = eps * np.sqrt(1.0 - beta2**t)
    for name, p in store.params.items():
        if p.grad is None:
            continue
        g = p.grad
        m = store.moment1.setdefault(name, np.zeros_like(p.data))
        v = store.moment2.setdefault(name, np.zeros_like(p.data))
        m *= beta1
        m += (1 - beta1) * g
        v *= beta2
        v += (1 - beta2) * (g * g)
        denom = np.sqrt(v)
        denom += eps_hat
        p.data -= alpha * m / denom


def checkpoint_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
