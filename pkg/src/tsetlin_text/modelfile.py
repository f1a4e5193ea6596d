"""Versioned binary model container.

Layout (all integers little-endian)::

    8 bytes   magic  b"TSETLINT"
    u32       version (major << 16 | minor)
    u32 + N   metadata JSON (hyperparameters, labels, tokenizer, state layout)
    u32       number of vocabulary terms, then per term u32 length + UTF-8 bytes
    ...       automaton states, C x m x 2k cells of u16 or u32
    u64       checksum: first 8 bytes of BLAKE2b over everything above
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .learner import HyperParams, MultiClassTM
from .text import TokenizerConfig, Vocabulary

MAGIC = b"TSETLINT"
VERSION_MAJOR = 1
VERSION_MINOR = 0
_HEADER = struct.Struct("<8sI")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


class ModelFileError(Exception):
    pass


class BadMagicError(ModelFileError):
    pass


class UnsupportedVersionError(ModelFileError):
    pass


class ChecksumError(ModelFileError):
    pass


class TruncatedFileError(ModelFileError):
    pass


class LoadedModel(NamedTuple):
    model: MultiClassTM
    vocabulary: Vocabulary
    tokenizer: TokenizerConfig
    metadata: dict


def _checksum(payload: bytes) -> int:
    return _U64.unpack(hashlib.blake2b(payload, digest_size=8).digest())[0]


def encode_model(mtm: MultiClassTM, vocab: Vocabulary, cfg: TokenizerConfig,
                 extra: dict | None = None) -> bytes:
    if len(vocab) != mtm.n_features:
        raise ValueError(f"vocabulary has {len(vocab)} terms, model has {mtm.n_features} features")
    width = mtm.states.dtype.itemsize
    meta = {
        "byte_order": "little",
        "state_bytes": width,
        "shape": list(mtm.states.shape),
        "hyperparams": mtm.params.to_dict(),
        "class_labels": mtm.class_labels,
        "tokenizer": cfg.to_dict(),
        "epochs_trained": mtm.epochs_trained,
        "extra": extra or {},
    }
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [_HEADER.pack(MAGIC, (VERSION_MAJOR << 16) | VERSION_MINOR),
             _U32.pack(len(meta_bytes)), meta_bytes, _U32.pack(len(vocab))]
    for term in vocab:
        raw = term.encode("utf-8")
        parts.append(_U32.pack(len(raw)))
        parts.append(raw)
    parts.append(np.ascontiguousarray(mtm.states, dtype=f"<u{width}").tobytes())
    payload = b"".join(parts)
    return payload + _U64.pack(_checksum(payload))


def save_model(mtm: MultiClassTM, vocab: Vocabulary, cfg: TokenizerConfig, path,
               extra: dict | None = None) -> None:
    """Write atomically: a temporary file in the target directory, then rename."""
    data = encode_model(mtm, vocab, cfg, extra)
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFileError("model file ends early")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]


def decode_model(data: bytes) -> LoadedModel:
    if len(data) < _HEADER.size + _U64.size:
        raise TruncatedFileError("model file too short")
    magic, version = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError("not a tsetlin-text model file")
    major, minor = version >> 16, version & 0xFFFF
    if major != VERSION_MAJOR:
        raise UnsupportedVersionError(
            f"model file version {major}.{minor} unsupported (reader is {VERSION_MAJOR}.x)")
    payload, stored = data[:-_U64.size], _U64.unpack(data[-_U64.size:])[0]
    if _checksum(payload) != stored:
        raise ChecksumError("model file checksum mismatch")

    reader = _Reader(payload)
    reader.take(_HEADER.size)
    try:
        meta = json.loads(reader.take(reader.u32()).decode("utf-8"))
        terms = [reader.take(reader.u32()).decode("utf-8") for _ in range(reader.u32())]
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"malformed model file: {exc}") from exc
    if meta.get("byte_order") != "little":
        raise ModelFileError("unsupported byte order")
    shape = tuple(meta["shape"])
    width = int(meta["state_bytes"])
    n_cells = int(np.prod(shape))
    raw = reader.take(n_cells * width)
    if reader.pos != len(payload):
        raise ModelFileError("trailing bytes after state block")

    params = HyperParams.from_dict(meta["hyperparams"])
    mtm = MultiClassTM(shape[2] // 2, meta["class_labels"], params)
    states = np.frombuffer(raw, dtype=f"<u{width}").reshape(shape)
    if states.min(initial=1) < 1 or states.max(initial=1) > 2 * params.n_states:
        raise ModelFileError("automaton state outside [1, 2N]")
    mtm.states = states.astype(mtm.states.dtype)
    mtm.epochs_trained = int(meta["epochs_trained"])
    mtm.refresh()
    return LoadedModel(mtm, Vocabulary(terms), TokenizerConfig.from_dict(meta["tokenizer"]),
                       meta.get("extra", {}))


def load_model(path) -> LoadedModel:
    return decode_model(Path(path).read_bytes())
