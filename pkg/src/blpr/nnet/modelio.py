"""Binary model files.

Layout (all integers little-endian)::

    offset  size  field
    0       4     magic b"BLPR"
    4       4     u32 format version (currently 1)
    8       4     u32 header length L
    12      L     UTF-8 JSON header: arch name, input shape, vocabulary,
                  layer descriptions, and the ordered parameter table
                  [[layer index, name, shape], ...]
    12+L    8*K   float64 parameter values, concatenated in table order,
                  each tensor row-major
    end-4   4     u32 CRC32 of every preceding byte
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import (
    BadMagicError,
    ChecksumMismatchError,
    ImageIOError,
    ModelVocabMismatchError,
    VersionMismatchError,
)
from ..vocab import VOCAB
from .layers import layer_from_dict
from .network import Network, check_shapes

MAGIC = b"BLPR"
FORMAT_VERSION = 1


def model_bytes(net: Network) -> bytes:
    table = [[i, name, list(arr.shape)] for i, name, arr in net.named_parameters()]
    header = {
        "arch": net.arch,
        "input_shape": list(net.input_shape),
        "vocab": list(net.vocab),
        "layers": [layer.to_dict() for layer in net.layers],
        "params": table,
    }
    hdr = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = b"".join(
        np.ascontiguousarray(arr, dtype="<f8").tobytes() for _, _, arr in net.named_parameters()
    )
    payload = MAGIC + struct.pack("<II", FORMAT_VERSION, len(hdr)) + hdr + body
    return payload + struct.pack("<I", zlib.crc32(payload))


def save_model(net: Network, path) -> None:
    try:
        Path(path).write_bytes(model_bytes(net))
    except OSError as exc:
        raise ImageIOError(f"cannot write model {path}: {exc}") from exc


def parse_model(raw: bytes, expected_vocab=VOCAB) -> Network:
    if raw[:4] != MAGIC:
        raise BadMagicError("not a BLPR model file")
    if len(raw) < 16:
        raise ChecksumMismatchError("model file truncated")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"model format version {version}, expected {FORMAT_VERSION}")
    (stored,) = struct.unpack_from("<I", raw, len(raw) - 4)
    if zlib.crc32(raw[:-4]) != stored:
        raise ChecksumMismatchError("model file checksum mismatch (truncated or corrupted)")
    (hlen,) = struct.unpack_from("<I", raw, 8)
    header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
    vocab = tuple(header["vocab"])
    if expected_vocab is not None and vocab != tuple(expected_vocab):
        raise ModelVocabMismatchError(f"model vocabulary {vocab} does not match {tuple(expected_vocab)}")
    layers = [layer_from_dict(d) for d in header["layers"]]
    check_shapes(layers, header["input_shape"], len(vocab))
    params = [{} for _ in layers]
    offset = 12 + hlen
    for i, name, shape in header["params"]:
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).astype(np.float64)
        params[i][name] = arr.reshape(shape)
        offset += 8 * count
    if offset != len(raw) - 4:
        raise ChecksumMismatchError("model body length does not match its header")
    return Network(layers, params, header["arch"], tuple(header["input_shape"]), vocab)


def load_model(path, expected_vocab=VOCAB) -> Network:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ImageIOError(f"cannot read model {path}: {exc}") from exc
    return parse_model(raw, expected_vocab)
