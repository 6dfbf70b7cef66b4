"""Binary parameter checkpoints.

Layout::

    b"SFCK" | u32 version | u64 header_len | header (UTF-8 JSON) | raw data

The JSON header holds ``config`` (free-form, e.g. dims / vocab hash / seed /
token unit) and ``tensors``, a manifest of ``{name, shape, dtype, offset,
nbytes}`` with offsets relative to the start of the raw data. All values
are little-endian float64.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CheckpointMismatch

MAGIC = b"SFCK"
VERSION = 1
_DTYPE = "<f8"


def save_checkpoint(path: str | Path, params: dict, config: dict) -> None:
    manifest, chunks, offset = [], [], 0
    for name, arr in params.items():
        data = np.ascontiguousarray(arr, dtype=_DTYPE).tobytes()
        manifest.append({"name": name, "shape": list(arr.shape), "dtype": _DTYPE,
                         "offset": offset, "nbytes": len(data)})
        chunks.append(data)
        offset += len(data)
    header = json.dumps({"config": config, "tensors": manifest},
                        sort_keys=True, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<IQ", VERSION, len(header)))
        fh.write(header)
        for chunk in chunks:
            fh.write(chunk)


def load_checkpoint(path: str | Path, expect: dict | None = None):
    """Return ``(params, config)``.

    ``expect`` maps config keys to required values; any disagreement raises
    :class:`CheckpointMismatch`.
    """
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise CheckpointMismatch(f"{path}: not a sumforge checkpoint")
    version, hlen = struct.unpack_from("<IQ", blob, 4)
    if version != VERSION:
        raise CheckpointMismatch(f"{path}: unsupported checkpoint version {version}")
    start = 16
    header = json.loads(blob[start:start + hlen].decode("utf-8"))
    base = start + hlen
    params = {}
    for t in header["tensors"]:
        lo = base + t["offset"]
        raw = blob[lo:lo + t["nbytes"]]
        if len(raw) != t["nbytes"]:
            raise CheckpointMismatch(f"{path}: truncated tensor {t['name']}")
        params[t["name"]] = np.frombuffer(raw, dtype=t["dtype"]).astype(float).reshape(t["shape"])
    config = header["config"]
    for key, value in (expect or {}).items():
        if config.get(key) != value:
            raise CheckpointMismatch(
                f"{path}: checkpoint {key}={config.get(key)!r}, expected {value!r}")
    return params, config
