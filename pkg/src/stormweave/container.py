"""Deterministic binary container for named float/int arrays plus a header.

Libraries and transition tables are saved through this module. The format is
deliberately simple so that re-saving identical content yields byte-identical
files (zip-based formats embed member timestamps, which breaks rerun
determinism):

    8 bytes   magic  b"SWEAVE01"
    8 bytes   header length (little-endian uint64)
    N bytes   header: UTF-8 JSON, sorted keys; includes an "arrays" map of
              name -> {dtype, shape, offset, nbytes} and a "payload_sha256"
    M bytes   payload: raw little-endian array bytes, C order, concatenated

The header's payload_sha256 guards against truncation and corruption.
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Any

import numpy as np

from .errors import InputError

MAGIC = b"SWEAVE01"

_ALLOWED_DTYPES = {"<f8", "<f4", "<i8", "<i4", "<u8", "|b1"}


def _canon_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save(path, header: dict, arrays: dict[str, np.ndarray]) -> None:
    """Write header + arrays to ``path`` atomically.

    A partial file is never left behind: content goes to a sibling temp file
    first and is renamed into place only after a successful write.
    """
    meta = {}
    chunks = []
    offset = 0
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        dtype = arr.dtype.newbyteorder("<") if arr.dtype.byteorder == ">" else arr.dtype
        arr = arr.astype(dtype, copy=False)
        dstr = arr.dtype.str if arr.dtype.str in _ALLOWED_DTYPES else "<f8"
        arr = arr.astype(dstr, copy=False)
        raw = arr.tobytes()
        meta[name] = {
            "dtype": dstr,
            "shape": list(arr.shape),
            "offset": offset,
            "nbytes": len(raw),
        }
        chunks.append(raw)
        offset += len(raw)

    payload = b"".join(chunks)
    full_header = dict(header)
    full_header["arrays"] = meta
    full_header["payload_sha256"] = hashlib.sha256(payload).hexdigest()
    hdr = _canon_json(full_header)

    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(len(hdr).to_bytes(8, "little"))
            fh.write(hdr)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a container; raises InputError on any structural problem."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc

    if len(blob) < 16 or blob[:8] != MAGIC:
        raise InputError(f"{path}: not a stormweave container (bad magic)")
    hlen = int.from_bytes(blob[8:16], "little")
    if len(blob) < 16 + hlen:
        raise InputError(f"{path}: truncated header")
    try:
        header = json.loads(blob[16 : 16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: corrupt header: {exc}") from exc

    payload = blob[16 + hlen :]
    digest = hashlib.sha256(payload).hexdigest()
    if digest != header.get("payload_sha256"):
        raise InputError(f"{path}: payload checksum mismatch (truncated or corrupt)")

    arrays = {}
    for name, meta in header.get("arrays", {}).items():
        start, nbytes = meta["offset"], meta["nbytes"]
        if start + nbytes > len(payload):
            raise InputError(f"{path}: array {name} extends past end of payload")
        arr = np.frombuffer(payload[start : start + nbytes], dtype=meta["dtype"])
        arrays[name] = arr.reshape(meta["shape"]).copy()
    header.pop("arrays", None)
    header.pop("payload_sha256", None)
    return header, arrays
