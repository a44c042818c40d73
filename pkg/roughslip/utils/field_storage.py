#!/usr/bin/env python3
"""
Binary field storage for solver checkpoints and snapshots
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from utilities.errors import StorageError
from utilities import log

SCHEMA_VERSION = 1
ALIGNMENT = 8


def safe_name(name: str) -> str:
    cleaned = "".join(c for c in name if c.isalnum() or c in ("-", "_", "."))
    return cleaned or "field"


def write_field(path, name: str, values: np.ndarray, time: Optional[float] = None,
                grid: Optional[Dict[str, Any]] = None) -> Path:
    """
    Layout: u64 LE header length | UTF-8 JSON header | zero pad to 8 bytes | LE float64 data (C order)
    """
    path = Path(path)
    data = np.ascontiguousarray(values, dtype="<f8")
    header = {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "shape": list(data.shape),
        "dtype": "<f8",
        "order": "C",
        "time": time,
        "grid": grid or {},
    }
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")
    pad = (-(8 + len(encoded))) % ALIGNMENT
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(struct.pack("<Q", len(encoded)))
            f.write(encoded)
            f.write(b"\0" * pad)
            f.write(data.tobytes(order="C"))
    except OSError as e:
        raise StorageError(f"Writing field '{name}' failed: {str(e)}")
    log.debug(f"Saved field: {path.name} {tuple(data.shape)}")
    return path


def _read_header(f) -> Tuple[Dict[str, Any], int]:
    raw = f.read(8)
    if len(raw) != 8:
        raise StorageError("field file is truncated before the header length")
    (length,) = struct.unpack("<Q", raw)
    encoded = f.read(length)
    if len(encoded) != length:
        raise StorageError("field file is truncated inside the header")
    try:
        header = json.loads(encoded.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise StorageError(f"field header is not valid JSON: {str(e)}")
    if header.get("schema_version") != SCHEMA_VERSION or header.get("dtype") != "<f8":
        raise StorageError(f"unsupported field header {header}")
    offset = 8 + length + (-(8 + length)) % ALIGNMENT
    return header, offset


def read_header(path) -> Dict[str, Any]:
    with open(path, "rb") as f:
        header, _ = _read_header(f)
    return header


def read_field(path, mmap: bool = False) -> Tuple[Dict[str, Any], np.ndarray]:
    path = Path(path)
    try:
        with open(path, "rb") as f:
            header, offset = _read_header(f)
            shape = tuple(header["shape"])
            if mmap:
                values = np.memmap(path, dtype="<f8", mode="r", offset=offset, shape=shape, order="C")
            else:
                f.seek(offset)
                count = int(np.prod(shape)) if shape else 1
                values = np.fromfile(f, dtype="<f8", count=count)
                if values.size != count:
                    raise StorageError(f"field '{header['name']}' holds {values.size} of {count} values")
                values = values.reshape(shape)
    except OSError as e:
        raise StorageError(f"Reading field failed: {str(e)}")
    return header, values
