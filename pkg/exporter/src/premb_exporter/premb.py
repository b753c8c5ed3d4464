"""PREMB writer.

Layout (little-endian): magic ``PREMB1\\n``, u32 dim, u64 record count,
then per record u16 pair-id byte length, pair-id UTF-8 bytes, u32
seq_len, seq_len x dim float32 row-major.  Records sorted by pair-id
bytes.
"""

import struct
from typing import Iterable

import numpy as np

MAGIC = b"PREMB1\n"


def write_premb(path, dim: int,
                records: Iterable[tuple[str, np.ndarray]]) -> None:
    items = []
    for pair_id, vectors in records:
        data = np.ascontiguousarray(vectors, dtype="<f4")
        if data.ndim != 2 or data.shape[1] != dim:
            raise ValueError(f"record {pair_id!r}: expected (seq_len, {dim}) "
                             f"array, got shape {vectors.shape}")
        key = pair_id.encode("utf-8")
        if len(key) > 0xFFFF:
            raise ValueError(f"pair id too long: {pair_id!r}")
        items.append((key, data))
    items.sort(key=lambda kv: kv[0])
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQ", dim, len(items)))
        for key, data in items:
            f.write(struct.pack("<H", len(key)))
            f.write(key)
            f.write(struct.pack("<I", data.shape[0]))
            f.write(data.tobytes())
