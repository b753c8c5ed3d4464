"""PREMB precomputed-embedding files.

Binary layout (little-endian): magic ``PREMB1\\n``, u32 dim, u64 record
count, then per record a u16 pair-id byte length, the pair-id bytes
(UTF-8), u32 seq_len, and seq_len x dim float32 values row-major.
Records are sorted by pair-id bytes so readers can binary-search.
"""

import struct
from typing import Iterable, Mapping

import numpy as np

MAGIC = b"PREMB1\n"


class PrembFormatError(ValueError):
    pass


def write_premb(path, dim: int, records: Mapping[str, np.ndarray] | Iterable[tuple[str, np.ndarray]]) -> None:
    """Write pair-id -> (seq_len, dim) float arrays, sorted by pair id."""
    if isinstance(records, Mapping):
        records = records.items()
    items = []
    for pair_id, vectors in records:
        data = np.ascontiguousarray(vectors, dtype="<f4")
        if data.ndim != 2 or data.shape[1] != dim:
            raise ValueError(
                f"record {pair_id!r}: expected shape (seq_len, {dim}), "
                f"got {vectors.shape}")
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


class PrembFile:
    """In-memory view of a PREMB file; lookups by exact pair id."""

    def __init__(self, dim: int, records: dict[str, np.ndarray], path=None):
        self.dim = dim
        self._records = records
        self.path = path

    @classmethod
    def load(cls, path) -> "PrembFile":
        with open(path, "rb") as f:
            blob = f.read()
        if not blob.startswith(MAGIC):
            raise PrembFormatError(f"{path}: bad magic, not a PREMB file")
        off = len(MAGIC)
        try:
            dim, count = struct.unpack_from("<IQ", blob, off)
            off += 12
            records: dict[str, np.ndarray] = {}
            prev_key = None
            for _ in range(count):
                (key_len,) = struct.unpack_from("<H", blob, off)
                off += 2
                key = blob[off:off + key_len]
                if len(key) != key_len:
                    raise struct.error("truncated pair id")
                off += key_len
                if prev_key is not None and key <= prev_key:
                    raise PrembFormatError(
                        f"{path}: records not sorted by pair id at {key!r}")
                prev_key = key
                (seq_len,) = struct.unpack_from("<I", blob, off)
                off += 4
                nbytes = seq_len * dim * 4
                raw = blob[off:off + nbytes]
                if len(raw) != nbytes:
                    raise struct.error("truncated record payload")
                off += nbytes
                vectors = np.frombuffer(raw, dtype="<f4").reshape(seq_len, dim)
                records[key.decode("utf-8")] = vectors
        except struct.error as exc:
            raise PrembFormatError(f"{path}: truncated PREMB file: {exc}") from None
        if off != len(blob):
            raise PrembFormatError(f"{path}: {len(blob) - off} trailing bytes")
        return cls(dim, records, path=path)

    def __contains__(self, pair_id: str) -> bool:
        return pair_id in self._records

    def __len__(self) -> int:
        return len(self._records)

    def pair_ids(self) -> list[str]:
        return sorted(self._records)

    def vectors(self, pair_id: str) -> np.ndarray:
        try:
            return self._records[pair_id]
        except KeyError:
            raise KeyError(
                f"pair id {pair_id!r} not present in embedding file "
                f"{self.path or ''}") from None
