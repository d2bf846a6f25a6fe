"""Atomic file writes and little-endian binary (de)serialization helpers.

All model artifacts are written through `atomic_write_bytes` (temp file in
the target directory, then rename) so a crash mid-write never leaves a
truncated artifact behind. The BinaryWriter/BinaryReader pair implements
the shared wire vocabulary of the binary containers: fixed-width unsigned
integers, length-prefixed UTF-8 strings, length-prefixed byte blocks and
dtype-tagged n-dimensional arrays, all little-endian.
"""

import io
import os
import struct
import tempfile

import numpy as np

from .errors import CoLiError


class BinaryFormatError(CoLiError):
    """A binary container is truncated or structurally invalid."""


def atomic_write_bytes(path, data: bytes) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# Array dtype tags. Only the dtypes the containers actually use.
_DTYPE_CODES = {np.dtype("<f4"): 1, np.dtype("<f8"): 2, np.dtype("<i8"): 3}
_CODE_DTYPES = {code: dt for dt, code in _DTYPE_CODES.items()}


class BinaryWriter:
    def __init__(self):
        self._buf = io.BytesIO()

    def magic(self, tag: bytes):
        if len(tag) != 4:
            raise ValueError("magic tag must be 4 bytes")
        self._buf.write(tag)

    def u8(self, value: int):
        self._buf.write(struct.pack("<B", value))

    def u32(self, value: int):
        self._buf.write(struct.pack("<I", value))

    def u64(self, value: int):
        self._buf.write(struct.pack("<Q", value))

    def f64(self, value: float):
        self._buf.write(struct.pack("<d", value))

    def string(self, text: str):
        raw = text.encode("utf-8")
        self.u32(len(raw))
        self._buf.write(raw)

    def bytes_block(self, data: bytes):
        self.u64(len(data))
        self._buf.write(data)

    def array(self, arr: np.ndarray):
        arr = np.ascontiguousarray(arr)
        dt = arr.dtype.newbyteorder("<")
        if dt not in _DTYPE_CODES:
            raise ValueError(f"unsupported array dtype {arr.dtype}")
        self.u8(_DTYPE_CODES[dt])
        self.u8(arr.ndim)
        for dim in arr.shape:
            self.u64(dim)
        self._buf.write(arr.astype(dt, copy=False).tobytes(order="C"))

    def getvalue(self) -> bytes:
        return self._buf.getvalue()


class BinaryReader:
    def __init__(self, data: bytes, name: str = "<bytes>"):
        self._data = data
        self._pos = 0
        self._name = name

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise BinaryFormatError(f"{self._name}: truncated (need {n} bytes at offset {self._pos})")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def magic(self, expected: bytes):
        got = self._take(4)
        if got != expected:
            raise BinaryFormatError(f"{self._name}: bad magic {got!r}, expected {expected!r}")

    def u8(self) -> int:
        return struct.unpack("<B", self._take(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def string(self) -> str:
        n = self.u32()
        try:
            return self._take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BinaryFormatError(f"{self._name}: invalid UTF-8 in string field") from exc

    def bytes_block(self) -> bytes:
        n = self.u64()
        return self._take(n)

    def array(self) -> np.ndarray:
        code = self.u8()
        if code not in _CODE_DTYPES:
            raise BinaryFormatError(f"{self._name}: unknown array dtype code {code}")
        dt = _CODE_DTYPES[code]
        ndim = self.u8()
        shape = tuple(self.u64() for _ in range(ndim))
        count = 1
        for dim in shape:
            count *= dim
        raw = self._take(count * dt.itemsize)
        return np.frombuffer(raw, dtype=dt).reshape(shape).copy()

    def expect_end(self):
        if self._pos != len(self._data):
            raise BinaryFormatError(f"{self._name}: {len(self._data) - self._pos} trailing bytes")
