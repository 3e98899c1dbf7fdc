"""Big-endian fixed-width byte codec shared by every binary format here.

Integers are fixed width, strings and blobs carry a length prefix. The
reader reports the byte offset of the first violation.
"""

from typing import Type

from .errors import DecodeError


class Writer:
    def __init__(self) -> None:
        self._buf = bytearray()

    def u8(self, v: int) -> "Writer":
        self._buf += v.to_bytes(1, "big")
        return self

    def u16(self, v: int) -> "Writer":
        self._buf += v.to_bytes(2, "big")
        return self

    def u32(self, v: int) -> "Writer":
        self._buf += v.to_bytes(4, "big")
        return self

    def u64(self, v: int) -> "Writer":
        self._buf += v.to_bytes(8, "big")
        return self

    def raw(self, b: bytes) -> "Writer":
        self._buf += b
        return self

    def blob16(self, b: bytes) -> "Writer":
        if len(b) > 0xFFFF:
            raise ValueError(f"field of {len(b)} bytes exceeds 16-bit length prefix")
        return self.u16(len(b)).raw(b)

    def blob32(self, b: bytes) -> "Writer":
        return self.u32(len(b)).raw(b)

    def str16(self, s: str) -> "Writer":
        return self.blob16(s.encode("utf-8"))

    def getvalue(self) -> bytes:
        return bytes(self._buf)


class Reader:
    def __init__(self, data: bytes, error: Type[DecodeError] = DecodeError):
        self.data = bytes(data)
        self.pos = 0
        self._error = error

    def fail(self, message: str, offset: int | None = None) -> DecodeError:
        return self._error(message, self.pos if offset is None else offset)

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise self.fail(f"truncated: need {n} bytes, {len(self.data) - self.pos} left")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def _int(self, width: int) -> int:
        return int.from_bytes(self.raw(width), "big")

    def u8(self) -> int:
        return self._int(1)

    def u16(self) -> int:
        return self._int(2)

    def u32(self) -> int:
        return self._int(4)

    def u64(self) -> int:
        return self._int(8)

    def blob16(self) -> bytes:
        return self.raw(self.u16())

    def blob32(self) -> bytes:
        return self.raw(self.u32())

    def str16(self) -> str:
        start = self.pos
        b = self.blob16()
        try:
            return b.decode("utf-8")
        except UnicodeDecodeError:
            raise self.fail("invalid UTF-8 string", start) from None

    @property
    def remaining(self) -> int:
        return len(self.data) - self.pos

    def expect_end(self) -> None:
        if self.pos != len(self.data):
            raise self.fail(f"{len(self.data) - self.pos} trailing bytes")
