"""Framing for every message exchanged between LPKI endpoints.

Layout::

    "LPKI" | version (1) | msg_type (1) | payload_len (u32) | payload

The payload is a sequence of tag(1) / length(u16) / value fields. Field
order is preserved, so decode(encode(m)) == m and encode(decode(b)) == b.
"""

from dataclasses import dataclass
from enum import IntEnum

from .codec import Reader, Writer
from .errors import MalformedWireMessage

MAGIC = b"LPKI"
VERSION = 0x01
HEADER_BYTES = 10


class MsgType(IntEnum):
    GATEWAY_QUERY = 0x01
    GATEWAY_RESPONSE = 0x02
    MODE1_DATA = 0x10
    MODE2_DATA = 0x11
    DPV_REQUEST = 0x20
    DPV_RESPONSE = 0x21
    OCSP_REQUEST = 0x30
    OCSP_RESPONSE = 0x31
    ERROR = 0x40
    TS_REQUEST = 0x50
    TS_RESPONSE = 0x51


class Tag(IntEnum):
    SENDER_ID = 0x01
    RECIPIENT_ID = 0x02
    QUERY_TAG = 0x03
    CERTIFICATE = 0x04
    OCSP_TOKEN = 0x05
    ENVELOPE = 0x06
    SENDER_EPH = 0x07
    RECIPIENT_EPH = 0x08
    REPORT = 0x09
    ERROR_CODE = 0x0A
    ERROR_DETAIL = 0x0B
    SERIAL = 0x0C
    TIMESTAMP = 0x0D
    TIME = 0x0E
    POLICY = 0x0F
    TARGET = 0x10
    KIND = 0x11
    MSG_ID = 0x12
    FORWARDED = 0x13
    SESSION_DATA = 0x14


@dataclass(frozen=True)
class WireMessage:
    msg_type: MsgType
    fields: tuple[tuple[int, bytes], ...] = ()

    def get(self, tag: int) -> bytes | None:
        for t, v in self.fields:
            if t == tag:
                return v
        return None

    def require(self, tag: int) -> bytes:
        v = self.get(tag)
        if v is None:
            raise MalformedWireMessage(f"{self.msg_type.name} lacks field {Tag(tag).name}",
                                       HEADER_BYTES)
        return v

    def get_all(self, tag: int) -> list[bytes]:
        return [v for t, v in self.fields if t == tag]

    def text(self, tag: int) -> str:
        return self.require(tag).decode("utf-8")

    def payload(self) -> bytes:
        w = Writer()
        for tag, value in self.fields:
            w.u8(tag).blob16(value)
        return w.getvalue()


def message(msg_type: MsgType, *fields: tuple[int, bytes | str | int | None]) -> WireMessage:
    """Build a message; str values are UTF-8, ints are u64, None fields are dropped."""
    out = []
    for tag, value in fields:
        if value is None:
            continue
        if isinstance(value, str):
            value = value.encode("utf-8")
        elif isinstance(value, int):
            value = value.to_bytes(8, "big")
        out.append((int(tag), bytes(value)))
    return WireMessage(msg_type, tuple(out))


def as_u64(b: bytes) -> int:
    if len(b) != 8:
        raise MalformedWireMessage("integer field must be 8 bytes", HEADER_BYTES)
    return int.from_bytes(b, "big")


def encode_wire(msg: WireMessage) -> bytes:
    payload = msg.payload()
    return (Writer().raw(MAGIC).u8(VERSION).u8(msg.msg_type).u32(len(payload))
            .raw(payload).getvalue())


def decode_wire(data: bytes) -> WireMessage:
    r = Reader(data, MalformedWireMessage)
    for i, expected in enumerate(MAGIC):
        if r.u8() != expected:
            raise r.fail("bad magic", i)
    if r.u8() != VERSION:
        raise r.fail("unsupported version", 4)
    raw_type = r.u8()
    try:
        msg_type = MsgType(raw_type)
    except ValueError:
        raise r.fail(f"unknown message type 0x{raw_type:02x}", 5) from None
    declared = r.u32()
    if declared != r.remaining:
        raise r.fail(f"payload_len {declared} but {r.remaining} bytes follow", 6)
    fields = []
    while r.remaining:
        tag = r.u8()
        fields.append((tag, r.blob16()))
    return WireMessage(msg_type, tuple(fields))


def error_message(code: str, detail: str = "", **extra: bytes) -> WireMessage:
    fields: list[tuple[int, bytes | str | None]] = [(Tag.ERROR_CODE, code), (Tag.ERROR_DETAIL, detail)]
    if "msg_id" in extra:
        fields.append((Tag.MSG_ID, extra["msg_id"]))
    if "report" in extra:
        fields.append((Tag.REPORT, extra["report"]))
    return message(MsgType.ERROR, *fields)
