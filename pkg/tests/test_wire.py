import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from goldens import GOLDEN_DIR, all_goldens
from lpki.errors import MalformedWireMessage
from lpki.wire import (
    HEADER_BYTES, MsgType, Tag, WireMessage, as_u64, decode_wire, encode_wire, error_message,
    message,
)


@pytest.mark.parametrize("name", sorted(all_goldens()))
def test_golden_bytes(name):
    assert (GOLDEN_DIR / name).read_bytes() == all_goldens()[name]


def test_every_message_type_has_a_golden():
    names = set(all_goldens())
    for t in MsgType:
        assert f"wire_{t.name.lower()}.bin" in names


def test_ocsp_request_layout_by_hand():
    expected = bytes.fromhex("4c504b49" "01" "30" "0000000b" "0c" "0008" "000000000000002a")
    assert encode_wire(message(MsgType.OCSP_REQUEST, (Tag.SERIAL, 42))) == expected


@pytest.mark.parametrize("name", sorted(n for n in all_goldens() if n.startswith("wire_")))
def test_golden_round_trip(name):
    raw = (GOLDEN_DIR / name).read_bytes()
    assert encode_wire(decode_wire(raw)) == raw


def test_message_helpers():
    m = message(MsgType.GATEWAY_QUERY, (Tag.SENDER_ID, "a"), (Tag.SERIAL, 5), (Tag.TARGET, None),
                (Tag.TARGET, b"x"), (Tag.TARGET, b"y"))
    assert m.text(Tag.SENDER_ID) == "a" and as_u64(m.get(Tag.SERIAL)) == 5
    assert m.get(Tag.TARGET) == b"x" and m.get_all(Tag.TARGET) == [b"x", b"y"]
    assert m.get(Tag.REPORT) is None
    with pytest.raises(MalformedWireMessage):
        m.require(Tag.REPORT)
    with pytest.raises(MalformedWireMessage):
        as_u64(b"\x01")
    err = error_message("NotFound", "x", msg_id=b"id", report=b"r")
    assert err.msg_type is MsgType.ERROR and err.get(Tag.MSG_ID) == b"id"


@pytest.mark.parametrize("index,value,offset", [
    (0, 0x4D, 0), (3, 0x00, 3), (4, 0x02, 4), (5, 0x99, 5),
])
def test_header_violations_report_offset(index, value, offset):
    raw = bytearray(encode_wire(message(MsgType.OCSP_REQUEST, (Tag.SERIAL, 1))))
    raw[index] = value
    with pytest.raises(MalformedWireMessage) as info:
        decode_wire(bytes(raw))
    assert info.value.offset == offset


def test_length_mismatch():
    raw = encode_wire(message(MsgType.OCSP_REQUEST, (Tag.SERIAL, 1)))
    with pytest.raises(MalformedWireMessage) as info:
        decode_wire(raw[:-1])
    assert info.value.offset == 6
    with pytest.raises(MalformedWireMessage):
        decode_wire(raw + b"\x00")
    with pytest.raises(MalformedWireMessage):
        decode_wire(raw[:7])
    # payload_len consistent but a field runs past the end
    bad = raw[:HEADER_BYTES] + b"\x0c\x00\x09" + raw[HEADER_BYTES + 3:]
    with pytest.raises(MalformedWireMessage):
        decode_wire(bad)


def test_oversized_field_rejected():
    with pytest.raises(ValueError):
        encode_wire(message(MsgType.MODE1_DATA, (Tag.ENVELOPE, bytes(70000))))


wire_strategy = st.builds(
    WireMessage,
    st.sampled_from(list(MsgType)),
    st.lists(st.tuples(st.integers(0, 255), st.binary(max_size=300)), max_size=8).map(tuple),
)


@settings(max_examples=300, deadline=None)
@given(wire_strategy)
def test_codec_bijection(msg):
    raw = encode_wire(msg)
    assert decode_wire(raw) == msg
    assert encode_wire(decode_wire(raw)) == raw
