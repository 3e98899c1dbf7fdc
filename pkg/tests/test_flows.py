import pytest

from lpki.attack import order2_point
from lpki.config import Config
from lpki.ec import KeyPair
from lpki.errors import (
    AlreadyCertified, CapabilityError, DelegatedValidationFailed, FlowError, InvalidPublicKey,
    RecipientValidationFailed, RenewalNotPermitted, SenderValidationFailed, VaSignatureInvalid,
    VerificationFailure,
)
from lpki.flows import (
    GATEWAY, VA, decode_payload, establish_session, gateway_query, mode1_send, mode2_send,
    renew, send, session_send,
)
from lpki.pki import CertStatus, OcspToken, parse_certificate
from lpki.wire import MsgType, Tag, decode_wire, encode_wire
from lpki.world import World

MSG = b"meet me at the usual place at nine"


@pytest.fixture
def pair(world):
    return world.enroll("989120000001", 1), world.enroll("989120000002", 2)


def data_frames(world, dst):
    out = []
    for src, d, raw in world.net.transcript:
        if d == dst:
            msg = decode_wire(raw)
            if msg.msg_type in (MsgType.MODE1_DATA, MsgType.MODE2_DATA):
                out.append(msg)
    return out


def tamper_field(msg, tag, fn):
    fields = tuple((t, fn(v) if t == tag else v) for t, v in msg.fields)
    return encode_wire(type(msg)(msg.msg_type, fields))


def flip_last(b):
    return b[:-1] + bytes([b[-1] ^ 1])


# ---- gateway

def test_gateway_tags(world, pair):
    a, b = pair
    r1 = gateway_query(world, a.name, b.name, "1", 10)
    assert r1.msg_type is MsgType.GATEWAY_RESPONSE and r1.get(Tag.OCSP_TOKEN) is None
    assert parse_certificate(r1.require(Tag.CERTIFICATE)) == b.certificate()
    r2 = gateway_query(world, a.name, b.name, "2", 10)
    tok = OcspToken.from_bytes(r2.require(Tag.OCSP_TOKEN))
    assert tok.serial == b.certificate().serial and tok.status is CertStatus.GOOD
    assert tok.this_update == 10


def test_gateway_errors(world, pair):
    a, _ = pair
    nf = gateway_query(world, a.name, "uid=0,o=LPKI,c=IR", "2", 0)
    assert nf.msg_type is MsgType.ERROR and nf.get(Tag.ERROR_CODE) == b"NotFound"
    bad = gateway_query(world, a.name, a.name, "3", 0)
    assert bad.get(Tag.ERROR_CODE) == b"BadTag"
    garbage = decode_wire(world.net.request(a.name, GATEWAY, b"junk"))
    assert garbage.get(Tag.ERROR_CODE) == b"Malformed"


# ---- mode 1

def test_mode1_happy_path(world, pair):
    a, b = pair
    out = mode1_send(world, a, b.name, MSG, 100)
    assert out.message == MSG and out.mode == 1
    assert out.sender_report.ok and out.recipient_report.ok
    assert b.inbox == [(a.name, MSG)]
    # the envelope went directly, not through the VA
    assert data_frames(world, b.name) and not data_frames(world, VA)


def test_mode1_revoked_recipient_nothing_transmitted(world, pair):
    a, b = pair
    world.ca.revoke(b.certificate().serial, 50)
    with pytest.raises(SenderValidationFailed) as info:
        mode1_send(world, a, b.name, MSG, 100)
    assert info.value.step == "revocation" and info.value.detail == "Revoked"
    assert data_frames(world, b.name) == [] and b.received == {}


def test_mode1_revoked_sender_rejected_by_recipient(world, pair):
    a, b = pair
    mode1_send(world, a, b.name, b"warm the cache", 10)
    world.ca.revoke(a.certificate().serial, 50)
    # a still holds its key and a good view of b, so the envelope goes out
    with pytest.raises(RecipientValidationFailed) as info:
        mode1_send(world, a, b.name, b"x", 100)
    assert info.value.step == "revocation" and info.value.detail == "Revoked"
    assert len(b.inbox) == 1


def test_mode1_corrupt_envelope(world, pair):
    a, b = pair

    def hook(src, dst, raw):
        if dst == b.name:
            msg = decode_wire(raw)
            if msg.msg_type is MsgType.MODE1_DATA:
                return tamper_field(msg, Tag.ENVELOPE, flip_last)
        return raw

    world.net.tamper_hooks.append(hook)
    with pytest.raises(VerificationFailure):
        mode1_send(world, a, b.name, MSG, 100)
    assert b.inbox == []
    assert not next(iter(b.received.values())).ok


def test_mode1_requires_capability(world):
    weak = world.enroll("989120000003", 2, can_validate=False)
    other = world.enroll("989120000004", 2)
    with pytest.raises(CapabilityError):
        mode1_send(world, weak, other.name, b"x", 0)
    with pytest.raises(RecipientValidationFailed) as info:
        mode1_send(world, other, weak.name, b"x", 0)
    assert info.value.step == "capability"


def test_unknown_recipient(world, pair):
    a, _ = pair
    with pytest.raises(SenderValidationFailed) as info:
        mode1_send(world, a, "uid=0,o=LPKI,c=IR", b"x", 0)
    assert info.value.detail == "NotFound"
    with pytest.raises(SenderValidationFailed):
        mode2_send(world, a, "uid=0,o=LPKI,c=IR", b"x", 0)


# ---- mode 2

def test_mode2_non_validating_parties(world):
    a = world.enroll("989120000005", 2, can_validate=False)
    b = world.enroll("989120000006", 2, can_validate=False)
    out = mode2_send(world, a, b.name, MSG, 100)
    assert out.message == MSG and out.va_report.ok and out.mode == 2
    assert b.inbox == [(a.name, MSG)]
    assert world.va.log[-1].verdict == "pass"
    # the VA forwarded the sender's frame byte for byte
    (sent,) = data_frames(world, VA)
    (fwd,) = data_frames(world, b.name)
    assert decode_payload(fwd.require(Tag.FORWARDED)) == sent
    assert encode_wire(sent)[10:] == fwd.require(Tag.FORWARDED)


def test_mode2_expired_sender():
    world = World.create(Config(cert_lifetime=100))
    a = world.enroll("989120000007", 2)
    b = world.enroll("989120000008", 2)
    before = len(world.va.log)
    with pytest.raises(DelegatedValidationFailed) as info:
        mode2_send(world, a, b.name, MSG, 500)
    assert info.value.step == "sender.cert.validity" and info.value.detail == "Expired"
    assert info.value.report is not None and not info.value.report.ok
    assert len(world.va.log) == before + 1 and world.va.log[-1].verdict == "fail"
    assert b.received == {} and b.inbox == []


def test_mode2_tampered_report(world, pair):
    a, b = pair

    def hook(src, dst, raw):
        if src == VA and dst == b.name:
            msg = decode_wire(raw)
            if msg.get(Tag.FORWARDED) is not None:
                return tamper_field(msg, Tag.REPORT, flip_last)
        return raw

    world.net.tamper_hooks.append(hook)
    with pytest.raises(VaSignatureInvalid) as info:
        mode2_send(world, a, b.name, MSG, 100)
    assert info.value.step == "va_signature"
    assert b.inbox == []


def test_mode2_report_bound_to_message(world, pair):
    a, b = pair

    def hook(src, dst, raw):
        if src == VA and dst == b.name:
            msg = decode_wire(raw)
            inner = decode_payload(msg.require(Tag.FORWARDED))
            swapped = tamper_field(inner, Tag.ENVELOPE, flip_last)[10:]
            return tamper_field(msg, Tag.FORWARDED, lambda _: swapped)
        return raw

    world.net.tamper_hooks.append(hook)
    with pytest.raises(VaSignatureInvalid) as info:
        mode2_send(world, a, b.name, MSG, 100)
    assert info.value.step == "va_binding"


def test_mode2_stale_cache_then_retry(world, pair):
    a, b = pair
    mode2_send(world, a, b.name, b"first", 10)
    renew(world, b, 20)
    with pytest.raises(DelegatedValidationFailed) as info:
        mode2_send(world, a, b.name, b"second", 30)
    assert info.value.detail == "Revoked"
    assert mode2_send(world, a, b.name, b"third", 40).message == b"third"


def test_send_dispatch(world, pair):
    a, b = pair
    assert send(world, a, b.name, b"1", 0, 1).mode == 1
    assert send(world, a, b.name, b"2", 0, 2).mode == 2
    with pytest.raises(ValueError):
        send(world, a, b.name, b"3", 0, 3)


# ---- enrollment and renewal

def test_enrollment_modes_interoperate(world, pair):
    a, b = pair
    assert a.enrollment_mode == 1 and b.enrollment_mode == 2
    for mode in (1, 2):
        assert send(world, a, b.name, b"a->b", 0, mode).message == b"a->b"
        assert send(world, b, a.name, b"b->a", 0, mode).message == b"b->a"


def test_off_curve_mode2_rejected(world):
    bad = order2_point(world.params).point
    with pytest.raises(InvalidPublicKey) as info:
        world.enroll("989120000009", 2, keypair=KeyPair(5, bad))
    assert info.value.condition == "c"


def test_reenroll_rejected(world, pair):
    a, _ = pair
    with pytest.raises(AlreadyCertified):
        world.enroll("989120000001", 2)


def test_renew(world, pair):
    a, b = pair
    old = b.certificate()
    new = renew(world, b, 100)
    assert new.serial != old.serial and new.subject_pk != old.subject_pk
    assert world.ca.ocsp_respond(old.serial, 100).status is CertStatus.REVOKED
    assert b.keypair().pk == new.public_key(world.params)
    a.peer_cache.clear()
    assert mode1_send(world, a, b.name, MSG, 110).message == MSG
    with pytest.raises(RenewalNotPermitted):
        renew(world, a, 100)


# ---- sessions

@pytest.mark.parametrize("mode", [1, 2])
def test_hmqv_session(world, pair, mode):
    a, b = pair
    key = establish_session(world, a, b.name, 10, mode)
    assert b.sessions[a.name].key == key
    out = session_send(world, a, b.name, MSG, 11)
    assert out.message == MSG
    assert session_send(world, b, a.name, b"reply", 12).message == b"reply"
    # a fresh handshake yields a fresh key
    assert establish_session(world, a, b.name, 13, mode) != key


def test_session_requires_handshake(world, pair):
    a, b = pair
    with pytest.raises(FlowError):
        session_send(world, a, b.name, b"x", 0)


def test_hmqv_invalid_ephemeral_rejected_by_va(world, pair):
    a, b = pair
    bad = b"\x02" + (2).to_bytes(32, "big")

    def hook(src, dst, raw):
        if dst == VA:
            msg = decode_wire(raw)
            if msg.get(Tag.KIND) == b"hmqv-init":
                return tamper_field(msg, Tag.SENDER_EPH, lambda _: bad)
        return raw

    world.net.tamper_hooks.append(hook)
    with pytest.raises(DelegatedValidationFailed) as info:
        establish_session(world, a, b.name, 0, 2)
    assert info.value.step == "sender.ephemeral_key"


# ---- transcript hygiene and costs

def test_no_plaintext_on_the_wire(world, pair):
    a, b = pair
    secrets = [b"secret number %d for the wire check" % i for i in range(4)]
    mode1_send(world, a, b.name, secrets[0], 0)
    mode2_send(world, a, b.name, secrets[1], 0)
    establish_session(world, a, b.name, 0, 1)
    session_send(world, a, b.name, secrets[2], 0)
    session_send(world, b, a.name, secrets[3], 0)
    for _, _, raw in world.net.transcript:
        for s in secrets:
            assert s not in raw


def test_mode2_costs_less(world):
    def run(mode):
        w = World.create()
        s, r = w.enroll("1", 2), w.enroll("2", 2)
        s.ops.reset(), r.ops.reset()
        send(w, s, r.name, MSG, 0, mode)
        return s.ops.scalar_mults, r.ops.scalar_mults

    assert run(1) == (5, 6)
    assert run(2) == (1, 4)
