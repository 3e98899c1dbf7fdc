"""End-entity message flows over the simulated network.

Mode "1": each end entity fetches its peer's certificate and status from
the gateway and validates everything itself before signcrypting or
unsigncrypting. Mode "2": messages go to the VA, which validates both
parties and forwards the untouched payload together with a signed report;
the recipient only checks the VA signature.

Handlers for the gateway, OCSP, timestamp and VA endpoints live here too.
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .authorities import (
    SubscriberDetails, ValidationReport, ValidationRequest, verify_report,
)
from .ec import (
    DomainParameters, ECPoint, KeyPair, compress_point, decompress_point, generate_keypair,
    validate_public_key,
)
from .errors import (
    AlreadyCertified, AuthenticationFailure, CapabilityError, DecodeError,
    DelegatedValidationFailed, FlowError, LpkiError, MalformedEncoding, NotFound, NotOnCurve,
    RecipientValidationFailed, RenewalNotPermitted, SenderValidationFailed,
    VaSignatureInvalid, VerificationFailure,
)
from .instrument import OpCounter, counting, operation
from .pki import (
    TRUSTED_CA_FILE, TRUSTED_VA_FILE, Certificate, CertificateReport, OcspToken,
    SmartCardStore, load_private_key, load_public_record, parse_certificate,
    serialize_certificate, store_key_material, store_trusted_key, validate_certificate,
)
from .primitives import digest, sym_decrypt, sym_encrypt
from .rand import RandomSource
from .schemes import (
    SessionKey, SigncryptedEnvelope, hmqv_derive, pop_context, pop_prove, signcrypt,
    unsigncrypt,
)
from .wire import (
    HEADER_BYTES, MsgType, Tag, WireMessage, as_u64, decode_wire, encode_wire, error_message,
    message,
)

if TYPE_CHECKING:
    from .world import World

GATEWAY = "gateway"
OCSP = "ocsp"
TSA = "ts"
VA = "va"

KIND_DATA = "data"
KIND_HMQV_INIT = "hmqv-init"
KIND_HMQV_RESP = "hmqv-resp"
KIND_SESSION = "session"


def decode_payload(payload: bytes, msg_type: MsgType = MsgType.MODE2_DATA) -> WireMessage:
    header = b"LPKI\x01" + bytes([msg_type]) + len(payload).to_bytes(4, "big")
    return decode_wire(header + payload)


def _error_of(msg: WireMessage) -> tuple[str, str]:
    return (msg.get(Tag.ERROR_CODE) or b"Error").decode(), (msg.get(Tag.ERROR_DETAIL) or b"").decode()


# --------------------------------------------------------------------------
# service endpoints

class Gateway:
    """Answers tag "1" (certificate) and tag "2" (certificate + status) queries."""

    def __init__(self, world: "World"):
        self.world = world
        self.counter = OpCounter()

    def query(self, requester_id: str, target_id: str, tag: str, now: int,
              serial: int | None = None) -> WireMessage:
        if tag not in ("1", "2"):
            return error_message("BadTag", f"unknown query tag {tag!r}")
        try:
            record = self.world.cr.lookup(target_id)
        except NotFound:
            return error_message("NotFound", target_id)
        fields = [(Tag.TARGET, target_id), (Tag.CERTIFICATE, record.certificate)]
        if tag == "2":
            if serial is None:
                serial = record.cert().serial
            token = self.world.ca.ocsp_respond(serial, now)
            fields.append((Tag.OCSP_TOKEN, token.to_bytes()))
        return message(MsgType.GATEWAY_RESPONSE, *fields)

    def handle(self, src: str, data: bytes) -> bytes:
        # work done here is the gateway's, not the caller's
        with counting(self.counter):
            return self._handle(data)

    def _handle(self, data: bytes) -> bytes:
        now = self.world.net.now
        try:
            msg = decode_wire(data)
            if msg.msg_type is MsgType.GATEWAY_QUERY:
                serial = msg.get(Tag.SERIAL)
                reply = self.query(msg.text(Tag.SENDER_ID), msg.text(Tag.TARGET),
                                   msg.text(Tag.QUERY_TAG), now,
                                   as_u64(serial) if serial is not None else None)
            elif msg.msg_type is MsgType.OCSP_REQUEST:
                reply = ocsp_reply(self.world, msg, now)
            else:
                reply = error_message("Unsupported", msg.msg_type.name)
        except DecodeError as exc:
            reply = error_message("Malformed", str(exc))
        return encode_wire(reply)


def gateway_query(world: "World", requester_id: str, target_id: str, tag: str,
                  now: int) -> WireMessage:
    """Issue a GatewayQuery over the network and return the decoded reply."""
    world.net.now = now
    q = message(MsgType.GATEWAY_QUERY, (Tag.SENDER_ID, requester_id), (Tag.TARGET, target_id),
                (Tag.QUERY_TAG, tag))
    return decode_wire(world.net.request(requester_id, GATEWAY, encode_wire(q)))


def ocsp_reply(world: "World", msg: WireMessage, now: int) -> WireMessage:
    token = world.ca.ocsp_respond(as_u64(msg.require(Tag.SERIAL)), now)
    return message(MsgType.OCSP_RESPONSE, (Tag.OCSP_TOKEN, token.to_bytes()))


def ocsp_handler(world: "World"):
    counter = OpCounter()

    def handle(src: str, data: bytes) -> bytes:
        with counting(counter):
            return _ocsp(data)

    def _ocsp(data: bytes) -> bytes:
        try:
            msg = decode_wire(data)
            if msg.msg_type is not MsgType.OCSP_REQUEST:
                return encode_wire(error_message("Unsupported", msg.msg_type.name))
            return encode_wire(ocsp_reply(world, msg, world.net.now))
        except DecodeError as exc:
            return encode_wire(error_message("Malformed", str(exc)))
    return handle


def ts_handler(world: "World"):
    counter = OpCounter()

    def handle(src: str, data: bytes) -> bytes:
        with counting(counter):
            return _ts(data)

    def _ts(data: bytes) -> bytes:
        try:
            msg = decode_wire(data)
            if msg.msg_type is not MsgType.TS_REQUEST:
                return encode_wire(error_message("Unsupported", msg.msg_type.name))
            t = msg.get(Tag.TIME)
            token = world.ts.issue(as_u64(t) if t is not None else world.net.now)
            return encode_wire(message(MsgType.TS_RESPONSE, (Tag.TIMESTAMP, token.to_bytes())))
        except DecodeError as exc:
            return encode_wire(error_message("Malformed", str(exc)))
    return handle


class VaEndpoint:
    """Network face of the validation authority."""

    def __init__(self, world: "World"):
        self.world = world
        self.counter = OpCounter()

    def handle(self, src: str, data: bytes) -> bytes | None:
        world = self.world
        now = world.net.now
        with counting(self.counter):
            try:
                msg = decode_wire(data)
            except DecodeError as exc:
                world.va.record_error(now, src, "?", f"Malformed: {exc}")
                return encode_wire(error_message("Malformed", str(exc)))
            try:
                if msg.msg_type is MsgType.MODE2_DATA:
                    return self._relay(src, msg, now)
                if msg.msg_type is MsgType.DPV_REQUEST:
                    return self._dpv(msg, now)
            except DecodeError as exc:
                world.va.record_error(now, src, "?", f"Malformed: {exc}")
                return encode_wire(error_message("Malformed", str(exc), msg_id=msg.get(Tag.MSG_ID) or b""))
            world.va.record_error(now, src, "?", f"Unsupported: {msg.msg_type.name}")
            return encode_wire(error_message("Unsupported", msg.msg_type.name))

    def _relay(self, src: str, msg: WireMessage, now: int) -> bytes | None:
        world = self.world
        sender_id, recipient_id = msg.text(Tag.SENDER_ID), msg.text(Tag.RECIPIENT_ID)
        msg_id = msg.get(Tag.MSG_ID) or b""
        payload = msg.payload()
        try:
            sender_cert = world.cr.lookup(sender_id).certificate
        except NotFound:
            sender_cert = b""
        serial = msg.get(Tag.SERIAL)
        req = ValidationRequest(
            sender_id, recipient_id, payload + sender_cert,
            sender_eph_pk=msg.get(Tag.SENDER_EPH), recipient_eph_pk=msg.get(Tag.RECIPIENT_EPH),
            recipient_serial=as_u64(serial) if serial is not None else None,
        )
        report = world.va.delegated_validate(req, now)
        if not report.ok:
            name, reason = report.first_failure()
            return encode_wire(error_message("DelegatedValidationFailed", f"{name}={reason}",
                                             msg_id=msg_id, report=report.to_bytes()))
        fwd = message(MsgType.MODE2_DATA, (Tag.FORWARDED, payload),
                      (Tag.CERTIFICATE, sender_cert), (Tag.REPORT, report.to_bytes()))
        world.net.send(VA, recipient_id, encode_wire(fwd))
        return None

    def _dpv(self, msg: WireMessage, now: int) -> bytes:
        targets = [t.decode() for t in msg.get_all(Tag.TARGET)]
        if len(targets) != 2:
            raise DecodeError("DPV request needs exactly two targets", HEADER_BYTES)
        report = self.world.va.delegated_validate(
            ValidationRequest(targets[0], targets[1], msg.payload()), now)
        if not report.ok:
            name, reason = report.first_failure()
            return encode_wire(error_message("DelegatedValidationFailed", f"{name}={reason}",
                                             report=report.to_bytes()))
        return encode_wire(message(MsgType.DPV_RESPONSE, (Tag.REPORT, report.to_bytes())))


# --------------------------------------------------------------------------
# end entities

@dataclass
class Received:
    msg_id: bytes
    sender_id: str
    ok: bool
    message: bytes | None = None
    kind: str = KIND_DATA
    cert_report: CertificateReport | None = None
    va_report: ValidationReport | None = None
    error: LpkiError | None = None


@dataclass
class DeliveryOutcome:
    msg_id: bytes
    sender_id: str
    recipient_id: str
    mode: int
    message: bytes
    sender_report: CertificateReport | None = None
    recipient_report: CertificateReport | None = None
    va_report: ValidationReport | None = None


@dataclass
class _Session:
    key: SessionKey | None = None
    pending_eph: KeyPair | None = None


class EndEntity:
    """A mobile subscriber: smart card, PIN, trust anchors and a session cache."""

    def __init__(self, world: "World", subject_id: str, store: SmartCardStore, pin: str,
                 rng: RandomSource, enrollment_mode: int, can_validate: bool = True):
        self.world = world
        self.subject_id = subject_id
        self.store = store
        self.pin = pin
        self.rng = rng
        self.enrollment_mode = enrollment_mode
        self.can_validate = can_validate
        self.ops = OpCounter()
        self.peer_cache: dict[str, Certificate] = {}
        self.sessions: dict[str, _Session] = {}
        self.received: dict[bytes, Received] = {}
        self.errors: dict[bytes, tuple[str, str, ValidationReport | None]] = {}
        self.inbox: list[tuple[str, bytes]] = []
        self._kp: KeyPair | None = None
        self._msg_counter = 0

    @property
    def params(self) -> DomainParameters:
        return self.world.params

    @property
    def name(self) -> str:
        return self.subject_id

    def certificate(self) -> Certificate:
        return load_public_record(self.store, self.params)[1]

    def keypair(self) -> KeyPair:
        if self._kp is None:
            sk = load_private_key(self.store, self.pin)
            self._kp = KeyPair(sk, self.certificate().public_key(self.params))
        return self._kp

    def forget_key(self) -> None:
        self._kp = None

    def trusted_ca(self) -> ECPoint:
        return decompress_point(self.store.read(TRUSTED_CA_FILE), self.params)

    def trusted_va(self) -> ECPoint:
        return decompress_point(self.store.read(TRUSTED_VA_FILE), self.params)

    def next_msg_id(self) -> bytes:
        self._msg_counter += 1
        return f"{self.subject_id}#{self._msg_counter}".encode()

    # ---- gateway access

    def _gateway(self, target_id: str, tag: str, serial: int | None = None) -> WireMessage:
        q = message(MsgType.GATEWAY_QUERY, (Tag.SENDER_ID, self.subject_id),
                    (Tag.TARGET, target_id), (Tag.QUERY_TAG, tag), (Tag.SERIAL, serial))
        return decode_wire(self.world.net.request(self.name, GATEWAY, encode_wire(q)))

    def fetch_and_validate(self, peer_id: str, now: int) -> tuple[Certificate | None, CertificateReport | None, str]:
        """Tag-"2" fetch plus full local validation; returns (cert, report, failure-reason)."""
        cached = self.peer_cache.get(peer_id)
        reply = self._gateway(peer_id, "2", cached.serial if cached else None)
        if reply.msg_type is MsgType.ERROR:
            return None, None, _error_of(reply)[0]
        cert = cached or parse_certificate(reply.require(Tag.CERTIFICATE))
        token = OcspToken.from_bytes(reply.require(Tag.OCSP_TOKEN))
        if cert.subject_id != peer_id:
            return cert, None, "SubjectMismatch"
        report = validate_certificate(cert, self.trusted_ca(), now, token, self.params)
        if report.ok:
            self.peer_cache[peer_id] = cert
            return cert, report, ""
        self.peer_cache.pop(peer_id, None)
        return cert, report, report.first_failure()[1]

    def fetch_certificate(self, peer_id: str) -> Certificate:
        """Tag-"1" fetch with no validation (delegated mode)."""
        cached = self.peer_cache.get(peer_id)
        if cached is not None:
            return cached
        reply = self._gateway(peer_id, "1")
        if reply.msg_type is MsgType.ERROR:
            code, detail = _error_of(reply)
            raise SenderValidationFailed("lookup", f"{code}: {detail}")
        cert = parse_certificate(reply.require(Tag.CERTIFICATE))
        self.peer_cache[peer_id] = cert
        return cert

    # ---- inbound

    def handle(self, src: str, data: bytes) -> bytes | None:
        with counting(self.ops):
            try:
                msg = decode_wire(data)
            except DecodeError:
                return None
            try:
                if msg.msg_type is MsgType.MODE1_DATA:
                    return self._on_mode1(msg)
                if msg.msg_type is MsgType.MODE2_DATA and msg.get(Tag.FORWARDED) is not None:
                    return self._on_forward(msg)
                if msg.msg_type is MsgType.ERROR:
                    code, detail = _error_of(msg)
                    rep = msg.get(Tag.REPORT)
                    self.errors[msg.get(Tag.MSG_ID) or b""] = (
                        code, detail, ValidationReport.from_bytes(rep) if rep else None)
                    return None
            except DecodeError:
                return None
            return None

    def _reject(self, msg_id: bytes, sender_id: str, err: LpkiError, **kw) -> bytes:
        self.received[msg_id] = Received(msg_id, sender_id, False, error=err, **kw)
        step = getattr(err, "step", type(err).__name__)
        detail = getattr(err, "detail", str(err))
        return encode_wire(error_message(type(err).__name__, f"{step}: {detail}", msg_id=msg_id))

    def _on_mode1(self, msg: WireMessage) -> bytes | None:
        now = self.world.net.now
        sender_id = msg.text(Tag.SENDER_ID)
        msg_id = msg.require(Tag.MSG_ID)
        kind = (msg.get(Tag.KIND) or KIND_DATA.encode()).decode()
        if kind == KIND_SESSION:
            return self._on_session_data(sender_id, msg_id, msg)
        if not self.can_validate:
            return self._reject(msg_id, sender_id,
                                RecipientValidationFailed("capability", "cannot validate locally"))
        cert, report, reason = self.fetch_and_validate(sender_id, now)
        if reason:
            step = report.first_failure()[0] if report is not None else "lookup"
            return self._reject(msg_id, sender_id, RecipientValidationFailed(step, reason),
                                cert_report=report)
        sender_pk = cert.public_key(self.params)
        return self._accept(msg_id, sender_id, sender_pk, msg, kind, cert_report=report)

    def _on_forward(self, fwd: WireMessage) -> bytes | None:
        report = ValidationReport.from_bytes(fwd.require(Tag.REPORT))
        orig_payload = fwd.require(Tag.FORWARDED)
        orig = decode_payload(orig_payload)
        sender_id = orig.text(Tag.SENDER_ID)
        msg_id = orig.require(Tag.MSG_ID)
        sender_cert_bytes = fwd.require(Tag.CERTIFICATE)
        if not verify_report(report, self.trusted_va(), self.params):
            err = VaSignatureInvalid("va_signature", "report signature does not verify")
            self.received[msg_id] = Received(msg_id, sender_id, False, va_report=report, error=err)
            return None
        binding_ok = (report.ok and report.sender_id == sender_id
                      and report.recipient_id == self.subject_id
                      and orig.text(Tag.RECIPIENT_ID) == self.subject_id
                      and report.params_hash == digest(orig_payload + sender_cert_bytes))
        if not binding_ok:
            err = VaSignatureInvalid("va_binding", "report does not cover this message")
            self.received[msg_id] = Received(msg_id, sender_id, False, va_report=report, error=err)
            return None
        cert = parse_certificate(sender_cert_bytes)
        if cert.subject_id != sender_id:
            err = VaSignatureInvalid("va_binding", "forwarded certificate subject mismatch")
            self.received[msg_id] = Received(msg_id, sender_id, False, va_report=report, error=err)
            return None
        sender_pk = cert.public_key(self.params)
        kind = (orig.get(Tag.KIND) or KIND_DATA.encode()).decode()
        # any rejection is recorded locally; nothing is sent back to the VA
        self._accept(msg_id, sender_id, sender_pk, orig, kind, va_report=report)
        return None

    def _accept(self, msg_id: bytes, sender_id: str, sender_pk: ECPoint, msg: WireMessage,
                kind: str, **reports) -> bytes | None:
        if kind in (KIND_HMQV_INIT, KIND_HMQV_RESP):
            return self._on_handshake(msg_id, sender_id, sender_pk, msg, kind, **reports)
        try:
            env = SigncryptedEnvelope.from_bytes(msg.require(Tag.ENVELOPE), self.params)
            m = unsigncrypt(env, self.keypair(), sender_pk, self.params)
        except VerificationFailure as exc:
            return self._reject(msg_id, sender_id, exc, **reports)
        self.received[msg_id] = Received(msg_id, sender_id, True, m, kind, **reports)
        self.inbox.append((sender_id, m))
        return None

    # ---- HMQV sessions

    def _on_handshake(self, msg_id: bytes, sender_id: str, sender_pk: ECPoint,
                      msg: WireMessage, kind: str, **reports) -> bytes | None:
        mode = 2 if reports.get("va_report") is not None else 1
        try:
            peer_eph = decompress_point(msg.require(Tag.SENDER_EPH), self.params)
        except (MalformedEncoding, NotOnCurve) as exc:
            return self._reject(msg_id, sender_id,
                                RecipientValidationFailed("ephemeral_key", str(exc)), **reports)
        if mode == 1:
            verdict = validate_public_key(peer_eph, self.params)
            if not verdict:
                return self._reject(msg_id, sender_id, RecipientValidationFailed(
                    "ephemeral_key", f"condition ({verdict.reason})"), **reports)
        me = self.keypair()
        sid = self.subject_id.encode()
        peer = sender_id.encode()
        try:
            if kind == KIND_HMQV_INIT:
                eph = generate_keypair(self.params, self.rng)
                key = hmqv_derive(me, eph, sender_pk, peer_eph, sid, peer, "responder", self.params)
                self.sessions[sender_id] = _Session(key)
                self.received[msg_id] = Received(msg_id, sender_id, True, None, kind, **reports)
                resp_id = self.next_msg_id()
                fields = [(Tag.SENDER_ID, self.subject_id), (Tag.RECIPIENT_ID, sender_id),
                          (Tag.MSG_ID, resp_id), (Tag.KIND, KIND_HMQV_RESP),
                          (Tag.SENDER_EPH, compress_point(eph.pk, self.params)),
                          (Tag.RECIPIENT_EPH, msg.require(Tag.SENDER_EPH))]
                if mode == 1:
                    return encode_wire(message(MsgType.MODE1_DATA, *fields))
                peer_cert = self.fetch_certificate(sender_id)
                fields.append((Tag.SERIAL, peer_cert.serial))
                self.world.net.send(self.name, VA, encode_wire(message(MsgType.MODE2_DATA, *fields)))
                return None
            session = self.sessions.get(sender_id)
            if session is None or session.pending_eph is None:
                return self._reject(msg_id, sender_id,
                                    RecipientValidationFailed("handshake", "no pending handshake"))
            key = hmqv_derive(me, session.pending_eph, sender_pk, peer_eph, sid, peer,
                              "initiator", self.params)
            self.sessions[sender_id] = _Session(key)
            self.received[msg_id] = Received(msg_id, sender_id, True, None, kind, **reports)
            return None
        except LpkiError as exc:
            return self._reject(msg_id, sender_id, exc, **reports)

    def _on_session_data(self, sender_id: str, msg_id: bytes, msg: WireMessage) -> bytes | None:
        session = self.sessions.get(sender_id)
        if session is None or session.key is None:
            return self._reject(msg_id, sender_id,
                                RecipientValidationFailed("session", "no established session"))
        aad = sender_id.encode() + b"\x00" + self.subject_id.encode()
        try:
            m = sym_decrypt(session.key.k, msg.require(Tag.SESSION_DATA), aad)
        except AuthenticationFailure as exc:
            return self._reject(msg_id, sender_id, VerificationFailure(str(exc)))
        self.received[msg_id] = Received(msg_id, sender_id, True, m, KIND_SESSION)
        self.inbox.append((sender_id, m))
        return None


# --------------------------------------------------------------------------
# outbound flows

def _collect(world: "World", sender: EndEntity, recipient_id: str, msg_id: bytes,
             mode: int, sender_report: CertificateReport | None = None) -> DeliveryOutcome:
    recipient = world.entities.get(recipient_id)
    got = recipient.received.get(msg_id) if recipient else None
    if got is not None:
        if got.ok:
            return DeliveryOutcome(msg_id, sender.subject_id, recipient_id, mode, got.message,
                                   sender_report, got.cert_report, got.va_report)
        raise got.error
    if msg_id in sender.errors:
        code, detail, report = sender.errors[msg_id]
        if code == "DelegatedValidationFailed":
            step, _, reason = detail.partition("=")
            raise DelegatedValidationFailed(step, reason, report)
        raise FlowError(code, detail)
    raise FlowError("NotDelivered", "message lost in transit")


def mode1_send(world: "World", sender: EndEntity, recipient_id: str, m: bytes,
               now: int) -> DeliveryOutcome:
    """Both ends validate locally; the envelope travels directly."""
    if not sender.can_validate:
        raise CapabilityError(f"{sender.subject_id} cannot validate; use mode 2")
    world.net.now = now
    with counting(sender.ops), operation("mode1_send"):
        cert, report, reason = sender.fetch_and_validate(recipient_id, now)
        if reason:
            step = report.first_failure()[0] if report is not None else "lookup"
            raise SenderValidationFailed(step, reason)
        env = signcrypt(m, sender.keypair(), cert.public_key(world.params), world.params,
                        sender.rng)
        msg_id = sender.next_msg_id()
        msg = message(MsgType.MODE1_DATA, (Tag.SENDER_ID, sender.subject_id),
                      (Tag.RECIPIENT_ID, recipient_id), (Tag.MSG_ID, msg_id),
                      (Tag.ENVELOPE, env.to_bytes(world.params)))
        world.net.send(sender.name, recipient_id, encode_wire(msg))
    world.net.run()
    return _collect(world, sender, recipient_id, msg_id, 1, report)


def mode2_send(world: "World", sender: EndEntity, recipient_id: str, m: bytes,
               now: int) -> DeliveryOutcome:
    """Everything is validated by the VA; the sender validates nothing."""
    world.net.now = now
    with counting(sender.ops), operation("mode2_send"):
        cert = sender.fetch_certificate(recipient_id)
        try:
            recipient_pk = cert.public_key(world.params)
        except (MalformedEncoding, NotOnCurve) as exc:
            raise SenderValidationFailed("public_key", str(exc)) from None
        env = signcrypt(m, sender.keypair(), recipient_pk, world.params, sender.rng)
        msg_id = sender.next_msg_id()
        msg = message(MsgType.MODE2_DATA, (Tag.SENDER_ID, sender.subject_id),
                      (Tag.RECIPIENT_ID, recipient_id), (Tag.MSG_ID, msg_id),
                      (Tag.SERIAL, cert.serial), (Tag.ENVELOPE, env.to_bytes(world.params)))
        world.net.send(sender.name, VA, encode_wire(msg))
    world.net.run()
    try:
        return _collect(world, sender, recipient_id, msg_id, 2)
    except DelegatedValidationFailed:
        # the certificate we encrypted under may be stale; refetch next time
        sender.peer_cache.pop(recipient_id, None)
        raise


def send(world: "World", sender: EndEntity, recipient_id: str, m: bytes, now: int,
         mode: int) -> DeliveryOutcome:
    if mode == 1:
        return mode1_send(world, sender, recipient_id, m, now)
    if mode == 2:
        return mode2_send(world, sender, recipient_id, m, now)
    raise ValueError(f"mode must be 1 or 2, not {mode!r}")


def establish_session(world: "World", initiator: EndEntity, responder_id: str, now: int,
                      mode: int) -> SessionKey:
    """Two-pass HMQV handshake; ephemeral keys are validated by the entities (mode 1) or the VA (mode 2)."""
    world.net.now = now
    with counting(initiator.ops), operation("hmqv_handshake"):
        if mode == 1:
            cert, _report, reason = initiator.fetch_and_validate(responder_id, now)
            if reason:
                raise SenderValidationFailed("certificate", reason)
        else:
            cert = initiator.fetch_certificate(responder_id)
        eph = generate_keypair(world.params, initiator.rng)
        initiator.sessions[responder_id] = _Session(pending_eph=eph)
        msg_id = initiator.next_msg_id()
        fields = [(Tag.SENDER_ID, initiator.subject_id), (Tag.RECIPIENT_ID, responder_id),
                  (Tag.MSG_ID, msg_id), (Tag.KIND, KIND_HMQV_INIT),
                  (Tag.SENDER_EPH, compress_point(eph.pk, world.params))]
        if mode == 1:
            world.net.send(initiator.name, responder_id,
                           encode_wire(message(MsgType.MODE1_DATA, *fields)))
        else:
            fields.append((Tag.SERIAL, cert.serial))
            world.net.send(initiator.name, VA, encode_wire(message(MsgType.MODE2_DATA, *fields)))
    world.net.run()
    session = initiator.sessions.get(responder_id)
    if session is None or session.key is None:
        _collect(world, initiator, responder_id, msg_id, mode)
        raise FlowError("handshake", "no response from responder")
    return session.key


def session_send(world: "World", sender: EndEntity, peer_id: str, m: bytes,
                 now: int) -> DeliveryOutcome:
    session = sender.sessions.get(peer_id)
    if session is None or session.key is None:
        raise FlowError("session", f"no session with {peer_id}")
    world.net.now = now
    with counting(sender.ops), operation("session_send"):
        aad = sender.subject_id.encode() + b"\x00" + peer_id.encode()
        msg_id = sender.next_msg_id()
        msg = message(MsgType.MODE1_DATA, (Tag.SENDER_ID, sender.subject_id),
                      (Tag.RECIPIENT_ID, peer_id), (Tag.MSG_ID, msg_id), (Tag.KIND, KIND_SESSION),
                      (Tag.SESSION_DATA, sym_encrypt(session.key.k, m, sender.rng, aad)))
        world.net.send(sender.name, peer_id, encode_wire(msg))
    world.net.run()
    return _collect(world, sender, peer_id, msg_id, 0)


# --------------------------------------------------------------------------
# enrollment and renewal

@dataclass
class EnrollmentRequest:
    details: SubscriberDetails
    mode: int
    pin: str = "0000"
    can_validate: bool = True
    keypair: KeyPair | None = field(default=None, repr=False)


def enroll(world: "World", req: EnrollmentRequest, now: int) -> EndEntity:
    """Register, obtain keys and a certificate, and load the card."""
    params = world.params
    sid = world.ra.lookup(req.details) or world.ra.register(req.details)
    if world.ca.live_serial(sid) is not None:
        raise AlreadyCertified(sid)
    rng = world.rng.fork(f"entity/{sid}/{world.ca.next_serial}")
    if req.mode == 1:
        store, _cert = world.kgs.provision(sid, req.pin, now)
    elif req.mode == 2:
        counter = OpCounter()
        with counting(counter):
            kp = req.keypair or generate_keypair(params, rng)
            proof = pop_prove(kp, pop_context(sid, compress_point(kp.pk, params)), params, rng)
        cert = world.ca.certify_mode2(sid, kp.pk, proof, now)
        store = store_key_material(SmartCardStore(), kp, cert, req.pin, params, rng)
    else:
        raise ValueError(f"enrollment mode must be 1 or 2, not {req.mode!r}")
    store_trusted_key(store, TRUSTED_CA_FILE, compress_point(world.ca.public_key, params))
    store_trusted_key(store, TRUSTED_VA_FILE, compress_point(world.va.public_key, params))
    entity = EndEntity(world, sid, store, req.pin, rng, req.mode, req.can_validate)
    world.attach(entity)
    return entity


def renew(world: "World", entity: EndEntity, now: int) -> Certificate:
    """Fresh key pair, proof of possession, revoke-and-reissue in one CA step."""
    if entity.enrollment_mode != 2:
        raise RenewalNotPermitted(f"{entity.subject_id} was enrolled with central key generation")
    params = world.params
    with counting(entity.ops), operation("renew"):
        kp = generate_keypair(params, entity.rng)
        proof = pop_prove(kp, pop_context(entity.subject_id, compress_point(kp.pk, params)),
                          params, entity.rng)
    cert = world.ca.renew(entity.subject_id, kp.pk, proof, now)
    store_key_material(entity.store, kp, cert, entity.pin, params, entity.rng)
    entity.forget_key()
    return cert


def certificate_bytes(entity: EndEntity) -> bytes:
    return serialize_certificate(entity.certificate())
