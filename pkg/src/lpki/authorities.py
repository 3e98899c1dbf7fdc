"""The PKI actors: RA, CR, CA (with its OCSP responder), KGS, VA and TSA.

Each authority is a small state machine. Public methods are serialized on a
per-instance lock, so concurrent callers (the socket transport) see one
request at a time. Time is always passed in explicitly, except that the
timestamp server may read the wall clock when no time is given.
"""

import base64
import functools
import threading
import time
from dataclasses import dataclass, field, replace

from .codec import Reader, Writer
from .ec import (
    DomainParameters, ECPoint, KeyPair, compress_point, decompress_point,
    generate_keypair, keypair_from_secret, validate_public_key,
)
from .errors import (
    AlreadyCertified, DecodeError, DuplicateRegistration, InvalidPublicKey,
    MalformedEncoding, MalformedSnapshot, NotFound, NotOnCurve, NotRegistered,
    ProofRejected, UnknownSerial, Verdict, fail,
)
from .instrument import operation
from .pki import (
    EXT_KEY_USAGE, EXT_VA_ADDRESS, Certificate, CertStatus, OcspToken, RepositoryRecord,
    SmartCardStore, TimestampToken, parse_certificate, serialize_certificate, sign_object,
    store_key_material, validate_certificate, verify_object,
)
from .primitives import HASH_BYTES, digest
from .rand import RandomSource
from .schemes import PossessionProof, ecies_decrypt, ecies_encrypt, pop_context, pop_verify

SNAPSHOT_MAGIC = b"LPKS"
SNAPSHOT_VERSION = 1
KEY_USAGE_SIGNCRYPT = b"digitalSignature,keyEncipherment,keyAgreement"
ESCROW_LABEL = b"lpki/escrow"


def serialized(method):
    @functools.wraps(method)
    def wrapper(self, *args, **kwargs):
        with self._lock:
            return method(self, *args, **kwargs)
    return wrapper


def _snapshot_writer(kind: str) -> Writer:
    return Writer().raw(SNAPSHOT_MAGIC).u8(SNAPSHOT_VERSION).str16(kind)


def _check_curve(r: Reader, params: DomainParameters) -> None:
    off = r.pos
    curve = r.str16()
    if curve != params.name:
        raise r.fail(f"snapshot uses curve {curve!r}, world uses {params.name!r}", off)


def _snapshot_reader(blob: bytes, kind: str) -> Reader:
    r = Reader(blob, MalformedSnapshot)
    if r.raw(4) != SNAPSHOT_MAGIC:
        raise r.fail("bad snapshot magic", 0)
    version = r.u8()
    if version != SNAPSHOT_VERSION:
        raise r.fail(f"unsupported snapshot version {version}", 4)
    found = r.str16()
    if found != kind:
        raise r.fail(f"snapshot is a {found!r}, expected {kind!r}", 5)
    return r


def _write_key(w: Writer, kp: KeyPair, params: DomainParameters) -> None:
    w.blob16(kp.sk.to_bytes(params.scalar_bytes, "big"))


def _read_key(r: Reader, params: DomainParameters) -> KeyPair:
    return keypair_from_secret(int.from_bytes(r.blob16(), "big"), params)


# --------------------------------------------------------------------------
# Registration authority

@dataclass(frozen=True)
class SubscriberDetails:
    msisdn: str
    name: str = ""
    country: str = "IR"
    org: str = "LPKI"


def subject_id_for(details: SubscriberDetails) -> str:
    """Distinguished name, most specific component first."""
    if not details.msisdn.strip():
        raise ValueError("subscriber details need a unique identifier (msisdn)")
    for part in (details.msisdn, details.country, details.org):
        if any(ch in part for ch in ",="):
            raise ValueError(f"illegal character in name component {part!r}")
    return f"uid={details.msisdn},o={details.org},c={details.country}"


class RegistrationAuthority:
    def __init__(self) -> None:
        self._lock = threading.RLock()
        self.subscribers: dict[str, SubscriberDetails] = {}

    @serialized
    def register(self, details: SubscriberDetails) -> str:
        sid = subject_id_for(details)
        if sid in self.subscribers:
            raise DuplicateRegistration(sid)
        self.subscribers[sid] = details
        return sid

    def lookup(self, details: SubscriberDetails) -> str | None:
        sid = subject_id_for(details)
        return sid if sid in self.subscribers else None

    def is_registered(self, subject_id: str) -> bool:
        return subject_id in self.subscribers

    def snapshot(self) -> bytes:
        w = _snapshot_writer("ra").u32(len(self.subscribers))
        for d in self.subscribers.values():
            w.str16(d.msisdn).str16(d.name).str16(d.country).str16(d.org)
        return w.getvalue()

    @classmethod
    def restore(cls, blob: bytes) -> "RegistrationAuthority":
        r = _snapshot_reader(blob, "ra")
        ra = cls()
        for _ in range(r.u32()):
            d = SubscriberDetails(r.str16(), r.str16(), r.str16(), r.str16())
            ra.subscribers[subject_id_for(d)] = d
        r.expect_end()
        return ra


# --------------------------------------------------------------------------
# Certificate repository

def split_dn(dn: str) -> list[tuple[str, str]]:
    rdns = []
    for part in dn.split(","):
        attr, sep, value = part.strip().partition("=")
        if not sep or not attr or not value:
            raise ValueError(f"malformed distinguished name {dn!r}")
        rdns.append((attr.lower(), value))
    return rdns


@dataclass
class _DirNode:
    children: dict[tuple[str, str], "_DirNode"] = field(default_factory=dict)
    record: RepositoryRecord | None = None


class CertificateRepository:
    """LDAP-like directory: records hang off a tree of RDNs (root = last RDN)."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._root = _DirNode()

    def _node(self, dn: str, create: bool) -> _DirNode | None:
        node = self._root
        for rdn in reversed(split_dn(dn)):
            nxt = node.children.get(rdn)
            if nxt is None:
                if not create:
                    return None
                nxt = node.children[rdn] = _DirNode()
            node = nxt
        return node

    @serialized
    def store(self, record: RepositoryRecord) -> None:
        if record.cert().subject_id != record.subject_id:
            raise ValueError("certificate subject does not match record subject")
        self._node(record.subject_id, create=True).record = record

    @serialized
    def lookup(self, subject_id: str) -> RepositoryRecord:
        try:
            node = self._node(subject_id, create=False)
        except ValueError:
            node = None
        if node is None or node.record is None:
            raise NotFound(subject_id)
        return node.record

    def search(self, base_dn: str = "") -> list[RepositoryRecord]:
        """All records at or below ``base_dn`` in deterministic order."""
        node = self._node(base_dn, create=False) if base_dn else self._root
        out: list[RepositoryRecord] = []

        def walk(n: _DirNode) -> None:
            if n.record is not None:
                out.append(n.record)
            for key in sorted(n.children):
                walk(n.children[key])

        if node is not None:
            walk(node)
        return out

    def __len__(self) -> int:
        return len(self.search())

    def export_lines(self) -> str:
        """One ``<dn>\\t<base64 certificate>`` line per record."""
        return "".join(f"{rec.subject_id}\t{base64.b64encode(rec.certificate).decode()}\n"
                       for rec in self.search())

    def import_lines(self, text: str, updated_at: int) -> int:
        count = 0
        for line in text.splitlines():
            if not line.strip():
                continue
            dn, _, b64 = line.partition("\t")
            cert_bytes = base64.b64decode(b64, validate=True)
            cert = parse_certificate(cert_bytes)
            if cert.subject_id != dn:
                raise ValueError(f"record key {dn!r} does not match certificate subject")
            self.store(RepositoryRecord(dn, cert.subject_pk, cert_bytes, updated_at))
            count += 1
        return count

    def snapshot(self) -> bytes:
        records = self.search()
        w = _snapshot_writer("cr").u32(len(records))
        for rec in records:
            w.blob32(rec.to_bytes())
        return w.getvalue()

    @classmethod
    def restore(cls, blob: bytes) -> "CertificateRepository":
        r = _snapshot_reader(blob, "cr")
        cr = cls()
        for _ in range(r.u32()):
            cr.store(RepositoryRecord.from_bytes(r.blob32()))
        r.expect_end()
        return cr


# --------------------------------------------------------------------------
# Certification authority + OCSP responder

@dataclass
class IssuedEntry:
    cert: Certificate
    revoked_at: int | None = None

    @property
    def revoked(self) -> bool:
        return self.revoked_at is not None


@dataclass
class CaPolicy:
    cert_lifetime: int = 365 * 24 * 3600
    ocsp_window: int = 300
    escrow: bool = False
    validate_keys: bool = True
    va_address: str = "va"


class CertificationAuthority:
    """Issues and revokes certificates and answers status queries.

    ``policy.validate_keys`` exists so tests and the attack demo can model
    a CA that only checks proof of possession; keep it on otherwise.
    """

    def __init__(self, ca_id: str, keypair: KeyPair, params: DomainParameters,
                 ra: RegistrationAuthority, cr: CertificateRepository, rng: RandomSource,
                 policy: CaPolicy | None = None, recovery_pk: ECPoint | None = None):
        self._lock = threading.RLock()
        self.ca_id = ca_id
        self.keypair = keypair
        self.params = params
        self.ra = ra
        self.cr = cr
        self.rng = rng
        self.policy = policy or CaPolicy()
        self.recovery_pk = recovery_pk
        self.issued: dict[int, IssuedEntry] = {}
        self.live: dict[str, int] = {}
        self.next_serial = 1
        self.escrow: dict[str, bytes] = {}

    @property
    def public_key(self) -> ECPoint:
        return self.keypair.pk

    def _require_enrollable(self, subject_id: str) -> None:
        if not self.ra.is_registered(subject_id):
            raise NotRegistered(subject_id)
        if subject_id in self.live:
            raise AlreadyCertified(subject_id)

    def _check_key(self, pk: ECPoint) -> None:
        if not self.policy.validate_keys:
            return
        verdict = validate_public_key(pk, self.params)
        if not verdict:
            raise InvalidPublicKey(verdict.reason)

    def _issue(self, subject_id: str, pk: ECPoint, now: int) -> Certificate:
        with operation("ca_issue"):
            serial = self.next_serial
            self.next_serial += 1
            tbs = Certificate(
                serial=serial, issuer_id=self.ca_id, subject_id=subject_id,
                not_before=now, not_after=now + self.policy.cert_lifetime,
                curve_name=self.params.name, subject_pk=compress_point(pk, self.params),
                extensions=((EXT_KEY_USAGE, KEY_USAGE_SIGNCRYPT),
                            (EXT_VA_ADDRESS, self.policy.va_address.encode())),
            )
            cert = sign_object(tbs, self.keypair, self.params, self.rng)
            self.issued[serial] = IssuedEntry(cert)
            self.live[subject_id] = serial
            cert_bytes = serialize_certificate(cert)
            self.cr.store(RepositoryRecord(subject_id, cert.subject_pk, cert_bytes, now))
            return cert

    @serialized
    def certify_generated(self, subject_id: str, kp: KeyPair, now: int) -> Certificate:
        """Certify a key pair produced by the KGS; optionally escrow the secret."""
        self._require_enrollable(subject_id)
        self._check_key(kp.pk)
        cert = self._issue(subject_id, kp.pk, now)
        if self.policy.escrow:
            if self.recovery_pk is None:
                raise ValueError("escrow policy enabled without a recovery key")
            sk_bytes = kp.sk.to_bytes(self.params.scalar_bytes, "big")
            self.escrow[subject_id] = ecies_encrypt(sk_bytes, self.recovery_pk, self.params,
                                                    self.rng, ESCROW_LABEL)
        return cert

    def _check_possession(self, subject_id: str, pk: ECPoint, proof: PossessionProof) -> None:
        context = pop_context(subject_id, compress_point(pk, self.params))
        verdict = pop_verify(proof, pk, context, self.params)
        if not verdict:
            raise ProofRejected(verdict.reason)

    @serialized
    def certify_mode2(self, subject_id: str, claimed_pk: ECPoint, proof: PossessionProof,
                      now: int) -> Certificate:
        self._require_enrollable(subject_id)
        self._check_key(claimed_pk)
        self._check_possession(subject_id, claimed_pk, proof)
        return self._issue(subject_id, claimed_pk, now)

    @serialized
    def renew(self, subject_id: str, new_pk: ECPoint, proof: PossessionProof,
              now: int) -> Certificate:
        """Revoke the live certificate and issue one for ``new_pk`` in one step."""
        old_serial = self.live.get(subject_id)
        if old_serial is None:
            raise NotFound(f"no live certificate for {subject_id}")
        self._check_key(new_pk)
        self._check_possession(subject_id, new_pk, proof)
        self._mark_revoked(old_serial, now)
        del self.live[subject_id]
        return self._issue(subject_id, new_pk, now)

    def _mark_revoked(self, serial: int, now: int) -> None:
        entry = self.issued[serial]
        if entry.revoked:
            return
        entry.revoked_at = now

    @serialized
    def revoke(self, serial: int, now: int) -> None:
        """Idempotent; the first revocation time is kept."""
        entry = self.issued.get(serial)
        if entry is None:
            raise UnknownSerial(serial)
        if entry.revoked:
            return
        self._mark_revoked(serial, now)
        subject = entry.cert.subject_id
        if self.live.get(subject) == serial:
            del self.live[subject]
        try:
            rec = self.cr.lookup(subject)
        except NotFound:
            return
        if rec.cert().serial == serial:
            self.cr.store(replace(rec, updated_at=now))

    @serialized
    def ocsp_respond(self, serial: int, now: int) -> OcspToken:
        with operation("ocsp_respond"):
            entry = self.issued.get(serial)
            if entry is None:
                status = CertStatus.UNKNOWN
            elif entry.revoked:
                status = CertStatus.REVOKED
            else:
                status = CertStatus.GOOD
            tok = OcspToken(serial, status, now, now + self.policy.ocsp_window, self.ca_id)
            return sign_object(tok, self.keypair, self.params, self.rng)

    def recover_escrow(self, subject_id: str, recovery: KeyPair) -> int:
        blob = self.escrow[subject_id]
        return int.from_bytes(ecies_decrypt(blob, recovery, self.params, ESCROW_LABEL), "big")

    def live_serial(self, subject_id: str) -> int | None:
        return self.live.get(subject_id)

    def snapshot(self) -> bytes:
        w = _snapshot_writer("ca").str16(self.ca_id).str16(self.params.name)
        _write_key(w, self.keypair, self.params)
        p = self.policy
        w.u64(p.cert_lifetime).u32(p.ocsp_window).u8(p.escrow).u8(p.validate_keys)
        w.str16(p.va_address)
        w.blob16(compress_point(self.recovery_pk, self.params) if self.recovery_pk else b"")
        w.u64(self.next_serial).u32(len(self.issued))
        for serial in sorted(self.issued):
            entry = self.issued[serial]
            w.blob32(serialize_certificate(entry.cert))
            w.u8(entry.revoked).u64(entry.revoked_at or 0)
        w.u32(len(self.escrow))
        for sid in sorted(self.escrow):
            w.str16(sid).blob32(self.escrow[sid])
        return w.getvalue()

    @classmethod
    def restore(cls, blob: bytes, params: DomainParameters, ra: RegistrationAuthority,
                cr: CertificateRepository, rng: RandomSource) -> "CertificationAuthority":
        r = _snapshot_reader(blob, "ca")
        ca_id = r.str16()
        _check_curve(r, params)
        kp = _read_key(r, params)
        policy = CaPolicy(r.u64(), r.u32(), bool(r.u8()), bool(r.u8()), r.str16())
        rec_pk = r.blob16()
        ca = cls(ca_id, kp, params, ra, cr, rng, policy,
                 decompress_point(rec_pk, params) if rec_pk else None)
        ca.next_serial = r.u64()
        for _ in range(r.u32()):
            cert = parse_certificate(r.blob32())
            revoked, at = r.u8(), r.u64()
            ca.issued[cert.serial] = IssuedEntry(cert, at if revoked else None)
            if not revoked:
                ca.live[cert.subject_id] = cert.serial
        for _ in range(r.u32()):
            sid = r.str16()
            ca.escrow[sid] = r.blob32()
        r.expect_end()
        return ca


# --------------------------------------------------------------------------
# Key generating server

class KeyGenerationServer:
    def __init__(self, ca: CertificationAuthority, rng: RandomSource):
        self._lock = threading.RLock()
        self.ca = ca
        self.rng = rng

    @serialized
    def provision(self, subject_id: str, pin: str, now: int) -> tuple[SmartCardStore, Certificate]:
        """Generate a key pair centrally, have it certified, and load a card."""
        params = self.ca.params
        if not self.ca.ra.is_registered(subject_id):
            raise NotRegistered(subject_id)
        if self.ca.live_serial(subject_id) is not None:
            raise AlreadyCertified(subject_id)
        kp = generate_keypair(params, self.rng)
        cert = self.ca.certify_generated(subject_id, kp, now)
        store = store_key_material(SmartCardStore(), kp, cert, pin, params, self.rng)
        return store, cert


# --------------------------------------------------------------------------
# Validation authority

@dataclass(frozen=True)
class ValidationRequest:
    sender_id: str
    recipient_id: str
    transmitted: bytes
    sender_eph_pk: bytes | None = None
    recipient_eph_pk: bytes | None = None
    recipient_serial: int | None = None


SKIPPED = Verdict(True, "skipped")
CHECK_NAMES = tuple(
    f"{party}.{check}"
    for party in ("sender", "recipient")
    for check in ("cert.integrity", "cert.validity", "cert.revocation",
                  "static_key", "ephemeral_key")
)


@dataclass(frozen=True)
class ValidationReport:
    sender_id: str
    recipient_id: str
    checks: tuple[tuple[str, Verdict], ...]
    params_hash: bytes
    signature: bytes = b""

    @property
    def ok(self) -> bool:
        return all(v.ok for _, v in self.checks)

    def check(self, name: str) -> Verdict:
        return dict(self.checks)[name]

    def first_failure(self) -> tuple[str, str] | None:
        for name, v in self.checks:
            if not v.ok:
                return name, v.reason
        return None

    def tbs_bytes(self) -> bytes:
        w = Writer().str16(self.sender_id).str16(self.recipient_id).raw(self.params_hash)
        w.u8(len(self.checks))
        for name, v in self.checks:
            w.str16(name).u8(v.ok).str16(v.reason)
        return w.getvalue()

    def to_bytes(self) -> bytes:
        return Writer().raw(self.tbs_bytes()).blob16(self.signature).getvalue()

    @classmethod
    def from_bytes(cls, b: bytes) -> "ValidationReport":
        r = Reader(b)
        sender, recipient = r.str16(), r.str16()
        params_hash = r.raw(HASH_BYTES)
        checks = []
        for _ in range(r.u8()):
            name = r.str16()
            ok_off = r.pos
            ok = r.u8()
            if ok > 1:
                raise r.fail("verdict flag must be 0 or 1", ok_off)
            checks.append((name, Verdict(bool(ok), r.str16())))
        sig = r.blob16()
        r.expect_end()
        return cls(sender, recipient, tuple(checks), params_hash, sig)


@dataclass(frozen=True)
class LogRecord:
    timestamp: int
    sender_id: str
    recipient_id: str
    verdict: str
    detail: str

    def line(self) -> str:
        return (f"{self.timestamp} | {self.sender_id} | {self.recipient_id} | "
                f"{self.verdict} | {self.detail}")


class ValidationAuthority:
    """Runs every certificate and key check on behalf of end entities."""

    def __init__(self, va_id: str, keypair: KeyPair, params: DomainParameters,
                 ca_pk: ECPoint, cr: CertificateRepository, ocsp: CertificationAuthority,
                 rng: RandomSource, archive: bool = False):
        self._lock = threading.RLock()
        self.va_id = va_id
        self.keypair = keypair
        self.params = params
        self.ca_pk = ca_pk
        self.cr = cr
        self.ocsp = ocsp
        self.rng = rng
        self.archive_enabled = archive
        self.log: list[LogRecord] = []
        self.archive: list[bytes] = []

    @property
    def public_key(self) -> ECPoint:
        return self.keypair.pk

    def _party_checks(self, subject_id: str, eph: bytes | None, now: int,
                      expected_serial: int | None = None) -> list[Verdict]:
        try:
            cert = self.cr.lookup(subject_id).cert()
        except (NotFound, DecodeError):
            missing = fail("NotFound")
            cert_checks = [missing, missing, missing, missing]
        else:
            status = self.ocsp.ocsp_respond(cert.serial, now)
            rep = validate_certificate(cert, self.ca_pk, now, status, self.params)
            cert_checks = [rep.integrity, rep.validity, rep.revocation, rep.public_key]
            if expected_serial is not None and expected_serial != cert.serial:
                # the sender encrypted under a certificate that is no longer current
                stale = self.ocsp.ocsp_respond(expected_serial, now)
                cert_checks[2] = fail("Revoked" if stale.status is CertStatus.REVOKED
                                      else "SerialMismatch")
        if eph is None:
            eph_check = SKIPPED
        else:
            try:
                eph_pk = decompress_point(eph, self.params)
            except (MalformedEncoding, NotOnCurve):
                eph_check = fail("c")
            else:
                eph_check = validate_public_key(eph_pk, self.params)
        return cert_checks + [eph_check]

    def params_hash(self, req: ValidationRequest) -> bytes:
        return digest(req.transmitted)

    @serialized
    def delegated_validate(self, req: ValidationRequest, now: int) -> ValidationReport:
        with operation("va_validate"):
            verdicts = (self._party_checks(req.sender_id, req.sender_eph_pk, now)
                        + self._party_checks(req.recipient_id, req.recipient_eph_pk, now,
                                             req.recipient_serial))
            report = ValidationReport(req.sender_id, req.recipient_id,
                                      tuple(zip(CHECK_NAMES, verdicts)), self.params_hash(req))
            if report.ok:
                report = sign_object(report, self.keypair, self.params, self.rng)
                self.log.append(LogRecord(now, req.sender_id, req.recipient_id, "pass", "forwarded"))
            else:
                name, reason = report.first_failure()
                self.log.append(LogRecord(now, req.sender_id, req.recipient_id, "fail",
                                          f"{name}={reason}"))
            if self.archive_enabled:
                self.archive.append(req.transmitted)
            return report

    @serialized
    def record_error(self, now: int, sender_id: str, recipient_id: str, detail: str) -> None:
        """Log a request that could not even be parsed into a validation request."""
        self.log.append(LogRecord(now, sender_id, recipient_id, "error", detail))

    def log_text(self) -> str:
        return "".join(rec.line() + "\n" for rec in self.log)

    def snapshot(self) -> bytes:
        w = _snapshot_writer("va").str16(self.va_id).str16(self.params.name)
        _write_key(w, self.keypair, self.params)
        w.blob16(compress_point(self.ca_pk, self.params)).u8(self.archive_enabled)
        w.u32(len(self.log))
        for rec in self.log:
            w.u64(rec.timestamp).str16(rec.sender_id).str16(rec.recipient_id)
            w.str16(rec.verdict).str16(rec.detail)
        return w.getvalue()

    @classmethod
    def restore(cls, blob: bytes, params: DomainParameters, cr: CertificateRepository,
                ocsp: CertificationAuthority, rng: RandomSource) -> "ValidationAuthority":
        r = _snapshot_reader(blob, "va")
        va_id = r.str16()
        _check_curve(r, params)
        kp = _read_key(r, params)
        ca_pk = decompress_point(r.blob16(), params)
        va = cls(va_id, kp, params, ca_pk, cr, ocsp, rng, bool(r.u8()))
        for _ in range(r.u32()):
            va.log.append(LogRecord(r.u64(), r.str16(), r.str16(), r.str16(), r.str16()))
        r.expect_end()
        return va


def verify_report(report: ValidationReport, va_pk: ECPoint, params: DomainParameters) -> Verdict:
    if not report.signature:
        return fail("unsigned report")
    return verify_object(report, va_pk, params)


# --------------------------------------------------------------------------
# Timestamp server

class TimestampServer:
    def __init__(self, ts_id: str, keypair: KeyPair, params: DomainParameters,
                 rng: RandomSource):
        self._lock = threading.RLock()
        self.ts_id = ts_id
        self.keypair = keypair
        self.params = params
        self.rng = rng
        self.next_nonce = 1

    @property
    def public_key(self) -> ECPoint:
        return self.keypair.pk

    @serialized
    def issue(self, now: int | None = None) -> TimestampToken:
        if now is None:
            now = int(time.time())
        nonce = self.next_nonce
        self.next_nonce += 1
        return sign_object(TimestampToken(now, nonce, self.ts_id), self.keypair,
                           self.params, self.rng)

    def snapshot(self) -> bytes:
        w = _snapshot_writer("ts").str16(self.ts_id).str16(self.params.name)
        _write_key(w, self.keypair, self.params)
        return w.u64(self.next_nonce).getvalue()

    @classmethod
    def restore(cls, blob: bytes, params: DomainParameters,
                rng: RandomSource) -> "TimestampServer":
        r = _snapshot_reader(blob, "ts")
        ts_id = r.str16()
        _check_curve(r, params)
        ts = cls(ts_id, _read_key(r, params), params, rng)
        ts.next_nonce = r.u64()
        r.expect_end()
        return ts


def verify_timestamp(token: TimestampToken, ts_pk: ECPoint, params: DomainParameters) -> Verdict:
    return verify_object(token, ts_pk, params)


__all__ = [
    "SubscriberDetails", "RegistrationAuthority", "CertificateRepository",
    "CertificationAuthority", "CaPolicy", "KeyGenerationServer", "ValidationAuthority",
    "ValidationRequest", "ValidationReport", "LogRecord", "TimestampServer",
    "verify_report", "verify_timestamp", "subject_id_for", "split_dn",
]
