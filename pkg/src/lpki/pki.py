"""Certificates, status tokens, repository records and the SIM-style key store.

All of these have a deterministic binary encoding (see :mod:`lpki.codec`):
fixed field order, big-endian fixed-width integers, 16-bit length-prefixed
strings and blobs. The signed region of a signed object is every byte that
precedes its signature field.
"""

import hashlib
from dataclasses import dataclass, field, replace
from enum import IntEnum

from .codec import Reader, Writer
from .ec import DomainParameters, ECPoint, KeyPair, decompress_point, validate_public_key
from .errors import (
    PASS, AuthenticationFailure, DecodeError, MalformedCertificate, MalformedEncoding,
    MissingFile, NotOnCurve, Verdict, WrongPin, fail,
)
from .primitives import HASH_BYTES, digest, sym_decrypt, sym_encrypt
from .rand import RandomSource
from .schemes import Signature, sign, verify

CERT_VERSION = 3
EXT_KEY_USAGE = 0x01
EXT_VA_ADDRESS = 0x02


@dataclass(frozen=True)
class Certificate:
    serial: int
    issuer_id: str
    subject_id: str
    not_before: int
    not_after: int
    curve_name: str
    subject_pk: bytes
    extensions: tuple[tuple[int, bytes], ...] = ()
    signature: bytes = b""
    version: int = CERT_VERSION

    def tbs_bytes(self) -> bytes:
        w = Writer()
        w.u8(self.version).u64(self.serial).str16(self.issuer_id).str16(self.subject_id)
        w.u64(self.not_before).u64(self.not_after).str16(self.curve_name)
        w.blob16(self.subject_pk).u16(len(self.extensions))
        for tag, value in self.extensions:
            w.u8(tag).blob16(value)
        return w.getvalue()

    def public_key(self, params: DomainParameters) -> ECPoint:
        return decompress_point(self.subject_pk, params)

    def extension(self, tag: int) -> bytes | None:
        for t, v in self.extensions:
            if t == tag:
                return v
        return None


def serialize_certificate(cert: Certificate) -> bytes:
    return Writer().raw(cert.tbs_bytes()).blob16(cert.signature).getvalue()


def parse_certificate(b: bytes) -> Certificate:
    r = Reader(b, MalformedCertificate)
    version = r.u8()
    if version != CERT_VERSION:
        raise r.fail(f"unsupported version {version}", 0)
    serial = r.u64()
    issuer, subject = r.str16(), r.str16()
    nb_off = r.pos
    not_before, not_after = r.u64(), r.u64()
    if not not_before < not_after:
        raise r.fail("not_before must precede not_after", nb_off)
    curve = r.str16()
    pk = r.blob16()
    exts = tuple((r.u8(), r.blob16()) for _ in range(r.u16()))
    sig = r.blob16()
    r.expect_end()
    return Certificate(serial, issuer, subject, not_before, not_after, curve, pk, exts, sig)


def sign_object(tbs_owner, signer: KeyPair, params: DomainParameters, rng: RandomSource):
    """Return a copy of a signable dataclass with its ``signature`` filled in."""
    sig = sign(tbs_owner.tbs_bytes(), signer, params, rng)
    return replace(tbs_owner, signature=sig.to_bytes(params))


def verify_object(obj, pk: ECPoint, params: DomainParameters) -> Verdict:
    try:
        sig = Signature.from_bytes(obj.signature, params)
    except MalformedEncoding as exc:
        return fail(str(exc))
    return verify(obj.tbs_bytes(), sig, pk, params)


# --------------------------------------------------------------------------
# revocation status

class CertStatus(IntEnum):
    GOOD = 0
    REVOKED = 1
    UNKNOWN = 2


@dataclass(frozen=True)
class OcspToken:
    serial: int
    status: CertStatus
    this_update: int
    next_update: int
    responder_id: str
    signature: bytes = b""

    def tbs_bytes(self) -> bytes:
        return (Writer().u64(self.serial).u8(self.status).u64(self.this_update)
                .u64(self.next_update).str16(self.responder_id).getvalue())

    def to_bytes(self) -> bytes:
        return Writer().raw(self.tbs_bytes()).blob16(self.signature).getvalue()

    @classmethod
    def from_bytes(cls, b: bytes) -> "OcspToken":
        r = Reader(b)
        serial = r.u64()
        status_off = r.pos
        raw_status = r.u8()
        try:
            status = CertStatus(raw_status)
        except ValueError:
            raise r.fail(f"unknown status {raw_status}", status_off) from None
        this_update, next_update = r.u64(), r.u64()
        if this_update > next_update:
            raise r.fail("this_update after next_update", status_off + 1)
        responder = r.str16()
        sig = r.blob16()
        r.expect_end()
        return cls(serial, status, this_update, next_update, responder, sig)


@dataclass(frozen=True)
class TimestampToken:
    time: int
    nonce: int
    issuer_id: str
    signature: bytes = b""

    def tbs_bytes(self) -> bytes:
        return Writer().u64(self.time).u64(self.nonce).str16(self.issuer_id).getvalue()

    def to_bytes(self) -> bytes:
        return Writer().raw(self.tbs_bytes()).blob16(self.signature).getvalue()

    @classmethod
    def from_bytes(cls, b: bytes) -> "TimestampToken":
        r = Reader(b)
        tok = cls(r.u64(), r.u64(), r.str16(), r.blob16())
        r.expect_end()
        return tok


# --------------------------------------------------------------------------
# repository record

@dataclass(frozen=True)
class RepositoryRecord:
    subject_id: str
    public_key: bytes
    certificate: bytes
    updated_at: int

    def to_bytes(self) -> bytes:
        return (Writer().str16(self.subject_id).blob16(self.public_key)
                .blob32(self.certificate).u64(self.updated_at).getvalue())

    @classmethod
    def from_bytes(cls, b: bytes) -> "RepositoryRecord":
        r = Reader(b)
        rec = cls(r.str16(), r.blob16(), r.blob32(), r.u64())
        r.expect_end()
        return rec

    def cert(self) -> Certificate:
        return parse_certificate(self.certificate)


# --------------------------------------------------------------------------
# certificate validation

@dataclass(frozen=True)
class CertificateReport:
    """Per-step outcome: integrity, validity period, revocation, public key."""

    integrity: Verdict
    validity: Verdict
    revocation: Verdict
    public_key: Verdict

    STEPS = ("integrity", "validity", "revocation", "public_key")

    @property
    def ok(self) -> bool:
        return all(getattr(self, s).ok for s in self.STEPS)

    def __bool__(self) -> bool:
        return self.ok

    def first_failure(self) -> tuple[str, str] | None:
        for s in self.STEPS:
            v = getattr(self, s)
            if not v.ok:
                return s, v.reason
        return None


def validate_certificate(cert: Certificate, issuer_pk: ECPoint, now: int,
                         status: OcspToken | None, params: DomainParameters,
                         responder_pk: ECPoint | None = None) -> CertificateReport:
    """Check signature, validity window, revocation status and subject key.

    Every step is evaluated so the report is complete. The status token must
    be signed by ``responder_pk`` (defaults to the issuer key).
    """
    integrity = verify_object(cert, issuer_pk, params)
    if not integrity:
        integrity = fail(f"BadSignature: {integrity.reason}")

    if now < cert.not_before:
        validity = fail("NotYetValid")
    elif now > cert.not_after:
        validity = fail("Expired")
    else:
        validity = PASS

    if status is None:
        revocation = fail("NoStatus")
    elif status.serial != cert.serial:
        revocation = fail("SerialMismatch")
    elif not verify_object(status, responder_pk or issuer_pk, params):
        revocation = fail("BadStatusSignature")
    elif status.status is CertStatus.REVOKED:
        revocation = fail("Revoked")
    elif status.status is CertStatus.UNKNOWN:
        revocation = fail("Unknown")
    elif not status.this_update <= now <= status.next_update:
        revocation = fail("StaleStatus")
    else:
        revocation = PASS

    if cert.curve_name != params.name:
        public_key = fail("CurveMismatch")
    else:
        try:
            verdict = validate_public_key(cert.public_key(params), params)
            public_key = verdict if verdict else fail(f"InvalidKey({verdict.reason})")
        except (MalformedEncoding, NotOnCurve) as exc:
            public_key = fail(f"InvalidKey(c): {exc}")
    return CertificateReport(integrity, validity, revocation, public_key)


# --------------------------------------------------------------------------
# smart card

KEY_INFO_FILE = 0x4F50
PUBLIC_FILE = 0x4F51
TRUSTED_CA_FILE = 0x4F52
TRUSTED_VA_FILE = 0x4F53
SALT_BYTES = 16
PIN_KDF_ITERATIONS = 10_000


@dataclass
class SmartCardStore:
    """Elementary files keyed by 16-bit id; a desk model of a SIM."""

    files: dict[int, bytes] = field(default_factory=dict)

    def write(self, file_id: int, data: bytes) -> None:
        if not 0 <= file_id <= 0xFFFF:
            raise ValueError("file id must fit in 16 bits")
        self.files[file_id] = bytes(data)

    def read(self, file_id: int) -> bytes:
        try:
            return self.files[file_id]
        except KeyError:
            raise MissingFile(f"file {file_id:04X} not present") from None

    def delete(self, file_id: int) -> None:
        self.files.pop(file_id, None)

    def to_bytes(self) -> bytes:
        w = Writer().u16(len(self.files))
        for fid in sorted(self.files):
            w.u16(fid).blob32(self.files[fid])
        return w.getvalue()

    @classmethod
    def from_bytes(cls, b: bytes) -> "SmartCardStore":
        r = Reader(b)
        files = {}
        for _ in range(r.u16()):
            fid = r.u16()
            files[fid] = r.blob32()
        r.expect_end()
        return cls(files)


def _pin_key(salt: bytes, pin: str) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", pin.encode("utf-8"), salt, PIN_KDF_ITERATIONS)


def store_key_material(store: SmartCardStore, kp: KeyPair, cert: Certificate, pin: str,
                       params: DomainParameters, rng: RandomSource) -> SmartCardStore:
    """Write the PIN-protected key record (4F50) and public record (4F51)."""
    if not pin:
        raise ValueError("PIN must be non-empty")
    sk_bytes = kp.sk.to_bytes(params.scalar_bytes, "big")
    salt = rng.read(SALT_BYTES)
    sealed = sym_encrypt(_pin_key(salt, pin), sk_bytes, rng)
    store.write(KEY_INFO_FILE, salt + sealed + digest(sk_bytes))
    store.write(PUBLIC_FILE, cert.subject_pk + serialize_certificate(cert))
    return store


def load_private_key(store: SmartCardStore, pin: str) -> int:
    blob = store.read(KEY_INFO_FILE)
    if len(blob) < SALT_BYTES + HASH_BYTES:
        raise WrongPin("key record too short")
    salt, sealed, check = blob[:SALT_BYTES], blob[SALT_BYTES:-HASH_BYTES], blob[-HASH_BYTES:]
    try:
        sk_bytes = sym_decrypt(_pin_key(salt, pin), sealed)
    except AuthenticationFailure:
        raise WrongPin("PIN does not open the key record") from None
    if digest(sk_bytes) != check:
        raise WrongPin("private key hash mismatch")
    return int.from_bytes(sk_bytes, "big")


def load_public_record(store: SmartCardStore, params: DomainParameters) -> tuple[bytes, Certificate]:
    blob = store.read(PUBLIC_FILE)
    w = params.point_bytes
    try:
        return blob[:w], parse_certificate(blob[w:])
    except DecodeError as exc:
        raise MissingFile(f"public record unreadable: {exc}") from None


def store_trusted_key(store: SmartCardStore, file_id: int, pk_bytes: bytes) -> None:
    if file_id >> 8 != 0x4F:
        raise ValueError("trusted keys live in 4FXX files")
    store.write(file_id, pk_bytes)
