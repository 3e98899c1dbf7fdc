"""Public key schemes built on the curve layer.

* Zheng-Imai style EC signcryption (one variable-base multiplication to
  signcrypt, one two-term multiplication to unsigncrypt) plus a judge
  procedure that checks origin from a recipient disclosure.
* ECDSA-style signatures used by the authorities.
* HMQV key derivation that refuses unvalidated peer keys.
* Schnorr proof of possession and Chaum-Pedersen DLEQ proofs.
* An ECIES-style hybrid encryption, used for key escrow and as the
  sign-then-encrypt baseline in the cost comparison.
"""

from dataclasses import dataclass
from typing import Literal

from .ec import (
    DomainParameters, ECPoint, KeyPair, compress_point, decompress_point, inv_mod,
    multi_scalar_mult, point_add, scalar_mult, validate_public_key,
)
from .errors import (
    PASS, AuthenticationFailure, DegenerateEphemeral, InvalidPeerKey, MalformedEncoding,
    MalformedEnvelope, NotOnCurve, VerificationFailure, Verdict, fail,
)
from .instrument import operation, record_overhead
from .primitives import (
    HASH_BYTES, SYM_KEY_BYTES, TAG_BYTES, digest, kdf, keyed_hash, sym_decrypt,
    sym_encrypt, tags_equal,
)
from .rand import RandomSource, random_scalar

MAX_RETRIES = 8


def hash_to_scalar(data: bytes, params: DomainParameters) -> int:
    return int.from_bytes(digest(data), "big") % params.n


def _message_scalar(m: bytes, params: DomainParameters) -> int:
    # ECDSA convention: leftmost bitlen(n) bits of the digest
    e = int.from_bytes(digest(m), "big")
    excess = 8 * HASH_BYTES - params.n.bit_length()
    if excess > 0:
        e >>= excess
    return e


def _point_bytes(P: ECPoint, params: DomainParameters) -> bytes:
    return b"\x00" if P.is_infinity else compress_point(P, params)


# --------------------------------------------------------------------------
# signcryption

@dataclass(frozen=True)
class SigncryptedEnvelope:
    c: bytes
    r: bytes
    s: int

    def overhead(self, params: DomainParameters) -> int:
        return len(self.r) + params.scalar_bytes

    def to_bytes(self, params: DomainParameters) -> bytes:
        return self.r + self.s.to_bytes(params.scalar_bytes, "big") + self.c

    @classmethod
    def from_bytes(cls, b: bytes, params: DomainParameters) -> "SigncryptedEnvelope":
        head = TAG_BYTES + params.scalar_bytes
        if len(b) < head:
            raise MalformedEnvelope(f"envelope of {len(b)} bytes is shorter than r||s")
        return cls(c=b[head:], r=b[:TAG_BYTES], s=int.from_bytes(b[TAG_BYTES:head], "big"))


def _signcrypt_keys(K: ECPoint, params: DomainParameters) -> tuple[bytes, bytes]:
    okm = kdf(compress_point(K, params), b"lpki/signcrypt", 2 * SYM_KEY_BYTES)
    return okm[:SYM_KEY_BYTES], okm[SYM_KEY_BYTES:]


def signcrypt(m: bytes, sender: KeyPair, recipient_pk: ECPoint,
              params: DomainParameters, rng: RandomSource) -> SigncryptedEnvelope:
    n = params.n
    with operation("signcrypt"):
        for _ in range(MAX_RETRIES + 1):
            v = random_scalar(n, rng)
            K = scalar_mult(v, recipient_pk, params)
            if K.is_infinity:
                continue
            k1, k2 = _signcrypt_keys(K, params)
            r = keyed_hash(k2, m)
            t = (int.from_bytes(r, "big") + sender.sk) % n
            if t == 0:
                continue
            s = v * inv_mod(t, n) % n
            c = sym_encrypt(k1, m, rng)
            env = SigncryptedEnvelope(c=c, r=r, s=s)
            record_overhead(env.overhead(params))
            return env
    raise DegenerateEphemeral(f"no usable ephemeral after {MAX_RETRIES} retries")


def _check_envelope(env: SigncryptedEnvelope, params: DomainParameters) -> None:
    if len(env.r) != TAG_BYTES:
        raise MalformedEnvelope(f"r must be {TAG_BYTES} bytes")
    if not 1 <= env.s < params.n:
        raise MalformedEnvelope("s out of range [1, n-1]")


def unsigncrypt(env: SigncryptedEnvelope, recipient: KeyPair, sender_pk: ECPoint,
                params: DomainParameters) -> bytes:
    """Recover and authenticate the message, or raise VerificationFailure.

    Computes sk_B*s*(PK_A + r'G) as one two-term multiplication; that point
    equals v*PK_B on the sender's side.
    """
    n = params.n
    with operation("unsigncrypt"):
        _check_envelope(env, params)
        w = recipient.sk * env.s % n
        rp = int.from_bytes(env.r, "big") % n
        K = multi_scalar_mult(w, sender_pk, w * rp % n, params.G, params)
        if K.is_infinity:
            raise VerificationFailure("degenerate key point")
        k1, k2 = _signcrypt_keys(K, params)
        try:
            m = sym_decrypt(k1, env.c)
        except AuthenticationFailure:
            raise VerificationFailure("ciphertext authentication failed") from None
        if not tags_equal(keyed_hash(k2, m), env.r):
            raise VerificationFailure("keyed hash mismatch")
        return m


# --------------------------------------------------------------------------
# DLEQ proofs and the judge

@dataclass(frozen=True)
class DleqProof:
    """Proof that log_G1(H1) = log_G2(H2)."""

    t1: ECPoint
    t2: ECPoint
    z: int


def _dleq_challenge(points: tuple[ECPoint, ...], params: DomainParameters) -> int:
    return hash_to_scalar(b"lpki/dleq" + b"".join(_point_bytes(P, params) for P in points), params)


def dleq_prove(x: int, G1: ECPoint, H1: ECPoint, G2: ECPoint, H2: ECPoint,
               params: DomainParameters, rng: RandomSource) -> DleqProof:
    t = random_scalar(params.n, rng)
    t1, t2 = scalar_mult(t, G1, params), scalar_mult(t, G2, params)
    ch = _dleq_challenge((G1, H1, G2, H2, t1, t2), params)
    return DleqProof(t1, t2, (t + ch * x) % params.n)


def dleq_verify(proof: DleqProof, G1: ECPoint, H1: ECPoint, G2: ECPoint, H2: ECPoint,
                params: DomainParameters) -> bool:
    if not 0 <= proof.z < params.n:
        return False
    ch = _dleq_challenge((G1, H1, G2, H2, proof.t1, proof.t2), params)
    lhs1 = scalar_mult(proof.z, G1, params)
    lhs2 = scalar_mult(proof.z, G2, params)
    return (lhs1 == point_add(proof.t1, scalar_mult(ch, H1, params), params)
            and lhs2 == point_add(proof.t2, scalar_mult(ch, H2, params), params))


@dataclass(frozen=True)
class Disclosure:
    """What a recipient hands a judge: U, V = sk_B*U and a DLEQ proof."""

    U: ECPoint
    V: ECPoint
    recipient_pk: ECPoint
    proof: DleqProof


def _judge_u(env: SigncryptedEnvelope, sender_pk: ECPoint, params: DomainParameters) -> ECPoint:
    rp = int.from_bytes(env.r, "big") % params.n
    return multi_scalar_mult(env.s, sender_pk, env.s * rp % params.n, params.G, params)


def disclose(env: SigncryptedEnvelope, recipient: KeyPair, sender_pk: ECPoint,
             params: DomainParameters, rng: RandomSource) -> Disclosure:
    with operation("disclose"):
        U = _judge_u(env, sender_pk, params)
        V = scalar_mult(recipient.sk, U, params)
        proof = dleq_prove(recipient.sk, params.G, recipient.pk, U, V, params, rng)
        return Disclosure(U, V, recipient.pk, proof)


def judge_verify(m: bytes, env: SigncryptedEnvelope, disclosure: Disclosure,
                 sender_pk: ECPoint, params: DomainParameters) -> Verdict:
    """Decide whether ``sender_pk``'s owner signcrypted ``m``; no private keys needed."""
    with operation("judge_verify"):
        try:
            _check_envelope(env, params)
        except MalformedEnvelope as exc:
            return fail(f"i: {exc}")
        if _judge_u(env, sender_pk, params) != disclosure.U:
            return fail("i")
        if disclosure.V.is_infinity or not dleq_verify(
                disclosure.proof, params.G, disclosure.recipient_pk,
                disclosure.U, disclosure.V, params):
            return fail("ii")
        k1, k2 = _signcrypt_keys(disclosure.V, params)
        if not tags_equal(keyed_hash(k2, m), env.r):
            return fail("iii")
        try:
            if sym_decrypt(k1, env.c) != m:
                return fail("iii")
        except AuthenticationFailure:
            return fail("iii")
        return PASS


# --------------------------------------------------------------------------
# signatures

@dataclass(frozen=True)
class Signature:
    r_sig: int
    s_sig: int

    def to_bytes(self, params: DomainParameters) -> bytes:
        w = params.scalar_bytes
        return self.r_sig.to_bytes(w, "big") + self.s_sig.to_bytes(w, "big")

    @classmethod
    def from_bytes(cls, b: bytes, params: DomainParameters) -> "Signature":
        w = params.scalar_bytes
        if len(b) != 2 * w:
            raise MalformedEncoding(f"signature must be {2 * w} bytes")
        return cls(int.from_bytes(b[:w], "big"), int.from_bytes(b[w:], "big"))


def sign(m: bytes, signer: KeyPair, params: DomainParameters, rng: RandomSource) -> Signature:
    n = params.n
    e = _message_scalar(m, params)
    with operation("sign"):
        for _ in range(MAX_RETRIES + 1):
            k = random_scalar(n, rng)
            R = scalar_mult(k, params.G, params)
            r_sig = R.x % n
            if r_sig == 0:
                continue
            s_sig = inv_mod(k, n) * (e + signer.sk * r_sig) % n
            if s_sig == 0:
                continue
            return Signature(r_sig, s_sig)
    raise DegenerateEphemeral(f"no usable nonce after {MAX_RETRIES} retries")


def verify(m: bytes, sig: Signature, pk: ECPoint, params: DomainParameters) -> Verdict:
    n = params.n
    with operation("verify"):
        if not validate_public_key(pk, params):
            return fail("invalid public key")
        if not (1 <= sig.r_sig < n and 1 <= sig.s_sig < n):
            return fail("signature scalar out of range")
        w = inv_mod(sig.s_sig, n)
        X = multi_scalar_mult(_message_scalar(m, params) * w % n, params.G,
                              sig.r_sig * w % n, pk, params)
        if X.is_infinity or X.x % n != sig.r_sig:
            return fail("signature mismatch")
        return PASS


# --------------------------------------------------------------------------
# HMQV

@dataclass(frozen=True)
class SessionKey:
    k: bytes

    def __repr__(self) -> str:
        return "SessionKey(<redacted>)"


def _hmqv_trunc(P: ECPoint, ident: bytes, params: DomainParameters) -> int:
    half = (params.n.bit_length() + 1) // 2
    h = int.from_bytes(digest(b"lpki/hmqv-exp" + compress_point(P, params) + ident), "big")
    return h >> (8 * HASH_BYTES - half)


def _len_prefixed(b: bytes) -> bytes:
    return len(b).to_bytes(2, "big") + b


def hmqv_derive(self_static: KeyPair, self_eph: KeyPair, peer_static_pk: ECPoint,
                peer_eph_pk: ECPoint, self_id: bytes, peer_id: bytes,
                role: Literal["initiator", "responder"],
                params: DomainParameters) -> SessionKey:
    for label, pk in (("static", peer_static_pk), ("ephemeral", peer_eph_pk)):
        verdict = validate_public_key(pk, params)
        if not verdict:
            raise InvalidPeerKey(f"peer {label} key rejected: condition ({verdict.reason})")
    n = params.n
    with operation("hmqv_derive"):
        if role == "initiator":
            X, Y, id_a, id_b = self_eph.pk, peer_eph_pk, self_id, peer_id
        elif role == "responder":
            X, Y, id_a, id_b = peer_eph_pk, self_eph.pk, peer_id, self_id
        else:
            raise ValueError(f"role must be initiator or responder, not {role!r}")
        d = _hmqv_trunc(X, id_b, params)
        e = _hmqv_trunc(Y, id_a, params)
        if role == "initiator":
            exponent = (self_eph.sk + d * self_static.sk) % n
            base = point_add(peer_eph_pk, scalar_mult(e, peer_static_pk, params), params)
        else:
            exponent = (self_eph.sk + e * self_static.sk) % n
            base = point_add(peer_eph_pk, scalar_mult(d, peer_static_pk, params), params)
        sigma = scalar_mult(exponent, base, params)
        if sigma.is_infinity:
            raise InvalidPeerKey("shared point is the identity")
        secret = compress_point(sigma, params) + _len_prefixed(id_a) + _len_prefixed(id_b)
        return SessionKey(kdf(secret, b"lpki/hmqv-session", SYM_KEY_BYTES))


# --------------------------------------------------------------------------
# proof of possession

@dataclass(frozen=True)
class PossessionProof:
    commitment: ECPoint
    response: int
    context: bytes


def pop_context(subject_id: str, pk_bytes: bytes) -> bytes:
    return _len_prefixed(subject_id.encode()) + _len_prefixed(pk_bytes)


def _pop_challenge(T: ECPoint, pk: ECPoint, context: bytes, params: DomainParameters) -> int:
    return hash_to_scalar(b"lpki/pop" + _point_bytes(T, params) + _point_bytes(pk, params)
                          + context, params)


def pop_prove(kp: KeyPair, context: bytes, params: DomainParameters,
              rng: RandomSource) -> PossessionProof:
    with operation("pop_prove"):
        t = random_scalar(params.n, rng)
        T = scalar_mult(t, params.G, params)
        ch = _pop_challenge(T, kp.pk, context, params)
        return PossessionProof(T, (t + ch * kp.sk) % params.n, context)


def pop_verify(proof: PossessionProof, pk: ECPoint, context: bytes,
               params: DomainParameters) -> Verdict:
    """Schnorr check z*G == T + ch*PK.

    Does not validate ``pk``; a certifying party must do that separately.
    """
    with operation("pop_verify"):
        if proof.commitment.is_infinity or not 0 <= proof.response < params.n:
            return fail("malformed proof")
        ch = _pop_challenge(proof.commitment, pk, context, params)
        lhs = scalar_mult(proof.response, params.G, params)
        rhs = point_add(proof.commitment, scalar_mult(ch, pk, params), params)
        return PASS if lhs == rhs else fail("proof does not verify")


# --------------------------------------------------------------------------
# hybrid encryption (escrow, baseline)

def ecies_encrypt(m: bytes, recipient_pk: ECPoint, params: DomainParameters,
                  rng: RandomSource, label: bytes = b"lpki/ecies") -> bytes:
    with operation("ecies_encrypt"):
        e = random_scalar(params.n, rng)
        E = scalar_mult(e, params.G, params)
        Z = scalar_mult(e, recipient_pk, params)
        if Z.is_infinity:
            raise InvalidPeerKey("shared point is the identity")
        key = kdf(compress_point(Z, params), label)
        return compress_point(E, params) + sym_encrypt(key, m, rng)


def ecies_decrypt(blob: bytes, recipient: KeyPair, params: DomainParameters,
                  label: bytes = b"lpki/ecies") -> bytes:
    with operation("ecies_decrypt"):
        w = params.point_bytes
        try:
            E = decompress_point(blob[:w], params)
        except (MalformedEncoding, NotOnCurve) as exc:
            raise AuthenticationFailure(f"bad ephemeral point: {exc}") from None
        Z = scalar_mult(recipient.sk, E, params)
        key = kdf(compress_point(Z, params), label)
        return sym_decrypt(key, blob[w:])


def sign_then_encrypt(m: bytes, sender: KeyPair, recipient_pk: ECPoint,
                      params: DomainParameters, rng: RandomSource) -> bytes:
    """Baseline composition: ECDSA signature, then ECIES over m || sig."""
    with operation("sign_then_encrypt"):
        sig = sign(m, sender, params, rng)
        blob = ecies_encrypt(m + sig.to_bytes(params), recipient_pk, params, rng)
        record_overhead(baseline_overhead(params))
        return blob


def decrypt_then_verify(blob: bytes, recipient: KeyPair, sender_pk: ECPoint,
                        params: DomainParameters) -> bytes:
    with operation("decrypt_then_verify"):
        try:
            plain = ecies_decrypt(blob, recipient, params)
        except AuthenticationFailure:
            raise VerificationFailure("ciphertext authentication failed") from None
        w = 2 * params.scalar_bytes
        if len(plain) < w:
            raise VerificationFailure("missing signature")
        m, sig = plain[:-w], Signature.from_bytes(plain[-w:], params)
        if not verify(m, sig, sender_pk, params):
            raise VerificationFailure("signature mismatch")
        return m


def signcrypt_overhead(params: DomainParameters) -> int:
    return TAG_BYTES + params.scalar_bytes


def baseline_overhead(params: DomainParameters) -> int:
    return 2 * params.scalar_bytes + params.point_bytes

