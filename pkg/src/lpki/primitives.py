"""Symmetric primitives behind narrow contracts.

Hash is SHA-256, the keyed hash is HMAC-SHA-256, symmetric encryption is
AES-256-GCM with a random 96-bit nonce prefixed to the ciphertext. Callers
only use the functions here, so the choices can be swapped in one place.
"""

import hashlib
import hmac

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import AuthenticationFailure
from .rand import RandomSource

HASH_BYTES = 32
TAG_BYTES = 32
SYM_KEY_BYTES = 32
NONCE_BYTES = 12
AEAD_TAG_BYTES = 16
SYM_OVERHEAD = NONCE_BYTES + AEAD_TAG_BYTES


def digest(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def keyed_hash(key: bytes, data: bytes) -> bytes:
    return hmac.new(key, data, hashlib.sha256).digest()


def tags_equal(a: bytes, b: bytes) -> bool:
    return hmac.compare_digest(a, b)


def kdf(secret: bytes, label: bytes, length: int = SYM_KEY_BYTES) -> bytes:
    """Counter-mode hash KDF with a domain-separation label."""
    out = b""
    counter = 1
    while len(out) < length:
        out += digest(counter.to_bytes(4, "big") + len(label).to_bytes(2, "big") + label + secret)
        counter += 1
    return out[:length]


def sym_encrypt(key: bytes, plaintext: bytes, rng: RandomSource, aad: bytes = b"") -> bytes:
    nonce = rng.read(NONCE_BYTES)
    return nonce + AESGCM(key).encrypt(nonce, plaintext, aad or None)


def sym_decrypt(key: bytes, ciphertext: bytes, aad: bytes = b"") -> bytes:
    if len(ciphertext) < SYM_OVERHEAD:
        raise AuthenticationFailure("ciphertext shorter than nonce + tag")
    nonce, body = ciphertext[:NONCE_BYTES], ciphertext[NONCE_BYTES:]
    try:
        return AESGCM(key).decrypt(nonce, body, aad or None)
    except InvalidTag:
        raise AuthenticationFailure("AEAD tag mismatch") from None
