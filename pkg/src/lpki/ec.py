"""Short Weierstrass curve arithmetic over prime fields.

Points are plain ``ECPoint`` pairs; constructing one says nothing about
curve membership. That is deliberate: off-curve points have to be
representable so public key validation (and the attacks it stops) can be
exercised. The group law (affine for ``point_add``, Jacobian inside
scalar multiplication) only ever involves the ``a`` coefficient, so feeding
it a point from a different curve silently computes on that other curve.
"""

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import NamedTuple

from .errors import PASS, MalformedEncoding, NotOnCurve, Verdict, fail
from .instrument import record_scalar_mults
from .rand import RandomSource, random_scalar


class ECPoint(NamedTuple):
    x: int | None
    y: int | None

    @property
    def is_infinity(self) -> bool:
        return self.x is None


INFINITY = ECPoint(None, None)


def inv_mod(x: int, m: int) -> int:
    """Modular inverse by the extended Euclidean algorithm.

    Delegates to ``pow(x, -1, m)``, which CPython implements as extended
    Euclid on arbitrary-precision integers.
    """
    x %= m
    if x == 0:
        raise ZeroDivisionError("0 has no inverse")
    return pow(x, -1, m)


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for base in small:
        x = pow(base, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of ``a`` modulo the odd prime ``p``, or None (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


@dataclass(frozen=True)
class DomainParameters:
    p: int
    a: int
    b: int
    G: ECPoint
    n: int
    h: int
    name: str

    @property
    def field_bytes(self) -> int:
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_bytes(self) -> int:
        return (self.n.bit_length() + 7) // 8

    @property
    def point_bytes(self) -> int:
        """Width of a compressed point."""
        return 1 + self.field_bytes

    def check(self) -> None:
        """Raise ValueError unless the parameter set is internally consistent."""
        p, a, b = self.p, self.a, self.b
        if not _is_probable_prime(p) or p < 5:
            raise ValueError("p is not an odd prime")
        if (4 * a**3 + 27 * b**2) % p == 0:
            raise ValueError("singular curve: 4a^3 + 27b^2 = 0 mod p")
        if not (0 <= a < p and 0 <= b < p):
            raise ValueError("coefficients not reduced mod p")
        if not is_on_curve(self.G, self):
            raise ValueError("base point not on curve")
        if not _is_probable_prime(self.n):
            raise ValueError("n is not prime")
        if not _mul(self.n, self.G, self).is_infinity:
            raise ValueError("n*G != O")
        if self.h < 1:
            raise ValueError("cofactor must be positive")


def parse_params(text: str) -> DomainParameters:
    """Parse the line-oriented ``key = value`` parameter format."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(" ")
        key, value = key.strip().lower(), value.strip()
        if not key or not value:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        values[key] = value
    missing = [k for k in ("p", "a", "b", "gx", "gy", "n", "h", "name") if k not in values]
    if missing:
        raise ValueError(f"missing parameter(s): {', '.join(missing)}")

    def num(key: str) -> int:
        try:
            return int(values[key], 0)
        except ValueError:
            raise ValueError(f"{key}: not an integer: {values[key]!r}") from None

    params = DomainParameters(
        p=num("p"), a=num("a"), b=num("b"),
        G=ECPoint(num("gx"), num("gy")),
        n=num("n"), h=num("h"), name=values["name"],
    )
    params.check()
    return params


def load_params(path: str | Path) -> DomainParameters:
    return parse_params(Path(path).read_text())


_BUILTIN = {"toy17": "toy17.params", "P-256": "p256.params"}
_cache: dict[str, DomainParameters] = {}


def builtin_params(name: str) -> DomainParameters:
    """One of the shipped parameter sets: ``toy17`` or ``P-256``."""
    if name not in _cache:
        try:
            fname = _BUILTIN[name]
        except KeyError:
            raise ValueError(f"unknown curve {name!r}; known: {sorted(_BUILTIN)}") from None
        text = resources.files("lpki").joinpath("data", fname).read_text()
        _cache[name] = parse_params(text)
    return _cache[name]


def is_on_curve(P: ECPoint, params: DomainParameters) -> bool:
    if P.is_infinity:
        return True
    x, y, p = P.x, P.y, params.p
    return (y * y - (x * x * x + params.a * x + params.b)) % p == 0


def point_neg(P: ECPoint, params: DomainParameters) -> ECPoint:
    if P.is_infinity:
        return P
    return ECPoint(P.x, (-P.y) % params.p)


def point_add(P: ECPoint, Q: ECPoint, params: DomainParameters) -> ECPoint:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    p = params.p
    x1, y1, x2, y2 = P.x % p, P.y % p, Q.x % p, Q.y % p
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return INFINITY
        lam = (3 * x1 * x1 + params.a) * inv_mod(2 * y1, p) % p
    else:
        lam = (y2 - y1) * inv_mod(x2 - x1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return ECPoint(x3, y3)


def _jac_double(X1: int, Y1: int, Z1: int, a: int, p: int) -> tuple[int, int, int]:
    if Y1 == 0 or Z1 == 0:
        return 1, 1, 0
    YY = Y1 * Y1 % p
    S = 4 * X1 * YY % p
    ZZ = Z1 * Z1 % p
    M = (3 * X1 * X1 + a * ZZ * ZZ) % p
    X3 = (M * M - 2 * S) % p
    Y3 = (M * (S - X3) - 8 * YY * YY) % p
    Z3 = 2 * Y1 * Z1 % p
    return X3, Y3, Z3


def _jac_add_affine(X1: int, Y1: int, Z1: int, x2: int, y2: int, a: int,
                    p: int) -> tuple[int, int, int]:
    if Z1 == 0:
        return x2, y2, 1
    ZZ = Z1 * Z1 % p
    U2 = x2 * ZZ % p
    S2 = y2 * ZZ * Z1 % p
    H = (U2 - X1) % p
    R = (S2 - Y1) % p
    if H == 0:
        if R == 0:
            return _jac_double(X1, Y1, Z1, a, p)
        return 1, 1, 0
    HH = H * H % p
    HHH = H * HH % p
    V = X1 * HH % p
    X3 = (R * R - HHH - 2 * V) % p
    Y3 = (R * (V - X3) - Y1 * HHH) % p
    Z3 = Z1 * H % p
    return X3, Y3, Z3


def _mul(k: int, P: ECPoint, params: DomainParameters) -> ECPoint:
    """Left-to-right double-and-add; Jacobian coordinates internally.

    Like the affine law, the formulas involve ``a`` but never ``b``.
    """
    if k < 0:
        raise ValueError("negative scalar")
    if k == 0 or P.is_infinity:
        return INFINITY
    p, a = params.p, params.a
    x, y = P.x % p, P.y % p
    X, Y, Z = 1, 1, 0
    for bit in bin(k)[2:]:
        X, Y, Z = _jac_double(X, Y, Z, a, p)
        if bit == "1":
            X, Y, Z = _jac_add_affine(X, Y, Z, x, y, a, p)
    if Z == 0:
        return INFINITY
    zinv = inv_mod(Z, p)
    zz = zinv * zinv % p
    return ECPoint(X * zz % p, Y * zz * zinv % p)


def scalar_mult(k: int, P: ECPoint, params: DomainParameters) -> ECPoint:
    """k*P by double-and-add. Counted as one scalar multiplication."""
    record_scalar_mults(1)
    return _mul(k, P, params)


def multi_scalar_mult(k1: int, P1: ECPoint, k2: int, P2: ECPoint,
                      params: DomainParameters) -> ECPoint:
    """k1*P1 + k2*P2, counted as two scalar multiplications."""
    record_scalar_mults(2)
    return point_add(_mul(k1, P1, params), _mul(k2, P2, params), params)


def validate_public_key(PK: ECPoint, params: DomainParameters) -> Verdict:
    """Full public key validation.

    Conditions, checked in order: (a) not the point at infinity, (b) both
    coordinates in [0, p-1], (c) on the curve, and, only when the cofactor
    exceeds 1, (d) n*PK = O.
    """
    if PK.is_infinity:
        return fail("a")
    if not (isinstance(PK.x, int) and isinstance(PK.y, int)
            and 0 <= PK.x < params.p and 0 <= PK.y < params.p):
        return fail("b")
    if not is_on_curve(PK, params):
        return fail("c")
    if params.h > 1 and not scalar_mult(params.n, PK, params).is_infinity:
        return fail("d")
    return PASS


@dataclass(frozen=True)
class KeyPair:
    sk: int
    pk: ECPoint

    def __repr__(self) -> str:
        return f"KeyPair(pk={self.pk!r})"


def keypair_from_secret(sk: int, params: DomainParameters) -> KeyPair:
    if not 1 <= sk < params.n:
        raise ValueError("private key out of range [1, n-1]")
    return KeyPair(sk, scalar_mult(sk, params.G, params))


def generate_keypair(params: DomainParameters, rng: RandomSource) -> KeyPair:
    return keypair_from_secret(random_scalar(params.n, rng), params)


def compress_point(P: ECPoint, params: DomainParameters) -> bytes:
    if P.is_infinity:
        raise MalformedEncoding("cannot compress the point at infinity")
    return bytes([2 | (P.y & 1)]) + P.x.to_bytes(params.field_bytes, "big")


def decompress_point(b: bytes, params: DomainParameters) -> ECPoint:
    if len(b) != params.point_bytes:
        raise MalformedEncoding(f"expected {params.point_bytes} bytes, got {len(b)}")
    if b[0] not in (2, 3):
        raise MalformedEncoding(f"bad prefix 0x{b[0]:02x}")
    x = int.from_bytes(b[1:], "big")
    if x >= params.p:
        raise MalformedEncoding("x coordinate out of range")
    y = sqrt_mod(x * x * x + params.a * x + params.b, params.p)
    if y is None:
        raise NotOnCurve(f"no curve point with x = {x}")
    if (y & 1) != (b[0] & 1):
        y = (-y) % params.p
    return ECPoint(x, y)


def encode_scalar(k: int, params: DomainParameters) -> bytes:
    return k.to_bytes(params.scalar_bytes, "big")
