import itertools

import pytest
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import ec as cec
from hypothesis import given, settings
from hypothesis import strategies as st

from lpki.ec import (
    INFINITY, DomainParameters, ECPoint, builtin_params, compress_point, decompress_point,
    generate_keypair, inv_mod, is_on_curve, keypair_from_secret, multi_scalar_mult,
    parse_params, point_add, point_neg, scalar_mult, sqrt_mod, validate_public_key,
)
from lpki.errors import MalformedEncoding, NotOnCurve
from lpki.instrument import counting

# Multiples of G = (5, 1) on y^2 = x^3 + 2x + 2 over F_17, as tabulated in
# the usual textbook treatment of this curve.
TEXTBOOK_MULTIPLES = [
    (5, 1), (6, 3), (10, 6), (3, 1), (9, 16), (16, 13), (0, 6), (13, 7), (7, 6),
    (7, 11), (13, 10), (0, 11), (16, 4), (9, 1), (3, 16), (10, 11), (6, 14), (5, 16),
]


def all_toy_points(params):
    pts = [ECPoint(x, y) for x in range(params.p) for y in range(params.p)
           if (y * y - x ** 3 - params.a * x - params.b) % params.p == 0]
    return [INFINITY] + pts


def naive_add_chain(k, P, params):
    Q = INFINITY
    for _ in range(k):
        Q = point_add(Q, P, params)
    return Q


def affine_double_and_add(k, P, params):
    Q = INFINITY
    for bit in bin(k)[2:]:
        Q = point_add(Q, Q, params)
        if bit == "1":
            Q = point_add(Q, P, params)
    return Q


def test_toy_curve_has_19_points(toy):
    assert len(all_toy_points(toy)) == 19


def test_toy_multiples_match_textbook_table(toy):
    for k, (x, y) in enumerate(TEXTBOOK_MULTIPLES, 1):
        assert scalar_mult(k, toy.G, toy) == ECPoint(x, y)
    assert scalar_mult(19, toy.G, toy).is_infinity


def test_scalar_mult_matches_iterated_addition(toy):
    for k in range(0, 39):
        for P in all_toy_points(toy):
            assert scalar_mult(k, P, toy) == naive_add_chain(k, P, toy)


def test_group_law_exhaustive(toy):
    pts = all_toy_points(toy)
    for P in pts:
        assert point_add(P, INFINITY, toy) == P
        assert point_add(P, point_neg(P, toy), toy).is_infinity
        for Q in pts:
            PQ = point_add(P, Q, toy)
            assert PQ == point_add(Q, P, toy)
            assert is_on_curve(PQ, toy)
    for P, Q, R in itertools.product(pts, repeat=3):
        assert point_add(point_add(P, Q, toy), R, toy) == point_add(P, point_add(Q, R, toy), toy)


def test_params_are_consistent(toy, p256):
    toy.check()
    p256.check()
    assert p256.scalar_bytes == 32 and p256.point_bytes == 33


@pytest.mark.parametrize("k", [1, 2, 3, 0xDEADBEEF, 2 ** 255 + 19,
                               0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632550])
def test_p256_matches_cryptography(p256, k):
    pub = cec.derive_private_key(k, cec.SECP256R1()).public_key()
    nums = pub.public_numbers()
    ours = scalar_mult(k, p256.G, p256)
    assert (ours.x, ours.y) == (nums.x, nums.y)
    compressed = pub.public_bytes(serialization.Encoding.X962,
                                  serialization.PublicFormat.CompressedPoint)
    assert compress_point(ours, p256) == compressed
    assert decompress_point(compressed, p256) == ours


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 64), st.integers(min_value=1, max_value=2 ** 256))
def test_jacobian_matches_affine_on_p256(k, j):
    p256 = builtin_params("P-256")
    P = scalar_mult(j, p256.G, p256)
    assert scalar_mult(k, P, p256) == affine_double_and_add(k, P, p256)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1), st.integers(min_value=1))
def test_scalar_mult_is_linear(a, b):
    p256 = builtin_params("P-256")
    lhs = scalar_mult(a + b, p256.G, p256)
    rhs = point_add(scalar_mult(a, p256.G, p256), scalar_mult(b, p256.G, p256), p256)
    assert lhs == rhs
    assert multi_scalar_mult(a, p256.G, b, p256.G, p256) == lhs


def test_scalar_mult_counts(p256):
    with counting() as c:
        scalar_mult(5, p256.G, p256)
        multi_scalar_mult(2, p256.G, 3, p256.G, p256)
    assert c.scalar_mults == 3


def test_negative_scalar_rejected(toy):
    with pytest.raises(ValueError):
        scalar_mult(-1, toy.G, toy)


def test_inv_and_sqrt():
    assert inv_mod(3, 17) == 6
    with pytest.raises(ZeroDivisionError):
        inv_mod(34, 17)
    for p in (17, 13, 41):  # 13 and 41 exercise the Tonelli-Shanks branch
        for a in range(p):
            r = sqrt_mod(a, p)
            squares = {x * x % p for x in range(p)}
            if a in squares:
                assert r * r % p == a
            else:
                assert r is None


def test_every_multiple_of_g_validates(toy):
    for k in range(1, toy.n):
        assert validate_public_key(scalar_mult(k, toy.G, toy), toy)


@pytest.mark.parametrize("point,condition", [
    (INFINITY, "a"),
    (ECPoint(17, 1), "b"),
    (ECPoint(-1, 1), "b"),
    (ECPoint(5, 17), "b"),
    (ECPoint(5, 2), "c"),
    (ECPoint(0, 0), "c"),
])
def test_validate_public_key_conditions(toy, point, condition):
    v = validate_public_key(point, toy)
    assert not v and v.reason == condition


def test_validate_rejects_off_curve_p256(p256):
    G = p256.G
    assert validate_public_key(G, p256)
    assert validate_public_key(ECPoint(G.x, G.y + 1), p256).reason == "c"
    assert validate_public_key(ECPoint(G.x + p256.p, G.y), p256).reason == "b"


def test_cofactor_condition_d():
    # y^2 = x^3 + 1 over F_5 has 6 points; use the subgroup of order 3
    text = "name = tiny\np = 5\na = 0\nb = 1\ngx = 0\ngy = 1\nn = 3\nh = 2\n"
    params = parse_params(text)
    assert scalar_mult(3, params.G, params).is_infinity
    order2 = ECPoint(4, 0)
    assert is_on_curve(order2, params)
    assert validate_public_key(order2, params).reason == "d"
    assert validate_public_key(params.G, params)


def test_compression_round_trip_toy(toy):
    for P in all_toy_points(toy)[1:]:
        assert decompress_point(compress_point(P, toy), toy) == P


def test_decompress_errors(toy, p256):
    with pytest.raises(MalformedEncoding):
        decompress_point(b"\x02\x05", p256)
    with pytest.raises(MalformedEncoding):
        decompress_point(b"\x04" + bytes(32), p256)
    with pytest.raises(MalformedEncoding):
        decompress_point(b"\x02" + p256.p.to_bytes(32, "big"), p256)
    # x = 2 gives 2^3 + 2*2 + 2 = 14, a non-residue mod 17
    with pytest.raises(NotOnCurve):
        decompress_point(b"\x02\x02", toy)
    with pytest.raises(MalformedEncoding):
        compress_point(INFINITY, toy)


def test_keypair_generation(p256, rng):
    kp = generate_keypair(p256, rng)
    assert 1 <= kp.sk < p256.n
    assert kp.pk == scalar_mult(kp.sk, p256.G, p256)
    assert str(kp.sk) not in repr(kp)
    with pytest.raises(ValueError):
        keypair_from_secret(0, p256)


def test_parse_params_errors():
    with pytest.raises(ValueError, match="missing"):
        parse_params("p = 17\n")
    base = "name = x\np = 17\na = 2\nb = 2\ngx = 5\ngy = 1\nn = 19\nh = 1\n"
    assert parse_params(base) == DomainParameters(17, 2, 2, ECPoint(5, 1), 19, 1, "x")
    with pytest.raises(ValueError):
        parse_params(base.replace("gy = 1", "gy = 2"))
    with pytest.raises(ValueError):
        parse_params(base.replace("n = 19", "n = 18"))
    with pytest.raises(ValueError):
        builtin_params("secp999")
