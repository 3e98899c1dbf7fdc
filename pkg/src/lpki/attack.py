"""Invalid-curve attack material, for tests and the ``attack-demo`` command.

The group law never uses the curve coefficient b, so arithmetic on a point
that lies off E silently happens on some other curve
E': y^2 = x^3 + a*x + b'. Choosing b' to make E' contain a point of tiny
order lets an attacker produce a Schnorr proof of possession that the CA
accepts without knowing any discrete log, unless the CA checks that the
claimed key lies on E.
"""

from dataclasses import dataclass

from .authorities import (
    CaPolicy, CertificateRepository, CertificationAuthority, RegistrationAuthority,
    SubscriberDetails,
)
from .ec import (
    INFINITY, DomainParameters, ECPoint, KeyPair, _mul, compress_point, generate_keypair,
    is_on_curve, point_add,
)
from .errors import InvalidPublicKey, ProofRejected
from .pki import Certificate, validate_certificate
from .rand import RandomSource, random_scalar
from .schemes import PossessionProof, _pop_challenge, pop_context


@dataclass(frozen=True)
class InvalidCurvePoint:
    point: ECPoint
    b_prime: int
    order: int


def point_order(P: ECPoint, params: DomainParameters, bound: int) -> int | None:
    """Smallest k <= bound with k*P = O, by repeated addition; None if larger."""
    Q = P
    for k in range(1, bound + 1):
        if Q.is_infinity:
            return k
        Q = point_add(Q, P, params)
    return None


def order2_point(params: DomainParameters, x0: int = 2) -> InvalidCurvePoint:
    """(x0, 0) is its own negative, hence of order 2 on the curve through it.

    Works for any curve; x0 is bumped until the point is off E.
    """
    p, a = params.p, params.a
    while True:
        P = ECPoint(x0 % p, 0)
        if not is_on_curve(P, params):
            return InvalidCurvePoint(P, (-x0 ** 3 - a * x0) % p, 2)
        x0 += 1


def small_order_points(params: DomainParameters, max_order: int) -> list[InvalidCurvePoint]:
    """Enumerate every off-curve point of order <= max_order, over every b' != b.

    Brute force over the whole field, so only for toy parameters.
    """
    p, a = params.p, params.a
    if p > 1000:
        raise ValueError("enumeration is only feasible on toy fields")
    found = []
    for x in range(p):
        for y in range(p):
            P = ECPoint(x, y)
            if is_on_curve(P, params):
                continue
            b_prime = (y * y - x ** 3 - a * x) % p
            order = point_order(P, params, max_order)
            if order is not None:
                found.append(InvalidCurvePoint(P, b_prime, order))
    return found


def forge_possession_proof(subject_id: str, pk: ECPoint, order: int,
                           params: DomainParameters, rng: RandomSource,
                           max_tries: int = 4096) -> PossessionProof:
    """Pass z*G == T + ch*PK without a secret key, for PK of small order.

    With T = z*G the check holds exactly when ch*PK = O, i.e. when the
    challenge is a multiple of the order; retry with fresh z until it is.
    """
    context = pop_context(subject_id, compress_point(pk, params))
    for _ in range(max_tries):
        z = random_scalar(params.n, rng)
        T = _mul(z, params.G, params)
        ch = _pop_challenge(T, pk, context, params)
        if _mul(ch, pk, params) == INFINITY:
            return PossessionProof(T, z, context)
    raise RuntimeError("no forged proof found; point order too large?")


@dataclass
class AttackOutcome:
    ca_label: str
    certified: bool
    detail: str
    cert: Certificate | None = None


def run_attack_demo(params: DomainParameters, rng: RandomSource,
                    now: int = 0) -> tuple[InvalidCurvePoint, list[AttackOutcome]]:
    """Submit the same forged enrollment to a PoP-only CA and a compliant CA."""
    bad = order2_point(params)
    sid_details = SubscriberDetails("999000111", "mallory")
    outcomes = []
    for label, validate in (("pop-only", False), ("compliant", True)):
        ra = RegistrationAuthority()
        sid = ra.register(sid_details)
        ca_key: KeyPair = generate_keypair(params, rng)
        ca = CertificationAuthority(f"cn={label} CA", ca_key, params, ra,
                                    CertificateRepository(), rng,
                                    CaPolicy(validate_keys=validate))
        proof = forge_possession_proof(sid, bad.point, bad.order, params, rng)
        try:
            cert = ca.certify_mode2(sid, bad.point, proof, now)
        except InvalidPublicKey as exc:
            outcomes.append(AttackOutcome(label, False, str(exc)))
        except ProofRejected as exc:
            outcomes.append(AttackOutcome(label, False, f"proof rejected: {exc}"))
        else:
            status = ca.ocsp_respond(cert.serial, now)
            rep = validate_certificate(cert, ca.public_key, now, status, params)
            outcomes.append(AttackOutcome(
                label, True, f"certified serial {cert.serial}; relying-party key check: "
                f"{rep.public_key.reason or 'pass'}", cert))
    return bad, outcomes


def format_report(bad: InvalidCurvePoint, outcomes: list[AttackOutcome],
                  params: DomainParameters) -> str:
    lines = [
        f"curve: {params.name}",
        f"crafted point: x={bad.point.x:#x} y={bad.point.y}",
        f"lies on y^2 = x^3 + a*x + b' with b'={bad.b_prime:#x}; order {bad.order}",
        "violated condition: (c) point not on the curve",
    ]
    for o in outcomes:
        verdict = "CERTIFIED INVALID KEY" if o.certified else "REJECTED"
        lines.append(f"{o.ca_label:10s} CA: {verdict}: {o.detail}")
    lines.append("")
    for o in outcomes:
        lines.append(f"attack.{o.ca_label}.certified={'yes' if o.certified else 'no'}")
    lines.append("attack.condition=c")
    return "\n".join(lines) + "\n"
