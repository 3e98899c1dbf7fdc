"""Deterministic objects pinned by the files in tests/golden/.

Run ``python tests/goldens.py`` to regenerate after an intentional format
change, then review the diff.
"""

from pathlib import Path

from lpki.ec import builtin_params, compress_point, keypair_from_secret
from lpki.pki import Certificate, CertStatus, OcspToken, serialize_certificate, sign_object
from lpki.rand import SeededRandomSource
from lpki.wire import MsgType, Tag, encode_wire, message

GOLDEN_DIR = Path(__file__).parent / "golden"
PARAMS = builtin_params("P-256")
CA = keypair_from_secret(0x1CA, PARAMS)
SUBJECT = keypair_from_secret(0x5B1, PARAMS)


def golden_certificate() -> bytes:
    tbs = Certificate(42, "cn=LPKI Root CA,o=LPKI,c=IR", "uid=989120000001,o=LPKI,c=IR",
                      1_700_000_000, 1_731_536_000, "P-256", compress_point(SUBJECT.pk, PARAMS),
                      ((1, b"digitalSignature,keyEncipherment,keyAgreement"), (2, b"va")))
    return serialize_certificate(sign_object(tbs, CA, PARAMS, SeededRandomSource("golden-cert")))


def golden_ocsp_token() -> bytes:
    tok = OcspToken(42, CertStatus.GOOD, 1_700_000_100, 1_700_000_400,
                    "cn=LPKI Root CA,o=LPKI,c=IR")
    return sign_object(tok, CA, PARAMS, SeededRandomSource("golden-ocsp")).to_bytes()


def golden_wire() -> dict[str, bytes]:
    a, b = "uid=989120000001,o=LPKI,c=IR", "uid=989120000002,o=LPKI,c=IR"
    cert, tok = golden_certificate(), golden_ocsp_token()
    eph = compress_point(keypair_from_secret(0xE1, PARAMS).pk, PARAMS)
    msgs = {
        MsgType.GATEWAY_QUERY: message(MsgType.GATEWAY_QUERY, (Tag.SENDER_ID, a),
                                       (Tag.TARGET, b), (Tag.QUERY_TAG, "2")),
        MsgType.GATEWAY_RESPONSE: message(MsgType.GATEWAY_RESPONSE, (Tag.TARGET, b),
                                          (Tag.CERTIFICATE, cert), (Tag.OCSP_TOKEN, tok)),
        MsgType.MODE1_DATA: message(MsgType.MODE1_DATA, (Tag.SENDER_ID, a), (Tag.RECIPIENT_ID, b),
                                    (Tag.MSG_ID, f"{a}#1"), (Tag.ENVELOPE, bytes(range(96)))),
        MsgType.MODE2_DATA: message(MsgType.MODE2_DATA, (Tag.SENDER_ID, a), (Tag.RECIPIENT_ID, b),
                                    (Tag.MSG_ID, f"{a}#2"), (Tag.SERIAL, 42),
                                    (Tag.SENDER_EPH, eph), (Tag.ENVELOPE, bytes(range(96)))),
        MsgType.DPV_REQUEST: message(MsgType.DPV_REQUEST, (Tag.TARGET, a), (Tag.TARGET, b)),
        MsgType.DPV_RESPONSE: message(MsgType.DPV_RESPONSE, (Tag.REPORT, b"\x00" * 40)),
        MsgType.OCSP_REQUEST: message(MsgType.OCSP_REQUEST, (Tag.SERIAL, 42)),
        MsgType.OCSP_RESPONSE: message(MsgType.OCSP_RESPONSE, (Tag.OCSP_TOKEN, tok)),
        MsgType.ERROR: message(MsgType.ERROR, (Tag.ERROR_CODE, "NotFound"),
                               (Tag.ERROR_DETAIL, "uid=0,o=LPKI,c=IR")),
        MsgType.TS_REQUEST: message(MsgType.TS_REQUEST, (Tag.TIME, 1_700_000_000)),
        MsgType.TS_RESPONSE: message(MsgType.TS_RESPONSE, (Tag.TIMESTAMP, b"\x01" * 20)),
    }
    return {f"wire_{t.name.lower()}.bin": encode_wire(m) for t, m in msgs.items()}


def all_goldens() -> dict[str, bytes]:
    out = {"certificate.bin": golden_certificate(), "ocsp_token.bin": golden_ocsp_token()}
    out.update(golden_wire())
    return out


if __name__ == "__main__":
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name, data in all_goldens().items():
        (GOLDEN_DIR / name).write_bytes(data)
        print(f"wrote {name} ({len(data)} bytes)")
