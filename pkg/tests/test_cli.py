import threading
from pathlib import Path

import pytest

from lpki.cli import main, make_dispatch
from lpki.network import FrameServer, send_frame
from lpki.pki import CertStatus, OcspToken
from lpki.wire import MsgType, Tag, decode_wire, encode_wire, message
from lpki.world import World

ROOT = Path(__file__).parent.parent


@pytest.fixture
def state(tmp_path):
    d = tmp_path / "state"
    assert main(["init", "--config", str(ROOT / "config" / "lpki.conf"), "--state", str(d)]) == 0
    return d


def test_init(capsys, tmp_path):
    state = tmp_path / "fresh"
    conf = str(ROOT / "config" / "lpki.conf")
    assert main(["init", "--config", conf, "--state", str(state)]) == 0
    out = capsys.readouterr().out
    assert "components=7" in out and "VA" in out
    assert main(["init", "--config", conf, "--state", str(state)]) == 1
    assert "already" in capsys.readouterr().err
    assert main(["init", "--config", conf, "--state", str(state), "--force"]) == 0


def test_init_bad_curve(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("curve = secp999\n")
    assert main(["init", "--config", str(conf), "--state", str(tmp_path / "s")]) == 2
    assert "curve" in capsys.readouterr().err
    assert not (tmp_path / "s").exists()


@pytest.mark.parametrize("name", ["happy_path.lpks", "revocation.lpks"])
def test_scenario_exit_zero(state, capsys, tmp_path, name):
    trans = tmp_path / "t.bin"
    assert main(["scenario", str(ROOT / "scenarios" / name), "--state", str(state),
                 "--transcript", str(trans)]) == 0
    out = capsys.readouterr().out
    assert "result=pass" in out and trans.stat().st_size > 0


def test_scenario_is_reproducible(state, capsys):
    path = str(ROOT / "scenarios" / "happy_path.lpks")
    main(["scenario", path, "--state", str(state), "--seed", "4"])
    first = capsys.readouterr().out
    main(["scenario", path, "--state", str(state), "--seed", "4"])
    assert capsys.readouterr().out == first


def test_scenario_mismatch_exit_one(state, tmp_path, capsys):
    text = (ROOT / "scenarios" / "revocation.lpks").read_text()
    edited = tmp_path / "edited.lpks"
    edited.write_text(text.replace("expect=error:Revoked", "expect=ok", 1))
    assert main(["scenario", str(edited), "--state", str(state)]) == 1
    assert "first mismatch: step 4" in capsys.readouterr().err


def test_scenario_usage_errors(state, tmp_path, capsys):
    assert main(["scenario", str(tmp_path / "missing.lpks"), "--state", str(state)]) == 2
    bad = tmp_path / "bad.lpks"
    bad.write_text("at 0 juggle a\n")
    assert main(["scenario", str(bad), "--state", str(state)]) == 2
    good = ROOT / "scenarios" / "happy_path.lpks"
    assert main(["scenario", str(good), "--state", str(tmp_path / "nothing")]) == 2


def test_attack_demo(state, capsys):
    assert main(["attack-demo", "--state", str(state)]) == 0
    out = capsys.readouterr().out
    assert "attack.pop-only.certified=yes" in out
    assert "attack.compliant.certified=no" in out


def test_bench(capsys):
    assert main(["bench", "--curve", "toy17", "--sizes", "0,32", "--iterations", "2"]) == 0
    out = capsys.readouterr().out
    assert "caveat:" in out and out.count("bench size=") == 2
    assert main(["bench", "--sizes", "a,b"]) == 2
    assert main(["bench", "--curve", "nope", "--sizes", "1"]) == 2
    assert main(["bench", "--iterations", "0"]) == 2


def test_serve_dispatch(state):
    world = World.load(state)
    a = world.enroll("100", 2)
    b = world.enroll("200", 2)
    srv = FrameServer(("127.0.0.1", 0), make_dispatch(world))
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    try:
        addr = srv.server_address
        q = message(MsgType.GATEWAY_QUERY, (Tag.SENDER_ID, "remote"), (Tag.TARGET, b.name),
                    (Tag.QUERY_TAG, "2"))
        reply = decode_wire(send_frame(addr, encode_wire(q)))
        assert reply.msg_type is MsgType.GATEWAY_RESPONSE
        serial = b.certificate().serial
        ocsp = decode_wire(send_frame(addr, encode_wire(
            message(MsgType.OCSP_REQUEST, (Tag.SERIAL, serial)))))
        assert OcspToken.from_bytes(ocsp.require(Tag.OCSP_TOKEN)).status is CertStatus.GOOD
        ts = decode_wire(send_frame(addr, encode_wire(message(MsgType.TS_REQUEST, (Tag.TIME, 9)))))
        assert ts.msg_type is MsgType.TS_RESPONSE
        dpv = decode_wire(send_frame(addr, encode_wire(message(
            MsgType.DPV_REQUEST, (Tag.TARGET, a.name), (Tag.TARGET, b.name)))))
        assert dpv.msg_type is MsgType.DPV_RESPONSE
        junk = decode_wire(send_frame(addr, b"not a frame"))
        assert junk.get(Tag.ERROR_CODE) == b"Malformed"
        other = decode_wire(send_frame(addr, encode_wire(message(MsgType.MODE1_DATA))))
        assert other.get(Tag.ERROR_CODE) == b"Unsupported"
    finally:
        srv.shutdown()
        srv.server_close()
