import pytest

from lpki.config import Config
from lpki.errors import ConfigError, MalformedSnapshot
from lpki.flows import mode1_send, mode2_send
from lpki.world import COMPONENTS, CONFIG_FILE, World, init_world


def test_components_and_endpoints(world):
    assert [c for c, _ in world.components()] == ["RA", "CA", "KGS", "CR", "OCSP", "VA", "TS"]
    assert len(COMPONENTS) == 7
    assert {"gateway", "ocsp", "ts", "va"} <= set(world.net.endpoints)


def test_authority_keys_follow_seed():
    a, b, c = World.create(), World.create(), World.create(Config(seed=2))
    assert a.ca.public_key == b.ca.public_key != c.ca.public_key
    assert a.va.public_key != a.ca.public_key


def test_entity_lookup(world):
    e = world.enroll("5550001", 2)
    assert world.entity("5550001") is e is world.entity(e.subject_id)
    with pytest.raises(KeyError):
        world.entity("5550002")


def test_save_and_load(tmp_path, world):
    a, b = world.enroll("5550001", 1), world.enroll("5550002", 2, can_validate=False)
    mode2_send(world, a, b.name, b"before save", 5)
    world.save(tmp_path)
    assert (tmp_path / CONFIG_FILE).is_file()

    w2 = World.load(tmp_path, seed=3)
    assert w2.ca.public_key == world.ca.public_key
    assert w2.va.log == world.va.log
    a2, b2 = w2.entity("5550001"), w2.entity("5550002")
    assert a2.keypair() == a.keypair() and not b2.can_validate
    assert b2.enrollment_mode == 2
    assert mode1_send(w2, a2, a2.name, b"note to self", 10).message == b"note to self"
    assert mode2_send(w2, a2, b2.name, b"after load", 10).message == b"after load"
    # message ids keep counting from where they were
    assert a2.next_msg_id() != b"uid=5550001,o=LPKI,c=IR#1"


def test_load_is_deterministic(tmp_path, world):
    a, b = world.enroll("1", 2), world.enroll("2", 2)
    world.save(tmp_path)

    def replay():
        w = World.load(tmp_path, seed=11)
        mode2_send(w, w.entity("1"), w.entity("2").name, b"same bytes", 0)
        return w.net.transcript

    assert replay() == replay()


def test_load_errors(tmp_path, world):
    with pytest.raises(ConfigError):
        World.load(tmp_path / "empty")
    world.save(tmp_path)
    snap = tmp_path / "entities.snap"
    snap.write_bytes(b"XXXX" + snap.read_bytes()[4:])
    with pytest.raises(MalformedSnapshot):
        World.load(tmp_path)


def test_init_world(tmp_path):
    conf = tmp_path / "w.conf"
    conf.write_text("curve = toy17\nseed = 4\n")
    w = init_world(conf, tmp_path / "state")
    assert w.params.name == "toy17"
    with pytest.raises(FileExistsError):
        init_world(conf, tmp_path / "state")
    assert init_world(conf, tmp_path / "state", force=True).ca.public_key == w.ca.public_key
