"""The assembled system: every authority, the gateway and the network.

A world is created once from a :class:`~lpki.config.Config` (authority keys
come from ``config.seed``) and can be saved to and loaded from a directory
of snapshots. Loading takes a separate session seed that drives all
randomness from then on, so a replayed scenario is byte-identical.
"""

from pathlib import Path

from .authorities import (
    CaPolicy, CertificateRepository, CertificationAuthority, KeyGenerationServer,
    RegistrationAuthority, SubscriberDetails, TimestampServer, ValidationAuthority,
)
from .codec import Reader, Writer
from .config import Config, load_config, parse_config
from .ec import KeyPair, generate_keypair, keypair_from_secret
from .errors import ConfigError, MalformedSnapshot
from .flows import (
    GATEWAY, OCSP, TSA, VA, EndEntity, EnrollmentRequest, Gateway, VaEndpoint, enroll,
    ocsp_handler, ts_handler,
)
from .network import Faults, SimNetwork
from .pki import SmartCardStore
from .rand import SeededRandomSource

COMPONENTS = (
    ("RA", "registration authority"),
    ("CA", "certification authority"),
    ("KGS", "key generating server"),
    ("CR", "certificate repository"),
    ("OCSP", "status responder"),
    ("VA", "validation authority"),
    ("TS", "timestamp server"),
)

CONFIG_FILE = "world.conf"
_SNAPSHOTS = ("ra", "cr", "ca", "va", "ts")


class World:
    def __init__(self, config: Config, rng: SeededRandomSource, faults: Faults | None = None):
        self.config = config
        self.params = config.params()
        self.rng = rng
        self.net = SimNetwork(int.from_bytes(rng.fork("net").read(8), "big"), faults)
        self.entities: dict[str, EndEntity] = {}
        # filled in by create() or load()
        self.ra: RegistrationAuthority
        self.cr: CertificateRepository
        self.ca: CertificationAuthority
        self.kgs: KeyGenerationServer
        self.va: ValidationAuthority
        self.ts: TimestampServer
        self.recovery: KeyPair

    # ---- construction

    @classmethod
    def create(cls, config: Config | None = None, faults: Faults | None = None) -> "World":
        config = config or Config()
        keys = SeededRandomSource(f"world/{config.seed}")
        w = cls(config, keys.fork("session"), faults)
        p = w.params
        w.recovery = generate_keypair(p, keys.fork("recovery"))
        policy = CaPolicy(cert_lifetime=config.cert_lifetime, ocsp_window=config.ocsp_window,
                          escrow=config.escrow, validate_keys=config.validate_keys)
        w.ra = RegistrationAuthority()
        w.cr = CertificateRepository()
        w.ca = CertificationAuthority(config.ca_id, generate_keypair(p, keys.fork("ca")), p,
                                      w.ra, w.cr, w.rng.fork("ca"), policy, w.recovery.pk)
        w.va = ValidationAuthority(config.va_id, generate_keypair(p, keys.fork("va")), p,
                                   w.ca.public_key, w.cr, w.ca, w.rng.fork("va"),
                                   config.va_archive)
        w.ts = TimestampServer(config.ts_id, generate_keypair(p, keys.fork("ts")), p,
                               w.rng.fork("ts"))
        w.kgs = KeyGenerationServer(w.ca, w.rng.fork("kgs"))
        w._register_services()
        return w

    def _register_services(self) -> None:
        self.gateway = Gateway(self)
        self.va_endpoint = VaEndpoint(self)
        self.net.register(GATEWAY, self.gateway.handle)
        self.net.register(OCSP, ocsp_handler(self))
        self.net.register(TSA, ts_handler(self))
        self.net.register(VA, self.va_endpoint.handle)

    def attach(self, entity: EndEntity) -> None:
        if entity.name in self.entities:
            raise ValueError(f"{entity.name} already attached")
        self.entities[entity.name] = entity
        self.net.register(entity.name, entity.handle)

    def components(self) -> list[tuple[str, str]]:
        return list(COMPONENTS)

    # ---- convenience

    def enroll(self, msisdn: str, mode: int, now: int = 0, pin: str = "1234",
               can_validate: bool = True, keypair: KeyPair | None = None) -> EndEntity:
        req = EnrollmentRequest(SubscriberDetails(msisdn), mode, pin, can_validate, keypair)
        return enroll(self, req, now)

    def entity(self, name: str) -> EndEntity:
        """Look up by full subject id or by bare MSISDN."""
        if name in self.entities:
            return self.entities[name]
        for sid, e in self.entities.items():
            if sid.startswith(f"uid={name},"):
                return e
        raise KeyError(name)

    # ---- persistence

    def save(self, directory: str | Path) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / CONFIG_FILE).write_text(self.config.to_text())
        for name in _SNAPSHOTS:
            (d / f"{name}.snap").write_bytes(getattr(self, name).snapshot())
        w = Writer().raw(b"LPKS").u8(1).str16("world").str16(self.params.name)
        w.blob16(self.recovery.sk.to_bytes(self.params.scalar_bytes, "big"))
        w.u32(len(self.entities))
        for sid in sorted(self.entities):
            e = self.entities[sid]
            w.str16(sid).str16(e.pin).u8(e.enrollment_mode).u8(e.can_validate)
            w.u32(e._msg_counter).blob32(e.store.to_bytes())
        (d / "entities.snap").write_bytes(w.getvalue())

    @classmethod
    def load(cls, directory: str | Path, seed: int = 0,
             faults: Faults | None = None) -> "World":
        d = Path(directory)
        if not (d / CONFIG_FILE).is_file():
            raise ConfigError("state", f"{d} does not hold an initialized world")
        config = parse_config((d / CONFIG_FILE).read_text(), str(d))
        w = cls(config, SeededRandomSource(f"session/{seed}"), faults)
        p = w.params
        blobs = {name: (d / f"{name}.snap").read_bytes() for name in _SNAPSHOTS}
        w.ra = RegistrationAuthority.restore(blobs["ra"])
        w.cr = CertificateRepository.restore(blobs["cr"])
        w.ca = CertificationAuthority.restore(blobs["ca"], p, w.ra, w.cr, w.rng.fork("ca"))
        w.va = ValidationAuthority.restore(blobs["va"], p, w.cr, w.ca, w.rng.fork("va"))
        w.ts = TimestampServer.restore(blobs["ts"], p, w.rng.fork("ts"))
        w.kgs = KeyGenerationServer(w.ca, w.rng.fork("kgs"))
        w._register_services()

        r = Reader((d / "entities.snap").read_bytes(), MalformedSnapshot)
        if r.raw(4) != b"LPKS" or r.u8() != 1 or r.str16() != "world":
            raise r.fail("not a world snapshot", 0)
        off = r.pos
        if r.str16() != p.name:
            raise r.fail("curve mismatch", off)
        w.recovery = keypair_from_secret(int.from_bytes(r.blob16(), "big"), p)
        for _ in range(r.u32()):
            sid, pin, mode, can_validate = r.str16(), r.str16(), r.u8(), bool(r.u8())
            counter = r.u32()
            store = SmartCardStore.from_bytes(r.blob32())
            e = EndEntity(w, sid, store, pin, w.rng.fork(f"entity/{sid}"), mode, can_validate)
            e._msg_counter = counter
            w.attach(e)
        r.expect_end()
        return w


def init_world(config_path: str | Path, state_dir: str | Path, force: bool = False) -> World:
    state = Path(state_dir)
    if (state / CONFIG_FILE).exists() and not force:
        raise FileExistsError(f"{state} already holds a world; use --force to replace it")
    world = World.create(load_config(config_path))
    world.save(state)
    return world
