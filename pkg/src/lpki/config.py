"""World configuration: a plain ``key = value`` text file.

Recognised keys (all optional)::

    curve          = P-256          # builtin name or path to a .params file
    seed           = 1              # world key-generation seed
    cert_lifetime  = 31536000       # seconds
    ocsp_window    = 300            # seconds a status token stays fresh
    escrow         = off            # KGS escrows generated keys to a recovery key
    validate_keys  = on             # CA validates claimed public keys
    va_archive     = off            # VA keeps a copy of every validated request
    ca_id / va_id / ts_id
"""

from dataclasses import dataclass, fields
from pathlib import Path

from .ec import DomainParameters, builtin_params, load_params
from .errors import ConfigError, DecodeError

_BOOL = {"on": True, "true": True, "yes": True, "1": True,
         "off": False, "false": False, "no": False, "0": False}


@dataclass(frozen=True)
class Config:
    curve: str = "P-256"
    seed: int = 1
    cert_lifetime: int = 365 * 24 * 3600
    ocsp_window: int = 300
    escrow: bool = False
    validate_keys: bool = True
    va_archive: bool = False
    ca_id: str = "cn=LPKI Root CA,o=LPKI,c=IR"
    va_id: str = "cn=LPKI VA,o=LPKI,c=IR"
    ts_id: str = "cn=LPKI TSA,o=LPKI,c=IR"
    base_dir: str = "."

    def params(self) -> DomainParameters:
        if self.curve in ("P-256", "toy17"):
            return builtin_params(self.curve)
        path = Path(self.curve)
        if not path.is_absolute():
            path = Path(self.base_dir) / path
        if not path.is_file():
            raise ConfigError("curve", f"unknown curve {self.curve!r}")
        try:
            return load_params(path)
        except (ValueError, DecodeError) as exc:
            raise ConfigError("curve", str(exc)) from None

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            if f.name == "base_dir":
                continue
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {('on' if v else 'off') if isinstance(v, bool) else v}")
        return "\n".join(lines) + "\n"


def parse_config(text: str, base_dir: str = ".") -> Config:
    kinds = {f.name: f.type for f in fields(Config)}
    values: dict[str, object] = {"base_dir": base_dir}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise ConfigError(f"line {lineno}", "expected key = value")
        if key not in kinds or key == "base_dir":
            raise ConfigError(key, "unknown setting")
        kind = kinds[key]
        if kind in (bool, "bool"):
            if value.lower() not in _BOOL:
                raise ConfigError(key, f"expected on/off, got {value!r}")
            values[key] = _BOOL[value.lower()]
        elif kind in (int, "int"):
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(key, f"expected an integer, got {value!r}") from None
            if values[key] < 0:
                raise ConfigError(key, "must be non-negative")
        else:
            if not value:
                raise ConfigError(key, "empty value")
            values[key] = value
    cfg = Config(**values)
    if cfg.cert_lifetime == 0:
        raise ConfigError("cert_lifetime", "must be positive")
    cfg.params()
    return cfg


def load_config(path: str | Path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("path", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, str(path.parent))
