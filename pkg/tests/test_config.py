import pytest

from lpki.config import Config, load_config, parse_config
from lpki.errors import ConfigError


def test_defaults_and_round_trip():
    cfg = Config()
    assert cfg.curve == "P-256" and cfg.validate_keys and not cfg.escrow
    again = parse_config(cfg.to_text())
    assert again == cfg


def test_parse_values():
    cfg = parse_config("curve = toy17  # comment\nseed = 7\nescrow = on\n\nva_archive=yes\n")
    assert (cfg.curve, cfg.seed, cfg.escrow, cfg.va_archive) == ("toy17", 7, True, True)
    assert cfg.params().n == 19


@pytest.mark.parametrize("text,field", [
    ("curve = secp999\n", "curve"),
    ("seed = many\n", "seed"),
    ("seed = -1\n", "seed"),
    ("escrow = maybe\n", "escrow"),
    ("colour = blue\n", "colour"),
    ("base_dir = /\n", "base_dir"),
    ("just words\n", "line 1"),
    ("ca_id =\n", "ca_id"),
    ("cert_lifetime = 0\n", "cert_lifetime"),
])
def test_parse_errors(text, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field


def test_curve_from_params_file(tmp_path, toy):
    (tmp_path / "mine.params").write_text(
        "name = mine\np = 17\na = 2\nb = 2\ngx = 5\ngy = 1\nn = 19\nh = 1\n")
    (tmp_path / "w.conf").write_text("curve = mine.params\n")
    cfg = load_config(tmp_path / "w.conf")
    assert cfg.params().G == toy.G
    (tmp_path / "bad.params").write_text("p = 17\n")
    with pytest.raises(ConfigError):
        parse_config("curve = bad.params\n", str(tmp_path))


def test_load_missing(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(tmp_path / "nope.conf")
    assert info.value.field == "path"


def test_sample_config_parses():
    from pathlib import Path
    cfg = load_config(Path(__file__).parent.parent / "config" / "lpki.conf")
    assert cfg.curve == "P-256"
