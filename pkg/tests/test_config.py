import math

import pytest

from qkdsim.config import build_config, load_config, parse_entries
from qkdsim.engine import Receiver
from qkdsim.errors import ConfigError

FULL_CONFIG = """
# receiver selection
receiver = homodyne
n_symbols = 50000
mean_photons_per_bit = 1.0
rep_rate_hz = 4e6
seed = 42

channel.loss_db = 3.0          # fiber + connectors
channel.drift_sigma = 0.001
channel.pol_angle = 0.05
channel.phase_mod_sigma = 0.01

visibility.intrinsic_visibility = 0.98
visibility.extinction_ratio_db = 20

apd.quantum_efficiency = 0.1
apd.dark_prob_per_gate = 1e-4
apd.gate_width_ns = 2.5
apd.dead_time_us = 10
apd.rep_rate_hz = 4e6

homodyne.lo_mean_photons = 1e6
homodyne.quantum_efficiency = 0.8
homodyne.electronic_noise_ratio = 0.0
homodyne.cmrr_db = 30
homodyne.decision_threshold = 0.0

trace = false
output_csv = stats.csv
"""


def test_full_config_round_trip(tmp_path):
    path = tmp_path / "link.cfg"
    path.write_text(FULL_CONFIG)
    cfg = load_config(path)
    assert cfg.run.receiver is Receiver.HOMODYNE
    assert cfg.run.n_symbols == 50_000
    assert cfg.run.seed == 42
    assert cfg.run.channel.loss_db == 3.0
    assert cfg.run.visibility.extinction_ratio_db == 20.0
    assert cfg.run.apd.dead_time_us == 10.0
    assert cfg.run.homodyne.cmrr_db == 30.0
    assert cfg.trace is False
    assert cfg.output_csv == "stats.csv"


def test_empty_config_gives_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("# nothing but comments\n\n")
    cfg = load_config(path)
    assert cfg.run.receiver is Receiver.PHOTON_COUNTING
    assert cfg.run.rep_rate_hz == 4e6
    assert cfg.run.visibility.intrinsic_visibility == 1.0
    assert math.isinf(cfg.run.visibility.extinction_ratio_db)


def test_overrides_win(tmp_path):
    path = tmp_path / "base.cfg"
    path.write_text("mean_photons_per_bit = 0.1\nseed = 1\n")
    cfg = load_config(path, ["mean_photons_per_bit=2.5", "seed=99"])
    assert cfg.run.mean_photons_per_bit == 2.5
    assert cfg.run.seed == 99


def test_unknown_key_names_key_and_line():
    with pytest.raises(ConfigError) as exc:
        parse_entries("seed = 1\nbogus_knob = 3\n", source="demo.cfg")
    msg = str(exc.value)
    assert "demo.cfg:2" in msg
    assert "bogus_knob" in msg


def test_malformed_line_rejected():
    with pytest.raises(ConfigError, match="key = value"):
        parse_entries("just some words\n")


def test_bad_numeric_value_names_key():
    with pytest.raises(ConfigError, match="n_symbols"):
        parse_entries("n_symbols = many\n")


def test_out_of_range_value_names_dotted_field():
    entries = parse_entries("apd.quantum_efficiency = 1.5\n")
    with pytest.raises(ConfigError) as exc:
        build_config(entries)
    msg = str(exc.value)
    assert "apd.quantum_efficiency" in msg
    assert "[0, 1]" in msg


def test_receiver_values():
    assert build_config(parse_entries("receiver = photon_counting")).run.receiver is (
        Receiver.PHOTON_COUNTING
    )
    with pytest.raises(ConfigError, match="receiver"):
        build_config(parse_entries("receiver = heterodyne"))


def test_seed_accepts_hex():
    entries = parse_entries("seed = 0xdeadbeef")
    assert build_config(entries).run.seed == 0xDEADBEEF


def test_boolean_values():
    assert build_config(parse_entries("trace = true")).trace is True
    assert build_config(parse_entries("trace = 0")).trace is False
    with pytest.raises(ConfigError, match="trace"):
        parse_entries("trace = maybe")


def test_extinction_accepts_inf():
    entries = parse_entries("visibility.extinction_ratio_db = inf")
    assert math.isinf(build_config(entries).run.visibility.extinction_ratio_db)


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.cfg")
