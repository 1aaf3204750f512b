import json

import pytest

from membench.device import MemoryLevel, ProfileError, load_profile, parse_size, profile_from_dict, shipped_profiles


def test_parse_size():
    assert parse_size(4096) == 4096
    assert parse_size("32KiB") == 32768
    assert parse_size("32 KB") == 32768
    assert parse_size("1.25MiB") == 1310720
    assert parse_size("15M") == 15 << 20
    with pytest.raises(ProfileError):
        parse_size("lots")


def test_shipped_profiles_load():
    names = shipped_profiles()
    assert {"xeon-4310T", "raspberry-pi-4", "starfive-visionfive", "mango-pi-mq-pro"} <= set(names)
    for name in names:
        dev = load_profile(name)
        assert dev.levels[-1].is_dram
    assert load_profile("xeon-4310T").core_count == 10
    assert load_profile("mango-pi-mq-pro").core_count == 1


def test_capacities_must_increase():
    with pytest.raises(ProfileError):
        profile_from_dict({"name": "x", "core_count": 1, "levels": [
            {"name": "L1", "capacity": "1MiB"}, {"name": "L2", "capacity": "512KiB"}]})


def test_levels_required():
    with pytest.raises(ProfileError):
        profile_from_dict({"name": "x", "core_count": 1, "levels": []})
    with pytest.raises(ProfileError):
        profile_from_dict({"name": "x", "levels": [{"name": "DRAM"}]})


def test_core_count_autodetected(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"name": "p", "levels": [{"name": "DRAM", "capacity": "1GiB", "shared": True}]}))
    assert load_profile(p).core_count >= 1


def test_missing_profile():
    with pytest.raises(FileNotFoundError):
        load_profile("/nonexistent/profile.json")


def test_level_capacity_positive():
    with pytest.raises(ProfileError):
        MemoryLevel("L1", 0)
