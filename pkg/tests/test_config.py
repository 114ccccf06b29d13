"""Configuration file loading."""

import json

import pytest

from telesim.config import load_config
from telesim.params import ParameterError, load_profile


def test_defaults_match_shipped_profile():
    cfg = load_config(None)
    assert cfg.human.m_body == 52.0 and cfg.robot.m_base == 1.61
    assert cfg.retarget.k_spring == 400.0 and cfg.retarget.k_fb == 2.5
    assert cfg.retarget.effort_saturation == 40.0


def test_partial_override(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({
        "robot": {"m_body": 10.0, "m_base": 2.0, "h_com": 0.5},
        "retarget": {"k_spring": 250.0, "lqr_q": [0, 0, 150]},
    }))
    cfg = load_config(p)
    assert cfg.robot.m_body == 10.0
    assert cfg.human.m_body == 52.0  # untouched section keeps defaults
    assert cfg.retarget.k_spring == 250.0
    assert cfg.retarget.lqr_q == (0, 0, 150)


def test_round_trip_through_as_dict(tmp_path):
    cfg = load_config(None)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.as_dict()))
    again = load_config(p)
    assert again == cfg


def test_invalid_values_rejected(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"robot": {"m_body": -5, "m_base": 1.0, "h_com": 0.4}}))
    with pytest.raises(ParameterError):
        load_config(p)


def test_profile_loader(tmp_path):
    human, robot, poly = load_profile(None)
    assert poly.p_min == -0.05 and poly.p_max == 0.15
    p = tmp_path / "profile.json"
    p.write_text(json.dumps({"human": {"m_body": 60.0, "h_com": 1.2}}))
    human2, _, _ = load_profile(p)
    assert human2.m_body == 60.0
