"""
Tests Labor-Konfiguration
=========================
"""

import json
from fractions import Fraction

import pytest

from gadget_errors import UsageError
from lab_config import (DEFAULT_BUDGETS, Budgets, RunConfig, budgets_from_environment, load_lab_config,
                        parse_int_range, parse_prime_range, parse_rational)


@pytest.mark.parametrize("text, expected", [
    ("1/2", Fraction(1, 2)),
    ("0.25", Fraction(1, 4)),
    ("3", Fraction(3)),
    (2, Fraction(2)),
    (Fraction(2, 3), Fraction(2, 3)),
])
def test_parse_rational(text, expected):
    assert parse_rational(text) == expected


@pytest.mark.parametrize("text", [0.5, True, "eins", "1/0"])
def test_parse_rational_rejects(text):
    with pytest.raises(UsageError):
        parse_rational(text, "epsilon")


def test_parse_int_range():
    assert parse_int_range("7") == [7]
    assert parse_int_range("2..4") == [2, 3, 4]
    assert parse_int_range("5,3,3..4") == [3, 4, 5]
    with pytest.raises(UsageError):
        parse_int_range("5..3")
    with pytest.raises(UsageError):
        parse_int_range("a..b")


def test_parse_prime_range_keeps_primes():
    assert parse_prime_range("2..20") == [3, 5, 7, 11, 13, 17, 19]
    assert parse_prime_range("9") == [9]  # Einzelwert wird später mit Teiler abgelehnt
    with pytest.raises(UsageError):
        parse_prime_range("8..10")


def test_budgets_must_be_positive():
    with pytest.raises(UsageError):
        Budgets(state_cap=0)
    with pytest.raises(UsageError):
        Budgets(dense_cap=-1)


def test_budgets_from_dict_ignores_unknown_keys():
    budgets = Budgets.from_dict({"state_cap": "500", "unbekannt": 1})
    assert budgets.state_cap == 500
    assert budgets.dense_cap == DEFAULT_BUDGETS.dense_cap


def test_environment_overrides_budgets():
    budgets = budgets_from_environment(DEFAULT_BUDGETS, {"RSGADGET_STATE_CAP": "1000", "RSGADGET_WORK_CAP": "7"})
    assert budgets.state_cap == 1000
    assert budgets.work_cap == 7
    assert budgets_from_environment(DEFAULT_BUDGETS, {}) is DEFAULT_BUDGETS
    with pytest.raises(UsageError):
        budgets_from_environment(DEFAULT_BUDGETS, {"RSGADGET_ENUM_CAP": "viel"})


def test_load_lab_config(tmp_path):
    missing = load_lab_config(tmp_path / "fehlt.json")
    assert missing["budgets"] == DEFAULT_BUDGETS.to_dict()
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"budgets": {"state_cap": 5}, "settings": {"jobs": 2}}), encoding="utf-8")
    assert load_lab_config(path)["settings"]["jobs"] == 2


def test_shipped_config_is_valid():
    config = load_lab_config()
    assert Budgets.from_dict(config["budgets"]) == DEFAULT_BUDGETS
    assert config["defaults"]["epsilon"] == "1/2"


def test_run_config_accessors():
    run = RunConfig("verify", {"q": "7", "epsilon": "1/2"})
    assert run.integer("q") == 7
    assert run.integer("k") is None
    assert run.integer("r", 1) == 1
    assert run.rational("epsilon") == Fraction(1, 2)
    with pytest.raises(UsageError):
        RunConfig("verify", {"q": "sieben"}).integer("q")


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig("count", fmt="xml")
    with pytest.raises(UsageError):
        RunConfig("count", jobs=0)


def test_run_config_dict_round_trip():
    run = RunConfig("count", {"q": "7..11", "k": "2"}, Budgets(state_cap=99), output="x.csv", fmt="csv", jobs=2)
    data = run.to_dict()
    assert list(data["parameters"]) == ["k", "q"]
    assert RunConfig.from_dict(data) == run
