"""
Tests Fehler-Kategorisierung
============================
"""

import pytest

from gadget_errors import (CapacityError, ErrorCategorizer, ErrorCategory, ExitCode, FieldDomainError,
                           GadgetFileError, UsageError, VerificationError)


@pytest.mark.parametrize("error, exit_code", [
    (UsageError("q=4 ist nicht prim"), ExitCode.USAGE),
    (FieldDomainError("Inverse von 0"), ExitCode.USAGE),
    (GadgetFileError("x.json", "fehlt"), ExitCode.USAGE),
    (CapacityError("DP-Zustände", 100, 10), ExitCode.CAPACITY),
    (VerificationError("Faser leer", witness=[0]), ExitCode.VERIFICATION),
    (RuntimeError("unerwartet"), ExitCode.USAGE),
])
def test_exit_codes(error, exit_code):
    assert ErrorCategorizer.categorize(error).exit_code == exit_code


def test_capacity_hint_names_budget():
    error = CapacityError("DP-Zustände", 100, 10, "RSGADGET_STATE_CAP=100 setzen")
    categorized = ErrorCategorizer.categorize(error)
    assert categorized.category == ErrorCategory.CAPACITY
    assert categorized.hint == "RSGADGET_STATE_CAP=100 setzen"
    assert "100 > Budget 10" in categorized.original_message


def test_default_capacity_hint():
    assert "benötigt 100" in CapacityError("Teilmengen", 100, 10).resume_hint


def test_domain_error_is_usage_error_and_arithmetic():
    error = FieldDomainError("Inverse von 0")
    assert isinstance(error, UsageError)
    assert isinstance(error, ArithmeticError)
    assert ErrorCategorizer.categorize(error).category == ErrorCategory.DOMAIN


def test_file_error_carries_path():
    error = GadgetFileError("gadget.json", "kein gadget-v1")
    assert error.path == "gadget.json"
    assert str(error) == "gadget.json: kein gadget-v1"


def test_verification_error_keeps_witness():
    assert VerificationError("Zeuge", witness=[1, 2]).witness == [1, 2]
