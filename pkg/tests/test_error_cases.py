"""Tests for the exception hierarchy and the logging configuration."""

import logging
from unittest.mock import patch

import pytest

from iqvip.defaults import get_log_level, parse_log_level
from iqvip.errors import (
    ContractViolationError,
    DivergenceError,
    InfeasibleNetworkError,
    InsufficientSamplesError,
    InvalidConstantsError,
    IqvipError,
    NetworkFormatError,
    OutOfDomainError,
    UnsupportedVerificationError,
)


class TestErrorHierarchy:
    """Test cases for the exception classes."""

    @pytest.mark.parametrize(
        "error_class",
        [
            ContractViolationError,
            InvalidConstantsError,
            OutOfDomainError,
            NetworkFormatError,
            InsufficientSamplesError,
            InfeasibleNetworkError,
        ],
    )
    def test_value_errors(self, error_class):
        """Test that input errors can be caught as ValueError."""
        assert issubclass(error_class, IqvipError)
        assert issubclass(error_class, ValueError)

    def test_unsupported_verification_is_type_error(self):
        """Test the TypeError base of UnsupportedVerificationError."""
        assert issubclass(UnsupportedVerificationError, TypeError)

    def test_divergence_error_fields(self):
        """Test the attributes carried by DivergenceError."""
        error = DivergenceError("blew up", step=7, trace=[1, 2])
        assert isinstance(error, ArithmeticError)
        assert error.step == 7
        assert error.time is None
        assert error.trace == [1, 2]
        assert str(error) == "blew up"


class TestLogLevel:
    """Test cases for the IQVIP_LOG setting."""

    @pytest.mark.parametrize(
        "value, expected",
        [("debug", logging.DEBUG), ("INFO", logging.INFO), ("15", 15)],
    )
    def test_parse_log_level(self, value, expected):
        """Test names and integers."""
        assert parse_log_level(value) == expected

    def test_invalid_level_raises(self):
        """Test that unknown names are rejected."""
        with pytest.raises(ValueError, match="Invalid log level"):
            parse_log_level("chatty")

    def test_default_level(self):
        """Test WARNING when the variable is unset or blank."""
        assert get_log_level({}) == logging.WARNING
        assert get_log_level({"IQVIP_LOG": "  "}) == logging.WARNING

    def test_reads_environment(self):
        """Test that os.environ is read by default."""
        with patch.dict("os.environ", {"IQVIP_LOG": "error"}):
            assert get_log_level() == logging.ERROR
