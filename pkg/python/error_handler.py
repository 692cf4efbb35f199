"""
Error Handling System for the lehmer-spectra pipeline
Provides a typed error taxonomy, an error log, and machine-readable error reports
"""

import json
import logging
import sqlite3
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Dict, Any, Optional, List

logger = logging.getLogger(__name__)


class ErrorType(Enum):
    """Types of errors that can occur in the exact and numerical pipelines"""
    EMPTY_DOMAIN = "empty_domain"
    INCOMPLETE_INPUT = "incomplete_input"
    ROLE_MISMATCH = "role_mismatch"
    ENUMERATION_LIMIT = "enumeration_limit"
    CONVERGENCE = "convergence"
    IDENTITY_FAILURE = "identity_failure"
    CACHE_CORRUPTION = "cache_corruption"
    CACHE_ERROR = "cache_error"
    CONFIG_ERROR = "config_error"
    UNKNOWN_ERROR = "unknown_error"


class ErrorSeverity(Enum):
    """Severity levels for errors"""
    LOW = "low"            # Recorded, computation continues
    MEDIUM = "medium"      # Result degraded (unstable, recomputed)
    HIGH = "high"          # Operation refused
    CRITICAL = "critical"  # Exact identity violated


DEFAULT_SEVERITY = {
    ErrorType.EMPTY_DOMAIN: ErrorSeverity.HIGH,
    ErrorType.INCOMPLETE_INPUT: ErrorSeverity.HIGH,
    ErrorType.ROLE_MISMATCH: ErrorSeverity.HIGH,
    ErrorType.ENUMERATION_LIMIT: ErrorSeverity.HIGH,
    ErrorType.CONVERGENCE: ErrorSeverity.MEDIUM,
    ErrorType.IDENTITY_FAILURE: ErrorSeverity.CRITICAL,
    ErrorType.CACHE_CORRUPTION: ErrorSeverity.MEDIUM,
    ErrorType.CACHE_ERROR: ErrorSeverity.MEDIUM,
    ErrorType.CONFIG_ERROR: ErrorSeverity.HIGH,
    ErrorType.UNKNOWN_ERROR: ErrorSeverity.MEDIUM,
}


class SpectraError(Exception):
    """Exception raised by every lehmer-spectra module"""
    def __init__(self, message: str, error_type: ErrorType,
                 severity: Optional[ErrorSeverity] = None,
                 context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_type = error_type
        self.severity = severity or DEFAULT_SEVERITY[error_type]
        self.context = context or {}
        self.timestamp = datetime.now().isoformat()


def classify_error(exception: BaseException) -> ErrorType:
    """Map a foreign exception onto the error taxonomy"""
    if isinstance(exception, SpectraError):
        return exception.error_type
    if isinstance(exception, sqlite3.DatabaseError):
        message = str(exception).lower()
        if "malformed" in message or "not a database" in message:
            return ErrorType.CACHE_CORRUPTION
        return ErrorType.CACHE_ERROR
    if isinstance(exception, (json.JSONDecodeError, UnicodeDecodeError)):
        return ErrorType.CACHE_CORRUPTION
    if isinstance(exception, OSError):
        return ErrorType.CACHE_ERROR
    if isinstance(exception, ZeroDivisionError):
        return ErrorType.CONVERGENCE
    if isinstance(exception, (ValueError, TypeError)):
        return ErrorType.CONFIG_ERROR
    return ErrorType.UNKNOWN_ERROR


class ErrorHandler:
    """Error log with severity-mapped logging and report building"""

    def __init__(self):
        self.error_log: List[Dict[str, Any]] = []

    def wrap(self, exception: BaseException,
             context: Optional[Dict[str, Any]] = None) -> SpectraError:
        """Return `exception` as a SpectraError, classifying it if needed"""
        if isinstance(exception, SpectraError):
            if context:
                exception.context.update(context)
            return exception
        return SpectraError(
            message=str(exception) or type(exception).__name__,
            error_type=classify_error(exception),
            context=context,
        )

    def log_error(self, error: SpectraError, context: Optional[Dict[str, Any]] = None):
        """Log error with detailed information"""
        error_entry = {
            "timestamp": error.timestamp,
            "error_type": error.error_type.value,
            "severity": error.severity.value,
            "message": error.message,
            "context": {**error.context, **(context or {})},
        }
        self.error_log.append(error_entry)

        log_message = f"❌ {error.error_type.value.upper()}: {error.message}"
        if error.severity == ErrorSeverity.CRITICAL:
            logger.critical(log_message)
        elif error.severity == ErrorSeverity.HIGH:
            logger.error(log_message)
        elif error.severity == ErrorSeverity.MEDIUM:
            logger.warning(log_message)
        else:
            logger.info(log_message)

    def create_error_response(self, error: SpectraError) -> Dict[str, Any]:
        """Create standardized error entry for JSON reports"""
        response = {
            "error": error.message,
            "error_type": error.error_type.value,
            "severity": error.severity.value,
            "context": {key: str(value) for key, value in error.context.items()},
        }
        return response

    def get_error_statistics(self) -> Dict[str, Any]:
        """Get error statistics for run summaries"""
        if not self.error_log:
            return {"total_errors": 0}

        error_types: Dict[str, int] = {}
        severities: Dict[str, int] = {}
        for entry in self.error_log:
            error_types[entry["error_type"]] = error_types.get(entry["error_type"], 0) + 1
            severities[entry["severity"]] = severities.get(entry["severity"], 0) + 1

        return {
            "total_errors": len(self.error_log),
            "error_types": error_types,
            "severities": severities,
            "recent_errors": self.error_log[-10:],
        }


@dataclass
class IdentityReport:
    """Outcome of an exact identity suite; a failure is data, not an exception"""
    name: str
    passed: bool = True
    checked: int = 0
    first_failure: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def record(self, ok: bool, **failure: Any) -> bool:
        """Count one check; remember the first failing one"""
        self.checked += 1
        if not ok and self.passed:
            self.passed = False
            self.first_failure = {key: str(value) for key, value in failure.items()}
            logger.error(f"❌ {self.name} failed: {self.first_failure}")
        return ok

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "first_failure": self.first_failure,
            "details": self.details,
        }


# Global error handler instance
error_handler = ErrorHandler()

__all__ = [
    'ErrorType', 'ErrorSeverity', 'SpectraError', 'ErrorHandler',
    'error_handler', 'classify_error', 'IdentityReport',
]
