#!/usr/bin/env python3
"""
bibkit Core Exceptions - Error hierarchy for dynamics and inference.

Every failure raised by the toolkit derives from :class:`BIBError`, which
carries a human-readable message, a stable ``error_code`` for programmatic
handling, and a free-form ``metadata`` dict with the numbers that explain
the failure (evidence values, mask sizes, offending labels, ...).

Exception Hierarchy:
    BIBError (base)
    ├── ConfigurationError
    ├── ValidationError
    │   ├── ShapeMismatchError
    │   ├── UnknownLabelError
    │   └── NormalizationError
    ├── DynamicsError
    │   ├── SingularDerivativeError
    │   ├── DegenerateGridError
    │   ├── EmptyMaskError
    │   ├── OutOfWindowError
    │   ├── EmptyInnerError
    │   └── EmptyShellError
    ├── InferenceError
    │   ├── ZeroEvidenceError
    │   ├── SupportMismatchError
    │   └── ExplorationRefusedError
    └── InsufficientDataError

Example Usage:
    >>> try:
    ...     posterior = bayes_update(prior, likelihood, "d2")
    ... except ZeroEvidenceError as e:
    ...     print(f"datum {e.datum} is impossible under every hypothesis")
    ... except BIBError as e:
    ...     print(f"[{e.error_code}] {e.message}")
"""

from typing import Any, Dict, Optional


class BIBError(Exception):
    """
    Base exception for all bibkit errors.

    Attributes:
        message (str): Human-readable error message
        error_code (Optional[str]): Structured error code
        metadata (Dict[str, Any]): Additional numeric or label context

    Examples:
        >>> raise BIBError("Something went wrong", error_code="general_error")
    """

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.metadata = metadata or {}

    def to_dict(self) -> Dict[str, Any]:
        """Serialize the error for machine-readable output."""
        return {
            "error_type": type(self).__name__,
            "error_code": self.error_code,
            "message": self.message,
            "metadata": self.metadata,
        }


class ConfigurationError(BIBError):
    """
    Error in configuration files, run files or environment overrides.

    Attributes:
        config_type (Optional[str]): Which configuration source failed
    """

    def __init__(
        self,
        message: str,
        config_type: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, "configuration", metadata)
        self.config_type = config_type


class ValidationError(BIBError):
    """
    Input validation error.

    Attributes:
        field (Optional[str]): Field name that failed validation
        value (Optional[Any]): Value that failed validation

    Examples:
        >>> raise ValidationError(
        ...     "degree must be at least 2",
        ...     field="coefficients",
        ...     value=[1.0, 2.0],
        ... )
    """

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        value: Optional[Any] = None,
        error_code: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, error_code or "validation", metadata)
        self.field = field
        self.value = value


class ShapeMismatchError(ValidationError):
    """Array or table shapes that must agree do not."""

    def __init__(
        self,
        message: str,
        expected: Optional[Any] = None,
        actual: Optional[Any] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(
            message, field="shape", value=actual, error_code="shape_mismatch",
            metadata=metadata,
        )
        self.expected = expected
        self.actual = actual


class UnknownLabelError(ValidationError):
    """A hypothesis or data label is not part of the current label set.

    Attributes:
        label: The offending label
        known_labels (list): Labels that would have been accepted
    """

    def __init__(
        self,
        message: str,
        label: Any = None,
        known_labels: Optional[list] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(
            message, field="label", value=label, error_code="unknown_label",
            metadata=metadata,
        )
        self.label = label
        self.known_labels = list(known_labels or [])


class NormalizationError(ValidationError):
    """A probability vector or table is negative or does not sum to one."""

    def __init__(
        self,
        message: str,
        total: Optional[float] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(
            message, field="probs", value=total, error_code="normalization",
            metadata=metadata,
        )
        self.total = total


class DynamicsError(BIBError):
    """Base class for errors raised by the complex-dynamics layer."""


class SingularDerivativeError(DynamicsError):
    """The Newton step is undefined because |f'(z)| is below the floor.

    Attributes:
        z (complex): Point where the derivative vanished
        derivative (float): Modulus of f'(z)
    """

    def __init__(self, message: str, z: complex, derivative: float):
        super().__init__(
            message,
            "singular_derivative",
            {"z": [z.real, z.imag], "derivative": derivative},
        )
        self.z = z
        self.derivative = derivative


class DegenerateGridError(DynamicsError):
    """The labeled grid carries fewer than two distinct labels."""

    def __init__(self, message: str, labels: Optional[list] = None):
        super().__init__(message, "degenerate_grid", {"labels": labels or []})
        self.labels = labels or []


class EmptyMaskError(DynamicsError):
    """A boundary mask has no marked cells."""

    def __init__(self, message: str):
        super().__init__(message, "empty_mask")


class OutOfWindowError(DynamicsError):
    """A point lies outside the sampled window of a grid."""

    def __init__(self, message: str, z: complex, window: tuple):
        super().__init__(
            message, "out_of_window", {"z": [z.real, z.imag], "window": list(window)}
        )
        self.z = z
        self.window = window


class EmptyInnerError(DynamicsError):
    """Erosion removed every cell of the inner region of a basin."""

    def __init__(self, message: str, basin_index: int, dilation_radius: int):
        super().__init__(
            message,
            "empty_inner",
            {"basin_index": basin_index, "dilation_radius": dilation_radius},
        )
        self.basin_index = basin_index
        self.dilation_radius = dilation_radius


class EmptyShellError(DynamicsError):
    """The uncertain shell of a basin holds no cells to sample from."""

    def __init__(self, message: str, basin_index: int):
        super().__init__(message, "empty_shell", {"basin_index": basin_index})
        self.basin_index = basin_index


class InferenceError(BIBError):
    """Base class for errors raised by the Bayesian and inverse-Bayesian layer."""


class ZeroEvidenceError(InferenceError):
    """The observed datum has zero probability under every supported hypothesis.

    Attributes:
        datum: The observed data label
    """

    def __init__(self, message: str, datum: Any):
        super().__init__(message, "zero_evidence", {"datum": datum})
        self.datum = datum


class SupportMismatchError(InferenceError):
    """A variational distribution puts mass where the joint has none."""

    def __init__(self, message: str, hypotheses: Optional[list] = None):
        super().__init__(
            message, "support_mismatch", {"hypotheses": hypotheses or []}
        )
        self.hypotheses = hypotheses or []


class ExplorationRefusedError(InferenceError):
    """Exploration was requested while the focus hypothesis still relates to data."""

    def __init__(self, message: str, focus: Any, related: Optional[list] = None):
        super().__init__(
            message, "exploration_refused", {"focus": focus, "related": related or []}
        )
        self.focus = focus
        self.related = related or []


class InsufficientDataError(BIBError):
    """A statistic needs more switches, runs or samples than were observed.

    Attributes:
        required (Optional[int]): Minimum count the statistic needs
        observed (Optional[int]): Count actually available
    """

    def __init__(
        self,
        message: str,
        required: Optional[int] = None,
        observed: Optional[int] = None,
    ):
        super().__init__(
            message,
            "insufficient_data",
            {"required": required, "observed": observed},
        )
        self.required = required
        self.observed = observed
