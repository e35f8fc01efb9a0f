"""Custom exceptions package for the even-initialization lab."""

from .base import (
    BaseLabException,
    ValidationError,
    StructuralError,
    CapacityError,
    SamplingError,
    ConfigurationError
)

__all__ = [
    "BaseLabException",
    "ValidationError",
    "StructuralError",
    "CapacityError",
    "SamplingError",
    "ConfigurationError"
]
