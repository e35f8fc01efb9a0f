"""Base exception classes for the even-initialization lab."""


class BaseLabException(Exception):
    """Base exception for all lab errors."""

    def __init__(self, message: str, details: str = None):
        self.message = message
        self.details = details
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.details:
            return f"{self.message}: {self.details}"
        return self.message


class ValidationError(BaseLabException):
    """Exception raised when a value is outside its admissible domain."""
    pass


class StructuralError(BaseLabException):
    """Exception raised when shapes, paths or lengths do not match a network."""
    pass


class CapacityError(BaseLabException):
    """Exception raised when a request exceeds an enumeration or dense-algebra budget."""
    pass


class SamplingError(BaseLabException):
    """Exception raised when a sampler cannot produce an in-support draw."""
    pass


class ConfigurationError(BaseLabException):
    """Exception raised when an experiment config is invalid."""

    def __init__(self, message: str, details: str = None, field_path: str = None):
        super().__init__(message, details)
        self.field_path = field_path

    def __str__(self) -> str:
        rendered = super().__str__()
        if self.field_path:
            return f"{rendered} (at {self.field_path})"
        return rendered
