"""
Custom Exception Classes for MTransE
Error handling with CLI exit codes

Every error raised by a service derives from MTransEException so the
command-line boundary can turn it into a diagnostic and an exit code.
"""
from typing import Optional, Dict, Any


class MTransEException(Exception):
    """
    Base exception for all MTransE errors

    Attributes:
        message: Human-readable error message
        error_code: Machine-readable error code (defaults to class name in UPPER_CASE)
        details: Additional error context (paths, line numbers, labels, ...)
        exit_code: Process exit code the CLI returns for this error
    """
    exit_code = 1

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code or self.__class__.__name__.replace("Error", "").upper()
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for diagnostics"""
        return {
            "code": self.error_code,
            "message": self.message,
            "details": self.details
        }


class ValidationError(MTransEException):
    """
    Exit 2 - Invalid input

    Used when configuration values, flags or operation preconditions are violated
    Examples: k = 0, negative learning rate, two unknown slots in a completion query
    """
    exit_code = 2


class NotFoundError(MTransEException):
    """
    Exit 3 - Something referenced does not exist

    Examples: missing triple file, unknown language code, label absent from a vocabulary
    """
    exit_code = 3


class ModelFormatError(MTransEException):
    """
    Exit 4 - Model directory cannot be read back

    Examples: version mismatch, truncated tensor file, manifest/tensor disagreement
    """
    exit_code = 4


class NumericalError(MTransEException):
    """
    Exit 5 - A numerical operation is undefined for the given data

    Examples: projecting the zero vector, inverting a singular matrix, PCA of identical rows
    """
    exit_code = 5


class InternalError(MTransEException):
    """
    Exit 1 - Unexpected failure
    """
    exit_code = 1


# Specific domain exceptions (inherit from base types above)

class ParseError(ValidationError):
    """Line in an input file has the wrong shape"""
    def __init__(self, path: str, line: int, reason: str):
        super().__init__(
            message=f"{path}:{line}: {reason}",
            error_code="PARSE_ERROR",
            details={"path": path, "line": line, "reason": reason}
        )


class EmptyInputError(ValidationError):
    """Input that must not be empty is empty"""
    def __init__(self, what: str):
        super().__init__(
            message=f"{what} is empty",
            error_code="EMPTY_INPUT",
            details={"input": what}
        )


class MissingInputError(NotFoundError):
    """Input file does not exist"""
    def __init__(self, path: str):
        super().__init__(
            message=f"Input file not found: {path}",
            error_code="MISSING_INPUT",
            details={"path": path}
        )


class ResolutionError(NotFoundError):
    """Surface string is not in the vocabulary it must resolve against"""
    def __init__(self, label: str, language: str, path: Optional[str] = None, line: Optional[int] = None):
        where = f" ({path}:{line})" if path is not None else ""
        super().__init__(
            message=f"Cannot resolve '{label}' in language '{language}'{where}",
            error_code="UNRESOLVABLE_LABEL",
            details={"label": label, "language": language, "path": path, "line": line}
        )


class UnknownLanguageError(NotFoundError):
    """Language code not present in the knowledge base or model"""
    def __init__(self, language: str):
        super().__init__(
            message=f"Unknown language '{language}'",
            error_code="UNKNOWN_LANGUAGE",
            details={"language": language}
        )


class UnknownPairError(NotFoundError):
    """No transition is stored for a language pair"""
    def __init__(self, source: str, target: str):
        super().__init__(
            message=f"No transition between '{source}' and '{target}'",
            error_code="UNKNOWN_PAIR",
            details={"source": source, "target": target}
        )


class ZeroVectorError(NumericalError):
    """Projection of a vector with zero norm"""
    def __init__(self):
        super().__init__(
            message="Cannot project the zero vector onto the unit sphere",
            error_code="ZERO_VECTOR"
        )


class SingularTransitionError(NumericalError):
    """Reverse transition needs the inverse of a (near) singular matrix"""
    def __init__(self, matrix: str, condition: float):
        super().__init__(
            message=f"Matrix {matrix} is singular to working precision (condition estimate {condition:.3e})",
            error_code="SINGULAR_TRANSITION",
            details={"matrix": matrix, "condition": condition}
        )


class DegenerateDataError(NumericalError):
    """Data has no spread to analyse"""
    def __init__(self, reason: str):
        super().__init__(
            message=reason,
            error_code="DEGENERATE_DATA"
        )


class VocabularyTooSmallError(ValidationError):
    """Not enough distinct elements to draw a different replacement"""
    def __init__(self, language: str, kind: str, size: int):
        super().__init__(
            message=f"Language '{language}' needs at least 2 {kind} to corrupt alignments, has {size}",
            error_code="VOCABULARY_TOO_SMALL",
            details={"language": language, "kind": kind, "size": size}
        )


class InsufficientCasesError(ValidationError):
    """Too few labeled cases for the requested evaluation"""
    def __init__(self, reason: str, **details: Any):
        super().__init__(
            message=reason,
            error_code="INSUFFICIENT_CASES",
            details=details
        )


class MissingManifestError(ModelFormatError):
    """Model directory has no manifest"""
    def __init__(self, directory: str):
        super().__init__(
            message=f"No model manifest in {directory}",
            error_code="MISSING_MANIFEST",
            details={"directory": directory}
        )


class ModelVersionError(ModelFormatError):
    """Model directory written by an incompatible format version"""
    def __init__(self, found: str, expected: int):
        super().__init__(
            message=f"Model format version {found} is not supported (expected {expected})",
            error_code="MODEL_VERSION",
            details={"found": found, "expected": expected}
        )


class TensorLengthError(ModelFormatError):
    """Tensor file size disagrees with the shape declared by the manifest"""
    def __init__(self, name: str, expected_bytes: int, actual_bytes: int):
        super().__init__(
            message=f"Tensor {name} has {actual_bytes} bytes, manifest implies {expected_bytes}",
            error_code="TENSOR_LENGTH",
            details={"tensor": name, "expected_bytes": expected_bytes, "actual_bytes": actual_bytes}
        )
