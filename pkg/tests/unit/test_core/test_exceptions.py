"""
Unit Tests for the exception hierarchy
Tests exit codes, error codes and diagnostic payloads
"""
import pytest

from src.core.exceptions import (
    DegenerateDataError, EmptyInputError, InsufficientCasesError, InternalError, MissingInputError,
    MissingManifestError, ModelFormatError, MTransEException, NotFoundError, NumericalError,
    ParseError, ResolutionError, SingularTransitionError, TensorLengthError, UnknownLanguageError,
    UnknownPairError, ValidationError, VocabularyTooSmallError, ZeroVectorError,
)


@pytest.mark.parametrize("error, exit_code", [
    (ParseError("a.tsv", 3, "expected 3 fields"), 2),
    (EmptyInputError("ILL set"), 2),
    (VocabularyTooSmallError("en", "relations", 1), 2),
    (InsufficientCasesError("too few"), 2),
    (MissingInputError("missing.tsv"), 3),
    (ResolutionError("Rome", "fr"), 3),
    (UnknownLanguageError("de"), 3),
    (UnknownPairError("en", "de"), 3),
    (MissingManifestError("model"), 4),
    (TensorLengthError("en.entities.f32", 16, 12), 4),
    (ZeroVectorError(), 5),
    (SingularTransitionError("M_e", 1e15), 5),
    (DegenerateDataError("all rows are identical"), 5),
    (InternalError("boom"), 1),
])
def test_exit_codes(error, exit_code):
    assert error.exit_code == exit_code
    assert isinstance(error, MTransEException)


def test_families():
    assert issubclass(ParseError, ValidationError)
    assert issubclass(MissingInputError, NotFoundError)
    assert issubclass(TensorLengthError, ModelFormatError)
    assert issubclass(ZeroVectorError, NumericalError)


def test_default_error_code_from_class_name():
    assert ValidationError("bad").error_code == "VALIDATION"


def test_parse_error_names_path_and_line():
    error = ParseError("en.triples.tsv", 7, "expected 3 tab-separated fields, got 2")

    assert error.message.startswith("en.triples.tsv:7:")
    assert error.to_dict() == {
        "code": "PARSE_ERROR",
        "message": "en.triples.tsv:7: expected 3 tab-separated fields, got 2",
        "details": {"path": "en.triples.tsv", "line": 7, "reason": "expected 3 tab-separated fields, got 2"},
    }


def test_resolution_error_location_is_optional():
    plain = ResolutionError("Roma", "it")
    located = ResolutionError("Roma", "it", path="en-it.ills.tsv", line=4)

    assert "(" not in plain.message
    assert "en-it.ills.tsv:4" in located.message
    assert located.details["line"] == 4


def test_missing_input_names_the_path():
    error = MissingInputError("/data/fr.triples.tsv")

    assert "/data/fr.triples.tsv" in str(error)
    assert error.details == {"path": "/data/fr.triples.tsv"}
