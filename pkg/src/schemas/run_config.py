"""
Pydantic schema for the run configuration file

The file is line-oriented `key<TAB>value`; list-valued keys repeat:

    language    en  en.triples.tsv
    language    fr  fr.triples.tsv
    alignment   en  fr  en-fr.alignment.tsv
    ills        en  fr  en-fr.ills.tsv
    variant     var4
    dim         75
    epochs      1000
    output_dir  runs/en-fr

Relative paths are resolved against the directory of the config file.
Lines starting with `#` are comments.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field
from pydantic import ValidationError as PydanticValidationError

from src.core.exceptions import MissingInputError, ParseError, ValidationError
from src.schemas.train import TrainConfig
from src.utils.tsv import iter_key_values

PathLike = Union[str, Path]

_TRAIN_KEYS = {
    "variant": "variant",
    "dim": "k",
    "k": "k",
    "learning_rate": "learning_rate",
    "lambda": "learning_rate",
    "alpha": "alpha",
    "norm": "norm",
    "epochs": "epochs",
    "seed": "seed",
    "shuffle": "shuffle",
    "knowledge_steps": "knowledge_steps",
    "alignment_steps": "alignment_steps",
    "threads": "threads",
    "project_relations": "project_relations",
}
_RUN_KEYS = {"test_fraction", "twa_holdout", "output_dir"}
_LIST_ARITY = {"language": 2, "alignment": 3, "ills": 3}


class RunConfig(BaseModel):
    """Inputs, hyperparameters and output location of one run"""
    languages: List[Tuple[str, Path]] = Field(..., min_length=1)
    alignments: List[Tuple[str, str, Path]] = Field(default_factory=list)
    ills: List[Tuple[str, str, Path]] = Field(default_factory=list)
    train: TrainConfig = Field(default_factory=TrainConfig)
    test_fraction: float = Field(default=0.0, ge=0, lt=1, description="Monolingual test hold-out per language")
    twa_holdout: float = Field(default=0.0, ge=0, lt=1, description="Aligned pairs isolated as TWA positives")
    output_dir: Path

    @classmethod
    def from_file(cls, path: PathLike, overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Parse a config file

        `overrides` replace train keys (e.g. threads from the command line).

        Raises:
            MissingInputError: the config file does not exist
            ParseError: unknown key or wrong field count
            ValidationError: a value fails validation
        """
        path = Path(path)
        base = path.parent
        lists: Dict[str, list] = {"language": [], "alignment": [], "ills": []}
        train: Dict[str, Any] = {}
        run: Dict[str, Any] = {}

        for number, key, values in iter_key_values(path):
            if key in _LIST_ARITY:
                if len(values) != _LIST_ARITY[key]:
                    raise ParseError(str(path), number, f"'{key}' takes {_LIST_ARITY[key]} values")
                *codes, file_name = values
                lists[key].append((*codes, base / file_name))
            elif key in _TRAIN_KEYS or key in _RUN_KEYS:
                if len(values) != 1:
                    raise ParseError(str(path), number, f"'{key}' takes one value")
                value = values[0]
                if key == "output_dir":
                    value = base / value
                if key in _TRAIN_KEYS:
                    train[_TRAIN_KEYS[key]] = value
                else:
                    run[key] = value
            else:
                raise ParseError(str(path), number, f"unknown key '{key}'")

        train.update({k: v for k, v in (overrides or {}).items() if v is not None})
        try:
            return cls(
                languages=lists["language"],
                alignments=lists["alignment"],
                ills=lists["ills"],
                train=TrainConfig(**train),
                **run
            )
        except PydanticValidationError as exc:
            errors = [
                {"field": " -> ".join(str(loc) for loc in error["loc"]), "message": error["msg"]}
                for error in exc.errors()
            ]
            raise ValidationError(
                message=f"Invalid run configuration {path}: " + "; ".join(
                    f"{e['field']}: {e['message']}" for e in errors
                ),
                error_code="INVALID_CONFIG",
                details={"errors": errors}
            ) from exc

    def input_files(self) -> List[Path]:
        return ([p for _, p in self.languages] + [p for _, _, p in self.alignments]
                + [p for _, _, p in self.ills])

    def check_inputs(self) -> None:
        """Every referenced file must exist before any work starts"""
        for path in self.input_files():
            if not path.is_file():
                raise MissingInputError(str(path))

    @property
    def model_dir(self) -> Path:
        return self.output_dir / "model"
