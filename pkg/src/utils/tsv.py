"""
Tab-separated text helpers shared by the loaders, the run config and the model manifest
"""
from pathlib import Path
from typing import IO, Iterable, Iterator, List, Optional, Tuple, Union

from src.core.exceptions import MissingInputError, ParseError

PathLike = Union[str, Path]


def iter_fields(path: PathLike, arity: Optional[int] = None) -> Iterator[Tuple[int, List[str]]]:
    """
    Yield (1-based line number, fields) for every non-empty line

    Only the trailing newline is stripped; labels are compared byte-exact.
    With `arity` set, a line with another field count raises ParseError,
    as does a line that is not valid UTF-8.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingInputError(str(path))
    with open(path, "rb") as handle:
        for number, data in enumerate(handle, start=1):
            try:
                raw = data.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(str(path), number, f"invalid UTF-8 at byte {exc.start}") from exc
            line = raw[:-1] if raw.endswith("\n") else raw
            if not line:
                continue
            fields = line.split("\t")
            if arity is not None and len(fields) != arity:
                raise ParseError(str(path), number, f"expected {arity} tab-separated fields, found {len(fields)}")
            yield number, fields


def iter_key_values(path: PathLike) -> Iterator[Tuple[int, str, List[str]]]:
    """Yield (line number, key, value fields) of a `key<TAB>value...` file; `#` lines are comments"""
    for number, fields in iter_fields(path):
        if fields[0].startswith("#"):
            continue
        if len(fields) < 2:
            raise ParseError(str(path), number, "expected key<TAB>value")
        yield number, fields[0], fields[1:]


def write_lines(lines: Iterable[str], target: Union[PathLike, IO[str]]) -> None:
    """Write LF-terminated lines to a path (UTF-8) or an open text stream"""
    if hasattr(target, "write"):
        for line in lines:
            target.write(line + "\n")
        target.flush()
        return
    path = Path(target)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for line in lines:
            handle.write(line + "\n")
