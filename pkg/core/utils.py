import csv
import json
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from core.errors import ConfigError

DECIMALS = 6


def fmt(value: float) -> str:
    """Formats a float with the fixed output precision."""
    return f"{float(value):.{DECIMALS}f}"


def round_nested(value: Any) -> Any:
    """Rounds every float inside nested lists/tuples/dicts to the output precision."""
    if isinstance(value, float):
        return round(value, DECIMALS)
    if isinstance(value, dict):
        return {k: round_nested(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_nested(v) for v in value]
    return value


def parse_float_list(text: str | Sequence[float], name: str = "value") -> list[float]:
    """
    Parses a comma separated list of floats.

    Args:
        text: String such as "0,5,10" or an already parsed sequence
        name: Field name used in error messages

    Returns:
        List of floats

    Raises:
        ConfigError: If an item is not a number
    """
    if not isinstance(text, str):
        return [float(v) for v in text]
    items = [item.strip() for item in text.split(",") if item.strip()]
    try:
        return [float(item) for item in items]
    except ValueError:
        raise ConfigError(f"Invalid number list for {name}: '{text}'")


@contextmanager
def atomic_output(path: str | Path, newline: str | None = None) -> Iterator[Any]:
    """
    Opens ``path`` for writing through a temporary sibling file.

    The temporary file only replaces ``path`` when the block exits without
    an exception, so a failed stage never leaves a partial artifact.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(f".{path.name}.tmp")
    try:
        with open(tmp_path, "w", encoding="utf-8", newline=newline) as f:
            yield f
        os.replace(tmp_path, path)
    finally:
        if tmp_path.exists():
            try:
                os.remove(tmp_path)
            except OSError:
                pass  # Ignore cleanup errors


def write_json(path: str | Path, payload: dict[str, Any]) -> Path:
    with atomic_output(path) as f:
        json.dump(round_nested(payload), f, indent=2)
        f.write("\n")
    return Path(path)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Writes a CSV file with floats at the fixed output precision."""
    with atomic_output(path, newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return Path(path)


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))
