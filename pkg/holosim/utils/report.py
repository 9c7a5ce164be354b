"""CSV emission with a '#'-prefixed provenance header."""

import csv
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Sequence, TextIO, Tuple

from holosim import __version__


def format_value(value: Any) -> str:
    """Round-trip text for a cell or header value (floats with 17 significant digits)."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if hasattr(value, "dtype"):
        return format_value(value.item())
    return str(value)


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    """Yield a text stream for ``path``, or stdout when no path is given."""
    if path is None:
        yield sys.stdout
        return
    out_path = Path(path)
    if out_path.parent and not out_path.parent.exists():
        out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as stream:
        yield stream


class CsvReport:
    """
    A result table plus the settings that produced it.

    Attributes:
        command: Command name written into the header
        columns: Column names, in order
        settings: ``(key, value)`` pairs recorded in the header
        notes: Extra ``(key, value)`` pairs (derived thresholds, crossings)
    """

    def __init__(self, command: str, columns: Sequence[str], settings: Iterable[Tuple[str, Any]]):
        self.command = command
        self.columns = list(columns)
        self.settings = list(settings)
        self.notes = []
        self.rows = []

    def add_row(self, *values: Any):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(values)

    def add_note(self, key: str, value: Any):
        self.notes.append((key, value))

    def write(self, stream: TextIO):
        stream.write(f"# holosim {__version__}\n")
        stream.write(f"# command={self.command}\n")
        for key, value in self.settings + self.notes:
            stream.write(f"# {key}={format_value(value)}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(v) for v in row])

    def save(self, path: Optional[str]):
        with open_output(path) as stream:
            self.write(stream)
