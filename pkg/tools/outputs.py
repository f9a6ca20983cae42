# tools/outputs.py

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Union

import pandas as pd
from pydantic import BaseModel

from fractal.weight import Exact
from protocol.results import ErrorReport, OutputHeader

logger = logging.getLogger("confdim.tools")

FLOAT_FORMAT = "%.12g"


def exact_text(value: Union[Fraction, Exact, int, None]) -> str:
    """'num/den' for rationals, 'sqrt(q)' for irrational Exact values, '' for None."""
    if value is None:
        return ""
    return str(value)


class OutputWriter:
    """Writes every artifact of one run into output_dir, each preceded by the run header."""

    def __init__(self, output_dir: Union[str, Path], header: Optional[OutputHeader] = None):
        self.output_dir = Path(output_dir)
        self.header = header
        self.written: List[Path] = []

    def _path(self, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / name

    def _header_text(self) -> str:
        return "".join(line + "\n" for line in self.header.lines()) if self.header else ""

    def _write(self, name: str, text: str) -> Path:
        path = self._path(name)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        self.written.append(path)
        logger.debug("wrote %s", path)
        return path

    def write_table(self, name: str, df: pd.DataFrame) -> Path:
        body = df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return self._write(name, self._header_text() + body)

    def write_lines(self, name: str, lines: Iterable[str]) -> Path:
        return self._write(name, self._header_text() + "".join(line + "\n" for line in lines))

    def write_json(self, name: str, report: BaseModel) -> Path:
        document = {"report": report.model_dump(mode="json")}
        if self.header:
            document = {"header": self.header.model_dump(mode="json"), **document}
        return self._write(name, json.dumps(document, indent=2) + "\n")

    def write_error(self, error: ErrorReport) -> Path:
        return self._write("error.json", error.model_dump_json(indent=2) + "\n")
