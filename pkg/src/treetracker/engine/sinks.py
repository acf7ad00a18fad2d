"""Result consumers. Executors call ``open`` once, ``emit`` per row, ``close`` once."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence


class OutputSink:
    header: tuple[str, ...] = ()

    def open(self, header: Sequence[str]) -> None:
        self.header = tuple(header)

    def emit(self, row: tuple) -> None:
        raise NotImplementedError

    def close(self) -> None:
        pass


class CollectSink(OutputSink):
    def __init__(self) -> None:
        self.rows: list[tuple] = []
        self.emit = self.rows.append

    def project(self, variables: Sequence[str]) -> list[tuple]:
        """Rows re-ordered to ``variables``."""
        cols = [self.header.index(v) for v in variables]
        return [tuple(r[c] for c in cols) for r in self.rows]


class CountSink(OutputSink):
    def __init__(self) -> None:
        self.count = 0

    def emit(self, row: tuple) -> None:
        self.count += 1


class CsvSink(OutputSink):
    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._fh = None
        self._writer = None

    def open(self, header: Sequence[str]) -> None:
        super().open(header)
        self._fh = open(self.path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(self.header)
        self.emit = self._writer.writerow

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
