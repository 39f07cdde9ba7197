"""
Readers for BIS-style quarterly claim tables and account transaction lists.

A BIS table has one header row ``Country,<lender>,<lender>,...`` followed by
one row per debtor country.  A cell holds the amount (millions of USD) the
row country owes the column country; ``-`` or an empty cell means no claim.
Amounts may carry thousands separators (``3,179``), in which case the cell
must be quoted in the CSV.

Transaction files hold one directed account pair per line::

    source,target,n,k,y1,y2

with ``n`` transactions totalling ``k`` between years ``y1`` and ``y2``.
"""

from __future__ import annotations

import csv
import io
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .errors import (
    DuplicatePeriod,
    MalformedRow,
    UnparseableAmount,
    UnparseableRecord,
    YearOrderViolation,
)
from .graph import SnapshotSeries, WeightedDigraph, build_graph

__all__ = [
    "BisTable",
    "TransactionEdge",
    "parse_bis_csv",
    "bis_to_graph",
    "parse_transactions",
    "load_snapshot_series",
    "period_from_filename",
]

_MISSING = {"", "-", "–", "—"}


@dataclass(frozen=True)
class BisTable:
    """Debtor-by-lender claim table.

    ``cells[i][j]`` is what ``debtors[i]`` owes ``lenders[j]``, or ``None``.
    """

    lenders: tuple[str, ...]
    debtors: tuple[str, ...]
    cells: tuple[tuple[float | None, ...], ...]

    def amount(self, debtor: str, lender: str) -> float | None:
        return self.cells[self.debtors.index(debtor)][self.lenders.index(lender)]

    @property
    def countries(self) -> list[str]:
        """Debtors then lenders not already listed, in table order."""
        seen = dict.fromkeys(self.debtors)
        seen.update(dict.fromkeys(self.lenders))
        return list(seen)


@dataclass(frozen=True)
class TransactionEdge:
    source: str
    target: str
    n: int
    k: float
    y1: int
    y2: int

    @property
    def period(self) -> int:
        return self.y2 - self.y1

    @property
    def average(self) -> float:
        return self.k / self.n


def _as_text(text: str | TextIO) -> TextIO:
    return io.StringIO(text) if isinstance(text, str) else text


def _parse_amount(cell: str, line: int, source) -> float | None:
    cell = cell.strip()
    if cell in _MISSING:
        return None
    cleaned = cell.replace(",", "").replace("_", "").replace(" ", "")
    try:
        value = float(cleaned)
    except ValueError:
        raise UnparseableAmount(f"cannot parse amount {cell!r}", line, source) from None
    if value != value or value < 0 or value == float("inf"):
        raise UnparseableAmount(f"amount must be a finite non-negative number, got {cell!r}", line, source)
    return value


def parse_bis_csv(text: str | TextIO, source: str | None = None) -> BisTable:
    """Parse a BIS claim table.

    Parameters
    ----------
    text : str or file-like
        CSV content.  Blank lines are skipped.
    source : str, optional
        File name used in error messages.

    Raises
    ------
    MalformedRow
        Missing header, or a row whose cell count differs from the header.
    UnparseableAmount
        A cell that is neither a non-negative number nor a no-claim marker.
    """
    reader = csv.reader(_as_text(text))
    header = None
    debtors: list[str] = []
    rows: list[tuple[float | None, ...]] = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if header is None:
            if len(row) < 2:
                raise MalformedRow("header needs a label column and at least one lender", line, source)
            header = [c.strip() for c in row]
            if len(set(header[1:])) != len(header) - 1:
                raise MalformedRow("duplicate lender in header", line, source)
            continue
        if len(row) != len(header):
            raise MalformedRow(f"expected {len(header)} cells, found {len(row)}", line, source)
        debtor = row[0].strip()
        if not debtor:
            raise MalformedRow("empty debtor label", line, source)
        if debtor in debtors:
            raise MalformedRow(f"duplicate debtor row {debtor!r}", line, source)
        debtors.append(debtor)
        rows.append(tuple(_parse_amount(c, line, source) for c in row[1:]))
    if header is None:
        raise MalformedRow("empty table: no header row", None, source)
    return BisTable(tuple(header[1:]), tuple(debtors), tuple(rows))


def bis_to_graph(t: BisTable, labels: Iterable[str] | None = None) -> WeightedDigraph:
    """Claim table to graph: edge debtor -> lender weighted by the amount.

    Zero and missing cells give no edge.  A diagonal value (a country owing
    itself) is ignored.  ``labels`` fixes the node universe; it must contain
    every country of the table.
    """
    triples = []
    for debtor, row in zip(t.debtors, t.cells):
        for lender, amount in zip(t.lenders, row):
            if amount and debtor != lender:
                triples.append((debtor, lender, amount))
    return build_graph(triples, labels=t.countries if labels is None else labels)


def parse_transactions(
    text: str | TextIO,
    header: bool = False,
    source: str | None = None,
) -> list[TransactionEdge]:
    """Parse and merge a transaction edge list.

    Records on the same ordered account pair are merged: counts and amounts
    add up, the year span becomes ``[min y1, max y2]``.  Output order is the
    first appearance of each pair.

    Raises
    ------
    UnparseableRecord
        Wrong field count, bad integer/number, ``n < 1``, ``k < 0`` or a
        self-transfer.
    YearOrderViolation
        ``y1 > y2``.
    """
    reader = csv.reader(_as_text(text))
    merged: dict[tuple[str, str], list] = {}
    first = True
    for row in reader:
        line = reader.line_num
        if first and header:
            first = False
            continue
        first = False
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 6:
            raise UnparseableRecord(f"expected 6 fields, found {len(row)}", line, source)
        src, tgt = row[0].strip(), row[1].strip()
        if not src or not tgt:
            raise UnparseableRecord("empty account label", line, source)
        if src == tgt:
            raise UnparseableRecord(f"self-transfer on account {src!r}", line, source)
        try:
            n = int(row[2])
            k = float(row[3].replace(",", ""))
            y1 = int(row[4])
            y2 = int(row[5])
        except ValueError as exc:
            raise UnparseableRecord(str(exc), line, source) from None
        if n < 1:
            raise UnparseableRecord(f"transaction count must be >= 1, got {n}", line, source)
        if not (k >= 0) or k == float("inf"):
            raise UnparseableRecord(f"amount must be finite and >= 0, got {row[3]!r}", line, source)
        if y1 > y2:
            raise YearOrderViolation(f"start year {y1} after end year {y2}", line, source)
        rec = merged.get((src, tgt))
        if rec is None:
            merged[(src, tgt)] = [n, k, y1, y2]
        else:
            rec[0] += n
            rec[1] += k
            rec[2] = min(rec[2], y1)
            rec[3] = max(rec[3], y2)
    return [TransactionEdge(s, t, n, k, y1, y2) for (s, t), (n, k, y1, y2) in merged.items()]


_PERIOD_RE = re.compile(r"(\d{4})[-_](\d{2})(?:[-_](\d{2}))?")


def period_from_filename(path: str | os.PathLike) -> str:
    """``bis_2006-03.csv`` -> ``2006-03``; names without a date keep their stem."""
    stem = Path(path).stem.strip()
    m = _PERIOD_RE.search(stem)
    if m is None:
        return stem
    return "-".join(p for p in m.groups() if p)


def _read_table(path: str) -> BisTable:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_bis_csv(fh, source=str(path))


def load_snapshot_series(directory: str | os.PathLike, workers: int = 1) -> SnapshotSeries:
    """Load every ``*.csv`` in ``directory`` into a snapshot series.

    The period of each file comes from :func:`period_from_filename`.  Node
    ids are the sorted union of all countries seen in any quarter, so a
    country missing from a quarter is an isolated node there.

    Raises
    ------
    DuplicatePeriod
        Two files map to the same period label.
    ParseError
        Propagated from :func:`parse_bis_csv`, tagged with the file name.
    """
    files = sorted(p for p in Path(directory).iterdir() if p.is_file() and p.suffix.lower() == ".csv")
    by_period: dict[str, Path] = {}
    for p in files:
        period = period_from_filename(p)
        if period in by_period:
            raise DuplicatePeriod(f"period {period!r} appears in both {by_period[period].name} and {p.name}")
        by_period[period] = p
    periods = sorted(by_period)
    paths = [str(by_period[p]) for p in periods]
    if workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tables = list(pool.map(_read_table, paths))
    else:
        tables = [_read_table(p) for p in paths]
    universe = sorted({c for t in tables for c in t.countries})
    graphs = [bis_to_graph(t, labels=universe) for t in tables]
    return SnapshotSeries(tuple(periods), tuple(graphs))

