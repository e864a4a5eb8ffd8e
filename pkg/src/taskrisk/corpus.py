"""Parse, validate, merge, and standardize occupation-attribute inputs.

Input files are UTF-8 delimited tables (comma or tab) with a header row.
Occupations missing any catalog attribute are dropped listwise; no
imputation is performed.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateColumnError,
    DuplicateKeyError,
    EmptyCorpusError,
    InputFormatError,
    InputValidationError,
    ParameterError,
)

SOC_PATTERN = re.compile(r"^\d{2}-\d{4}(\.\d{2})?$")

CATEGORIES = ("bottleneck", "hazard", "routine")


def soc_prefix(code: str) -> str:
    """6-digit SOC prefix (`NN-NNNN`) used to merge with employment data."""
    return code[:7]


@dataclass(frozen=True)
class AttributeObservation:
    """One importance score for one occupation-attribute pair."""

    soc_code: str
    attribute_id: str
    importance: float

    def __post_init__(self):
        if not SOC_PATTERN.match(self.soc_code):
            raise InputValidationError([(0, f"bad SOC code {self.soc_code!r}")])
        if not self.attribute_id:
            raise InputValidationError([(0, "empty attribute_id")])
        if not 0.0 <= self.importance <= 100.0:
            raise InputValidationError(
                [(0, f"importance {self.importance} outside [0, 100]")]
            )


@dataclass(frozen=True)
class CatalogEntry:
    attribute_id: str
    category: str
    label: str


@dataclass(frozen=True)
class AttributeCatalog:
    """Ordered attribute selection with bottleneck/hazard/routine categories."""

    entries: tuple[CatalogEntry, ...]

    def __post_init__(self):
        ids = [e.attribute_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise DuplicateKeyError("catalog attribute_ids are not unique")
        for e in self.entries:
            if e.category not in CATEGORIES:
                raise ParameterError(f"unknown catalog category {e.category!r}")

    @property
    def ids(self) -> list[str]:
        return [e.attribute_id for e in self.entries]

    def category_counts(self) -> dict[str, int]:
        counts = {c: 0 for c in CATEGORIES}
        for e in self.entries:
            counts[e.category] += 1
        return counts


@dataclass
class OccupationMatrix:
    """Dense occupations-by-attributes matrix; no missing cells by construction."""

    occupation_ids: list[str]
    attribute_ids: list[str]
    values: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        n, p = self.values.shape
        if len(self.occupation_ids) != n or len(self.attribute_ids) != p:
            raise ParameterError("id lists do not match matrix dimensions")
        if len(set(self.occupation_ids)) != n:
            raise DuplicateKeyError("occupation_ids are not unique")
        if len(set(self.attribute_ids)) != p:
            raise DuplicateKeyError("attribute_ids are not unique")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("matrix contains non-finite cells")
        if self.standardized:
            means = self.values.mean(axis=0)
            sds = self.values.std(axis=0, ddof=1)
            if np.max(np.abs(means)) > 1e-9 or np.max(np.abs(sds - 1.0)) > 1e-9:
                raise ParameterError(
                    "matrix flagged standardized but columns are not z-scored"
                )

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass
class EmploymentSeries:
    """soc_code -> year -> national headcount."""

    records: dict[str, dict[int, float]] = field(default_factory=dict)

    def add(self, soc_code: str, year: int, headcount: float) -> None:
        if headcount < 0:
            raise InputValidationError([(0, f"negative headcount for {soc_code}")])
        years = self.records.setdefault(soc_code, {})
        if year in years:
            raise DuplicateKeyError(f"duplicate employment record ({soc_code}, {year})")
        years[year] = headcount

    def by_prefix(self) -> dict[str, dict[int, float]]:
        """Aggregate by 6-digit SOC prefix, summing headcounts per year."""
        merged: dict[str, dict[int, float]] = {}
        for code in sorted(self.records):
            pref = soc_prefix(code)
            tgt = merged.setdefault(pref, {})
            for year, count in self.records[code].items():
                tgt[year] = tgt.get(year, 0.0) + count
        return merged


@dataclass(frozen=True)
class DroppedOccupation:
    soc_code: str
    missing_attribute_ids: tuple[str, ...]


def _sniff_delimiter(header_line: str, declared: str | None) -> str:
    if declared is not None:
        if declared not in (",", "\t"):
            raise ParameterError(f"unsupported delimiter {declared!r}")
        return declared
    return "\t" if "\t" in header_line else ","


def _read_delimited(stream, required: list[str], delimiter: str | None):
    """Yield (line_number, {column: cell}) for each data row.

    Lines starting with '#' are comments. Line numbers refer to the
    physical file so validation errors are actionable.
    """
    text = stream.read()
    numbered = [
        (no, line)
        for no, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.startswith("#")
    ]
    if not numbered:
        raise InputFormatError("empty input: missing header row")
    delim = _sniff_delimiter(numbered[0][1], delimiter)
    header = [h.strip().lower() for h in next(csv.reader([numbered[0][1]], delimiter=delim))]
    missing = [c for c in required if c not in header]
    if missing:
        raise InputFormatError(
            f"header {header!r} is missing column(s) {', '.join(missing)}"
        )
    index = {c: header.index(c) for c in required}
    for line_no, line in numbered[1:]:
        row = next(csv.reader([line], delimiter=delim))
        if len(row) < len(header):
            yield line_no, None
            continue
        yield line_no, {c: row[index[c]].strip() for c in required}


def parse_attribute_file(stream, delimiter: str | None = None) -> list[AttributeObservation]:
    """Parse rows of (soc_code, attribute_id, importance).

    Raises InputValidationError listing every failing row with its line
    number; a header-only file yields an empty list.
    """
    observations: list[AttributeObservation] = []
    problems: list[tuple[int, str]] = []
    for line_no, cells in _read_delimited(
        stream, ["soc_code", "attribute_id", "importance"], delimiter
    ):
        if cells is None:
            problems.append((line_no, "row has fewer cells than the header"))
            continue
        soc = cells["soc_code"]
        attr = cells["attribute_id"]
        if not SOC_PATTERN.match(soc):
            problems.append((line_no, f"bad SOC code {soc!r}"))
            continue
        if not attr:
            problems.append((line_no, "empty attribute_id"))
            continue
        try:
            importance = float(cells["importance"])
        except ValueError:
            problems.append((line_no, f"importance {cells['importance']!r} is not a number"))
            continue
        if not math.isfinite(importance) or not 0.0 <= importance <= 100.0:
            problems.append((line_no, f"importance {importance} outside [0, 100]"))
            continue
        observations.append(AttributeObservation(soc, attr, importance))
    if problems:
        raise InputValidationError(problems)
    return observations


def parse_employment_file(stream, delimiter: str | None = None) -> EmploymentSeries:
    """Parse rows of (soc_code, year, employment) into an EmploymentSeries."""
    series = EmploymentSeries()
    problems: list[tuple[int, str]] = []
    for line_no, cells in _read_delimited(
        stream, ["soc_code", "year", "employment"], delimiter
    ):
        if cells is None:
            problems.append((line_no, "row has fewer cells than the header"))
            continue
        soc = cells["soc_code"]
        if not SOC_PATTERN.match(soc):
            problems.append((line_no, f"bad SOC code {soc!r}"))
            continue
        try:
            year = int(cells["year"])
            headcount = float(cells["employment"])
        except ValueError:
            problems.append((line_no, "year or employment is not numeric"))
            continue
        if not math.isfinite(headcount) or headcount < 0:
            problems.append((line_no, f"negative or non-finite headcount {headcount}"))
            continue
        try:
            series.add(soc, year, headcount)
        except DuplicateKeyError as exc:
            raise DuplicateKeyError(f"line {line_no}: {exc}") from None
    if problems:
        raise InputValidationError(problems)
    return series


def parse_catalog_file(stream, delimiter: str | None = None) -> AttributeCatalog:
    """Parse rows of (attribute_id, category, label); category is one of
    bottleneck/hazard/routine, case-insensitive."""
    entries: list[CatalogEntry] = []
    problems: list[tuple[int, str]] = []
    seen: set[str] = set()
    for line_no, cells in _read_delimited(
        stream, ["attribute_id", "category", "label"], delimiter
    ):
        if cells is None:
            problems.append((line_no, "row has fewer cells than the header"))
            continue
        attr = cells["attribute_id"]
        category = cells["category"].lower()
        if not attr:
            problems.append((line_no, "empty attribute_id"))
            continue
        if category not in CATEGORIES:
            problems.append((line_no, f"unknown category {cells['category']!r}"))
            continue
        if attr in seen:
            raise DuplicateKeyError(f"line {line_no}: duplicate catalog attribute {attr!r}")
        seen.add(attr)
        entries.append(CatalogEntry(attr, category, cells["label"]))
    if problems:
        raise InputValidationError(problems)
    return AttributeCatalog(tuple(entries))


def build_matrix(
    observations: list[AttributeObservation], catalog: AttributeCatalog
) -> tuple[OccupationMatrix, list[DroppedOccupation]]:
    """Assemble the occupations-by-attributes matrix over catalog columns.

    Occupations missing at least one catalog attribute are dropped and
    listed in the returned drop report. Observations for attributes outside
    the catalog are ignored. Rows are ordered by ascending soc_code.
    """
    if not catalog.entries:
        raise ParameterError("catalog is empty")
    col_of = {attr: j for j, attr in enumerate(catalog.ids)}
    per_occ: dict[str, dict[str, float]] = {}
    for obs in observations:
        cells = per_occ.setdefault(obs.soc_code, {})
        if obs.attribute_id not in col_of:
            continue
        if obs.attribute_id in cells:
            raise DuplicateKeyError(
                f"duplicate observation ({obs.soc_code}, {obs.attribute_id})"
            )
        cells[obs.attribute_id] = obs.importance

    kept: list[str] = []
    dropped: list[DroppedOccupation] = []
    for soc in sorted(per_occ):
        missing = tuple(a for a in catalog.ids if a not in per_occ[soc])
        if missing:
            dropped.append(DroppedOccupation(soc, missing))
        else:
            kept.append(soc)
    if not kept:
        raise EmptyCorpusError("no occupation has a complete attribute set")

    values = np.empty((len(kept), len(catalog.ids)))
    for i, soc in enumerate(kept):
        row = per_occ[soc]
        for attr, j in col_of.items():
            values[i, j] = row[attr]
    matrix = OccupationMatrix(kept, list(catalog.ids), values, standardized=False)
    return matrix, dropped


def standardize(matrix: OccupationMatrix) -> OccupationMatrix:
    """Z-score every column with the sample (n-1) standard deviation."""
    if matrix.standardized:
        raise ParameterError("matrix is already standardized")
    n = matrix.shape[0]
    if n < 3:
        raise ParameterError(f"need at least 3 occupations to standardize, got {n}")
    means = matrix.values.mean(axis=0)
    centered = matrix.values - means
    sds = np.sqrt((centered * centered).sum(axis=0) / (n - 1))
    flat = [matrix.attribute_ids[j] for j in np.nonzero(sds == 0.0)[0]]
    if flat:
        raise DegenerateColumnError(
            f"constant column(s) cannot be standardized: {', '.join(flat)}"
        )
    return OccupationMatrix(
        list(matrix.occupation_ids),
        list(matrix.attribute_ids),
        centered / sds,
        standardized=True,
    )
