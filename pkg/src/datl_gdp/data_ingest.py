"""World Bank indicator CSV ingestion, per-country series assembly and feature scaling."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (
    EmptyDatasetError,
    FormatError,
    IncompleteFeaturesError,
    ParseError,
    UnknownCountryError,
    ValidationError,
)

DEFAULT_YEAR_WINDOW = (1960, 2013)

FEATURE_CHANNELS = ("gas_pct", "liquid_pct", "solid_pct", "co2_per_capita")
LABEL_CHANNEL = "gdp_per_capita"
CHANNELS = FEATURE_CHANNELS + (LABEL_CHANNEL,)
PERCENT_CHANNELS = ("gas_pct", "liquid_pct", "solid_pct")
PERCENT_BOUND = 110.0

# World Bank codes for the five roles, in channel order.
DEFAULT_INDICATOR_CODES = {
    "gas_pct": "EN.ATM.CO2E.GF.ZS",
    "liquid_pct": "EN.ATM.CO2E.LF.ZS",
    "solid_pct": "EN.ATM.CO2E.SF.ZS",
    "co2_per_capita": "EN.ATM.CO2E.PC",
    "gdp_per_capita": "NY.GDP.PCAP.CD",
}

_HEADER = ("Country Name", "Country Code", "Indicator Name", "Indicator Code")
_MISSING_TOKENS = {"", ".."}


@dataclass(frozen=True)
class RawIndicatorTable:
    indicator_code: str
    rows: Mapping[str, Mapping[int, Optional[float]]]
    year_window: tuple[int, int] = DEFAULT_YEAR_WINDOW
    country_names: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.year_window
        for code, by_year in self.rows.items():
            for year, value in by_year.items():
                if not lo <= year <= hi:
                    raise ValidationError(f"{code}: year {year} outside window {self.year_window}")
                if value is not None and not math.isfinite(value):
                    raise ValidationError(f"{code}/{year}: non-finite value {value!r}")


def _find_header(rows):
    for idx, row in enumerate(rows):
        cells = [c.strip().lstrip("﻿") for c in row]
        if "Country Name" in cells:
            missing = [h for h in _HEADER if h not in cells]
            if missing:
                raise FormatError(f"header row {idx + 1} lacks column(s) {missing}")
            return idx, cells
    return None, None


def parse_worldbank_csv(text, indicator_code, year_window=DEFAULT_YEAR_WINDOW):
    """Parse one wide-format World Bank indicator CSV into a RawIndicatorTable.

    Preamble lines before the ``"Country Name",...`` header are skipped.  Empty,
    whitespace-only and ``..`` cells become missing (``None``).  Year columns
    outside ``year_window`` are dropped.  Rows whose Indicator Code differs from
    ``indicator_code`` are ignored; a file with data rows but no matching row is a
    format error.
    """
    lo, hi = year_window
    if lo > hi:
        raise ValueError(f"empty year window {year_window}")
    rows = list(csv.reader(io.StringIO(text)))
    header_idx, header = _find_header(rows)
    if header_idx is None:
        raise FormatError(f"World Bank header row not found; file starts with {text[:80]!r}")

    name_col = header.index("Country Name")
    code_col = header.index("Country Code")
    ind_col = header.index("Indicator Code")
    year_cols = []
    for col, cell in enumerate(header):
        if cell.isdigit():
            year = int(cell)
            if lo <= year <= hi:
                year_cols.append((col, year))

    table: dict[str, dict[int, Optional[float]]] = {}
    names: dict[str, str] = {}
    seen_data = False
    for line_no, row in enumerate(rows[header_idx + 1:], start=header_idx + 2):
        if not row or all(not c.strip() for c in row):
            continue
        seen_data = True
        if len(row) <= max(code_col, ind_col):
            raise ParseError(f"line {line_no}: truncated row", row=line_no)
        if row[ind_col].strip() != indicator_code:
            continue
        code = row[code_col].strip()
        values: dict[int, Optional[float]] = {}
        for col, year in year_cols:
            cell = row[col].strip() if col < len(row) else ""
            if cell in _MISSING_TOKENS:
                values[year] = None
                continue
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"line {line_no}, column {col + 1} ({year}): non-numeric cell {cell!r}",
                    row=line_no, column=col + 1,
                ) from None
            if not math.isfinite(value):
                raise ParseError(
                    f"line {line_no}, column {col + 1} ({year}): non-finite cell {cell!r}",
                    row=line_no, column=col + 1,
                )
            values[year] = value
        table[code] = values
        names[code] = row[name_col].strip()
    if seen_data and not table:
        raise FormatError(f"no rows with Indicator Code {indicator_code!r}")
    return RawIndicatorTable(indicator_code, table, (lo, hi), names)


def read_worldbank_csv(path, indicator_code, year_window=DEFAULT_YEAR_WINDOW):
    with open(path, encoding="utf-8-sig") as fh:
        return parse_worldbank_csv(fh.read(), indicator_code, year_window)


@dataclass(frozen=True)
class CountrySeries:
    """Per-year emission inputs and GDP label for one country; ``None`` marks missing."""

    country_code: str
    years: tuple[int, ...]
    gas_pct: tuple[Optional[float], ...]
    liquid_pct: tuple[Optional[float], ...]
    solid_pct: tuple[Optional[float], ...]
    co2_per_capita: tuple[Optional[float], ...]
    gdp_per_capita: tuple[Optional[float], ...]
    country_name: str = ""

    def __post_init__(self):
        if list(self.years) != sorted(set(self.years)):
            raise ValidationError(f"{self.country_code}: years must be strictly increasing")
        for name in CHANNELS:
            values = getattr(self, name)
            if len(values) != len(self.years):
                raise ValidationError(f"{self.country_code}: channel {name} not aligned with years")
            for year, v in zip(self.years, values):
                if v is None:
                    continue
                if not math.isfinite(v):
                    raise ValidationError(f"{self.country_code}/{year}: {name} is not finite")
                if name in PERCENT_CHANNELS and not 0.0 <= v <= PERCENT_BOUND:
                    raise ValidationError(f"{self.country_code}/{year}: {name}={v} outside [0, {PERCENT_BOUND}]")
                if name not in PERCENT_CHANNELS and v < 0:
                    raise ValidationError(f"{self.country_code}/{year}: {name}={v} is negative")

    def channel(self, name):
        return getattr(self, name)

    def restrict(self, first, last):
        keep = [i for i, y in enumerate(self.years) if first <= y <= last]
        picked = {name: tuple(getattr(self, name)[i] for i in keep) for name in CHANNELS}
        return CountrySeries(self.country_code, tuple(self.years[i] for i in keep),
                             country_name=self.country_name, **picked)

    def complete_years(self):
        return [y for i, y in enumerate(self.years)
                if all(getattr(self, c)[i] is not None for c in CHANNELS)]

    def missing_label_years(self, require_inputs=False):
        out = []
        for i, y in enumerate(self.years):
            if self.gdp_per_capita[i] is not None:
                continue
            if require_inputs and any(getattr(self, c)[i] is None for c in FEATURE_CHANNELS):
                continue
            out.append(y)
        return out


def build_country_series(tables: Sequence[RawIndicatorTable], country_code):
    """Assemble a CountrySeries from five tables given in channel order."""
    if len(tables) != len(CHANNELS):
        raise ValueError(f"expected {len(CHANNELS)} tables, got {len(tables)}")
    present = [t.rows.get(country_code) for t in tables]
    if all(p is None for p in present):
        raise UnknownCountryError(f"country {country_code!r} not found in any indicator table")
    years = sorted(set().union(*(p.keys() for p in present if p is not None)))
    channels = {
        name: tuple((p or {}).get(y) for y in years)
        for name, p in zip(CHANNELS, present)
    }
    name = next((t.country_names.get(country_code, "") for t in tables
                 if t.country_names.get(country_code)), "")
    return CountrySeries(country_code, tuple(years), country_name=name, **channels)


def missing_windows(series: CountrySeries, channel=LABEL_CHANNEL):
    """Contiguous (start, end) spans of years where ``channel`` is missing."""
    windows = []
    for year, value in zip(series.years, series.channel(channel)):
        if value is not None:
            continue
        if windows and windows[-1][1] == year - 1:
            windows[-1] = (windows[-1][0], year)
        else:
            windows.append((year, year))
    return windows


def completeness(series: CountrySeries):
    """Per-channel count of present years and the missing windows."""
    return {
        name: {
            "present": sum(v is not None for v in series.channel(name)),
            "missing": sum(v is None for v in series.channel(name)),
            "missing_windows": missing_windows(series, name),
        }
        for name in CHANNELS
    }


@dataclass(frozen=True, eq=False)
class Dataset:
    """Aligned feature matrix, label vector, year index and per-row origin country.

    Unlabeled datasets (targets of missing-value prediction) carry NaN labels
    and ``labeled=False``.
    """

    years: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    origin_tags: tuple[str, ...]
    labeled: bool = True

    def __post_init__(self):
        years = np.asarray(self.years, dtype=np.int64).reshape(-1)
        features = np.asarray(self.features, dtype=np.float64).reshape(-1, len(FEATURE_CHANNELS))
        labels = np.asarray(self.labels, dtype=np.float64).reshape(-1)
        n = len(years)
        if features.shape[0] != n or labels.shape[0] != n or len(self.origin_tags) != n:
            raise ValidationError(
                f"misaligned dataset: years={n} features={features.shape[0]} "
                f"labels={labels.shape[0]} tags={len(self.origin_tags)}"
            )
        if not np.all(np.isfinite(features)):
            raise ValidationError("dataset features must be finite")
        if self.labeled and not np.all(np.isfinite(labels)):
            raise ValidationError("dataset labels must be finite")
        for name, arr in (("years", years), ("features", features), ("labels", labels)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "origin_tags", tuple(self.origin_tags))

    def __len__(self):
        return len(self.years)

    @property
    def n(self):
        return len(self.years)

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.years[idx], self.features[idx], self.labels[idx],
                       tuple(self.origin_tags[i] for i in idx), self.labeled)

    def with_features(self, features):
        return Dataset(self.years, features, self.labels, self.origin_tags, self.labeled)

    @staticmethod
    def concat(*parts: "Dataset"):
        return Dataset(
            np.concatenate([p.years for p in parts]),
            np.concatenate([p.features for p in parts]),
            np.concatenate([p.labels for p in parts]),
            tuple(t for p in parts for t in p.origin_tags),
            all(p.labeled for p in parts),
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.labeled == other.labeled and self.origin_tags == other.origin_tags
                and np.array_equal(self.years, other.years)
                and np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels, equal_nan=True))


def to_training_dataset(series: CountrySeries):
    """Rows for the years where all four inputs and the GDP label are present."""
    idx = [i for i in range(len(series.years))
           if all(series.channel(c)[i] is not None for c in CHANNELS)]
    if not idx:
        raise EmptyDatasetError(f"{series.country_code}: no year has all inputs and GDP present")
    return Dataset(
        [series.years[i] for i in idx],
        [[series.channel(c)[i] for c in FEATURE_CHANNELS] for i in idx],
        [series.gdp_per_capita[i] for i in idx],
        (series.country_code,) * len(idx),
    )


def to_prediction_dataset(series: CountrySeries, years):
    """Feature-only dataset for ``years``; labels are NaN and must not be read."""
    years = sorted(set(int(y) for y in years))
    position = {y: i for i, y in enumerate(series.years)}
    gaps = []
    rows = []
    for y in years:
        i = position.get(y)
        if i is None:
            gaps.extend((y, c) for c in FEATURE_CHANNELS)
            continue
        row = [series.channel(c)[i] for c in FEATURE_CHANNELS]
        gaps.extend((y, c) for c, v in zip(FEATURE_CHANNELS, row) if v is None)
        rows.append(row)
    if gaps:
        listed = ", ".join(f"{y}:{c}" for y, c in gaps[:10])
        more = f" (+{len(gaps) - 10} more)" if len(gaps) > 10 else ""
        raise IncompleteFeaturesError(
            f"{series.country_code}: missing inputs for {listed}{more}", missing=gaps
        )
    return Dataset(years, np.asarray(rows, dtype=np.float64).reshape(-1, len(FEATURE_CHANNELS)),
                   np.full(len(years), np.nan), (series.country_code,) * len(years), labeled=False)


@dataclass(frozen=True, eq=False)
class Standardizer:
    means: np.ndarray
    stdevs: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.stdevs) <= 0):
            raise ValidationError("standardizer stdevs must be positive")

    def transform(self, x):
        return (np.asarray(x, dtype=np.float64) - self.means) / self.stdevs

    def inverse_transform(self, z):
        return np.asarray(z, dtype=np.float64) * self.stdevs + self.means


CONSTANT_COLUMN_STD = 1e-12


def fit_standardizer(train: Dataset):
    """Column z-score statistics from ``train``.

    Constant columns (stdev below 1e-12) get mean 0 and stdev 1, which leaves
    them untouched by ``apply``.
    """
    if train.n == 0:
        raise EmptyDatasetError("cannot fit a standardizer on an empty dataset")
    means = train.features.mean(axis=0)
    stdevs = train.features.std(axis=0)
    constant = stdevs < CONSTANT_COLUMN_STD
    means = np.where(constant, 0.0, means)
    stdevs = np.where(constant, 1.0, stdevs)
    return Standardizer(means, stdevs)


def apply(std: Standardizer, d: Dataset):
    return d.with_features(std.transform(d.features))


def invert(std: Standardizer, d: Dataset):
    return d.with_features(std.inverse_transform(d.features))
