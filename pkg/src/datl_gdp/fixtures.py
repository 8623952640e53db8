"""Writer for the pinned World Bank-format fixture corpus.

The corpus stands in for a World Bank download: five wide-format indicator
CSVs with the usual four-line metadata preamble, quoted cells and a trailing
comma on every row.  Trajectories are piecewise-linear through hand-set knots
(roughly tracking the real series) plus small seeded noise.  GDP gaps
follow the documented missing-value windows; CO2 columns stop after 2014.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .data_ingest import CHANNELS, DEFAULT_INDICATOR_CODES

FIXTURE_YEARS = (1960, 2016)
LAST_EMISSION_YEAR = 2014

INDICATOR_NAMES = {
    "gas_pct": "CO2 emissions from gaseous fuel consumption (% of total)",
    "liquid_pct": "CO2 emissions from liquid fuel consumption (% of total)",
    "solid_pct": "CO2 emissions from solid fuel consumption (% of total)",
    "co2_per_capita": "CO2 emissions (metric tons per capita)",
    "gdp_per_capita": "GDP per capita (current US$)",
}

# knots: channel -> ((year, value), ...); gdp_missing: inclusive (start, end) windows
COUNTRIES = {
    "USA": dict(
        name="United States",
        co2_per_capita=((1960, 16.0), (1973, 22.5), (1983, 18.8), (2000, 20.2), (2013, 16.4)),
        gdp_per_capita=((1960, 3007), (1970, 5234), (1980, 12575), (1990, 23889), (2000, 36450),
                        (2008, 48402), (2009, 47100), (2013, 53107), (2016, 57904)),
        gas_pct=((1960, 26), (1970, 31), (1985, 24), (2000, 23), (2013, 28)),
        liquid_pct=((1960, 43), (1978, 47), (1990, 42), (2013, 41)),
        solid_pct=((1960, 31), (1970, 25), (1990, 34), (2005, 36), (2013, 30)),
    ),
    "EUU": dict(
        name="European Union",
        co2_per_capita=((1960, 6.0), (1979, 9.3), (1990, 8.5), (2013, 6.7)),
        gdp_per_capita=((1960, 950), (1970, 2100), (1980, 8600), (1985, 6800), (1990, 16000),
                        (1995, 19000), (2000, 18000), (2008, 37000), (2013, 35600), (2016, 32300)),
        gas_pct=((1960, 2), (1980, 13), (2000, 22), (2013, 23)),
        liquid_pct=((1960, 30), (1973, 52), (1990, 40), (2013, 42)),
        solid_pct=((1960, 66), (1973, 36), (1990, 36), (2013, 30)),
    ),
    "IND": dict(
        name="India",
        co2_per_capita=((1960, 0.27), (1980, 0.45), (2000, 0.98), (2013, 1.58)),
        gdp_per_capita=((1960, 82), (1970, 112), (1980, 267), (1990, 368), (2000, 443),
                        (2007, 1023), (2013, 1452), (2016, 1732)),
        gas_pct=((1960, 0.2), (1980, 1.5), (2000, 6), (2013, 7)),
        liquid_pct=((1960, 20), (1980, 30), (2000, 27), (2013, 25)),
        solid_pct=((1960, 77), (1980, 66), (2000, 64), (2013, 67)),
    ),
    "CMR": dict(
        name="Cameroon",
        co2_per_capita=((1960, 0.07), (1980, 0.3), (1986, 0.45), (2000, 0.2), (2013, 0.32)),
        gdp_per_capita=((1960, 120), (1970, 190), (1980, 720), (1986, 1080), (1994, 600),
                        (2000, 580), (2008, 1190), (2013, 1330), (2016, 1380)),
        gas_pct=((1960, 0), (2000, 0), (2005, 3), (2013, 25)),
        liquid_pct=((1960, 95), (2013, 70)),
        solid_pct=((1960, 1), (2013, 0.3)),
    ),
    "AFG": dict(
        name="Afghanistan",
        co2_per_capita=((1960, 0.05), (1980, 0.13), (1990, 0.2), (2000, 0.04), (2013, 0.3)),
        gdp_per_capita=((1960, 59), (1970, 157), (1981, 270), (1990, 230), (2001, 140),
                        (2013, 650), (2016, 560)),
        gas_pct=((1960, 0), (1970, 30), (1990, 30), (2000, 5), (2013, 3)),
        liquid_pct=((1960, 70), (1990, 55), (2013, 80)),
        solid_pct=((1960, 25), (1990, 12), (2013, 15)),
        gdp_missing=((1982, 2000),),
    ),
    "IRQ": dict(
        name="Iraq",
        co2_per_capita=((1960, 1.5), (1980, 3.9), (1991, 2.5), (2003, 3.2), (2013, 4.7)),
        gdp_per_capita=((1960, 210), (1970, 360), (1980, 2900), (1990, 3100), (1997, 1200),
                        (2004, 1390), (2013, 6700), (2016, 4800)),
        gas_pct=((1960, 15), (2013, 12)),
        liquid_pct=((1960, 83), (2013, 85)),
        solid_pct=((1960, 0), (2013, 0)),
        gdp_missing=((1965, 1967), (1991, 2003)),
    ),
    "MMR": dict(
        name="Myanmar",
        co2_per_capita=((1960, 0.08), (2000, 0.2), (2013, 0.28)),
        gdp_per_capita=((1960, 60), (1980, 150), (2000, 190), (2013, 1200), (2016, 1200)),
        gas_pct=((1960, 5), (1990, 30), (2013, 40)),
        liquid_pct=((1960, 80), (2013, 40)),
        solid_pct=((1960, 10), (2013, 20)),
        gdp_missing=((1960, 1999),),
    ),
    "SYR": dict(
        name="Syrian Arab Republic",
        co2_per_capita=((1960, 0.9), (1980, 2.1), (2000, 2.9), (2007, 3.3), (2014, 1.9)),
        gdp_per_capita=((1960, 190), (1980, 1300), (1990, 1000), (2000, 1200), (2007, 2060),
                        (2014, 1800), (2016, 1500)),
        gas_pct=((1960, 1), (2000, 20), (2014, 30)),
        liquid_pct=((1960, 95), (2014, 68)),
        solid_pct=((1960, 0.5), (2014, 0.1)),
        gdp_missing=((2008, 2016),),
    ),
    "YEM": dict(
        name="Yemen, Rep.",
        co2_per_capita=((1960, 0.3), (1990, 0.6), (2013, 0.95)),
        gdp_per_capita=((1960, 150), (1990, 480), (2000, 540), (2013, 1600), (2016, 900)),
        gas_pct=((1960, 0), (2005, 0), (2010, 10), (2013, 15)),
        liquid_pct=((1960, 98), (2013, 84)),
        solid_pct=((1960, 0), (2013, 0)),
        gdp_missing=((1960, 1989),),
    ),
    "CHE": dict(
        name="Switzerland",
        co2_per_capita=((1960, 3.5), (1973, 6.6), (2013, 4.9)),
        gdp_per_capita=((1960, 1800), (1969, 3200), (1975, 8500), (1980, 18900), (1990, 38300),
                        (2000, 38000), (2013, 85000), (2016, 80000)),
        gas_pct=((1960, 0), (1980, 5), (2013, 28)),
        liquid_pct=((1960, 75), (1980, 85), (2013, 68)),
        solid_pct=((1960, 20), (1980, 5), (2013, 0.5)),
        gdp_missing=((1970, 1979),),
    ),
    "POL": dict(
        name="Poland",
        co2_per_capita=((1960, 6.6), (1980, 12.8), (1990, 9.5), (2013, 7.8)),
        gdp_per_capita=((1960, 600), (1990, 1700), (2000, 4500), (2013, 13800), (2016, 12400)),
        gas_pct=((1960, 2), (2013, 9)),
        liquid_pct=((1960, 6), (2013, 20)),
        solid_pct=((1960, 90), (2013, 70)),
        gdp_missing=((1960, 1989),),
    ),
    "KOR": dict(
        name="Korea, Rep.",
        co2_per_capita=((1960, 0.5), (1990, 5.8), (2013, 11.8)),
        gdp_per_capita=((1960, 158), (1980, 1715), (2000, 11948), (2013, 25890), (2016, 27608)),
        gas_pct=((1960, 0), (1986, 0), (2013, 18)),
        liquid_pct=((1960, 20), (1995, 60), (2013, 35)),
        solid_pct=((1960, 78), (1995, 30), (2013, 45)),
    ),
    "WLD": dict(
        name="World",
        co2_per_capita=((1960, 3.1), (1979, 4.4), (2000, 4.0), (2013, 5.0)),
        gdp_per_capita=((1960, 452), (1980, 2538), (2000, 5492), (2013, 10780), (2016, 10300)),
        gas_pct=((1960, 8), (2013, 19)),
        liquid_pct=((1960, 36), (1975, 49), (2013, 33)),
        solid_pct=((1960, 52), (2013, 43)),
        # a ".." cell, as aggregates sometimes carry
        dotted=(("gdp_per_capita", 1961),),
    ),
}


def _trajectory(knots, years):
    ky, kv = zip(*knots)
    return np.interp(years, ky, kv)


def country_channels(code, seed=2016):
    """Noisy per-year values for every channel, NaN where the data is absent."""
    spec = COUNTRIES[code]
    years = np.arange(FIXTURE_YEARS[0], FIXTURE_YEARS[1] + 1)
    rng = np.random.default_rng([seed, sum(map(ord, code))])
    out = {}
    for ch in CHANNELS:
        base = _trajectory(spec[ch], years)
        if ch in ("gdp_per_capita", "co2_per_capita"):
            values = base * np.exp(rng.normal(0.0, 0.02, len(years)))
        else:
            values = np.clip(base + rng.normal(0.0, 0.4, len(years)) * (base > 0), 0.0, 100.0)
        out[ch] = values
    shares = np.stack([out["gas_pct"], out["liquid_pct"], out["solid_pct"]])
    total = shares.sum(axis=0)
    scale = np.where(total > 99.0, 99.0 / np.maximum(total, 1e-9), 1.0)
    for i, ch in enumerate(("gas_pct", "liquid_pct", "solid_pct")):
        out[ch] = shares[i] * scale
    late = years > LAST_EMISSION_YEAR
    for ch in CHANNELS[:4]:
        out[ch][late] = np.nan
    for start, end in spec.get("gdp_missing", ()):
        out["gdp_per_capita"][(years >= start) & (years <= end)] = np.nan
    return years, out


def _cell(value):
    if np.isnan(value):
        return '""'
    return f'"{float(f"{value:.10g}")!r}"'


def render_indicator_csv(channel, seed=2016):
    years = np.arange(FIXTURE_YEARS[0], FIXTURE_YEARS[1] + 1)
    lines = [
        '"Data Source","World Development Indicators",',
        "",
        '"Last Updated Date","2016-11-17",',
        "",
        '"Country Name","Country Code","Indicator Name","Indicator Code",'
        + ",".join(f'"{y}"' for y in years) + ",",
    ]
    code = DEFAULT_INDICATOR_CODES[channel]
    for country in COUNTRIES:
        _, values = country_channels(country, seed)
        cells = [_cell(v) for v in values[channel]]
        for ch, year in COUNTRIES[country].get("dotted", ()):
            if ch == channel:
                cells[year - FIXTURE_YEARS[0]] = '".."'
        head = [COUNTRIES[country]["name"], country, INDICATOR_NAMES[channel], code]
        lines.append(",".join(f'"{h}"' for h in head) + "," + ",".join(cells) + ",")
    return "\n".join(lines) + "\n"


def indicator_filename(channel):
    return f"API_{DEFAULT_INDICATOR_CODES[channel]}_DS2_en_csv_v2.csv"


def write_fixture_corpus(out_dir, seed=2016):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for channel in CHANNELS:
        path = out_dir / indicator_filename(channel)
        path.write_text(render_indicator_csv(channel, seed), encoding="utf-8")
        paths[channel] = path
    return paths
