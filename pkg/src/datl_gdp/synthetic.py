"""Seeded synthetic country corpora for transfer-learning experiments.

Each synthetic country shares one emissions-to-GDP response surface but sits
in its own region of feature space (a covariate shift between every pair of
countries) and carries its own GDP offset.  ``make_transfer_corpus`` checks the
shift: every feature mean differs by at least one pooled standard deviation
between every pair of countries.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from .data_ingest import Dataset, FEATURE_CHANNELS

SYNTHETIC_CODES = ("XAA", "XBB", "XCC", "XDD")
YEARS = tuple(range(1960, 2014))
MIN_SHIFT = 1.0


def response(features):
    """Shared GDP response surface over (gas, liquid, solid, co2 per capita)."""
    gas, liquid, solid, co2 = np.asarray(features, dtype=np.float64).T
    return 900.0 * co2 + 40.0 * gas - 15.0 * solid + 600.0 * np.sin(liquid / 6.0) + 3000.0


def marginal_shift(a, b):
    """Per-feature |mean_a - mean_b| in units of the pooled within-country stdev."""
    pooled = np.sqrt(0.5 * (a.features.var(axis=0) + b.features.var(axis=0)))
    return np.abs(a.features.mean(axis=0) - b.features.mean(axis=0)) / pooled


def make_country(code, level, seed, years=YEARS, label_shift=0.0, noise=40.0):
    """One synthetic country; ``level`` (one entry per feature) places it in feature space."""
    rng = np.random.default_rng(seed)
    t = (np.asarray(years) - years[0]) / max(years[-1] - years[0], 1)
    level = np.asarray(level, dtype=np.float64)
    slope = rng.uniform(2.0, 4.0, len(FEATURE_CHANNELS))
    wiggle = 0.3 * np.sin(2 * np.pi * (t[:, None] * rng.uniform(0.5, 1.5, 4) + rng.uniform(0, 1, 4)))
    X = level + slope * t[:, None] + wiggle + rng.normal(0.0, 0.15, (len(t), 4))
    X[:, :3] = np.clip(X[:, :3], 0.0, 100.0)
    X[:, 3] = np.maximum(X[:, 3], 0.01)
    y = response(X) + label_shift + rng.normal(0.0, noise, len(t))
    return Dataset(list(years), X, y, (code,) * len(t))


def make_transfer_corpus(seed=0, years=YEARS, codes=SYNTHETIC_CODES):
    """Four (by default) synthetic countries with pairwise covariate shift.

    Feature levels are a distinct permutation of evenly spaced offsets per
    country, so no two countries overlap on any feature.
    """
    rng = np.random.default_rng(seed)
    offsets = np.array([6.0 * k for k in range(len(codes))])
    orders = [rng.permutation(len(codes)) for _ in FEATURE_CHANNELS]
    corpus = {}
    for idx, code in enumerate(codes):
        level = np.array([offsets[order[idx]] for order in orders]) + np.array([5.0, 20.0, 10.0, 1.0])
        corpus[code] = make_country(code, level, seed=[seed, idx], years=years,
                                    label_shift=float(rng.uniform(-500.0, 500.0)))
    for a, b in permutations(codes, 2):
        shift = marginal_shift(corpus[a], corpus[b])
        assert np.all(shift >= MIN_SHIFT), f"{a}->{b}: feature shift {shift} below {MIN_SHIFT}"
    return corpus


def make_missing_country(code, seed, years=YEARS, windows=((1975, 1984),), level=(11.0, 26.0, 16.0, 4.0)):
    """A synthetic CountrySeries whose GDP is blanked over ``windows``."""
    from .data_ingest import CountrySeries

    d = make_country(code, level, seed=seed, years=years)
    gdp = [None if any(s <= y <= e for s, e in windows) else float(v)
           for y, v in zip(d.years, d.labels)]
    cols = {name: tuple(float(v) for v in d.features[:, i]) for i, name in enumerate(FEATURE_CHANNELS)}
    return CountrySeries(code, tuple(int(y) for y in d.years), gdp_per_capita=tuple(gdp), **cols)


def make_shift_corpus(seed=0, years=YEARS, codes=SYNTHETIC_CODES, feature_shift=20.0, label_shift=6000.0):
    """Countries that are translates of one base country.

    Country k is the base plus ``k * feature_shift`` on every input and
    ``k * label_shift`` on GDP.  Inputs trend upward in time, and the shifts
    exceed the within-country spread, so the domains do not overlap.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, len(years))
    slope = rng.uniform(4.0, 8.0, len(FEATURE_CHANNELS))
    X = np.array([5.0, 20.0, 10.0, 1.0]) + slope * t[:, None] + rng.normal(0.0, 0.05, (len(t), 4))
    y = 20000.0 + 4000.0 * t + rng.normal(0.0, 20.0, len(t))
    return {code: Dataset(list(years), X + k * feature_shift, y + k * label_shift, (code,) * len(t))
            for k, code in enumerate(codes)}
