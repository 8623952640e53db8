from pathlib import Path

import numpy as np
import pytest

from datl_gdp.data_ingest import CHANNELS, DEFAULT_INDICATOR_CODES, Dataset, build_country_series, read_worldbank_csv
from datl_gdp.fixtures import indicator_filename

ROOT = Path(__file__).resolve().parent.parent
FIXTURE_DIR = ROOT / "data" / "worldbank_fixture"


def load_tables(window=(1960, 2014), directory=FIXTURE_DIR):
    return [read_worldbank_csv(directory / indicator_filename(c), DEFAULT_INDICATOR_CODES[c], window)
            for c in CHANNELS]


@pytest.fixture(scope="session")
def fixture_tables():
    return load_tables()


@pytest.fixture(scope="session")
def fixture_series(fixture_tables):
    def get(code):
        return build_country_series(fixture_tables, code)
    return get


def random_dataset(rng, n, d=4, code="XAA", scale=1.0):
    X = rng.normal(size=(n, d)) * scale
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1] - 0.2 * X[:, 2] * X[:, 3]
    return Dataset(np.arange(1960, 1960 + n), X, y, (code,) * n)


# criterion number -> (passed, text); filled by test_acceptance, printed after the run
ACCEPTANCE = {}


def record(number, passed, text):
    ACCEPTANCE[number] = (bool(passed), text)
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, text = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {text}")
