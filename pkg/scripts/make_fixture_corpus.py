"""Regenerate the pinned World Bank-format fixture corpus under data/worldbank_fixture/."""

import argparse
from pathlib import Path

from datl_gdp.fixtures import write_fixture_corpus

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=ROOT / "data" / "worldbank_fixture")
    ap.add_argument("--seed", type=int, default=2016)
    args = ap.parse_args()
    for channel, path in write_fixture_corpus(args.out, args.seed).items():
        print(f"{channel:16s} {path}")


if __name__ == "__main__":
    main()
