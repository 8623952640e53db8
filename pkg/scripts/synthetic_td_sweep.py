"""Target-fraction sweep on the seeded synthetic four-country corpus."""

import argparse
import time
from pathlib import Path

from datl_gdp.regressors import RegressorSpec
from datl_gdp.reporting import write_td_sweep
from datl_gdp.synthetic import SYNTHETIC_CODES, make_transfer_corpus
from datl_gdp.transfer import format_fraction, td_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("reports") / "synthetic-sweep")
    args = ap.parse_args()
    corpus = make_transfer_corpus(args.seed)
    specs = [RegressorSpec(m) for m in ("grnn", "elm", "svr")]
    start = time.perf_counter()
    table = td_sweep(corpus, SYNTHETIC_CODES, specs, seed=args.seed, jobs=args.jobs)
    write_td_sweep(table, args.out)
    print("regressor " + " ".join(f"{format_fraction(f):>9s}" for f in table.fractions))
    for name in table.regressors:
        print(f"{name:9s} " + " ".join(f"{table.mean_rmse[name][f]:9.1f}" for f in table.fractions))
    for name in table.regressors:
        print(f"{name}: improvement 0 -> 1/2 = {table.improvements[name][table.fractions[-1]]:.1f}%")
    print(f"{len(table.failures)} failed runs, {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
