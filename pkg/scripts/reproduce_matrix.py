"""Run the 12-experiment USA/EU/IND/CMR matrix at f = 1/3 and report GRNN's R^2 wins.

Uses configs/fixture.yaml by default; point --config at a config whose
indicator files are a real World Bank download to rerun on real data.
"""

import argparse
import json
import shutil
import sys
import time
from pathlib import Path

from datl_gdp.cli import main as cli

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/fixture.yaml")
    ap.add_argument("--workdir", type=Path, default=ROOT)
    ap.add_argument("--run-id", default="reproduce-matrix")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    common = ["--config", args.config, "--workdir", str(args.workdir)]
    start = time.perf_counter()
    if cli(["ingest", *common]) != 0:
        sys.exit(1)
    out = args.workdir / "reports" / args.run_id
    shutil.rmtree(out, ignore_errors=True)
    status = cli(["run-matrix", *common, "--run-id", args.run_id, "--jobs", str(args.jobs)])
    notes = json.loads((out / "report.json").read_text())["manifest"]["notes"]
    print(json.dumps(notes, indent=2))
    print(f"elapsed {time.perf_counter() - start:.1f}s")
    sys.exit(status)


if __name__ == "__main__":
    main()
