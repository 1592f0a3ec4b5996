"""Run every config in configs/ through the CLI with --check and tabulate exit codes.

Usage: python3 scripts/run_configs.py [--out results/] [--only count finiteness]
"""
import argparse
import json
import time
from pathlib import Path

from inhomapprox import cli

ROOT = Path(__file__).resolve().parent.parent


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=ROOT / "results")
    parser.add_argument("--only", nargs="*", help="restrict to these experiment names")
    args = parser.parse_args()
    for path in sorted((ROOT / "configs").glob("*.json")):
        command = json.loads(path.read_text()).get("experiment")
        if args.only and command not in args.only:
            continue
        t0 = time.perf_counter()
        code = cli.main([command, "--config", str(path), "--check", "--out", str(args.out / f"{path.stem}.csv"),
                         "--plot-data", str(args.out / f"{path.stem}.plot.csv")])
        print(f"# {path.name}: exit {code} in {time.perf_counter() - t0:.1f}s", flush=True)


if __name__ == "__main__":
    main()
