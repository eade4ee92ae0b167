"""Run the verification suites and write report.json.

    python3 scripts/run_verification.py --out out/verify [--suite linear picard]
"""

import argparse
import sys

from gkdv import harness


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--suite", nargs="+", default=list(harness.SUITES), choices=harness.SUITES)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--out", default="out/verify")
    args = ap.parse_args()

    report = harness.run_all(harness.SuiteConfig(suites=tuple(args.suite), n=args.n, out_dir=args.out))
    width = max(len(c.name) for c in report.checks)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.suite:<12} {c.name:<{width}}  "
              f"{c.measured:.3e} (tol {c.tolerance:.1e})")
    print(f"{sum(c.passed for c in report.checks)}/{len(report.checks)} checks passed; "
          f"report in {args.out}/report.json")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
