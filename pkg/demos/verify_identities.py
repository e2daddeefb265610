"""Functional inequality and identity suite on random admissible fields.

Prints the worst relative slack per check. A negative slack would be a
violation.

Usage: python3 demos/verify_identities.py [--n 16] [--count 200]
"""
import argparse

from troposim import Truncation, run_identity_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rows = run_identity_suite(Truncation(args.n, args.n), seed=args.seed, count=args.count)
    for r in rows:
        print(f"{r.check:24s} worst slack {r.worst_slack:+.3e}  failures {r.failures}/{r.count}")


if __name__ == "__main__":
    main()
