"""Pseudo-spectral right-hand side against the Galerkin tensor oracle.

The tensor is built by Gauss-Legendre quadrature on small truncations. Both
integrators start from the same random field and the maximum coefficient
discrepancy is reported per seed.

Usage: python3 demos/oracle_crosscheck.py
"""
from troposim import run_scenario
from troposim import scenarios as scn


def main():
    res = run_scenario(scn.scenario_oracle_crosscheck(seed=0, n_seeds=5))
    for row in res.extra["per_seed"]:
        print(row)
    print("pass" if res.passed else "FAIL")


if __name__ == "__main__":
    main()
