"""Explicit sin(x2) solution and grow-up.

Runs the x1-independent mode sin(x2) for three values of alpha and compares the
fitted growth rate of ||u||_2 with alpha - mu, then follows a grow-up run until
the blow-up guard fires.

Usage: python3 demos/explicit_solution.py
"""
from troposim import ModelParams, run_scenario
from troposim import scenarios as scn


def main():
    for alpha in (0.0, 1.0, 1.5):
        p = ModelParams(1.0, alpha, 0.25)
        res = run_scenario(scn.scenario_explicit_solution(p, n=8, t_end=5.0))
        rate = next(c for c in res.checks if c.name == "growth_rate")
        print(f"alpha={alpha:3.1f}  fitted rate {rate.value:+.6f}  "
              f"expected {alpha - 1.0:+.6f}  pass={res.passed}")

    res = run_scenario(scn.scenario_growup(ModelParams(1.0, 1.5), n=8))
    print(f"grow-up: status={res.status} at t={res.record.diverged_at:.3f}")
    for c in res.checks:
        print(f"  {c.name:22s} value={c.value:.6g} pass={c.passed}")


if __name__ == "__main__":
    main()
