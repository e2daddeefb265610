"""Command-line entry point: ``troposim {run,verify,resume,list,regime}``.

Exit codes: 0 all checks pass, 1 configuration error, 2 check failure,
3 divergence outside a grow-up scenario.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import analysis as an
from . import dynamics as dy
from . import scenarios as scn
from . import spectral as sp
from .spectral import ConfigurationError

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_DIVERGED = 0, 1, 2, 3
OUTPUT_ROOT_ENV = "TROPOSIM_OUTPUT_ROOT"

log = logging.getLogger("troposim")


def default_output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="troposim",
                                description="Spectral Galerkin simulator for the troposphere model.")
    p.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a named scenario or a TOML config")
    r.add_argument("scenario", help=f"one of {', '.join(scn.SCENARIO_NAMES)} or a .toml path")
    r.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_ROOT_ENV} or ./runs)")
    for name in ("mu", "alpha", "beta", "dt", "t-end"):
        r.add_argument(f"--{name}", type=float)
    r.add_argument("--n1", type=int)
    r.add_argument("--n2", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--probe-every", type=_positive_int)
    r.add_argument("--checkpoint-every", type=_positive_int)
    r.add_argument("--workers", type=_positive_int, default=1)

    v = sub.add_parser("verify", help="randomized identity and inequality suite")
    v.add_argument("--n1", type=int, default=16)
    v.add_argument("--n2", type=int, default=16)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, default=1000)
    v.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)

    c = sub.add_parser("resume", help="continue a run from its checkpoint")
    c.add_argument("checkpoint", type=Path, help="checkpoint.json or its run directory")

    sub.add_parser("list", help="list scenario names")

    g = sub.add_parser("regime", help="classify (mu, alpha, beta)")
    g.add_argument("--mu", type=float, required=True)
    g.add_argument("--alpha", type=float, default=0.0)
    g.add_argument("--beta", type=float, default=0.0)
    return p


def _load_scenarios(args) -> list:
    overrides = dict(mu=args.mu, alpha=args.alpha, beta=args.beta, dt=args.dt,
                     t_end=args.t_end, n1=args.n1, n2=args.n2, seed=args.seed)
    if args.scenario.endswith(".toml") or Path(args.scenario).is_file():
        scs = scn.load_config(args.scenario)
        if any(v is not None for v in (args.mu, args.alpha, args.beta)):
            scs = [_with_params(s, args) for s in scs]
        scs = [scn.apply_overrides(s, dt=args.dt, t_end=args.t_end, n1=args.n1,
                                   n2=args.n2, seed=args.seed) for s in scs]
    else:
        scs = scn.build_named(args.scenario, **overrides)
    if args.probe_every:
        for s in scs:
            s.probe_every = args.probe_every
    return scs


def _with_params(s, args):
    d = s.to_dict()
    for k in ("mu", "alpha", "beta"):
        if getattr(args, k) is not None:
            d["params"][k] = getattr(args, k)
    return scn.Scenario.from_dict(d)


def _summarize(res) -> int:
    sc = res.scenario
    tag = " [exploratory]" if sc.exploratory else ""
    log.info("%s%s: status=%s final_t=%.6g", sc.name, tag, res.status, res.record.final_t or 0.0)
    for c in res.checks:
        log.info("  %-22s %-4s value=%.6g target=%.6g tol=%.3g",
                 c.name, "ok" if c.passed else "FAIL", c.value, c.target, c.tolerance)
    if res.unexpected_divergence:
        return EXIT_DIVERGED
    return EXIT_OK if res.passed else EXIT_CHECK


def cmd_run(args) -> int:
    scs = _load_scenarios(args)
    for s in scs:
        verdict = an.classify_regime(s.params)
        log.info("%s: regime %s (omega=%.4g)%s", s.name, verdict.label, verdict.omega,
                 f"; {verdict.note}" if verdict.note else "")
    root = args.out or default_output_root()
    if len(scs) == 1 and args.out is not None:
        results = [scn.run_scenario(scs[0], root, args.checkpoint_every)]
    else:
        results = scn.run_suite(scs, root, args.checkpoint_every, args.workers)
    codes = [_summarize(r) for r in results]
    log.info("outputs under %s", root)
    return max(codes)


def cmd_verify(args) -> int:
    trunc = sp.Truncation(args.n1, args.n2)
    if args.count <= 0:
        log.warning("count=%d: no fields checked, vacuous pass", args.count)
        return EXIT_OK
    nonlin = dy.nonlinearity_B_flipped if args.inject_bug else None
    rows = an.run_identity_suite(trunc, args.seed, args.count, nonlin)
    print(f"{'check':<24}{'worst slack':>16}  {'fails':>6}  pass")
    for r in rows:
        print(f"{r.check:<24}{r.worst_slack:>16.6g}  {r.failures:>6}  {'yes' if r.passed else 'NO'}")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_CHECK


def cmd_resume(args) -> int:
    res = scn.resume_scenario(args.checkpoint)
    if res is None:
        log.info("%s: run already completed, nothing to do", args.checkpoint)
        return EXIT_OK
    return _summarize(res)


def cmd_regime(args) -> int:
    v = an.classify_regime(dy.ModelParams(args.mu, args.alpha, args.beta))
    print(f"{v.label} omega={v.omega:.6g}" + (f" ({v.note})" if v.note else ""))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    handlers = {"run": cmd_run, "verify": cmd_verify, "resume": cmd_resume,
                "regime": cmd_regime,
                "list": lambda a: print("\n".join(scn.SCENARIO_NAMES)) or EXIT_OK}
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
