"""Named, reproducible experiments built from dynamics and analysis.

A :class:`Scenario` is plain data (it round-trips through ``to_dict`` /
``from_dict`` and TOML config files).  :func:`run_scenario` executes it,
evaluates its checks and optionally writes a run directory::

    diagnostics.csv     one row per diagnostic sample
    report.json         scenario, outcome and every check
    snapshots/*.gspc    state snapshots (final state always)
    checkpoint.gspc/.json   when checkpointing is enabled
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as an
from . import dynamics as dy
from . import records
from . import spectral as sp
from .spectral import ConfigurationError, SpectralField, Truncation

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CHECKPOINT_VERSION = 1

# ||Lap u|| ceiling for the forced absorption runs (||K|| = 0.1, n = 32),
# frozen after one calibration run (demos/attractor_absorption.py): every
# radius settles at ||Lap u|| = 0.09999955 by t = 50; 1.5x margin.
ABSORBING_RADIUS = 0.15


# --------------------------------------------------------------------------
# declarative pieces
# --------------------------------------------------------------------------

@dataclass
class InitialSpec:
    """Initial state: a single mode, a seeded random field, a snapshot, or zero."""

    kind: str = "mode"                  # mode | random | snapshot | zero
    mode: tuple = (0, 1)
    amplitude: float = math.pi          # pi * e_(0,1) == sin(x2)
    seed: int = 0
    target_grad: float = 1.0
    damping: float = 3.0
    noise: float = 0.0                  # L2 size of admissible noise added on top
    noise_seed: int = 1
    path: str | None = None

    def build(self, trunc: Truncation) -> SpectralField:
        if self.kind == "mode":
            u = SpectralField.from_modes(trunc, {tuple(self.mode): self.amplitude})
            if not u.is_admissible:
                raise ConfigurationError(f"initial mode {tuple(self.mode)} is not admissible")
        elif self.kind == "random":
            rng = np.random.default_rng(self.seed)
            u = sp.random_admissible_field(trunc, rng, self.target_grad, self.damping)
        elif self.kind == "snapshot":
            try:
                u = sp.load_snapshot(self.path, trunc)
            except (OSError, ValueError) as exc:
                raise ConfigurationError(f"initial snapshot: {exc}") from None
        elif self.kind == "zero":
            u = SpectralField.zeros(trunc)
        else:
            raise ConfigurationError(f"unknown initial kind {self.kind!r}")
        if self.noise:
            rng = np.random.default_rng(self.noise_seed)
            eta = sp.random_admissible_field(trunc, rng, None, 3.0)
            u = u + eta * (self.noise / eta.norm())
        return u


@dataclass
class ForcingConfig:
    kind: str = "zero"                  # zero | constant | modulated
    mode: object = "random"             # "random" or [l1, l2]
    seed: int = 7
    norm: float = 0.0                   # ||K||_2
    damping: float = 3.0
    envelope: dict = field(default_factory=dict)

    def build(self, trunc: Truncation) -> dy.ForcingSpec:
        if self.kind == "zero" or self.norm == 0.0:
            return dy.ForcingSpec.zero()
        if isinstance(self.mode, str):
            rng = np.random.default_rng(self.seed)
            k = sp.random_admissible_field(trunc, rng, None, self.damping)
        else:
            k = SpectralField.from_modes(trunc, {tuple(self.mode): 1.0})
        k = k * (self.norm / k.norm())
        if self.kind == "constant":
            return dy.ForcingSpec.constant(k)
        if self.kind == "modulated":
            return dy.ForcingSpec.modulated(k, dy.CosineEnvelope(**self.envelope))
        raise ConfigurationError(f"unknown forcing kind {self.kind!r}")


@dataclass
class CheckSpec:
    kind: str
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.options}

    @classmethod
    def from_dict(cls, d: dict) -> "CheckSpec":
        d = dict(d)
        return cls(d.pop("kind"), d)


@dataclass
class Scenario:
    name: str
    params: dy.ModelParams
    stepper: dy.StepperConfig
    truncation: Truncation = field(default_factory=lambda: Truncation(16, 16))
    initial: InitialSpec = field(default_factory=InitialSpec)
    forcing: ForcingConfig = field(default_factory=ForcingConfig)
    checks: list = field(default_factory=list)
    probe_every: int = 10
    snapshot_every: int | None = None
    kind: str = "trajectory"            # trajectory | oracle-crosscheck
    blowup_expected: bool = False
    exploratory: bool = False
    seeds: list = field(default_factory=list)   # oracle-crosscheck only

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "params": self.params.to_dict(),
            "stepper": self.stepper.to_dict(),
            "truncation": self.truncation.to_dict(),
            "initial": asdict(self.initial),
            "forcing": asdict(self.forcing),
            "checks": [c.to_dict() for c in self.checks],
            "probe_every": self.probe_every,
            "snapshot_every": self.snapshot_every,
            "blowup_expected": self.blowup_expected,
            "exploratory": self.exploratory,
            "seeds": list(self.seeds),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        known = {"name", "kind", "params", "stepper", "truncation", "initial", "forcing",
                 "checks", "probe_every", "snapshot_every", "blowup_expected",
                 "exploratory", "seeds"}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown scenario field(s): {sorted(unknown)}")
        try:
            init = dict(d.get("initial", {}))
            if "mode" in init:
                init["mode"] = tuple(init["mode"])
            return cls(
                name=str(d["name"]),
                kind=d.get("kind", "trajectory"),
                params=dy.ModelParams(**d["params"]),
                stepper=dy.StepperConfig(**d["stepper"]),
                truncation=Truncation(**d.get("truncation", {"n1": 16, "n2": 16})),
                initial=InitialSpec(**init),
                forcing=ForcingConfig(**d.get("forcing", {})),
                checks=[CheckSpec.from_dict(c) for c in d.get("checks", [])],
                probe_every=int(d.get("probe_every", 10)),
                snapshot_every=d.get("snapshot_every"),
                blowup_expected=bool(d.get("blowup_expected", False)),
                exploratory=bool(d.get("exploratory", False)),
                seeds=list(d.get("seeds", [])),
            )
        except KeyError as exc:
            raise ConfigurationError(f"scenario is missing field {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ConfigurationError(f"bad scenario field: {exc}") from None


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def _closed_form_rate(params: dy.ModelParams, l2: int = 1) -> float:
    return params.alpha - params.mu * l2 * l2


def scenario_explicit_solution(params: dy.ModelParams, n: int = 16, dt: float = 1e-3,
                               t_end: float = 10.0, scheme: str = "cnab2",
                               probe_every: int = 10) -> Scenario:
    """``u0 = sin(x2)``, ``K = 0``: the exact solution is ``exp((alpha-mu) t) sin(x2)``."""
    rate = _closed_form_rate(params)
    drift_tol = 1e-8 if rate == 0.0 else 1e-5
    return Scenario(
        name="explicit-solution",
        params=params,
        stepper=dy.StepperConfig(dt, t_end, scheme),
        truncation=Truncation(n, n),
        initial=InitialSpec("mode", (0, 1), math.pi),
        checks=[CheckSpec("closed_form", {"mode": [0, 1], "amplitude": math.pi,
                                          "tol": drift_tol}),
                CheckSpec("growth_rate", {"expected": rate, "tol": 1e-3})],
        probe_every=probe_every,
    )


def scenario_attractor_absorption(seed: int, radii, params: dy.ModelParams | None = None,
                                  forcing_norm: float = 0.0, n: int = 32, dt: float = 5e-3,
                                  t_end: float | None = None, probe_every: int = 20,
                                  absorbing_radius: float = ABSORBING_RADIUS,
                                  absorb_after: float = 50.0) -> list[Scenario]:
    """One run per initial radius ``||grad u0|| = r`` in the attractor regime."""
    params = params or dy.ModelParams(1.0, 0.0, 0.25)
    verdict = an.classify_regime(params)
    if verdict.label != "attractor-regime":
        raise ConfigurationError(
            f"attractor scenarios need omega > 0; got omega={verdict.omega:.4g} ({verdict.label})")
    forced = forcing_norm > 0
    if t_end is None:
        t_end = 80.0
    out = []
    for i, r in enumerate(radii):
        if forced:
            checks = [CheckSpec("absorbing_ball", {"radius": absorbing_radius,
                                                   "after": absorb_after})]
        else:
            checks = [CheckSpec("decay_envelope", {"factor": 1.01}),
                      CheckSpec("decay_below", {"threshold": 1e-6, "by": t_end})]
        out.append(Scenario(
            name=f"attractor-absorption-r{r:g}",
            params=params,
            stepper=dy.StepperConfig(dt, t_end, "cnab2"),
            truncation=Truncation(n, n),
            initial=InitialSpec("random", seed=seed + i, target_grad=float(r)),
            forcing=ForcingConfig("constant" if forced else "zero", "random", seed + 1000,
                                  forcing_norm),
            checks=checks,
            probe_every=probe_every,
        ))
    return out


def scenario_growup(params: dy.ModelParams, l2: int = 1, n: int = 32, dt: float = 5e-3,
                    t_end: float = 400.0, noise: float = 0.0, probe_every: int = 20) -> Scenario:
    """Exponential runaway along the x1-independent mode ``(0, l2)``."""
    if params.alpha <= params.mu * l2 * l2:
        raise ConfigurationError(
            f"grow-up along (0,{l2}) needs alpha > mu*{l2 * l2}; got alpha={params.alpha}")
    if noise:
        checks = [CheckSpec("blowup", {})]
    else:
        checks = [CheckSpec("growth_rate", {"expected": _closed_form_rate(params, l2),
                                            "tol": 1e-3}),
                  CheckSpec("subspace_invariance", {"tol": 1e-12}),
                  CheckSpec("blowup", {})]
    return Scenario(
        name="growup" if not noise else "growup-perturbed",
        params=params,
        stepper=dy.StepperConfig(dt, t_end, "cnab2"),
        truncation=Truncation(n, n),
        initial=InitialSpec("mode", (0, l2), math.pi, noise=noise),
        checks=checks,
        probe_every=probe_every,
        blowup_expected=True,
        exploratory=bool(noise),
    )


def scenario_decay(params: dy.ModelParams, n: int = 32, dt: float = 5e-3, t_end: float = 40.0,
                   threshold: float = 1e-6, probe_every: int = 20) -> Scenario:
    """Companion of :func:`scenario_growup` with ``alpha < mu``: decay from ``sin(x2)``."""
    return Scenario(
        name="decay",
        params=params,
        stepper=dy.StepperConfig(dt, t_end, "cnab2"),
        truncation=Truncation(n, n),
        initial=InitialSpec("mode", (0, 1), math.pi),
        checks=[CheckSpec("decay_below", {"threshold": threshold, "by": t_end}),
                CheckSpec("growth_rate", {"expected": _closed_form_rate(params), "tol": 1e-3})],
        probe_every=probe_every,
    )


def scenario_oracle_crosscheck(seed: int = 0, n_seeds: int = 20, n: int = 4, dt: float = 1e-3,
                               t_end: float = 1.0, params: dy.ModelParams | None = None,
                               initial_kind: str = "random") -> Scenario:
    """Pseudo-spectral vs tensor-oracle right-hand sides and trajectories."""
    params = params or dy.ModelParams(1.0, 0.5, 0.25)
    return Scenario(
        name="oracle-crosscheck",
        kind="oracle-crosscheck",
        params=params,
        stepper=dy.StepperConfig(dt, t_end, "cnab2"),
        truncation=Truncation(n, n),
        initial=InitialSpec(initial_kind, seed=seed, target_grad=1.0, damping=1.0),
        checks=[CheckSpec("oracle_discrepancy", {"rhs_tol": 1e-8, "trajectory_tol": 1e-7})],
        probe_every=100,
        seeds=[seed + i for i in range(n_seeds)],
    )


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

@dataclass
class CheckOutcome:
    name: str
    passed: bool
    value: float
    target: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ScenarioResult:
    scenario: Scenario
    record: records.TrajectoryRecord
    checks: list
    status: str               # completed | blowup | diverged
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def unexpected_divergence(self) -> bool:
        return self.status == "diverged"

    def report(self) -> dict:
        return {
            "schema_version": records.REPORT_SCHEMA_VERSION,
            "scenario": self.scenario.to_dict(),
            "regime": an.classify_regime(self.scenario.params).to_dict(),
            "status": self.status,
            "diverged_at": self.record.diverged_at,
            "final_t": self.record.final_t,
            "samples": len(self.record.samples),
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            **self.extra,
        }


def _extra_probes(sc: Scenario) -> dict:
    probes = {}
    for chk in sc.checks:
        if chk.kind == "closed_form":
            l1, l2 = chk.options.get("mode", (0, 1))
            amp = chk.options.get("amplitude", math.pi)
            rate = sc.params.alpha - sc.params.mu * (l1 * l1 + l2 * l2)

            def closed_form_error(t, u, l1=l1, l2=l2, amp=amp, rate=rate):
                exact = SpectralField.from_modes(u.trunc, {(l1, l2): amp * math.exp(rate * t)})
                return float(np.max(np.abs(sp.synthesize(u - exact).values)))
            probes["closed_form_error"] = closed_form_error
            probes["closed_form_scale"] = (
                lambda t, u, amp=amp, rate=rate, l1=l1: amp * math.exp(rate * t)
                * sp.basis_norm_constant((l1, 1)))
        elif chk.kind == "subspace_invariance":
            def x1_dependent_max(t, u):
                n1 = u.trunc.n1
                c = np.delete(u.coeffs, n1, axis=0)
                return float(np.max(np.abs(c))) if c.size else 0.0
            probes["x1_dependent_max"] = x1_dependent_max
    return probes


def _evaluate_checks(sc: Scenario, record: records.TrajectoryRecord, forcing) -> list:
    out = []
    t = record.times
    for chk in sc.checks:
        o = chk.options
        k = chk.kind
        if k == "closed_form":
            err = record.column("closed_form_error")
            scale = np.maximum(1.0, record.column("closed_form_scale"))
            rel = float(np.max(err / scale))
            out.append(CheckOutcome(k, rel <= o["tol"], rel, 0.0, o["tol"],
                                    "max pointwise error / max(1, sup of exact solution)"))
        elif k == "growth_rate":
            fit = an.fit_growth_rate(t, record.l2_norm)
            ok = abs(fit.rate - o["expected"]) <= o["tol"]
            out.append(CheckOutcome(k, ok, fit.rate, o["expected"], o["tol"],
                                    f"fit residual {fit.residual:.3g}"))
        elif k == "decay_envelope":
            omega = o.get("omega", an.classify_regime(sc.params).omega)
            until = o.get("until", math.inf)
            sub = records.TrajectoryRecord(samples=[s for s in record.samples if s.t <= until])
            res = an.decay_envelope_check(sub, omega, forcing, o.get("factor"), sc.stepper.dt)
            out.append(CheckOutcome(k, res.passed and res.applicable, res.worst_ratio,
                                    omega, o.get("factor", 1.0),
                                    f"worst ratio at t={res.worst_t:.4g}"))
        elif k == "decay_below":
            by = o.get("by", t[-1] if t.size else 0.0)
            late = record.l2_norm[t >= by - 1e-9]
            value = float(late.max()) if late.size else math.inf
            out.append(CheckOutcome(k, value <= o["threshold"], value, o["threshold"], 0.0,
                                    f"max ||u|| for t >= {by:g}"))
        elif k == "absorbing_ball":
            lap = np.sqrt(record.column("lap_norm_sq"))[t >= o["after"] - 1e-9]
            value = float(lap.max()) if lap.size else math.inf
            out.append(CheckOutcome(k, value <= o["radius"], value, o["radius"], 0.0,
                                    f"max ||Lap u|| for t >= {o['after']:g}"))
        elif k == "subspace_invariance":
            value = float(np.nanmax(record.column("x1_dependent_max")))
            out.append(CheckOutcome(k, value <= o["tol"], value, 0.0, o["tol"]))
        elif k == "blowup":
            ok = record.status == "diverged"
            out.append(CheckOutcome(k, ok, record.diverged_at or math.nan, dy.BLOWUP_NORM, 0.0,
                                    "blow-up guard reached" if ok else "no blow-up"))
        elif k == "energy_residual":
            r = record.column("energy_residual")
            r = r[np.isfinite(r)]
            value = float(np.max(np.abs(r))) if r.size else 0.0
            out.append(CheckOutcome(k, value <= o["tol"], value, 0.0, o["tol"]))
        elif k == "oracle_discrepancy":
            continue
        else:
            raise ConfigurationError(f"unknown check kind {k!r}")
    return out


def _write_outputs(out_dir: Path, result: ScenarioResult) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    records.write_diagnostics_csv(out_dir / "diagnostics.csv", result.record)
    snaps = out_dir / "snapshots"
    for t, u in result.record.snapshots:
        sp.save_snapshot(snaps / f"t{t:012.6f}.gspc", u)
    if result.record.final_state is not None and np.all(np.isfinite(result.record.final_state.coeffs)):
        sp.save_snapshot(snaps / "final.gspc", result.record.final_state)
    records.write_json(out_dir / "report.json", result.report())


def _write_checkpoint(out_dir: Path, sc: Scenario, integ: dy.Integrator,
                      checkpoint_every: int | None, completed: bool = False) -> None:
    for t, u in integ.record.snapshots:
        path = out_dir / "snapshots" / f"t{t:012.6f}.gspc"
        if not path.exists():
            sp.save_snapshot(path, u)
    state = integ.state_dict()
    coeffs = state.pop("coeffs")
    sp.save_snapshot(out_dir / "checkpoint.gspc", SpectralField(sc.truncation, coeffs))
    payload = {
        "schema_version": CHECKPOINT_VERSION,
        "completed": completed,
        "t": integ.t,
        "params": sc.params.to_dict(),
        "scenario": sc.to_dict(),
        "checkpoint_every": checkpoint_every,
        "integrator": state,
    }
    records.write_json(out_dir / "checkpoint.json", payload)


def _run_trajectory(sc: Scenario, out_dir: Path | None, checkpoint_every: int | None,
                    resume: dict | None, halt_after: int | None = None) -> ScenarioResult:
    trunc = sc.truncation
    forcing = sc.forcing.build(trunc)
    u0 = sc.initial.build(trunc)
    integ = dy.Integrator(u0, sc.stepper, sc.params, forcing, sc.probe_every,
                          sc.snapshot_every, _extra_probes(sc))
    if resume is not None:
        state = dict(resume["integrator"])
        ckpt = out_dir / "checkpoint.gspc"
        if not ckpt.exists():
            raise ConfigurationError(f"{ckpt}: checkpoint state is missing")
        state["coeffs"] = sp.load_snapshot(ckpt, trunc).coeffs
        integ.load_state_dict(state)
    status = "completed"
    try:
        while not integ.done:
            target = integ.n + checkpoint_every if checkpoint_every else None
            if halt_after is not None:
                target = halt_after if target is None else min(target, halt_after)
            integ.advance(target)
            if checkpoint_every and out_dir is not None and not integ.done:
                _write_checkpoint(out_dir, sc, integ, checkpoint_every)
            if halt_after is not None and integ.n >= halt_after and not integ.done:
                return ScenarioResult(sc, integ.record, [], "interrupted")
    except dy.DivergenceError:
        status = "blowup" if sc.blowup_expected else "diverged"
    record = integ.record
    checks = _evaluate_checks(sc, record, forcing)
    result = ScenarioResult(sc, record, checks, status)
    if out_dir is not None:
        _write_outputs(out_dir, result)
        if checkpoint_every:
            _write_checkpoint(out_dir, sc, integ, checkpoint_every, completed=True)
    return result


def _run_oracle_crosscheck(sc: Scenario, out_dir: Path | None) -> ScenarioResult:
    trunc = sc.truncation
    tensor = dy.galerkin_tensor(trunc)
    forcing = sc.forcing.build(trunc)
    rhs_worst = traj_worst = 0.0
    per_seed = []
    first_record = None
    for s in sc.seeds or [sc.initial.seed]:
        init = InitialSpec(**{**asdict(sc.initial), "seed": s})
        u0 = init.build(trunc)
        K0 = forcing.at(0.0, trunc)
        d_rhs = float(np.max(np.abs(dy.rhs(u0, K0, sc.params).coeffs
                                    - dy.rhs_oracle(u0, K0, sc.params, tensor).coeffs)))
        a = dy.TimeStepper(trunc, sc.stepper, sc.params, forcing)
        b = dy.TimeStepper(trunc, sc.stepper, sc.params, forcing,
                           explicit=dy.oracle_explicit(tensor, sc.params, forcing))
        ca, cb = np.array(u0.coeffs), np.array(u0.coeffs)
        d_traj = 0.0
        for n in range(sc.stepper.n_steps):
            t = n * sc.stepper.dt
            ca = a.step_array(ca, t)
            cb = b.step_array(cb, t)
            d_traj = max(d_traj, float(np.max(np.abs(ca - cb))))
        per_seed.append({"seed": s, "rhs_discrepancy": d_rhs, "trajectory_discrepancy": d_traj})
        rhs_worst = max(rhs_worst, d_rhs)
        traj_worst = max(traj_worst, d_traj)
        if first_record is None:
            first_record = dy.integrate(u0, sc.stepper, sc.params, forcing, sc.probe_every)
    checks = []
    for chk in sc.checks:
        if chk.kind == "oracle_discrepancy":
            checks.append(CheckOutcome("oracle_rhs", rhs_worst <= chk.options["rhs_tol"],
                                       rhs_worst, 0.0, chk.options["rhs_tol"]))
            checks.append(CheckOutcome("oracle_trajectory",
                                       traj_worst <= chk.options["trajectory_tol"],
                                       traj_worst, 0.0, chk.options["trajectory_tol"]))
    checks += _evaluate_checks(sc, first_record, forcing)
    result = ScenarioResult(sc, first_record, checks, "completed", {"per_seed": per_seed})
    if out_dir is not None:
        _write_outputs(out_dir, result)
    return result


def run_scenario(sc: Scenario, out_dir=None, checkpoint_every: int | None = None,
                 halt_after: int | None = None) -> ScenarioResult:
    """Execute *sc*; write the run directory when *out_dir* is given.

    Divergence never propagates: it is reported through ``status``
    (``"blowup"`` when the scenario expects it, ``"diverged"`` otherwise).
    *halt_after* stops after that many steps with status ``"interrupted"``,
    leaving only the checkpoint behind, as a killed process would.
    """
    out_dir = None if out_dir is None else Path(out_dir)
    if sc.kind == "oracle-crosscheck":
        return _run_oracle_crosscheck(sc, out_dir)
    if sc.kind != "trajectory":
        raise ConfigurationError(f"unknown scenario kind {sc.kind!r}")
    return _run_trajectory(sc, out_dir, checkpoint_every, None, halt_after)


def _run_from_dict(args) -> ScenarioResult:
    d, out_dir, checkpoint_every = args
    return run_scenario(Scenario.from_dict(d), out_dir, checkpoint_every)


def run_suite(scenarios, out_root=None, checkpoint_every: int | None = None,
              workers: int = 1) -> list[ScenarioResult]:
    """Run independent scenarios, each in ``out_root/<name>``, optionally in parallel.

    Results come back in input order whatever the worker count, and every
    run is deterministic, so output files do not depend on *workers*.
    """
    scenarios = list(scenarios)
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigurationError(f"scenario names must be unique: {names}")
    jobs = [(s.to_dict(), None if out_root is None else Path(out_root) / s.name,
             checkpoint_every) for s in scenarios]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_from_dict(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_from_dict, jobs))


def resume_scenario(checkpoint_path) -> ScenarioResult | None:
    """Continue a run from ``checkpoint.json``; ``None`` if it had already completed."""
    checkpoint_path = Path(checkpoint_path)
    if checkpoint_path.is_dir():
        checkpoint_path = checkpoint_path / "checkpoint.json"
    try:
        payload = json.loads(checkpoint_path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"{checkpoint_path}: no such checkpoint") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{checkpoint_path}: {exc}") from None
    if payload.get("schema_version") != CHECKPOINT_VERSION:
        raise ConfigurationError(
            f"{checkpoint_path}: checkpoint version {payload.get('schema_version')!r}"
            f" does not match {CHECKPOINT_VERSION}")
    if payload.get("completed"):
        return None
    sc = Scenario.from_dict(payload["scenario"])
    return _run_trajectory(sc, checkpoint_path.parent, payload.get("checkpoint_every"), payload)


# --------------------------------------------------------------------------
# registry and config files
# --------------------------------------------------------------------------

def build_named(name: str, mu: float | None = None, alpha: float | None = None,
                beta: float | None = None, dt: float | None = None,
                t_end: float | None = None, n1: int | None = None, n2: int | None = None,
                seed: int | None = None) -> list[Scenario]:
    """Scenario(s) for a registry name with optional overrides applied."""
    def params(default: dy.ModelParams) -> dy.ModelParams:
        return dy.ModelParams(default.mu if mu is None else mu,
                              default.alpha if alpha is None else alpha,
                              default.beta if beta is None else beta)

    if name == "explicit-solution":
        scs = [scenario_explicit_solution(params(dy.ModelParams(1.0, 0.0, 0.0)))]
    elif name == "steady-state":
        scs = [scenario_explicit_solution(params(dy.ModelParams(1.0, 1.0, 0.0)))]
    elif name == "growup":
        scs = [scenario_growup(params(dy.ModelParams(1.0, 1.5, 0.0)))]
    elif name == "decay":
        scs = [scenario_decay(params(dy.ModelParams(1.0, 0.5, 0.0)))]
    elif name == "attractor-absorption":
        scs = scenario_attractor_absorption(seed or 0, [0.1, 1.0, 10.0],
                                            params(dy.ModelParams(1.0, 0.0, 0.25)))
    elif name == "attractor-forced":
        scs = load_config(packaged_config("attractor_forced"))
        if any(x is not None for x in (mu, alpha, beta)):
            scs = [_replace_params(s, params(s.params)) for s in scs]
    elif name == "oracle-crosscheck":
        scs = [scenario_oracle_crosscheck(seed or 0, params=params(dy.ModelParams(1.0, 0.5, 0.25)))]
    else:
        raise ConfigurationError(f"unknown scenario {name!r}; known: {', '.join(SCENARIO_NAMES)}")
    return [apply_overrides(s, dt=dt, t_end=t_end, n1=n1, n2=n2, seed=seed) for s in scs]


SCENARIO_NAMES = ("explicit-solution", "steady-state", "growup", "decay",
                  "attractor-absorption", "attractor-forced", "oracle-crosscheck")


def _replace_params(sc: Scenario, params: dy.ModelParams) -> Scenario:
    d = sc.to_dict()
    d["params"] = params.to_dict()
    return Scenario.from_dict(d)


def packaged_config(name: str) -> Path:
    """Path of a TOML config shipped in ``troposim/configs``."""
    from importlib.resources import files
    return Path(str(files("troposim") / "configs" / f"{name}.toml"))


def apply_overrides(sc: Scenario, dt=None, t_end=None, n1=None, n2=None, seed=None) -> Scenario:
    d = sc.to_dict()
    if dt is not None:
        d["stepper"]["dt"] = dt
    if t_end is not None:
        d["stepper"]["t_end"] = t_end
    if n1 is not None or n2 is not None:
        d["truncation"] = {"n1": sc.truncation.n1 if n1 is None else n1,
                           "n2": sc.truncation.n2 if n2 is None else n2}
    if seed is not None and d["initial"]["kind"] == "random" and sc.kind != "oracle-crosscheck":
        d["initial"]["seed"] = seed
    return Scenario.from_dict(d)


def load_config(path) -> list[Scenario]:
    """Scenarios from a TOML file.

    Each ``[[scenario]]`` table is either a full scenario (see
    :meth:`Scenario.to_dict`) or ``builder = "<registry name>"`` plus
    override keys.
    """
    path = Path(path)
    try:
        tree = tomllib.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"{path}: no such config file") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    entries = tree.get("scenario", [])
    if not entries:
        raise ConfigurationError(f"{path}: no [[scenario]] tables")
    out = []
    for i, entry in enumerate(entries):
        where = f"{path}: scenario #{i + 1}"
        entry = dict(entry)
        try:
            if "builder" in entry:
                name = entry.pop("builder")
                out.extend(build_named(name, **entry))
            else:
                out.append(Scenario.from_dict(entry))
        except TypeError as exc:
            raise ConfigurationError(f"{where}: {exc}") from None
        except ConfigurationError as exc:
            raise ConfigurationError(f"{where}: {exc}") from None
    names = [s.name for s in out]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise ConfigurationError(f"{path}: duplicate scenario names {sorted(dup)}")
    return out
