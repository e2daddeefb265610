import json
import math

import numpy as np
import pytest

from troposim import dynamics as dy
from troposim import scenarios as scn
from troposim import spectral as sp
from troposim.spectral import ConfigurationError


# -- builders and preconditions -------------------------------------------------

def test_explicit_solution_decay_rate():
    sc = scn.scenario_explicit_solution(dy.ModelParams(1.0, 0.0), n=4, dt=2e-3, t_end=4.0)
    res = scn.run_scenario(sc)
    assert res.passed and res.status == "completed"
    rate = [c for c in res.checks if c.name == "growth_rate"][0]
    assert rate.value == pytest.approx(-1.0, abs=1e-3)


def test_steady_state_has_no_drift():
    sc = scn.scenario_explicit_solution(dy.ModelParams(1.0, 1.0, 0.3), n=4, dt=1e-2, t_end=2.0)
    res = scn.run_scenario(sc)
    drift = [c for c in res.checks if c.name == "closed_form"][0]
    assert drift.value <= 1e-8 and res.passed


def test_growup_precondition():
    with pytest.raises(ConfigurationError, match="alpha > mu"):
        scn.scenario_growup(dy.ModelParams(1.0, 0.8))
    with pytest.raises(ConfigurationError):
        scn.scenario_growup(dy.ModelParams(1.0, 3.0), l2=2)


def test_growup_second_mode_rate():
    sc = scn.scenario_growup(dy.ModelParams(1.0, 5.0), l2=2, n=4, dt=2e-3, probe_every=10)
    res = scn.run_scenario(sc)
    assert res.status == "blowup"
    assert res.passed, res.checks
    rate = [c for c in res.checks if c.name == "growth_rate"][0]
    assert rate.value == pytest.approx(1.0, abs=1e-3)


def test_attractor_precondition_and_empty_suite():
    with pytest.raises(ConfigurationError, match="omega"):
        scn.scenario_attractor_absorption(0, [1.0], dy.ModelParams(1.0, 0.5, 0.3))
    assert scn.scenario_attractor_absorption(0, []) == []


def test_attractor_names_unique():
    scs = scn.scenario_attractor_absorption(0, [0.1, 1.0, 10.0])
    assert len({s.name for s in scs}) == 3
    for s, r in zip(scs, [0.1, 1.0, 10.0]):
        u0 = s.initial.build(s.truncation)
        assert u0.is_admissible
        ops = sp.operators(s.truncation)
        assert math.sqrt(np.sum(ops.eig * u0.coeffs ** 2)) == pytest.approx(r)


def test_oracle_crosscheck_small():
    sc = scn.scenario_oracle_crosscheck(0, n_seeds=2, n=3, dt=1e-2, t_end=0.5)
    res = scn.run_scenario(sc)
    assert res.passed
    assert len(res.extra["per_seed"]) == 2


def test_oracle_crosscheck_x1_independent_and_zero():
    sc = scn.scenario_oracle_crosscheck(0, n_seeds=1, n=3, dt=1e-2, t_end=0.5)
    d = sc.to_dict()
    d["truncation"] = {"n1": 0, "n2": 3}
    res = scn.run_scenario(scn.Scenario.from_dict(d))
    assert res.extra["per_seed"][0]["trajectory_discrepancy"] == 0.0
    d["initial"]["kind"] = "zero"
    res = scn.run_scenario(scn.Scenario.from_dict(d))
    assert res.record.final_state.norm() == 0.0 and res.passed


def test_unexpected_divergence_is_reported():
    sc = scn.scenario_explicit_solution(dy.ModelParams(1.0, 4.0), n=3, dt=0.05, t_end=20.0)
    res = scn.run_scenario(sc)
    assert res.status == "diverged" and res.unexpected_divergence


# -- serialization ------------------------------------------------------------

def test_scenario_dict_roundtrip():
    for sc in [scn.scenario_growup(dy.ModelParams(1.0, 1.5)),
               scn.scenario_oracle_crosscheck(3),
               *scn.scenario_attractor_absorption(1, [1.0], forcing_norm=0.1)]:
        d = json.loads(json.dumps(sc.to_dict()))
        assert scn.Scenario.from_dict(d).to_dict() == sc.to_dict()


def test_scenario_from_dict_errors():
    d = scn.scenario_growup(dy.ModelParams(1.0, 1.5)).to_dict()
    with pytest.raises(ConfigurationError, match="unknown"):
        scn.Scenario.from_dict({**d, "colour": 1})
    bad = dict(d)
    del bad["params"]
    with pytest.raises(ConfigurationError, match="params"):
        scn.Scenario.from_dict(bad)
    bad = dict(d, params={"mu": -1.0})
    with pytest.raises(ConfigurationError, match="mu must be positive"):
        scn.Scenario.from_dict(bad)


def test_load_config_forms(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[[scenario]]\nbuilder = "decay"\nt_end = 1.0\nn1 = 4\nn2 = 4\n')
    (sc,) = scn.load_config(p)
    assert sc.name == "decay" and sc.stepper.t_end == 1.0 and sc.truncation.n1 == 4
    p.write_text("[[scenario]]\nname = \n")
    with pytest.raises(ConfigurationError, match="line"):
        scn.load_config(p)
    p.write_text('[[scenario]]\nbuilder = "nope"\n')
    with pytest.raises(ConfigurationError, match="scenario #1"):
        scn.load_config(p)
    with pytest.raises(ConfigurationError):
        scn.load_config(tmp_path / "missing.toml")


def test_packaged_forced_config_freezes_radius():
    scs = scn.build_named("attractor-forced")
    radii = {c.options["radius"] for s in scs for c in s.checks if c.kind == "absorbing_ball"}
    assert radii == {scn.ABSORBING_RADIUS}
    assert [s.initial.target_grad for s in scs] == [0.1, 1.0, 10.0]
    assert {s.forcing.norm for s in scs} == {0.1}


def test_unknown_scenario_name():
    with pytest.raises(ConfigurationError, match="known"):
        scn.build_named("nope")


# -- run directories, determinism, resume ----------------------------------------

def forced_small():
    (sc,) = scn.scenario_attractor_absorption(5, [1.0], forcing_norm=0.1, n=5, dt=1e-2,
                                              t_end=4.0, probe_every=10)
    sc.snapshot_every = 100
    return sc


def test_run_directory_contents(tmp_path):
    res = scn.run_scenario(forced_small(), tmp_path / "run")
    files = sorted(p.name for p in (tmp_path / "run").iterdir())
    assert files == ["diagnostics.csv", "report.json", "snapshots"]
    report = json.loads((tmp_path / "run" / "report.json").read_text())
    assert report["schema_version"] == 1
    assert report["regime"]["label"] == "attractor-regime"
    assert report["pass"] == res.passed
    snaps = sorted(p.name for p in (tmp_path / "run" / "snapshots").glob("*.gspc"))
    assert snaps == ["final.gspc"] + [f"t0000{i}.000000.gspc" for i in range(5)]
    final = sp.load_snapshot(tmp_path / "run" / "snapshots" / "final.gspc")
    np.testing.assert_array_equal(final.coeffs, res.record.final_state.coeffs)


def test_same_seed_same_bytes(tmp_path):
    scn.run_scenario(forced_small(), tmp_path / "a")
    scn.run_scenario(forced_small(), tmp_path / "b")
    a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
    assert a == (tmp_path / "b" / "diagnostics.csv").read_bytes()


def test_resume_matches_unsplit_run(tmp_path):
    sc = forced_small()
    full = scn.run_scenario(sc, tmp_path / "full")
    part = scn.run_scenario(sc, tmp_path / "split", checkpoint_every=50, halt_after=200)
    assert part.status == "interrupted"
    assert not (tmp_path / "split" / "diagnostics.csv").exists()
    res = scn.resume_scenario(tmp_path / "split" / "checkpoint.json")
    np.testing.assert_array_equal(res.record.final_state.coeffs, full.record.final_state.coeffs)
    assert ((tmp_path / "split" / "diagnostics.csv").read_bytes()
            == (tmp_path / "full" / "diagnostics.csv").read_bytes())
    assert scn.resume_scenario(tmp_path / "split") is None


def test_resume_version_mismatch(tmp_path):
    scn.run_scenario(forced_small(), tmp_path / "r", checkpoint_every=50, halt_after=100)
    ck = tmp_path / "r" / "checkpoint.json"
    d = json.loads(ck.read_text())
    d["schema_version"] = 99
    ck.write_text(json.dumps(d))
    with pytest.raises(ConfigurationError, match="version"):
        scn.resume_scenario(ck)


def test_run_suite_parallel_matches_serial(tmp_path):
    scs = scn.scenario_attractor_absorption(2, [0.5, 2.0], n=4, dt=1e-2, t_end=1.0)
    serial = scn.run_suite(scs, tmp_path / "s", workers=1)
    parallel = scn.run_suite(scs, tmp_path / "p", workers=2)
    assert [r.scenario.name for r in parallel] == [s.name for s in scs]
    for a, b, s in zip(serial, parallel, scs):
        np.testing.assert_array_equal(a.record.final_state.coeffs, b.record.final_state.coeffs)
        assert ((tmp_path / "s" / s.name / "diagnostics.csv").read_bytes()
                == (tmp_path / "p" / s.name / "diagnostics.csv").read_bytes())


def test_snapshot_initial_state(tmp_path):
    t = sp.Truncation(4, 4)
    u = sp.random_admissible_field(t, np.random.default_rng(0), 1.0)
    sp.save_snapshot(tmp_path / "u0.gspc", u)
    spec = scn.InitialSpec("snapshot", path=str(tmp_path / "u0.gspc"))
    np.testing.assert_array_equal(spec.build(t).coeffs, u.coeffs)
    with pytest.raises(ConfigurationError):
        scn.InitialSpec("snapshot", path=str(tmp_path / "none.gspc")).build(t)
