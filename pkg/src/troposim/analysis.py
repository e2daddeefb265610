"""Norms, energy balance, inequality checks, growth fits and regime labels."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import dynamics as dy
from . import spectral as sp
from .records import DiagnosticSample, TrajectoryRecord  # noqa: F401  (re-export)
from .spectral import SpectralField

__all__ = [
    "Norms", "norms", "energy_balance_residual", "CheckResult", "InequalityReport",
    "check_inequalities", "trilinear_checks", "GrowthFit", "fit_growth_rate",
    "RegimeVerdict", "classify_regime", "EnvelopeResult", "decay_envelope_check",
    "ladyzhenskaya_ratio", "calibrate_ladyzhenskaya", "LADYZHENSKAYA_CONSTANT",
    "SuiteRow", "run_identity_suite", "DiagnosticSample",
]

# Largest ||u||_4 / (||u||^(1/2) ||grad u||^(1/2)) seen by calibrate_ladyzhenskaya()
# with its default arguments, times the 1.05 safety factor.  Recomputed in tests.
LADYZHENSKAYA_SEARCH_MAX = 0.5292382848211284
LADYZHENSKAYA_CONSTANT = 1.05 * LADYZHENSKAYA_SEARCH_MAX

# rounding allowance for inequalities that can hold with equality
_RTOL = 1e-12


class Norms(NamedTuple):
    l2: float
    grad: float
    lap: float
    d1: float
    d2: float


def norms(u: SpectralField) -> Norms:
    """``||u||, ||grad u||, ||Lap u||, ||d1 u||, ||d2 u||`` by Parseval."""
    l2, g, lap, d1, d2 = dy._norms_sq(sp.operators(u.trunc), u.coeffs)
    return Norms(*(math.sqrt(x) for x in (l2, g, lap, d1, d2)))


def energy_balance_residual(times, states, params: dy.ModelParams,
                            forcing: dy.ForcingSpec | None = None) -> np.ndarray:
    """Central-difference energy balance residual at interior samples.

    Entry ``i`` compares ``d/dt (1/2)||u||^2`` from samples ``i`` and
    ``i + 2`` with the energy identity evaluated at sample ``i + 1``,
    normalized by ``max(1, ||grad u||^2)``.
    """
    times = np.asarray(times, dtype=float)
    if len(states) < 3 or len(times) != len(states):
        raise ValueError("energy balance needs a window of at least 3 samples with states")
    forcing = forcing or dy.ForcingSpec.zero()
    e = np.array([0.5 * s.norm() ** 2 for s in states])
    out = np.empty(len(states) - 2)
    for i in range(1, len(states) - 1):
        u = states[i]
        K_t = None if forcing.is_zero else forcing.at(times[i], u.trunc)
        rate = (e[i + 1] - e[i - 1]) / (times[i + 1] - times[i - 1])
        g = norms(u).grad ** 2
        out[i - 1] = (rate - dy.energy_identity_rhs(u, params, K_t)) / max(1.0, g)
    return out


# --------------------------------------------------------------------------
# inequality suite
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    """One inequality (``lhs <= rhs``) or identity (``|lhs - rhs| <= tol``)."""

    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    kind: str = "inequality"

    def to_dict(self) -> dict:
        return {"check": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "slack": self.slack, "pass": self.passed, "kind": self.kind}


@dataclass
class InequalityReport:
    results: list = field(default_factory=list)
    vacuous: bool = False

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"vacuous": self.vacuous, "pass": self.passed,
                "results": [r.to_dict() for r in self.results]}


def _ineq(name, lhs, rhs, rtol=_RTOL):
    slack = rhs - lhs
    return CheckResult(name, float(lhs), float(rhs), float(slack),
                       bool(lhs <= rhs + rtol * abs(rhs) + 1e-300))


def _identity(name, lhs, rhs, scale, tol):
    err = abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs)
    return CheckResult(name, float(lhs), float(rhs), float(tol - err), bool(err <= tol),
                       "identity")


def ladyzhenskaya_ratio(u: SpectralField) -> float:
    n = norms(u)
    return sp.lp_norm(u, 4) / math.sqrt(n.l2 * n.grad)


def _grad_d_sq_by_quadrature(u: SpectralField) -> tuple[float, float]:
    """``||grad d1 u||^2`` and ``||grad d2 u||^2`` integrated on the grid."""
    d1u = sp.d1(u)
    d11 = sp.synthesize(sp.d1(d1u))
    d12 = sp.d2_to_grid(d1u)
    d22 = sp.synthesize(sp.d2(u))
    a = sp.grid_inner(d11, d11) + sp.grid_inner(d12, d12)
    b = sp.grid_inner(d12, d12) + sp.grid_inner(d22, d22)
    return a, b


def check_inequalities(u: SpectralField, w: SpectralField | None = None,
                       nonlinearity: Callable | None = None,
                       c_lady: float = LADYZHENSKAYA_CONSTANT) -> InequalityReport:
    """Evaluate both sides of every inequality and identity for an admissible field.

    *w* is the second argument for the integration-by-parts and skew
    identities (defaults to ``u``); *nonlinearity* replaces :func:`dynamics.nonlinearity_B`, which
    is how the harness is mutation-tested.
    """
    if not u.is_admissible:
        raise ValueError("check_inequalities expects an admissible field")
    if u.norm() == 0.0:
        return InequalityReport(vacuous=True)
    B = nonlinearity or dy.nonlinearity_B
    w = u if w is None else w
    n = norms(u)
    out = []

    out.append(_ineq("poincare", n.l2, n.grad))
    out.append(_ineq("grad_le_laplacian", n.grad, n.lap))

    a, b = _grad_d_sq_by_quadrature(u)
    out.append(_identity("laplacian_splitting", a + b, n.lap ** 2, n.lap ** 2, 1e-10))

    v = sp.v_from_u(u)
    v_l2 = math.sqrt(sp.grid_inner(v, v))
    out.append(_ineq("v_l2_bound", v_l2, math.pi * n.d1))

    # column-wise bounds; the sup over x2 is a grid max (a lower bound)
    d1g = sp.synthesize(sp.d1(u))
    v_sup = np.max(np.abs(v.values), axis=1)
    v_rhs = math.sqrt(math.pi) * sp.column_l2_norms(d1g)
    i = int(np.argmin(v_rhs - v_sup))
    out.append(_ineq("v_linfty_columns", v_sup[i], v_rhs[i]))

    col = sp.column_l2_norms(sp.synthesize(u))
    bound = math.sqrt(n.l2) * (math.sqrt(n.l2) + math.sqrt(2.0) * math.sqrt(n.d1))
    out.append(_ineq("anisotropic_columns", float(col.max()), bound))

    out.append(_ineq("ladyzhenskaya", sp.lp_norm(u, 4), c_lady * math.sqrt(n.l2 * n.grad)))

    lhs = sp.grid_inner(v, sp.d2_to_grid(w))
    rhs = sp.d1(u).inner(w)
    scale = v_l2 * norms(w).d2 + n.d1 * w.norm()
    out.append(_identity("integration_by_parts", lhs, rhs, scale, 1e-9))

    # <P B(u, w), w> = 0 for every admissible pair; w = u alone cannot see a
    # sign error in the vertical term, which is also skew when w = u
    Buw = Buu = B(u, u) if w is u else B(u, w)
    if w is not u:
        Buu = B(u, u)
    nw = norms(w)
    out.append(_identity("skew_symmetry", sp.project_div(Buw).inner(w), 0.0,
                         n.grad * nw.grad ** 2, 1e-9))
    out.append(_identity("d2_orthogonality", Buu.inner(sp.d2(u)), 0.0,
                         n.grad ** 2 * n.lap, 1e-9))
    return InequalityReport(out)


def trilinear_checks(u: SpectralField, w: SpectralField, z: SpectralField,
                     c_lady: float = LADYZHENSKAYA_CONSTANT) -> list[CheckResult]:
    """Trilinear bounds for ``|int B(u, w) z|`` in the H1 and H2 forms."""
    m = c_lady ** 2 + math.sqrt(math.pi) * (1.0 + math.sqrt(2.0))
    val = abs(dy.nonlinearity_B(u, w).inner(z))
    nu, nw, nz = norms(u), norms(w), norms(z)
    return [
        _ineq("trilinear_h1", val, m * nu.grad * nw.grad * nz.grad),
        _ineq("trilinear_h2", val, m * nu.grad * nw.lap * nz.l2),
    ]


def calibrate_ladyzhenskaya(samples: int = 10_000, seed: int = 20240611,
                            truncations=((4, 4), (8, 8), (16, 16)),
                            dampings=(0.0, 1.0, 2.0, 3.0)) -> float:
    """Maximum Ladyzhenskaya ratio over a random-field search.

    Fields cycle through the given truncations and smoothness exponents;
    single basis modes are always included.
    """
    rng = np.random.default_rng(seed)
    best = 0.0
    truncs = [sp.Truncation(*t) for t in truncations]
    for tr in truncs:
        for m in sp.mode_set(tr):
            best = max(best, ladyzhenskaya_ratio(sp.SpectralField.from_modes(tr, {tuple(m): 1.0})))
    for i in range(samples):
        tr = truncs[i % len(truncs)]
        damp = dampings[(i // len(truncs)) % len(dampings)]
        best = max(best, ladyzhenskaya_ratio(sp.random_admissible_field(tr, rng, 1.0, damp)))
    return best


# --------------------------------------------------------------------------
# identity suite over many random fields
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteRow:
    check: str
    worst_slack: float
    failures: int
    count: int

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {"check": self.check, "worst_slack": self.worst_slack,
                "failures": self.failures, "count": self.count, "pass": self.passed}


def run_identity_suite(trunc: sp.Truncation, seed: int = 0, count: int = 1000,
                       nonlinearity: Callable | None = None,
                       dampings=(0.0, 1.5, 3.0)) -> list[SuiteRow]:
    """Run :func:`check_inequalities` (and the trilinear bounds) on random fields.

    Field ``i`` uses its own generator seeded by ``(seed, i)`` so results do
    not depend on evaluation order.
    """
    rows: dict[str, list] = {}
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        damp = dampings[i % len(dampings)]
        u = sp.random_admissible_field(trunc, rng, 1.0, damp)
        w = sp.random_admissible_field(trunc, rng, 1.0, damp)
        z = sp.random_admissible_field(trunc, rng, 1.0, damp)
        results = check_inequalities(u, w, nonlinearity).results
        if nonlinearity is None:
            results = results + trilinear_checks(u, w, z)
        for r in results:
            rows.setdefault(r.name, []).append(r)
    out = []
    for name, rs in rows.items():
        out.append(SuiteRow(name, min(r.slack for r in rs),
                            sum(not r.passed for r in rs), len(rs)))
    return out


# --------------------------------------------------------------------------
# growth rates, regimes, decay envelope
# --------------------------------------------------------------------------

class GrowthFit(NamedTuple):
    rate: float
    residual: float


def fit_growth_rate(times, norm_values) -> GrowthFit:
    """Least-squares slope of ``log ||u||`` over the trailing half of the series."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(norm_values, dtype=float)
    if t.size < 10 or t.size != y.size:
        raise ValueError("growth-rate fit needs at least 10 (t, norm) samples")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("growth-rate fit needs strictly positive finite norms (log undefined)")
    half = t.size // 2
    t, ly = t[half:], np.log(y[half:])
    A = np.vstack([t - t.mean(), np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return GrowthFit(float(coef[0]), float(np.sqrt(np.mean(resid ** 2))))


class ConvergenceResult(NamedTuple):
    order: float
    differences: tuple      # ||u_dt - u_dt/2||, ||u_dt/2 - u_dt/4|| at t_end


def self_convergence_order(u0: SpectralField, params: dy.ModelParams, t_end: float,
                           dt: float, scheme: str = "cnab2",
                           forcing: dy.ForcingSpec | None = None) -> ConvergenceResult:
    """Observed temporal order from the Richardson triplet ``dt, dt/2, dt/4``."""
    finals = []
    for k in range(3):
        h = dt / 2 ** k
        cfg = dy.StepperConfig(h, t_end, scheme)
        rec = dy.integrate(u0, cfg, params, forcing, probe_every=cfg.n_steps or 1)
        finals.append(rec.final_state)
    d1 = (finals[0] - finals[1]).norm()
    d2 = (finals[1] - finals[2]).norm()
    return ConvergenceResult(math.log2(d1 / d2), (d1, d2))


OPEN_BAND_NOTE = "alpha in (mu - pi|beta|, mu]: no global bound or grow-up is known here"


@dataclass(frozen=True)
class RegimeVerdict:
    omega: float
    label: str     # attractor-regime | marginal | grow-up-candidate
    note: str = ""

    def to_dict(self) -> dict:
        return {"omega": self.omega, "label": self.label, "note": self.note}


def classify_regime(params: dy.ModelParams) -> RegimeVerdict:
    mu, alpha, beta = params.mu, params.alpha, params.beta
    omega = mu - math.pi * abs(beta) - max(alpha, 0.0)
    if omega > 0:
        return RegimeVerdict(omega, "attractor-regime")
    if alpha > mu:
        return RegimeVerdict(omega, "grow-up-candidate")
    note = OPEN_BAND_NOTE if mu - math.pi * abs(beta) < alpha <= mu else ""
    return RegimeVerdict(omega, "marginal", note)


@dataclass(frozen=True)
class EnvelopeResult:
    passed: bool
    worst_ratio: float       # max over samples of ||u(t)||^2 / (e^{-omega t} ||u0||^2)
    worst_t: float
    applicable: bool = True


def decay_envelope_check(record: TrajectoryRecord, omega: float,
                         forcing: dy.ForcingSpec | None = None,
                         factor: float | None = None, dt: float | None = None) -> EnvelopeResult:
    """Check ``||u(t)||^2 <= factor * exp(-omega t) ||u0||^2`` at every sample.

    The default factor is ``1 + 1e-6 + dt**2`` (a small allowance for the
    time discretization).  Only meaningful for unforced runs.
    """
    if forcing is not None and not forcing.is_zero:
        return EnvelopeResult(False, math.nan, math.nan, applicable=False)
    if factor is None:
        factor = 1.0 + 1e-6 + (dt or 0.0) ** 2
    t = record.times
    e = record.column("l2_norm_sq")
    if e[0] == 0.0:
        return EnvelopeResult(bool(np.all(e == 0.0)), 0.0, 0.0)
    ratio = e / (np.exp(-omega * t) * e[0])
    i = int(np.argmax(ratio))
    return EnvelopeResult(bool(ratio[i] <= factor), float(ratio[i]), float(t[i]))
