"""Right-hand side, nonlinearity, IMEX steppers and the Galerkin tensor oracle.

The evolution equation for the horizontal velocity is::

    u' + P(u d1 u + v_u d2 u) = mu Lap u + alpha u + beta P v_u + K

Diffusion is diagonal in the basis and is always treated implicitly; every
other term is explicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import spectral as sp
from .records import DiagnosticSample, TrajectoryRecord
from .spectral import ConfigurationError, SpectralField, Truncation

BLOWUP_NORM = 1e12
DEFAULT_TENSOR_CAP = 200
SCHEMES = ("imex-euler", "cnab2")


class DivergenceError(RuntimeError):
    """State became non-finite or crossed the blow-up guard."""

    def __init__(self, t: float, message: str = "", record: TrajectoryRecord | None = None):
        super().__init__(message or f"divergence at t={t:.6g}")
        self.t = t
        self.record = record


@dataclass(frozen=True)
class ModelParams:
    mu: float
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("mu", "alpha", "beta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ConfigurationError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.mu <= 0:
            raise ConfigurationError("mu must be positive")

    def to_dict(self) -> dict:
        return {"mu": self.mu, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class CosineEnvelope:
    """``offset + amplitude * cos(frequency * t + phase)``"""

    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0
    offset: float = 0.0

    def __call__(self, t: float) -> float:
        return self.offset + self.amplitude * math.cos(self.frequency * t + self.phase)


@dataclass(frozen=True, eq=False)
class ForcingSpec:
    """Forcing ``K(t)``: zero, a constant admissible field, or field times envelope."""

    kind: str = "zero"
    field: SpectralField | None = None
    envelope: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "modulated"):
            raise ConfigurationError(f"unknown forcing kind {self.kind!r}")
        if self.kind != "zero":
            if self.field is None:
                raise ConfigurationError(f"{self.kind} forcing needs a field")
            if not self.field.is_admissible:
                raise ConfigurationError("forcing field must be admissible (P K = K)")
        if self.kind == "modulated" and self.envelope is None:
            raise ConfigurationError("modulated forcing needs an envelope")

    @classmethod
    def zero(cls) -> "ForcingSpec":
        return cls("zero")

    @classmethod
    def constant(cls, fld: SpectralField) -> "ForcingSpec":
        return cls("constant", fld)

    @classmethod
    def modulated(cls, fld: SpectralField, envelope) -> "ForcingSpec":
        return cls("modulated", fld, envelope)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def coeffs_at(self, t: float) -> np.ndarray | None:
        if self.kind == "zero":
            return None
        if self.kind == "constant":
            return self.field.coeffs
        return self.envelope(t) * self.field.coeffs

    def at(self, t: float, trunc: Truncation) -> SpectralField:
        c = self.coeffs_at(t)
        return SpectralField.zeros(trunc) if c is None else SpectralField(trunc, c)


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    scheme: str = "cnab2"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError("dt must be positive")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ConfigurationError("t_end must be non-negative")
        if abs(self.n_steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ConfigurationError(f"t_end={self.t_end} is not a multiple of dt={self.dt}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "dt": self.dt, "t_end": self.t_end}


# --------------------------------------------------------------------------
# nonlinearity and right-hand side
# --------------------------------------------------------------------------

def _require_products(trunc: Truncation):
    if not trunc.supports_products:
        raise ConfigurationError(
            f"grid {trunc.grid_shape} too coarse for products; need m1 >= {3 * trunc.n1 + 1}"
            f" and m2 >= {3 * (trunc.n2 + 1)}")


def _B_arrays(ops, cu: np.ndarray, cw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of B(u, w) and the grid values of v_u (reused for the beta term)."""
    d1u = sp._d1_coeffs(cu)
    d1w = d1u if cw is cu else sp._d1_coeffs(cw)
    u_g = ops.synth(cu, ops.sin2)
    d1w_g = ops.synth(d1w, ops.sin2)
    v_g = ops.synth(-d1u, ops.vprof2)
    d2w_g = ops.synth(cw * ops.L2, ops.cos2)
    return ops.analyze(u_g * d1w_g + v_g * d2w_g, "cos"), v_g


def nonlinearity_B(u: SpectralField, w: SpectralField) -> SpectralField:
    """``<u d1 w + v_u d2 w, e_l>`` for every mode of the box (no projection)."""
    sp._check_same(u, w)
    _require_products(u.trunc)
    ops = sp.operators(u.trunc)
    b, _ = _B_arrays(ops, u.coeffs, w.coeffs)
    return SpectralField(u.trunc, b)


def nonlinearity_B_flipped(u: SpectralField, w: SpectralField) -> SpectralField:
    """``u d1 w - v_u d2 w``: a deliberately wrong B for mutation-testing the checks."""
    sp._check_same(u, w)
    _require_products(u.trunc)
    ops = sp.operators(u.trunc)
    cu, cw = u.coeffs, w.coeffs
    u_g = ops.synth(cu, ops.sin2)
    d1w_g = ops.synth(sp._d1_coeffs(cw), ops.sin2)
    v_g = ops.synth(-sp._d1_coeffs(cu), ops.vprof2)
    d2w_g = ops.synth(cw * ops.L2, ops.cos2)
    return SpectralField(u.trunc, ops.analyze(u_g * d1w_g - v_g * d2w_g, "cos"))


def _explicit_arrays(ops, c: np.ndarray, params: ModelParams, k: np.ndarray | None):
    b, v_g = _B_arrays(ops, c, c)
    n = -b
    if params.beta:
        n = n + params.beta * ops.analyze(v_g, "cos")
    n = np.where(ops.mask, n, 0.0)
    if params.alpha:
        n = n + params.alpha * c
    if k is not None:
        n = n + k
    return n


def rhs(u: SpectralField, K_t: SpectralField | None, params: ModelParams) -> SpectralField:
    _require_products(u.trunc)
    ops = sp.operators(u.trunc)
    k = None if K_t is None else K_t.coeffs
    n = _explicit_arrays(ops, u.coeffs, params, k)
    return SpectralField(u.trunc, n - params.mu * ops.eig * u.coeffs)


# --------------------------------------------------------------------------
# time stepping
# --------------------------------------------------------------------------

class TimeStepper:
    """Diagonal-implicit diffusion with an explicit remainder.

    ``history`` holds the previous explicit evaluation for ``cnab2``; it is
    ``None`` before the first step, in which case one IMEX-Euler step is
    taken to bootstrap.
    """

    def __init__(self, trunc: Truncation, cfg: StepperConfig, params: ModelParams,
                 forcing: ForcingSpec | None = None, explicit=None,
                 blowup_norm: float = BLOWUP_NORM):
        self.trunc = trunc
        self.cfg = cfg
        self.params = params
        self.forcing = forcing or ForcingSpec.zero()
        self.blowup_norm = blowup_norm
        ops = sp.operators(trunc)
        self._ops = ops
        if explicit is None:
            _require_products(trunc)
            explicit = lambda c, t: _explicit_arrays(ops, c, params, self.forcing.coeffs_at(t))
        self.explicit = explicit
        dt, lam = cfg.dt, params.mu * ops.eig
        self._euler_den = 1.0 + dt * lam
        self._cn_num = 1.0 - 0.5 * dt * lam
        self._cn_den = 1.0 + 0.5 * dt * lam
        self.history: np.ndarray | None = None

    def step_array(self, c: np.ndarray, t: float) -> np.ndarray:
        dt = self.cfg.dt
        n_now = self.explicit(c, t)
        if self.cfg.scheme == "imex-euler" or self.history is None:
            new = (c + dt * n_now) / self._euler_den
        else:
            new = (self._cn_num * c + dt * (1.5 * n_now - 0.5 * self.history)) / self._cn_den
        if self.cfg.scheme == "cnab2":
            self.history = n_now
        t_new = t + dt
        if not np.all(np.isfinite(new)):
            raise DivergenceError(t_new, f"non-finite coefficients at t={t_new:.6g}")
        if np.sqrt(np.sum(new * new)) > self.blowup_norm:
            raise DivergenceError(t_new, f"||u|| exceeded {self.blowup_norm:g} at t={t_new:.6g}")
        return new

    def step(self, u: SpectralField, t: float) -> SpectralField:
        return SpectralField(u.trunc, self.step_array(u.coeffs, t))


def step(u: SpectralField, t: float, cfg: StepperConfig, params: ModelParams,
         forcing: ForcingSpec | None = None) -> SpectralField:
    """One step from rest (``cnab2`` without history falls back to IMEX-Euler)."""
    return TimeStepper(u.trunc, cfg, params, forcing).step(u, t)


# --------------------------------------------------------------------------
# trajectories
# --------------------------------------------------------------------------

def _norms_sq(ops, c: np.ndarray) -> tuple[float, float, float, float, float]:
    c2 = c * c
    d1 = float(np.sum(ops.L1 ** 2 * c2))
    d2 = float(np.sum(ops.L2 ** 2 * c2))
    return (float(np.sum(c2)), d1 + d2, float(np.sum(ops.eig ** 2 * c2)), d1, d2)


def energy_identity_rhs(u: SpectralField, params: ModelParams, K_t: SpectralField | None) -> float:
    """``-mu |grad u|^2 + alpha |u|^2 + beta <v_u, u> + <K, u>``"""
    ops = sp.operators(u.trunc)
    c = u.coeffs
    val = -params.mu * float(np.sum(ops.eig * c * c)) + params.alpha * float(np.sum(c * c))
    if params.beta:
        val += params.beta * sp.v_inner(u, u)
    if K_t is not None:
        val += float(np.sum(K_t.coeffs * c))
    return val


class Integrator:
    """Resumable driver around :class:`TimeStepper` that records diagnostics.

    Samples are taken every ``probe_every`` steps and at the last step.  The
    energy residual of a sample uses the states one step before and after
    it, so it is filled in once the following step is known (and stays NaN
    at the trajectory ends).
    """

    def __init__(self, u0: SpectralField, cfg: StepperConfig, params: ModelParams,
                 forcing: ForcingSpec | None = None, probe_every: int = 1,
                 snapshot_every: int | None = None, extra_probes: dict | None = None,
                 explicit=None, blowup_norm: float = BLOWUP_NORM):
        if probe_every < 1:
            raise ConfigurationError("probe interval must be >= 1 step")
        self.trunc = u0.trunc
        self.cfg = cfg
        self.params = params
        self.forcing = forcing or ForcingSpec.zero()
        self.probe_every = int(probe_every)
        self.snapshot_every = snapshot_every
        self.extra_probes = dict(extra_probes or {})
        self.stepper = TimeStepper(self.trunc, cfg, params, self.forcing, explicit, blowup_norm)
        self._ops = sp.operators(self.trunc)
        self.n = 0
        self.c = np.array(u0.coeffs)
        self.prev_l2sq: float | None = None
        self.pending: dict | None = None
        self.record = TrajectoryRecord()
        self._sample()

    @property
    def t(self) -> float:
        return self.n * self.cfg.dt

    @property
    def done(self) -> bool:
        return self.n >= self.cfg.n_steps

    @property
    def state(self) -> SpectralField:
        return SpectralField(self.trunc, self.c)

    def _sample(self):
        u = self.state
        t = self.t
        l2, g, lap, d1, d2 = _norms_sq(self._ops, self.c)
        extras = {name: float(fn(t, u)) for name, fn in self.extra_probes.items()}
        self.record.samples.append(DiagnosticSample(t, l2, g, lap, d1, d2, math.nan, extras))
        K_t = None if self.forcing.is_zero else self.forcing.at(t, self.trunc)
        self.pending = {"index": len(self.record.samples) - 1,
                        "prev_l2sq": self.prev_l2sq,
                        "identity": energy_identity_rhs(u, self.params, K_t),
                        "grad_sq": g}
        if self.snapshot_every and self.n % self.snapshot_every == 0:
            self.record.snapshots.append((t, u))

    def _resolve_pending(self, new_l2sq: float):
        p = self.pending
        self.pending = None
        if p is None or p["prev_l2sq"] is None:
            return
        rate = 0.5 * (new_l2sq - p["prev_l2sq"]) / (2.0 * self.cfg.dt)
        res = (rate - p["identity"]) / max(1.0, p["grad_sq"])
        i = p["index"]
        self.record.samples[i] = replace(self.record.samples[i], energy_residual=res)

    def advance(self, n_target: int | None = None) -> TrajectoryRecord:
        n_target = self.cfg.n_steps if n_target is None else min(n_target, self.cfg.n_steps)
        try:
            while self.n < n_target:
                cur_l2sq = float(np.sum(self.c * self.c))
                new = self.stepper.step_array(self.c, self.t)
                self.c = new
                self.n += 1
                self._resolve_pending(float(np.sum(new * new)))
                self.prev_l2sq = cur_l2sq
                if self.n % self.probe_every == 0 or self.n == self.cfg.n_steps:
                    self._sample()
        except DivergenceError as exc:
            self.record.status = "diverged"
            self.record.diverged_at = exc.t
            self.record.final_t = self.t
            self.record.final_state = self.state
            exc.record = self.record
            raise
        self.record.final_t = self.t
        self.record.final_state = self.state
        return self.record

    # checkpoint support -------------------------------------------------
    def state_dict(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "coeffs": self.c.tolist(),
            "history": None if self.stepper.history is None else self.stepper.history.tolist(),
            "prev_l2sq": self.prev_l2sq,
            "pending": self.pending,
            "samples": [s.to_dict() for s in self.record.samples],
        }

    def load_state_dict(self, state: dict) -> None:
        self.n = int(state["n"])
        self.c = np.array(state["coeffs"], dtype=float)
        h = state["history"]
        self.stepper.history = None if h is None else np.array(h, dtype=float)
        self.prev_l2sq = state["prev_l2sq"]
        self.pending = state["pending"]
        self.record = TrajectoryRecord(
            samples=[DiagnosticSample.from_dict(s) for s in state["samples"]])


def integrate(u0: SpectralField, cfg: StepperConfig, params: ModelParams,
              forcing: ForcingSpec | None = None, probe_every: int = 1,
              snapshot_every: int | None = None, extra_probes: dict | None = None,
              explicit=None) -> TrajectoryRecord:
    """Run to ``cfg.t_end`` and return the trajectory record.

    Raises :class:`DivergenceError` (with the partial record attached) if
    the blow-up guard trips.
    """
    if not u0.is_admissible:
        raise ConfigurationError("initial state must be admissible")
    return Integrator(u0, cfg, params, forcing, probe_every, snapshot_every,
                      extra_probes, explicit).advance()


# --------------------------------------------------------------------------
# exact Galerkin tensor oracle
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GalerkinTensor:
    """``T[j, k, l] = <B(e_j, e_k), e_l>`` and ``V[j, l] = <v_{e_j}, e_l>``.

    Indices run over :func:`spectral.mode_set` order.
    """

    trunc: Truncation
    modes: list
    T: np.ndarray
    V: np.ndarray
    eig: np.ndarray = field(repr=False)


def _basis_on(modes, x1, x2):
    """Closed-form e, d1 e, d2 e and v_e at tensor-product points."""
    n = len(modes)
    E = np.empty((n, x1.size, x2.size))
    D1, D2, VV = np.empty_like(E), np.empty_like(E), np.empty_like(E)
    for i, m in enumerate(modes):
        c = sp.basis_norm_constant(m)
        a = abs(m.l1)
        if m.l1 >= 0:
            f, df = np.cos(a * x1), -a * np.sin(a * x1)
        else:
            f, df = np.sin(a * x1), a * np.cos(a * x1)
        s, ds = np.sin(m.l2 * x2), m.l2 * np.cos(m.l2 * x2)
        prof = (1.0 - np.cos(m.l2 * x2)) / m.l2
        E[i] = c * np.outer(f, s)
        D1[i] = c * np.outer(df, s)
        D2[i] = c * np.outer(f, ds)
        VV[i] = -c * np.outer(df, prof)
    return E, D1, D2, VV


def galerkin_tensor(trunc: Truncation, cap: int = DEFAULT_TENSOR_CAP) -> GalerkinTensor:
    """Interaction tensor by direct quadrature of closed-form basis functions.

    Independent of the transform machinery: trapezoid in ``x1`` (exact for
    the triple products on ``3*n1 + 3`` or more nodes) and Gauss-Legendre
    in ``x2`` with enough nodes to integrate the trigonometric triple
    products to rounding.
    """
    modes = sp.mode_set(trunc)
    n = len(modes)
    if n > cap:
        raise ConfigurationError(f"{n} admissible modes exceeds tensor cap {cap}")
    m1 = 3 * trunc.n1 + 3
    x1 = -np.pi + 2.0 * np.pi * np.arange(m1) / m1
    w1 = 2.0 * np.pi / m1
    q2 = 2 * (3 * trunc.n2 + 3) + 32
    g, gw = np.polynomial.legendre.leggauss(q2)
    x2 = 0.5 * np.pi * (g + 1.0)
    w2 = 0.5 * np.pi * gw
    E, D1, D2, VV = _basis_on(modes, x1, x2)
    W = w1 * np.broadcast_to(w2, (m1, q2))
    Ew = (E * W).reshape(n, -1)                        # weighted test functions
    E_, D1_, D2_, V_ = (a.reshape(n, -1) for a in (E, D1, D2, VV))
    T = np.empty((n, n, n))
    for j in range(n):
        prod = E_[j] * D1_ + V_[j] * D2_                # B(e_j, e_k) for all k
        T[j] = prod @ Ew.T
    V = V_ @ Ew.T
    eig = np.array([m.eigenvalue for m in modes], dtype=float)
    return GalerkinTensor(trunc, modes, T, V, eig)


def _tensor_explicit(tensor: GalerkinTensor, params: ModelParams, forcing: ForcingSpec):
    trunc = tensor.trunc
    mask = sp.operators(trunc).mask

    def explicit(c: np.ndarray, t: float) -> np.ndarray:
        a = c[mask]
        n = -np.einsum("jkl,j,k->l", tensor.T, a, a, optimize=True)
        if params.beta:
            n = n + params.beta * (tensor.V.T @ a)
        out = np.zeros_like(c)
        out[mask] = n
        if params.alpha:
            out = out + params.alpha * c
        k = forcing.coeffs_at(t)
        if k is not None:
            out = out + k
        return out
    return explicit


def rhs_oracle(u: SpectralField, K_t: SpectralField | None, params: ModelParams,
               tensor: GalerkinTensor) -> SpectralField:
    if (u.trunc.n1, u.trunc.n2) != (tensor.trunc.n1, tensor.trunc.n2):
        raise ConfigurationError("tensor was built for a different truncation")
    forcing = ForcingSpec.zero() if K_t is None else ForcingSpec.constant(K_t)
    n = _tensor_explicit(tensor, params, forcing)(u.coeffs, 0.0)
    ops = sp.operators(u.trunc)
    return SpectralField(u.trunc, n - params.mu * ops.eig * u.coeffs)


def oracle_explicit(tensor: GalerkinTensor, params: ModelParams, forcing: ForcingSpec | None = None):
    """Explicit-part callable for :class:`TimeStepper` driven by the tensor."""
    return _tensor_explicit(tensor, params, forcing or ForcingSpec.zero())
