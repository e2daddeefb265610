"""Sine/Fourier Galerkin basis on the strip (-pi, pi) x (0, pi).

Coefficient space
-----------------
A :class:`SpectralField` stores one real coefficient per mode ``(l1, l2)``
with ``|l1| <= n1`` and ``1 <= l2 <= n2`` in an array of shape
``(2*n1 + 1, n2)``; row ``l1 + n1``, column ``l2 - 1``.  Modes with
``l1 >= 0`` multiply ``cos(l1*x1) * sin(l2*x2)``, modes with ``l1 < 0``
multiply ``sin(|l1|*x1) * sin(l2*x2)``, each scaled to unit L2 norm, so
Parseval is the plain sum of squares.

A mode is *admissible* when ``l1 == 0`` or ``l2`` is even.  Those modes span
the divergence-constrained space; the others span its orthogonal
complement (pressure gradients).  Inadmissible slots are kept so that
analysis of arbitrary grid data is representable before projection.

Grid space
----------
:class:`GridField` values live on ``x1`` uniform on ``[-pi, pi)`` and the
interior sine-collocation nodes ``x2_j = j*pi/(m2 + 1)``.  Each grid field
carries its parity in ``x2``: ``"sin"`` for odd extensions (the state,
``d1 u``) and ``"cos"`` for even ones (``d2 u``, ``v_u``).  Parity picks the
quadrature used to go back to coefficients:

* sine-parity data times ``sin(l2*x2)`` is a cosine polynomial vanishing at
  both walls, integrated exactly by the interior trapezoid rule;
* cosine-parity data times ``sin(l2*x2)`` is a sine polynomial, integrated
  exactly by the interpolatory (Fejer-type) weights of :func:`sine_weights`.

With ``m2 >= 3*(n2 + 1)`` and ``m1 >= 3*n1 + 2`` the quadratic products of
the nonlinearity are therefore projected without aliasing error.
"""
from __future__ import annotations

import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

__all__ = [
    "ConfigurationError",
    "InvalidModeError",
    "ModeIndex",
    "Truncation",
    "SpectralField",
    "GridField",
    "mode_set",
    "basis_norm_constant",
    "synthesize",
    "analyze",
    "project_div",
    "d1",
    "d2",
    "d2_to_grid",
    "v_from_u",
    "laplacian",
    "evaluate",
    "grid_inner",
    "integrate_grid",
    "column_l2_norms",
    "lp_norm",
    "v_inner",
    "random_admissible_field",
    "save_snapshot",
    "load_snapshot",
    "atomic_write_bytes",
    "atomic_write_text",
]


class ConfigurationError(ValueError):
    """Invalid truncation, parameters or run configuration."""


class InvalidModeError(ValueError):
    pass


# --------------------------------------------------------------------------
# modes and truncation
# --------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class ModeIndex:
    """Basis label ``(l1, l2)`` with ``l1`` in Z and ``l2 >= 1``."""

    l1: int
    l2: int

    def __post_init__(self):
        if int(self.l2) < 1:
            raise InvalidModeError(f"l2 must be >= 1, got {self.l2}")

    @property
    def admissible(self) -> bool:
        return self.l1 == 0 or self.l2 % 2 == 0

    @property
    def eigenvalue(self) -> int:
        return self.l1 * self.l1 + self.l2 * self.l2

    def __iter__(self):
        yield self.l1
        yield self.l2


def _ceil_three_halves(n: int) -> int:
    return -(-3 * n // 2)


@dataclass(frozen=True)
class Truncation:
    """Mode box ``|l1| <= n1, 1 <= l2 <= n2`` plus collocation grid sizes.

    Grid sizes default to the product capacity (``3*n1 + 2`` and
    ``3*(n2 + 1)``), which makes every quadratic product exact.  Smaller
    grids down to the 3/2 minimum are accepted; operations that form
    products check :attr:`supports_products`.
    """

    n1: int
    n2: int
    grid_m1: int | None = None
    grid_m2: int | None = None

    def __post_init__(self):
        n1, n2 = int(self.n1), int(self.n2)
        if n1 < 0:
            raise ConfigurationError(f"n1 must be >= 0, got {n1}")
        if n2 < 1:
            raise ConfigurationError(f"n2 must be >= 1, got {n2}")
        m1 = self.grid_m1 if self.grid_m1 is not None else 3 * n1 + 2
        m2 = self.grid_m2 if self.grid_m2 is not None else 3 * (n2 + 1)
        object.__setattr__(self, "n1", n1)
        object.__setattr__(self, "n2", n2)
        object.__setattr__(self, "grid_m1", int(m1))
        object.__setattr__(self, "grid_m2", int(m2))
        if self.grid_m1 < self.min_m1:
            raise ConfigurationError(
                f"grid_m1={self.grid_m1} below dealiasing minimum {self.min_m1} for n1={n1}")
        if self.grid_m2 < self.min_m2:
            raise ConfigurationError(
                f"grid_m2={self.grid_m2} below dealiasing minimum {self.min_m2} for n2={n2}")

    @property
    def min_m1(self) -> int:
        return max(_ceil_three_halves(2 * self.n1 + 1), 1)

    @property
    def min_m2(self) -> int:
        return _ceil_three_halves(self.n2 + 1)

    @property
    def supports_products(self) -> bool:
        return self.grid_m1 >= 3 * self.n1 + 1 and self.grid_m2 >= 3 * (self.n2 + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * self.n1 + 1, self.n2)

    @property
    def grid_shape(self) -> tuple[int, int]:
        return (self.grid_m1, self.grid_m2)

    def refined(self, factor1: int, factor2: int | None = None) -> "Truncation":
        """Same mode box on a grid fine enough for products of ``factor`` fields."""
        factor2 = factor1 if factor2 is None else factor2
        return Truncation(self.n1, self.n2,
                          max(self.grid_m1, (factor1 + 1) * self.n1 + 2),
                          max(self.grid_m2, (factor2 + 1) * (self.n2 + 1)))

    def to_dict(self) -> dict:
        return {"n1": self.n1, "n2": self.n2,
                "grid_m1": self.grid_m1, "grid_m2": self.grid_m2}


def mode_set(trunc: Truncation) -> list[ModeIndex]:
    """Admissible modes of the box, ordered by ``l1`` then ``l2``.

    This is also the row-major order of the coefficient array restricted to
    admissible slots.
    """
    return [ModeIndex(l1, l2)
            for l1 in range(-trunc.n1, trunc.n1 + 1)
            for l2 in range(1, trunc.n2 + 1)
            if l1 == 0 or l2 % 2 == 0]


def basis_norm_constant(mode) -> float:
    """Scale making ``trig(l1 x1) sin(l2 x2)`` unit in L2 of the strip."""
    l1, l2 = (mode.l1, mode.l2) if isinstance(mode, ModeIndex) else mode
    if l2 < 1:
        raise InvalidModeError(f"l2 must be >= 1, got {l2}")
    return 1.0 / math.pi if l1 == 0 else math.sqrt(2.0) / math.pi


# --------------------------------------------------------------------------
# cached per-truncation operators
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def sine_weights(m: int) -> np.ndarray:
    """Interior-node weights exact for sine polynomials of degree <= m on (0, pi)."""
    j = np.arange(1, m + 1)
    k = np.arange(1, m + 1)
    x = j * np.pi / (m + 1)
    moments = (1.0 - (-1.0) ** k) / k
    w = (2.0 / (m + 1)) * np.sin(np.outer(x, k)) @ moments
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def cosine_weights(m: int) -> np.ndarray:
    """Interior-node weights exact for cosine polynomials of degree <= m - 1."""
    x = np.arange(1, m + 1) * np.pi / (m + 1)
    k = np.arange(m)
    rhs = np.zeros(m)
    rhs[0] = np.pi
    w = np.linalg.solve(np.cos(np.outer(k, x)), rhs)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def trapezoid_weights(m: int) -> np.ndarray:
    w = np.full(m, np.pi / (m + 1))
    w.setflags(write=False)
    return w


class _Operators:
    """Grids, transform matrices and mode weights for one truncation."""

    def __init__(self, trunc: Truncation):
        n1, n2, m1, m2 = trunc.n1, trunc.n2, trunc.grid_m1, trunc.grid_m2
        self.trunc = trunc
        self.l1 = np.arange(-n1, n1 + 1)
        self.l2 = np.arange(1, n2 + 1)
        L1, L2 = np.meshgrid(self.l1, self.l2, indexing="ij")
        self.L1, self.L2 = L1, L2
        self.eig = (L1 ** 2 + L2 ** 2).astype(float)
        self.mask = (L1 == 0) | (L2 % 2 == 0)
        self.norm = np.where(self.l1 == 0, 1.0 / np.pi, np.sqrt(2.0) / np.pi)

        self.x1 = -np.pi + 2.0 * np.pi * np.arange(m1) / m1
        self.x2 = np.arange(1, m2 + 1) * np.pi / (m2 + 1)
        kx = np.outer(self.x2, self.l2)
        self.sin2 = np.sin(kx)                       # (m2, n2)
        self.cos2 = np.cos(kx)
        self.vprof2 = (1.0 - self.cos2) / self.l2    # int_0^x2 sin(l2 s) ds
        self.w_trap = trapezoid_weights(m2)
        self.w_sine = sine_weights(m2)
        self.w_cos = cosine_weights(m2)
        self.ana_sin = (self.sin2 * self.w_trap[:, None]).T   # (n2, m2)
        self.ana_cos = (self.sin2 * self.w_sine[:, None]).T
        self.sign1 = (-1.0) ** np.arange(n1 + 1)
        for a in ("eig", "mask", "norm", "x1", "x2", "sin2", "cos2", "vprof2",
                  "ana_sin", "ana_cos"):
            getattr(self, a).setflags(write=False)

    # x1 direction: real Fourier series through rfft/irfft on shifted nodes
    def x1_synth(self, a: np.ndarray) -> np.ndarray:
        """Rows ``l1 + n1`` of *a* (already normalized) to ``m1`` samples."""
        n1, m1 = self.trunc.n1, self.trunc.grid_m1
        spec = np.zeros((m1 // 2 + 1,) + a.shape[1:], dtype=complex)
        spec[0] = m1 * a[n1]
        if n1:
            cos_part = a[n1 + 1:]
            sin_part = a[n1 - 1::-1]
            spec[1:n1 + 1] = (0.5 * m1) * self.sign1[1:, None] * (cos_part - 1j * sin_part)
        return np.fft.irfft(spec, n=m1, axis=0)

    def x1_analyze(self, g: np.ndarray) -> np.ndarray:
        """Integrals of *g* against ``cos(l1 x1)`` / ``sin(|l1| x1)`` over (-pi, pi)."""
        n1, m1 = self.trunc.n1, self.trunc.grid_m1
        F = np.fft.rfft(g, axis=0)[:n1 + 1]
        scale = (2.0 * np.pi / m1) * self.sign1[:, None]
        out = np.empty((2 * n1 + 1,) + g.shape[1:])
        out[n1:] = scale * F.real
        if n1:
            out[n1 - 1::-1] = -(scale[1:] * F[1:].imag)
        return out

    def synth(self, coeffs: np.ndarray, profile: np.ndarray) -> np.ndarray:
        X = self.x1_synth(coeffs * self.norm[:, None])
        return X @ profile.T

    def analyze(self, values: np.ndarray, parity: str) -> np.ndarray:
        A = self.ana_sin if parity == "sin" else self.ana_cos
        H = values @ A.T
        return self.x1_analyze(H) * self.norm[:, None]


@lru_cache(maxsize=64)
def operators(trunc: Truncation) -> _Operators:
    return _Operators(trunc)


# --------------------------------------------------------------------------
# field types
# --------------------------------------------------------------------------

def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients of a field in the unit-norm sine/Fourier basis."""

    trunc: Truncation
    coeffs: np.ndarray

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.shape != self.trunc.shape:
            raise ConfigurationError(
                f"coefficient shape {c.shape} does not match truncation {self.trunc.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, trunc: Truncation) -> "SpectralField":
        return cls(trunc, np.zeros(trunc.shape))

    @classmethod
    def from_modes(cls, trunc: Truncation, modes: dict) -> "SpectralField":
        c = np.zeros(trunc.shape)
        for (l1, l2), value in modes.items():
            if abs(l1) > trunc.n1 or not 1 <= l2 <= trunc.n2:
                raise InvalidModeError(f"mode {(l1, l2)} outside truncation")
            c[l1 + trunc.n1, l2 - 1] = value
        return cls(trunc, c)

    @classmethod
    def from_admissible_vector(cls, trunc: Truncation, vec) -> "SpectralField":
        c = np.zeros(trunc.shape)
        vec = np.asarray(vec, dtype=float)
        mask = operators(trunc).mask
        if vec.shape != (int(mask.sum()),):
            raise ConfigurationError(
                f"expected {int(mask.sum())} admissible coefficients, got {vec.shape}")
        c[mask] = vec
        return cls(trunc, c)

    def admissible_vector(self) -> np.ndarray:
        return self.coeffs[operators(self.trunc).mask]

    def coefficient(self, l1: int, l2: int) -> float:
        return float(self.coeffs[l1 + self.trunc.n1, l2 - 1])

    @property
    def is_admissible(self) -> bool:
        return not np.any(self.coeffs[~operators(self.trunc).mask])

    def inner(self, other: "SpectralField") -> float:
        _check_same(self, other)
        return float(np.sum(self.coeffs * other.coeffs))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs ** 2)))

    def _wrap(self, c) -> "SpectralField":
        return SpectralField(self.trunc, c)

    def __add__(self, other):
        _check_same(self, other)
        return self._wrap(self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same(self, other)
        return self._wrap(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __mul__(self, scalar):
        return self._wrap(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField(n1={self.trunc.n1}, n2={self.trunc.n2}, norm={self.norm():.6g})"


def _check_same(a, b):
    if a.trunc != b.trunc:
        raise ConfigurationError(f"truncation mismatch: {a.trunc} vs {b.trunc}")


@dataclass(frozen=True, eq=False)
class GridField:
    """Collocation values with their ``x2`` parity (``"sin"`` or ``"cos"``)."""

    trunc: Truncation
    values: np.ndarray
    parity: str = "sin"

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != self.trunc.grid_shape:
            raise ConfigurationError(
                f"grid shape {v.shape} does not match {self.trunc.grid_shape}")
        if self.parity not in ("sin", "cos"):
            raise ValueError(f"parity must be 'sin' or 'cos', got {self.parity!r}")
        object.__setattr__(self, "values", v)

    @property
    def x1(self) -> np.ndarray:
        return operators(self.trunc).x1

    @property
    def x2(self) -> np.ndarray:
        return operators(self.trunc).x2

    def __add__(self, other):
        _check_same(self, other)
        if self.parity != other.parity:
            raise ValueError("cannot add grid fields of different x2 parity")
        return GridField(self.trunc, self.values + other.values, self.parity)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, GridField):
            _check_same(self, other)
            parity = "cos" if self.parity == other.parity else "sin"
            return GridField(self.trunc, self.values * other.values, parity)
        return GridField(self.trunc, self.values * float(other), self.parity)

    __rmul__ = __mul__


# --------------------------------------------------------------------------
# transforms and operators
# --------------------------------------------------------------------------

def synthesize(u: SpectralField) -> GridField:
    ops = operators(u.trunc)
    return GridField(u.trunc, ops.synth(u.coeffs, ops.sin2), "sin")


def analyze(g: GridField, trunc: Truncation | None = None) -> SpectralField:
    """Discrete inner products ``<g, e_l>`` for every mode of the box.

    No projection is applied: inadmissible slots receive their inner
    products too.
    """
    if trunc is not None and trunc != g.trunc:
        raise ConfigurationError("grid field was sampled on a different truncation")
    ops = operators(g.trunc)
    return SpectralField(g.trunc, ops.analyze(g.values, g.parity))


def project_div(u: SpectralField) -> SpectralField:
    """Orthogonal projection onto the admissible (divergence-constrained) span."""
    return SpectralField(u.trunc, np.where(operators(u.trunc).mask, u.coeffs, 0.0))


def _d1_coeffs(c: np.ndarray) -> np.ndarray:
    # new[m] = m * old[-m]  (cos <-> sin swap)
    n1 = (c.shape[0] - 1) // 2
    m = np.arange(-n1, n1 + 1, dtype=float)
    return m[:, None] * c[::-1]


def d1(u: SpectralField) -> SpectralField:
    return SpectralField(u.trunc, _d1_coeffs(u.coeffs))


def d2(u: SpectralField) -> SpectralField:
    """Second derivative in x2 (stays in the sine basis)."""
    ops = operators(u.trunc)
    return SpectralField(u.trunc, -(ops.L2 ** 2) * u.coeffs)


def d2_to_grid(u: SpectralField) -> GridField:
    ops = operators(u.trunc)
    return GridField(u.trunc, ops.synth(u.coeffs * ops.L2, ops.cos2), "cos")


def v_from_u(u: SpectralField) -> GridField:
    """Vertical velocity ``v_u = -int_0^x2 d1 u`` evaluated on the grid."""
    ops = operators(u.trunc)
    return GridField(u.trunc, ops.synth(-_d1_coeffs(u.coeffs), ops.vprof2), "cos")


def laplacian(u: SpectralField) -> SpectralField:
    ops = operators(u.trunc)
    return SpectralField(u.trunc, -ops.eig * u.coeffs)


def evaluate(u: SpectralField, x1, x2, what: str = "u") -> np.ndarray:
    """Direct evaluation at arbitrary points by summing the series.

    ``what`` is one of ``"u"``, ``"d1"``, ``"d2"`` or ``"v"``.  Slow; meant
    for checks and plotting, not for stepping.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x1b, x2b = np.broadcast_arrays(x1, x2)
    ops = operators(u.trunc)
    c = u.coeffs * ops.norm[:, None]
    l1 = ops.l1[:, None, None]
    a1 = np.abs(l1) * x1b.ravel()[None, None, :]
    if what in ("u", "d2"):
        X = np.where(l1 >= 0, np.cos(a1), np.sin(a1))
    elif what in ("d1", "v"):
        X = np.where(l1 >= 0, -np.abs(l1) * np.sin(a1), np.abs(l1) * np.cos(a1))
    else:
        raise ValueError(f"unknown quantity {what!r}")
    l2 = ops.l2[None, :, None]
    a2 = l2 * x2b.ravel()[None, None, :]
    if what in ("u", "d1"):
        Y = np.sin(a2)
    elif what == "d2":
        Y = l2 * np.cos(a2)
    else:
        Y = -(1.0 - np.cos(a2)) / l2
    return np.sum(c[:, :, None] * X * Y, axis=(0, 1)).reshape(x1b.shape)


# --------------------------------------------------------------------------
# grid quadrature
# --------------------------------------------------------------------------

def _x2_weights(ops: _Operators, parity: str, vanishing: bool = False) -> np.ndarray:
    if parity == "sin":
        return ops.w_sine
    return ops.w_trap if vanishing else ops.w_cos


def integrate_grid(g: GridField, vanishing: bool = False) -> float:
    """Integral over the strip of grid data of the given parity.

    Cosine-parity data is integrated with weights exact up to degree
    ``m2 - 1``; pass ``vanishing=True`` when the data is a product of two
    sine-parity fields (zero on both walls), for which the trapezoid rule
    is exact up to degree ``2*m2 + 1``.
    """
    ops = operators(g.trunc)
    w2 = _x2_weights(ops, g.parity, vanishing)
    return float((2.0 * np.pi / g.trunc.grid_m1) * np.sum(g.values @ w2))


def grid_inner(f: GridField, g: GridField) -> float:
    return integrate_grid(f * g, vanishing=(f.parity == g.parity == "sin"))


def column_l2_norms(g: GridField) -> np.ndarray:
    """``||g(x1_i, .)||_{L2(0, pi)}`` for every grid column."""
    ops = operators(g.trunc)
    w2 = ops.w_trap if g.parity == "sin" else ops.w_cos
    return np.sqrt(np.maximum(g.values ** 2 @ w2, 0.0))


def lp_norm(u: SpectralField, p: int = 4) -> float:
    """L_p norm for even integer ``p`` on a grid fine enough to be exact."""
    if p % 2 or p < 2:
        raise ValueError("p must be an even integer >= 2")
    fine = u.trunc.refined(p, p)
    g = synthesize(SpectralField(fine, u.coeffs)).values ** p
    # u**p vanishes on both walls
    total = (2.0 * np.pi / fine.grid_m1) * np.sum(g @ operators(fine).w_trap)
    return float(total ** (1.0 / p))


def v_inner(u: SpectralField, w: SpectralField) -> float:
    """``<v_u, w>_2`` computed exactly on the grid."""
    _check_same(u, w)
    return grid_inner(v_from_u(u), synthesize(w))


# --------------------------------------------------------------------------
# random fields
# --------------------------------------------------------------------------

def random_admissible_field(trunc: Truncation, rng: np.random.Generator,
                            target_grad: float | None = None,
                            damping: float = 3.0) -> SpectralField:
    """Gaussian coefficients on admissible modes, damped by ``|l|**-damping``.

    If *target_grad* is given the field is rescaled to ``||grad u|| = target_grad``.
    """
    ops = operators(trunc)
    c = rng.standard_normal(trunc.shape) * ops.mask / ops.eig ** (damping / 2.0)
    if target_grad is not None:
        g = np.sqrt(np.sum(ops.eig * c ** 2))
        c = c * (float(target_grad) / g) if g > 0 else c
    return SpectralField(trunc, c)


# --------------------------------------------------------------------------
# snapshot files
# --------------------------------------------------------------------------

SNAPSHOT_MAGIC = b"GSPC"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIQ8x")   # 32 bytes


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def save_snapshot(path, u: SpectralField) -> None:
    """Write admissible coefficients as ``.gspc`` plus a ``.json`` mode sidecar."""
    if not u.is_admissible:
        raise ValueError("snapshots hold admissible fields only; apply project_div first")
    modes = mode_set(u.trunc)
    data = u.admissible_vector().astype("<f8")
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, u.trunc.n1, u.trunc.n2, len(modes))
    atomic_write_bytes(path, header + data.tobytes())
    sidecar = {"format": "GSPC", "version": SNAPSHOT_VERSION,
               "truncation": u.trunc.to_dict(),
               "modes": [[m.l1, m.l2] for m in modes]}
    atomic_write_text(str(path) + ".json", json.dumps(sidecar, indent=1))


def load_snapshot(path, trunc: Truncation | None = None) -> SpectralField:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, version, n1, n2, count = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    if trunc is None:
        sidecar = Path(str(path) + ".json")
        grid = {}
        if sidecar.exists():
            grid = json.loads(sidecar.read_text()).get("truncation", {})
        trunc = Truncation(n1, n2, grid.get("grid_m1"), grid.get("grid_m2"))
    elif (trunc.n1, trunc.n2) != (n1, n2):
        raise ConfigurationError(f"{path}: snapshot is n1={n1}, n2={n2}")
    if count != len(mode_set(trunc)) or len(raw) != _HEADER.size + 8 * count:
        raise ValueError(f"{path}: coefficient count does not match header")
    vec = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=count)
    return SpectralField.from_admissible_vector(trunc, vec)
