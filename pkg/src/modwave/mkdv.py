"""Periodic pseudospectral solver for ``a0 q_T + a1 q^2 q_X + a2 q_XXX = 0``.

The dispersive term is integrated exactly by an integrating factor in
Fourier space.  The cubic flux goes through classical RK4 with 2/3-rule
dealiasing of the nonlinear term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Blowup, InvalidBranch

__all__ = [
    "WaveField",
    "MkdvRun",
    "soliton",
    "soliton_profile",
    "stability_bound",
    "step",
    "integrate",
    "invariants",
    "pde_residual",
]

BLOWUP = 1e6


@dataclass
class WaveField:
    L: float
    N: int
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 16, got {self.N}")
        if self.values.shape != (self.N,):
            raise ValueError(f"expected {self.N} samples, got {self.values.shape}")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * (self.L / self.N)

    @property
    def dx(self) -> float:
        return self.L / self.N

    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.rfftfreq(self.N, d=self.dx)

    def copy(self, values=None, time=None) -> "WaveField":
        return WaveField(self.L, self.N,
                         self.values.copy() if values is None else values,
                         self.time if time is None else time)


def _check_coeffs(coeffs):
    a0, a1, a2 = (float(c) for c in coeffs)
    if a0 == 0:
        raise ValueError("a0 must be nonzero")
    if a2 == 0:
        raise ValueError("a2 = 0 leaves the cubic flux without dispersive regularization")
    return a0, a1, a2


def stability_bound(coeffs, field: WaveField) -> float:
    """``0.5 dx |a0| / (|a1| max q^2 + 1)``."""
    a0, a1, _ = (float(c) for c in coeffs)
    qmax = float(np.max(np.abs(field.values))) if field.values.size else 0.0
    return 0.5 * field.dx * abs(a0) / (abs(a1) * qmax**2 + 1.0)


@dataclass
class MkdvRun:
    """Coefficients, time step and diagnostics for one integration.

    ``dt=None`` picks half of :func:`stability_bound` at the first step.
    """

    coeffs: tuple
    dt: float | None = None
    diagnostics: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.coeffs = _check_coeffs(self.coeffs)
        if self.dt is not None and self.dt == 0:
            raise ValueError("dt must be nonzero")

    def resolve_dt(self, f: WaveField) -> float:
        if self.dt is None:
            self.dt = 0.5 * stability_bound(self.coeffs, f)
        return self.dt

    def _operators(self, f: WaveField, dt: float):
        key = (f.N, f.L, dt)
        ops = self._cache.get(key)
        if ops is None:
            a0, a1, a2 = self.coeffs
            k = f.wavenumbers()
            lin = 1j * (a2 / a0) * k**3          # q_T = -(a2/a0) q_XXX  ->  +i (a2/a0) k^3
            mask = np.abs(np.fft.rfftfreq(f.N) * f.N) < f.N / 3
            nonlin = np.where(mask, -(a1 / (3 * a0)) * 1j * k, 0.0)
            ops = {"half": np.exp(lin * dt / 2), "full": np.exp(lin * dt), "nl": nonlin}
            self._cache = {key: ops}
        return ops


def soliton_profile(coeffs, amplitude: float, x, center: float, L: float | None = None):
    """Width ``B`` and speed ``c`` of the sech solitary wave, and its samples."""
    a0, a1, a2 = _check_coeffs(coeffs)
    if amplitude == 0:
        return 0.0, 0.0, np.zeros_like(np.asarray(x, dtype=float))
    if a1 / a2 <= 0:
        raise InvalidBranch(f"sech branch needs a1/a2 > 0, got a1/a2 = {a1 / a2:g}")
    B = abs(amplitude) * math.sqrt(a1 / (6 * a2))
    c = a2 * B**2 / a0
    xi = np.asarray(x, dtype=float) - center
    if L is not None:
        xi = (xi + L / 2) % L - L / 2
    return B, c, amplitude / np.cosh(B * xi)


def soliton(coeffs, amplitude: float, center: float, L: float = 40.0, N: int = 512,
            time: float = 0.0) -> WaveField:
    """``q = A sech(B (X - X0 - c T))`` with ``B^2 = a1 A^2 / (6 a2)`` and
    ``c = a2 B^2 / a0``, sampled on a periodic grid at time ``time``."""
    x = np.arange(N) * (L / N)
    _, c, q = soliton_profile(coeffs, amplitude, x, 0.0, L)
    _, c, q = soliton_profile(coeffs, amplitude, x, center + c * time, L)
    return WaveField(L, N, q, time)


def _rhs(qhat, ops, N):
    q = np.fft.irfft(qhat, n=N)
    return ops["nl"] * np.fft.rfft(q**3)


def step(run: MkdvRun, f: WaveField, dt: float | None = None) -> WaveField:
    """One integrating-factor RK4 step."""
    dt = run.resolve_dt(f) if dt is None else dt
    ops = run._operators(f, dt)
    E, E2 = ops["half"], ops["full"]
    # overflow shows up as inf/NaN and is reported as Blowup below
    with np.errstate(over="ignore", invalid="ignore"):
        v = np.fft.rfft(f.values)
        k1 = _rhs(v, ops, f.N)
        k2 = _rhs(E * (v + 0.5 * dt * k1), ops, f.N)
        k3 = _rhs(E * v + 0.5 * dt * k2, ops, f.N)
        k4 = _rhs(E2 * v + dt * E * k3, ops, f.N)
        v = E2 * v + dt / 6 * (E2 * k1 + 2 * E * (k2 + k3) + k4)
        q = np.fft.irfft(v, n=f.N)
    if not np.all(np.isfinite(q)) or np.max(np.abs(q)) > BLOWUP:
        raise Blowup(f"field exceeded {BLOWUP:g} or became non-finite at T={f.time + dt:g}")
    return WaveField(f.L, f.N, q, f.time + dt)


def invariants(f: WaveField, coeffs) -> tuple:
    """Mass, momentum and energy ``int (a1 q^4/12 - a2 q_X^2/2) dX``."""
    _, a1, a2 = (float(c) for c in coeffs)
    q = f.values
    qx = np.fft.irfft(1j * f.wavenumbers() * np.fft.rfft(q), n=f.N)
    mass = f.dx * float(np.sum(q))
    momentum = f.dx * float(np.sum(q**2))
    energy = f.dx * float(np.sum(a1 * q**4 / 12 - a2 * qx**2 / 2))
    return mass, momentum, energy


def integrate(run: MkdvRun, f: WaveField, T_end: float, snap_every: int = 0,
              diag_every: int = 1):
    """Advance ``f`` to ``T_end``; returns ``(field, diagnostics, snapshots)``.

    The step is shrunk so that a whole number of steps lands on ``T_end``.
    Backward integration (``T_end < f.time``) uses a negative step.
    Diagnostics rows are ``(T, mass, momentum, energy)``.
    """
    span = T_end - f.time
    dt0 = abs(run.resolve_dt(f))
    nsteps = int(math.ceil(abs(span) / dt0 - 1e-12)) if span else 0
    dt = span / nsteps if nsteps else 0.0
    run.diagnostics = [(f.time, *invariants(f, run.coeffs))]
    snaps = [f.copy()] if snap_every else []
    cur = f
    for n in range(1, nsteps + 1):
        cur = step(run, cur, dt)
        if n == nsteps:
            cur.time = T_end
        if diag_every and (n % diag_every == 0 or n == nsteps):
            run.diagnostics.append((cur.time, *invariants(cur, run.coeffs)))
        if snap_every and (n % snap_every == 0 or n == nsteps):
            snaps.append(cur.copy())
    return cur, run.diagnostics, snaps


def pde_residual(coeffs, amplitude: float, N: int = 1024, L: float = 40.0) -> float:
    """Max-norm residual of the travelling sech profile in the PDE, relative
    to ``max |a0 q_T|``; time derivative from the travelling-wave form."""
    a0, a1, a2 = _check_coeffs(coeffs)
    x = np.arange(N) * (L / N)
    B, c, q = soliton_profile(coeffs, amplitude, x, L / 2)
    k = 2 * np.pi * np.fft.rfftfreq(N, d=L / N)
    qh = np.fft.rfft(q)
    qx = np.fft.irfft(1j * k * qh, n=N)
    qxxx = np.fft.irfft(-1j * k**3 * qh, n=N)
    qt = -c * qx
    res = a0 * qt + a1 * q**2 * qx + a2 * qxxx
    return float(np.max(np.abs(res)) / max(np.max(np.abs(a0 * qt)), 1e-300))
