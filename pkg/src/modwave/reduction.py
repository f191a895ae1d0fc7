"""mKdV coefficients at a double-critical point, and the Kuramoto cross-check.

Raw projections, with unit ``zeta`` and ``delta . zeta = 0``:

    a0_raw = zeta^T (D_k A + D_omega B) zeta
    a1_raw = 1/2 zeta^T (D_k^3 B(zeta, zeta, zeta) - 3 D_k^2 B(zeta, delta))
    a2_raw = zeta^T K        (per-model closed form)

Normalized coefficients are the raw values rewritten in the model's
reference gauge ``zeta_ref = c * zeta`` and divided by the model's common
factor ``N``: ``a0 = c^2 a0_raw / N``, ``a1 = c^4 a1_raw / N``,
``a2 = c^2 a2_raw / N``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .criticality import CriticalPoint, solve_delta
from .errors import StepUnderflow
from .tensors import bundle as fd_bundle, contract2, contract3, ridders_partials

__all__ = [
    "ReductionCoefficients",
    "assemble",
    "cubic_raw",
    "kuramoto_cubic",
    "kuramoto_stationarity",
    "curve_values",
    "closed_form_report",
]

EPS = np.finfo(float).eps


@dataclass
class ReductionCoefficients:
    a0_raw: float
    a1_raw: float
    a2_raw: float
    a0: float
    a1: float
    a2: float
    gauge: dict = field(default_factory=dict)

    @property
    def cubic_ratio(self) -> float:
        """Gauge-invariant ``a1_raw / a0_raw**2``."""
        return self.a1_raw / self.a0_raw**2

    @property
    def dispersive_ratio(self) -> float:
        """Gauge-invariant ``a2_raw / a0_raw``."""
        return self.a2_raw / self.a0_raw

    def to_dict(self) -> dict:
        return {
            "raw": {"a0": self.a0_raw, "a1": self.a1_raw, "a2": self.a2_raw},
            "normalized": {"a0": self.a0, "a1": self.a1, "a2": self.a2},
            "ratios": {"a1_over_a0sq": self.cubic_ratio, "a2_over_a0": self.dispersive_ratio},
            "gauge": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                      for k, v in self.gauge.items()},
        }


def cubic_raw(b, zeta, delta) -> float:
    """``1/2 zeta^T (D^3 B(zeta,zeta,zeta) - 3 D^2 B(zeta, delta))``."""
    zeta = np.asarray(zeta, dtype=float)
    return 0.5 * float(zeta @ (contract3(b.D3kB, zeta, zeta, zeta)
                               - 3 * contract2(b.D2kB, zeta, delta)))


def assemble(model, cp: CriticalPoint, b=None) -> ReductionCoefficients:
    """Raw and normalized mKdV coefficients at ``cp``.

    ``model`` is only used as a fallback; the sliced model stored on ``cp``
    supplies the closed forms.
    """
    m = cp.model if cp.model is not None else model
    if b is None:
        b = fd_bundle(m, cp.pt, 3)
    zeta = np.asarray(cp.zeta, dtype=float)
    delta = np.asarray(cp.delta, dtype=float)
    a0_raw = float(zeta @ (b.DkA + b.DwB) @ zeta)
    a1_raw = cubic_raw(b, zeta, delta)
    a2_raw = float(m.dispersive_projection(cp.pt, zeta))
    zref = m.reference_zeta(cp.pt)
    c = float(zeta @ zref) / float(zeta @ zeta)
    N = float(m.normalization(cp.pt))
    gauge = {"zeta": zeta, "zeta_ref": zref, "c": c, "normalization": N,
             "parallel_defect": float(np.linalg.norm(zref - c * zeta) / np.linalg.norm(zref))}
    return ReductionCoefficients(a0_raw, a1_raw, a2_raw,
                                 c**2 * a0_raw / N, c**4 * a1_raw / N, c**2 * a2_raw / N,
                                 gauge)


def curve_values(model, pt, zeta, delta, eps):
    """``B(k + eps zeta - eps^2/2 delta, omega)`` for an array of ``eps``."""
    eps = np.asarray(eps, dtype=float)[..., None]
    k = pt.k + eps * np.asarray(zeta) - 0.5 * eps**2 * np.asarray(delta)
    w = np.broadcast_to(pt.omega, k.shape)
    return model.conservation(k, w)[1]


def _third(f, h):
    return (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h**3)


def kuramoto_cubic(model, cp: CriticalPoint, eps0=None, max_shrinks: int = 20) -> float:
    """Third ``eps``-derivative at 0 of ``zeta^T B`` along the Kuramoto curve.

    Five-point central stencil with one Richardson level.  Should equal
    ``2 * a1_raw``.
    """
    m = cp.model if cp.model is not None else model
    zeta, delta = np.asarray(cp.zeta), np.asarray(cp.delta)
    if eps0 is None:
        eps0 = EPS ** (1 / 7) * max(np.linalg.norm(cp.pt.k), 1.0)

    def f(e):
        return float(zeta @ curve_values(m, cp.pt, zeta, delta, e))

    h = eps0
    for _ in range(max_shrinks):
        e = h * np.array([-2.0, -1.0, 1.0, 2.0])
        k = cp.pt.k + e[:, None] * zeta - 0.5 * e[:, None] ** 2 * delta
        if np.all(m.physical(m.state(k, np.broadcast_to(cp.pt.omega, k.shape)))):
            break
        h /= 2
    else:
        raise StepUnderflow("Kuramoto stencil leaves the physical region at every step")
    coarse, fine = _third(f, h), _third(f, h / 2)
    val = (4 * fine - coarse) / 3
    if not np.isfinite(val):
        raise StepUnderflow("non-finite Kuramoto estimate")
    return float(val)


def kuramoto_stationarity(model, cp: CriticalPoint):
    """First and second ``eps``-derivatives of ``B`` along the Kuramoto curve.

    Both vanish at a double-critical point: they equal ``D_k B zeta`` and
    ``D_k^2 B(zeta, zeta) - D_k B delta``.
    """
    m = cp.model if cp.model is not None else model
    zeta, delta = np.asarray(cp.zeta), np.asarray(cp.delta)
    h0 = 0.1 * max(np.linalg.norm(cp.pt.k), 1.0) / max(np.linalg.norm(zeta), 1e-300)

    def fun(x):
        return curve_values(m, cp.pt, zeta, delta, x[..., 0])

    (d1, d2), _ = ridders_partials(fun, np.zeros(1), [(0,), (0, 0)], h0)
    return d1, d2


def _rel(a, b):
    den = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / den


def closed_form_report(model, cp: CriticalPoint, b=None, coeffs=None, rtol: float = 1e-6) -> dict:
    """Term-by-term comparison of computed projections with the model's
    closed forms, all in the reference gauge.

    Each entry holds ``closed``, ``computed``, ``rel_diff`` and ``agree``.
    """
    m = cp.model if cp.model is not None else model
    if b is None:
        b = fd_bundle(m, cp.pt, 3)
    if coeffs is None:
        coeffs = assemble(m, cp, b)
    cf = m.closed_forms(cp.pt)
    zp = cf["zeta"]
    c = coeffs.gauge["c"]
    # reference-gauge delta: rescale, then shift along zeta to match the closed-form gauge
    dref = c**2 * np.asarray(cp.delta)
    dclosed = np.asarray(cf["delta"])
    shift = (dclosed[1] - dref[1]) / zp[1] if zp[1] != 0 else 0.0
    dref = dref + shift * zp

    computed = {
        "time": float(zp @ (b.DkA + b.DwB) @ zp),
        "cubic_d3": float(zp @ contract3(b.D3kB, zp, zp, zp)),
        "cubic_d2": float(zp @ contract2(b.D2kB, dclosed, zp)),
        "cubic_combined": 2 * c**4 * coeffs.a1_raw,
        "delta_1": float(dref[0]),
        "a0": coeffs.a0,
        "a1": coeffs.a1,
        "a2": coeffs.a2,
    }
    closed = {
        "time": cf["time"], "cubic_d3": cf["cubic_d3"], "cubic_d2": cf["cubic_d2"],
        "cubic_combined": cf["cubic_combined"], "delta_1": float(dclosed[0]),
        "a0": cf["a0"], "a1": cf["a1"], "a2": cf["a2"],
    }
    report = {}
    for key in computed:
        d = _rel(closed[key], computed[key])
        report[key] = {"closed": float(closed[key]), "computed": computed[key],
                       "rel_diff": d, "agree": bool(d <= rtol)}
    # the delta system checked in the closed-form gauge
    q = contract2(b.D2kB, zp, zp)
    scale = max(np.linalg.norm(b.D2kB) * (zp @ zp), 1e-300)
    report["delta_residual"] = float(np.linalg.norm(b.DkB @ dclosed - q) / scale)
    if "dispersive_beta22" in cf:
        N = coeffs.gauge["normalization"]
        a2_sw = cf["dispersive_beta22"] / N
        d = _rel(cf["a2"], a2_sw)
        report["a2_beta22"] = {"closed": float(cf["a2"]), "computed": float(a2_sw),
                                "rel_diff": d, "agree": bool(d <= rtol)}
    return report
