"""Invariant suite run by ``modwave verify`` at the canonical fixtures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import criticality as crit
from . import mkdv, reduction
from .fixtures import canonical_sw_slice, load_fixture
from .models import CoupledNLSModel, NLSParams, ShallowWaterModel, SWParams
from .tensors import analytic_bundle, bundle

__all__ = ["Check", "DEFAULT_TOLERANCES", "run_checks", "random_sw_points", "random_nls_points"]

DEFAULT_TOLERANCES = {
    "roundtrip": 1e-12,
    "fd_symmetry": 1e-7,
    "fd_adjoint": 1e-7,
    "fd_analytic_12": 1e-7,
    "fd_analytic_3": 1e-4,
    "sw_det_factorization": 1e-10,
    "sw_fixture_location": 1e-8,
    "null_residual": 1e-7,
    "trace_eigenvalue": 1e-7,
    "delta_residual": 1e-6,
    "stationarity": 1e-6,
    "kuramoto": 1e-5,
    "delta_gauge": 1e-10,
    "zeta_scale": 1e-10,
    "sw_a0_closed_form": 1e-6,
    "soliton_residual": 1e-8,
    "soliton_transit": 1e-6,
    "mass_drift": 1e-12,
}


@dataclass
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": float(self.value),
                "tolerance": self.tolerance, "passed": self.passed}


def random_sw_points(rng, n):
    """``(model, point)`` pairs with random parameters and physical states."""
    out = []
    for _ in range(n):
        p = SWParams(g=rng.uniform(0.5, 2), rho1=rng.uniform(0.5, 2), r=rng.uniform(0.05, 0.95))
        m = ShallowWaterModel(p)
        out.append((m, m.point_from_state(rng.uniform(1, 10, 2), rng.uniform(-3, 3, 2))))
    return out


def random_nls_points(rng, n):
    out = []
    while len(out) < n:
        b11, b22 = rng.choice([-1, 1], 2) * rng.uniform(0.3, 2, 2)
        b12 = rng.uniform(-1.5, 1.5)
        if abs(b11 * b22 - b12**2) < 0.05:
            continue
        p = NLSParams(*(rng.choice([-1, 1], 2) * rng.uniform(0.2, 2, 2)), b11, b12, b22)
        m = CoupledNLSModel(p)
        out.append((m, m.point_from_state(rng.uniform(1, 40, 2), rng.uniform(-4, 4, 2))))
    return out


def _rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))
                 / max(np.max(np.abs(b)), 1e-300))


def _fixture_points():
    sw = load_fixture("sw")
    cp_sw = crit.find_double_critical(sw.model, sw.fixed_state, sw.guess, sw.pin)
    ns = load_fixture("cnls")
    cp_ns = crit.find_double_critical(ns.model, ns.fixed_state, ns.guess, ns.pin)
    return [("sw", cp_sw), ("cnls", cp_ns)]


def run_checks(tolerances=None, seed: int = 0, npoints: int = 50):
    """Run every check; returns ``(checks, info)`` where ``info`` holds
    non-pass/fail context such as the closed-form comparison report."""
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    unknown = set(tol) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise KeyError(f"unknown check name(s): {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    checks = []

    def add(name, value, label=None):
        checks.append(Check(label or name, float(value), tol[name]))

    samples = {"sw": random_sw_points(rng, npoints), "cnls": random_nls_points(rng, npoints)}
    for name, pts in samples.items():
        rt = max(_rel(m.state(pt.k, pt.omega), m.state(pt.k, m.invert(pt.state, pt.k)))
                 for m, pt in pts)
        add("roundtrip", rt, f"{name}.roundtrip")
        sym = adj = e12 = e3 = 0.0
        for m, pt in pts:
            b = bundle(m, pt, 3)
            a = analytic_bundle(m, pt, 3)
            sym = max(sym, b.step_report["sym_defect_DkB"])
            adj = max(adj, b.step_report["adjoint_defect"])
            for t in ("DkA", "DwA", "DkB", "DwB", "D2kB"):
                e12 = max(e12, _rel(getattr(b, t), getattr(a, t)))
            e3 = max(e3, _rel(b.D3kB, a.D3kB))
        add("fd_symmetry", sym, f"{name}.fd_symmetry")
        add("fd_adjoint", adj, f"{name}.fd_adjoint")
        add("fd_analytic_12", e12, f"{name}.fd_analytic_order12")
        add("fd_analytic_3", e3, f"{name}.fd_analytic_order3")

    fact = 0.0
    for m, pt in samples["sw"]:
        p = m.params
        F1, F2 = m.dimensionless(pt).sq1, m.dimensionless(pt).sq2
        eta0, chi0 = pt.state
        expected = p.rho1 * p.rho2 * eta0 * chi0 * ((1 - F1) * (1 - F2) - p.r) / (1 - p.r)
        M = analytic_bundle(m, pt, 1).DkB
        fact = max(fact, abs(np.linalg.det(M) - expected) / max(np.sum(M**2), 1e-300))
    add("sw_det_factorization", fact)

    info = {"closed_form_report": {}}
    for name, cp in _fixture_points():
        if name == "sw":
            add("sw_fixture_location", np.max(np.abs(cp.params_slice - canonical_sw_slice())))
        b = bundle(cp.model, cp.pt, 3)
        add("null_residual", cp.residuals["null"], f"{name}.null_residual")
        add("trace_eigenvalue", cp.residuals["trace"], f"{name}.trace_eigenvalue")
        add("delta_residual", cp.residuals["delta"], f"{name}.delta_residual")
        d1, d2 = reduction.kuramoto_stationarity(cp.model, cp)
        scale = max(np.linalg.norm(b.DkB), np.linalg.norm(b.D2kB))
        add("stationarity", max(np.linalg.norm(d1), np.linalg.norm(d2)) / scale,
            f"{name}.stationarity")
        co = reduction.assemble(cp.model, cp, b)
        kc = reduction.kuramoto_cubic(cp.model, cp)
        add("kuramoto", abs(kc - 2 * co.a1_raw) / abs(co.a1_raw), f"{name}.kuramoto")
        shifts = [abs(reduction.cubic_raw(b, cp.zeta, cp.delta + c * cp.zeta) - co.a1_raw)
                  / abs(co.a1_raw) for c in (-10, -1, 1, 10)]
        add("delta_gauge", max(shifts), f"{name}.delta_gauge")
        z2, d2x = 2 * cp.zeta, 4 * cp.delta
        a0s = float(z2 @ (b.DkA + b.DwB) @ z2)
        a1s = reduction.cubic_raw(b, z2, d2x)
        a2s = cp.model.dispersive_projection(cp.pt, z2)
        add("zeta_scale", max(_rel(a1s / a0s**2, co.cubic_ratio),
                              _rel(a2s / a0s, co.dispersive_ratio)), f"{name}.zeta_scale")
        report = reduction.closed_form_report(cp.model, cp, b, co)
        info["closed_form_report"][name] = report
        if name == "sw":
            add("sw_a0_closed_form", report["a0"]["rel_diff"])

    coeffs = (1.0, 6.0, 1.0)
    add("soliton_residual", mkdv.pde_residual(coeffs, 1.0, 1024, 80.0))
    f = mkdv.soliton(coeffs, 1.0, 20.0, L=40.0, N=512)
    run = mkdv.MkdvRun(coeffs, dt=mkdv.stability_bound(coeffs, f) / 8)
    T = 5.0
    g, diag, _ = mkdv.integrate(run, f, T, diag_every=0)
    exact = mkdv.soliton(coeffs, 1.0, 20.0, L=40.0, N=512, time=T)
    add("soliton_transit", np.max(np.abs(g.values - exact.values)))
    add("mass_drift", abs(diag[-1][1] - diag[0][1]) / abs(diag[0][1]))
    return checks, info
