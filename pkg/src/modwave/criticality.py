"""Criticality conditions, null vectors and the double-critical curve.

The first condition is ``det D_k B = 0`` with null vector ``zeta``; the
second is ``zeta^T D_k^2 B(zeta, zeta) = 0``.  Both are scaled to be
unit-free: the determinant by ``|D_k B|^2`` and the cubic form by
``|D_k^2 B|`` (Frobenius norms, ``zeta`` of unit length).

Searches run over a three-parameter slice of model space with the model
state held fixed (see ``TwoPhaseModel.at_slice``).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateKernel, NoConvergence, NonPhysical, NotCritical,
                     NotSolvable, SeedInvalid, StepFailure, StepUnderflow)
from .models.base import ModelPoint
from .tensors import bundle as fd_bundle, bundle_batch, contract2

__all__ = [
    "CriticalPoint",
    "CurveTrace",
    "det_condition",
    "null_vector",
    "cubic_degeneracy",
    "solve_delta",
    "trace_eigenvalue_check",
    "conditions",
    "find_double_critical",
    "trace_curve",
    "scan_surfaces",
    "TOL_NEWTON",
    "TOL_TRACE",
]

TOL_NEWTON = 1e-10
TOL_TRACE = 1e-12    # corrector target; keeps delta-gauge shifts of a1 below 1e-10
TOL_NULL = 1e-6      # scaled determinant accepted by null_vector
TOL_SOLVABLE = 1e-8  # scaled cubic form accepted by solve_delta
MAX_ITER = 50


@dataclass
class CriticalPoint:
    model: object
    pt: ModelPoint
    params_slice: np.ndarray
    zeta: np.ndarray
    delta: np.ndarray
    residuals: dict
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "model": self.model.name,
            "params": self.model.to_dict(),
            "slice_names": list(self.model.slice_names),
            "params_slice": self.params_slice.tolist(),
            "k": self.pt.k.tolist(),
            "omega": self.pt.omega.tolist(),
            "state": self.pt.state.tolist(),
            "zeta": self.zeta.tolist(),
            "delta": self.delta.tolist(),
            "residuals": dict(self.residuals),
            "iterations": self.iterations,
        }


@dataclass
class CurveTrace:
    points: list
    arclength: list
    stop_reason: str

    COLUMNS = ("s", "p1", "p2", "p3", "k1", "k2", "w1", "w2",
               "res_det", "res_cubic", "res_delta")

    def rows(self):
        for s, cp in zip(self.arclength, self.points):
            r = cp.residuals
            yield (s, *cp.params_slice, *cp.pt.k, *cp.pt.omega,
                   r["det"], r["cubic"], r["delta"])

    def to_csv(self) -> str:
        lines = [",".join(self.COLUMNS)]
        lines += [",".join(repr(float(v)) for v in row) for row in self.rows()]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        first = self.points[0].model if self.points else None
        return {
            "model": first.name if first else None,
            "slice_names": list(first.slice_names) if first else [],
            "columns": list(self.COLUMNS),
            "rows": [[float(v) for v in row] for row in self.rows()],
            "stop_reason": self.stop_reason,
        }


def det_condition(b) -> float:
    """``det(D_k B) / |D_k B|^2``."""
    M = b.DkB if hasattr(b, "DkB") else np.asarray(b)
    nrm2 = float(np.sum(M**2))
    if nrm2 == 0:
        return 0.0
    return float((M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]) / nrm2)


def _adjugate_null(M):
    adj = np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])
    norms = np.linalg.norm(adj, axis=1)
    row = adj[int(np.argmax(norms))]
    return row, float(norms.max())


def _orient(z):
    if z[1] < 0 or (z[1] == 0 and z[0] < 0):
        z = -z
    return z + 0.0


def null_vector(DkB, tol: float = TOL_NULL, atol: float = 1e-14) -> np.ndarray:
    """Unit null vector of a singular 2x2 matrix, with ``zeta_2 >= 0``
    (``zeta_1 >= 0`` when ``zeta_2 = 0``)."""
    M = np.asarray(DkB, dtype=float)
    if np.linalg.norm(M) <= atol:
        raise DegenerateKernel("D_k B vanishes; zero eigenvalue is not simple")
    d = det_condition(M)
    if abs(d) > tol:
        raise NotCritical(f"scaled det(D_k B) = {d:.3g} exceeds {tol:g}")
    row, nrm = _adjugate_null(M)
    return _orient(row / nrm)


def _raw_null(M):
    row, nrm = _adjugate_null(M)
    if nrm == 0:
        raise DegenerateKernel("D_k B vanishes; zero eigenvalue is not simple")
    return _orient(row / nrm)


def cubic_degeneracy(b, zeta) -> float:
    """``zeta^T D_k^2 B(zeta, zeta) / |D_k^2 B|``."""
    zeta = np.asarray(zeta, dtype=float)
    nrm = np.linalg.norm(b.D2kB)
    if nrm == 0:
        return 0.0
    return float(zeta @ contract2(b.D2kB, zeta, zeta) / nrm)


def solve_delta(b, zeta, tol: float = TOL_SOLVABLE):
    """Solve ``D_k B delta = D_k^2 B(zeta, zeta)`` with ``delta . zeta = 0``.

    Returns ``(delta, scaled residual)``.  Uses the bordered system
    ``[[M, zeta], [zeta^T, 0]]``.
    """
    zeta = np.asarray(zeta, dtype=float)
    q = contract2(b.D2kB, zeta, zeta)
    scale = max(np.linalg.norm(b.D2kB), 1e-300)
    solv = abs(zeta @ q) / (scale * (zeta @ zeta))
    if solv > tol:
        raise NotSolvable(f"scaled zeta.D2B(zeta,zeta) = {solv:.3g} exceeds {tol:g}")
    K = np.zeros((3, 3))
    K[:2, :2] = b.DkB
    K[:2, 2] = zeta
    K[2, :2] = zeta
    sol = np.linalg.solve(K, np.append(q, 0.0))
    delta = sol[:2]
    res = np.linalg.norm(b.DkB @ delta - q) / scale
    return delta, float(res)


def trace_eigenvalue_check(DkB, zeta) -> float:
    """Defect ``|M v - tr(M) v| / |M|`` for ``v = (zeta_2, -zeta_1)``."""
    M = np.asarray(DkB, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    v = np.array([zeta[1], -zeta[0]])
    nrm = np.linalg.norm(M)
    defect = np.linalg.norm(M @ v - np.trace(M) * v)
    return float(defect / nrm) if nrm > 0 else float(defect)


# -- slice-space root finding ---------------------------------------------

def _evaluate(model, fixed_state, x, order=2):
    m, pt = model.at_slice(x, fixed_state)
    pt.require_physical()
    return m, pt, fd_bundle(m, pt, order)


def conditions(model, fixed_state, x) -> np.ndarray:
    """Scaled ``(det condition, cubic degeneracy)`` at slice parameters ``x``."""
    _, _, b = _evaluate(model, fixed_state, x)
    zeta = _raw_null(b.DkB)
    return np.array([det_condition(b), cubic_degeneracy(b, zeta)])


def _jacobian(model, fixed_state, x, free):
    J = np.zeros((2, len(free)))
    for c, j in enumerate(free):
        h = 1e-6 * max(abs(x[j]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, c] = (conditions(model, fixed_state, xp)
                   - conditions(model, fixed_state, xm)) / (2 * h)
    return J


_INADMISSIBLE = (ValueError, ZeroDivisionError, NonPhysical, StepUnderflow, DegenerateKernel,
                 np.linalg.LinAlgError)


def _safe_conditions(model, fixed_state, x):
    try:
        return conditions(model, fixed_state, x)
    except _INADMISSIBLE:
        return None


def _safe_jacobian(model, fixed_state, x, free):
    try:
        return _jacobian(model, fixed_state, x, free)
    except _INADMISSIBLE:
        return None


def make_critical_point(model, fixed_state, x, iterations=0,
                        tol_delta: float = TOL_SOLVABLE) -> CriticalPoint:
    """Assemble zeta, delta and residuals at slice parameters ``x``."""
    x = np.asarray(x, dtype=float)
    m, pt, b = _evaluate(model, fixed_state, x)
    zeta = null_vector(b.DkB)
    res_cubic = cubic_degeneracy(b, zeta)
    delta, res_delta = solve_delta(b, zeta, tol=tol_delta)
    residuals = {
        "det": abs(det_condition(b)),
        "cubic": abs(res_cubic),
        "delta": res_delta,
        "null": float(np.linalg.norm(b.DkB @ zeta) / np.linalg.norm(b.DkB)),
        "trace": trace_eigenvalue_check(b.DkB, zeta),
        "sym_defect": b.step_report["sym_defect_DkB"],
    }
    return CriticalPoint(m, pt, x, zeta, delta, residuals, iterations)


def find_double_critical(model, fixed_state, guess, pin: int = 1,
                         tol: float = TOL_NEWTON, max_iter: int = MAX_ITER) -> CriticalPoint:
    """Newton iteration on both criticality conditions.

    ``guess`` is a full 3-vector of slice parameters; entry ``pin`` stays
    fixed and the other two are solved for.  Default pins ``k1``.
    """
    x = np.array(guess, dtype=float)
    if x.shape != (3,):
        raise ValueError("guess must list all three slice parameters")
    free = [j for j in range(3) if j != pin]
    f = _safe_conditions(model, fixed_state, x)
    if f is None:
        raise NoConvergence(f"guess {x.tolist()} is not admissible")
    for it in range(1, max_iter + 1):
        if np.max(np.abs(f)) < tol:
            return make_critical_point(model, fixed_state, x, it - 1)
        J = _safe_jacobian(model, fixed_state, x, free)
        if J is None:
            raise NoConvergence(f"Jacobian probe left the admissible region at {x.tolist()}")
        try:
            dx = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Jacobian at {x.tolist()}") from exc
        lam = 1.0
        for _ in range(20):
            xn = x.copy()
            xn[free] += lam * dx
            fn = _safe_conditions(model, fixed_state, xn)
            if fn is not None and np.max(np.abs(fn)) < (1 - 1e-4 * lam) * np.max(np.abs(f)) + tol:
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"line search failed at {x.tolist()} after {it} iterations")
        x, f = xn, fn
    if np.max(np.abs(f)) < tol:
        return make_critical_point(model, fixed_state, x, max_iter)
    raise NoConvergence(f"no convergence in {max_iter} iterations; "
                        f"residuals {np.abs(f).tolist()}")


def _tangent(J, prev=None):
    t = np.cross(J[0], J[1])
    nrm = np.linalg.norm(t)
    if nrm == 0:
        raise StepFailure("tangent undefined: Jacobian rank deficient")
    t /= nrm
    if prev is not None and t @ prev < 0:
        t = -t
    return t


def _correct(model, fixed_state, xp, t, tol, max_iter=12):
    x = xp.copy()
    for _ in range(max_iter):
        f = _safe_conditions(model, fixed_state, x)
        if f is None:
            return None
        if np.max(np.abs(f)) < tol and abs(t @ (x - xp)) < 1e-12:
            return x
        J = _safe_jacobian(model, fixed_state, x, [0, 1, 2])
        if J is None:
            return None
        K = np.vstack([J, t])
        rhs = -np.append(f, t @ (x - xp))
        try:
            x = x + np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            return None
    f = _safe_conditions(model, fixed_state, x)
    if f is not None and np.max(np.abs(f)) < tol:
        return x
    return None


def trace_curve(model, fixed_state, seed: CriticalPoint, steps: int = 100,
                max_step: float = 0.05, direction: int = 1, window=None,
                tol: float = TOL_TRACE, seed_tol: float = 1e-9) -> CurveTrace:
    """Pseudo-arclength continuation of the double-critical curve.

    ``window`` maps slice-parameter index to ``(lo, hi)`` bounds; leaving it
    ends the trace.  A failed corrector halves the step, up to five times.
    """
    if max(seed.residuals["det"], seed.residuals["cubic"]) > seed_tol:
        raise SeedInvalid(f"seed residuals {seed.residuals} exceed {seed_tol:g}")
    window = window or {}
    points, arclen = [seed], [0.0]
    x = np.array(seed.params_slice, dtype=float)
    J = _jacobian(model, fixed_state, x, [0, 1, 2])
    t = _tangent(J) * (1 if direction >= 0 else -1)
    h = max_step
    stop = "completed"
    for _ in range(steps):
        accepted = None
        for _attempt in range(5):
            xn = _correct(model, fixed_state, x + h * t, t, tol)
            if xn is not None and np.linalg.norm(xn - x) <= max_step * (1 + 1e-9):
                accepted = xn
                break
            h *= 0.5
        if accepted is None:
            stop = "step_failure"
            break
        if any(not (lo < accepted[j] < hi) for j, (lo, hi) in window.items()):
            stop = "window_boundary"
            break
        try:
            cp = make_critical_point(model, fixed_state, accepted)
        except NonPhysical:
            stop = "nonphysical"
            break
        except (NotCritical, NotSolvable, DegenerateKernel):
            stop = "step_failure"
            break
        arclen.append(arclen[-1] + float(np.linalg.norm(accepted - x)))
        points.append(cp)
        J = _safe_jacobian(model, fixed_state, accepted, [0, 1, 2])
        if J is None:
            stop = "window_boundary"
            break
        t = _tangent(J, t)
        x = accepted
        h = min(max_step, 1.5 * h)
    return CurveTrace(points, arclen, stop)


# -- grid scans ------------------------------------------------------------

def _thread_count(threads):
    if threads is None:
        env = os.environ.get("MODWAVE_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def _scan_plane(model, fixed_state, p1, grid2, grid3):
    K2, K3 = np.meshgrid(grid2, grid3, indexing="ij")
    shape = K2.shape
    det = np.full(shape, np.nan)
    cubic = np.full(shape, np.nan)
    ok = np.zeros(shape, dtype=bool)
    try:
        m, _ = model.at_slice([p1, grid2[0], grid3[0]], fixed_state)
    except (ValueError, ZeroDivisionError):
        return det, cubic, ok
    state = np.broadcast_to(np.asarray(fixed_state, dtype=float), shape + (2,))
    if not np.all(m.physical(state)):
        return det, cubic, ok
    k = np.stack([K2, K3], axis=-1)
    w = m.invert(state, k)
    t = bundle_batch(m, k, w, order=2)
    M = t["DkB"]
    n2 = np.sum(M**2, axis=(-1, -2))
    det = np.linalg.det(M) / np.where(n2 > 0, n2, 1.0)
    adj = np.stack([np.stack([M[..., 1, 1], -M[..., 0, 1]], -1),
                    np.stack([-M[..., 1, 0], M[..., 0, 0]], -1)], -2)
    rn = np.linalg.norm(adj, axis=-1)
    pick = np.argmax(rn, axis=-1)
    z = np.take_along_axis(adj, pick[..., None, None], axis=-2)[..., 0, :]
    z = z / np.where(np.max(rn, -1) > 0, np.max(rn, -1), 1.0)[..., None]
    flip = (z[..., 1] < 0) | ((z[..., 1] == 0) & (z[..., 0] < 0))
    z = np.where(flip[..., None], -z, z)
    q = contract2(t["D2kB"], z, z)
    d2n = np.linalg.norm(t["D2kB"].reshape(shape + (-1,)), axis=-1)
    cubic = np.einsum("...i,...i->...", z, q) / np.where(d2n > 0, d2n, 1.0)
    ok[:] = True
    return det, cubic, ok


def scan_surfaces(model, fixed_state, grid1, grid2, grid3, threads=None) -> dict:
    """Scaled criticality conditions on a rectangular slice grid.

    Returns arrays ``det``, ``cubic`` of shape ``(n1, n2, n3)`` and the mask
    ``valid``; invalid nodes (non-physical state or inadmissible parameters)
    hold NaN.  The null vector follows the sign convention of
    :func:`null_vector`, computed from the adjugate whether or not the node
    is critical.
    """
    grids = [np.atleast_1d(np.asarray(g, dtype=float)) for g in (grid1, grid2, grid3)]
    nthreads = _thread_count(threads)

    def work(p1):
        return _scan_plane(model, fixed_state, p1, grids[1], grids[2])

    if nthreads > 1 and len(grids[0]) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            planes = list(pool.map(work, grids[0]))
    else:
        planes = [work(p) for p in grids[0]]
    det = np.stack([p[0] for p in planes])
    cubic = np.stack([p[1] for p in planes])
    valid = np.stack([p[2] for p in planes])
    return {"axes": list(model.slice_names), "grids": grids,
            "det": det, "cubic": cubic, "valid": valid}
