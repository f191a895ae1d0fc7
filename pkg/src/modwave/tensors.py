"""Finite-difference derivative tensors of the conservation-law maps.

Every partial derivative is taken with a tensor-product central stencil,
whose truncation error is a series in ``h**2``.  A Ridders tableau over
successively halved steps extrapolates that series away and supplies an
error estimate for each entry.

Index conventions (row-major in JSON output):

* ``DkB[i, j] = dB_i/dk_j``, likewise ``DkA``, ``DwA``, ``DwB``
* ``D2kB[i, j, m] = d^2 B_i / dk_j dk_m``
* ``D3kB[i, j, m, n] = d^3 B_i / dk_j dk_m dk_n``
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import StepUnderflow
from .models.base import ModelPoint

__all__ = [
    "TensorBundle",
    "bundle",
    "bundle_batch",
    "analytic_bundle",
    "contract2",
    "contract3",
    "ridders_partials",
]

# one-dimensional central stencils (offsets, weights) for derivative order 1..3
_STENCILS = {
    1: (np.array([-1.0, 1.0]), np.array([-0.5, 0.5])),
    2: (np.array([-1.0, 0.0, 1.0]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([-0.5, 1.0, -1.0, 0.5])),
}

LEVELS = 6
SHRINK = 2.0
INITIAL_STEP = 0.1
ERROR_TARGET = {1: 1e-7, 2: 1e-7, 3: 1e-5}


@dataclass
class TensorBundle:
    A: np.ndarray
    B: np.ndarray
    DkA: np.ndarray
    DwA: np.ndarray
    DkB: np.ndarray
    DwB: np.ndarray
    D2kB: np.ndarray | None = None
    D3kB: np.ndarray | None = None
    order: int = 1
    step_report: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"order": self.order}
        for name in ("A", "B", "DkA", "DwA", "DkB", "DwB", "D2kB", "D3kB"):
            val = getattr(self, name)
            if val is not None:
                out[name] = np.asarray(val).tolist()
        out["step_report"] = self.step_report
        return out


def _stencil(multi_index, n):
    """Offsets (P, n) and weights (P,) of the product stencil for ``multi_index``."""
    counts = Counter(multi_index)
    axes = sorted(counts)
    parts = [_STENCILS[counts[a]] for a in axes]
    offsets, weights = [], []
    for combo in itertools.product(*(range(len(p[0])) for p in parts)):
        off = np.zeros(n)
        w = 1.0
        for a, p, c in zip(axes, parts, combo):
            off[a] = p[0][c]
            w *= p[1][c]
        offsets.append(off)
        weights.append(w)
    return np.array(offsets), np.array(weights), counts


def ridders_partials(fun, x, multi_indices, h0, levels=LEVELS):
    """Partial derivatives of ``fun`` at ``x`` by Ridders extrapolation.

    ``fun`` maps ``(..., n)`` to ``(..., m)``.  ``x`` has shape ``(..., n)``
    and ``h0`` broadcasts against it.  Returns two lists aligned with
    ``multi_indices``: estimates and error estimates, each ``(..., m)``.
    All stencil points of all levels go through ``fun`` in one call.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    h0 = np.broadcast_to(np.asarray(h0, dtype=float), x.shape)
    stencils = [_stencil(mi, n) for mi in multi_indices]
    offsets = np.concatenate([s[0] for s in stencils])
    npts = offsets.shape[0]
    scales = SHRINK ** -np.arange(levels)
    # (levels, P, ..., n)
    bshape = x.shape[:-1]
    lvl = scales.reshape((levels, 1) + (1,) * x.ndim)
    offs = offsets.reshape((1, npts) + (1,) * len(bshape) + (n,))
    pts = x[None, None] + lvl * offs * h0[None, None]
    vals = np.asarray(fun(pts))

    estimates, errors = [], []
    start = 0
    for offs, weights, counts in stencils:
        sl = vals[:, start:start + len(weights)]
        start += len(weights)
        raw = np.tensordot(weights, sl, axes=([0], [1]))  # (levels, ..., m)
        denom = np.ones((levels,) + x.shape[:-1])
        for axis, c in counts.items():
            denom = denom * (scales.reshape((levels,) + (1,) * len(bshape))
                             * h0[..., axis]) ** c
        tab = [raw[i] / denom[i][..., None] for i in range(levels)]
        best = tab[0]
        err = np.full(best.shape, np.inf)
        prev = [tab[0]]
        for i in range(1, levels):
            row = [tab[i]]
            fac = SHRINK**2
            for j in range(1, i + 1):
                row.append((fac * row[j - 1] - prev[j - 1]) / (fac - 1))
                fac *= SHRINK**2
                e = np.maximum(np.abs(row[j] - row[j - 1]), np.abs(row[j] - prev[j - 1]))
                better = e <= err
                best = np.where(better, row[j], best)
                err = np.where(better, e, err)
            prev = row
        estimates.append(best)
        errors.append(err)
    assert start == npts
    return estimates, errors


def _multi_indices(order):
    first = [(j,) for j in range(4)]
    second = [(0, 0), (0, 1), (1, 1)]
    third = [(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)]
    out = {1: first}
    if order >= 2:
        out[2] = second
    if order >= 3:
        out[3] = third
    return out


def _assemble(order, est, err, F0):
    """Place partials into tensors.  ``est[d]`` lists estimates for order d,
    each of shape ``(..., 4)`` holding ``(A1, A2, B1, B2)``."""
    batch = F0.shape[:-1]
    first = np.stack(est[1], axis=-1)  # (..., 4 outputs, 4 inputs)
    tensors = {
        "A": F0[..., :2], "B": F0[..., 2:],
        "DkA": first[..., :2, :2], "DwA": first[..., :2, 2:],
        "DkB": first[..., 2:, :2], "DwB": first[..., 2:, 2:],
    }
    errs = {"first": np.stack(err[1], axis=-1)}
    if order >= 2:
        D2 = np.zeros(batch + (2, 2, 2))
        E2 = np.zeros(batch + (2, 2, 2))
        for (j, m), v, e in zip(_multi_indices(2)[2], est[2], err[2]):
            for a, b in {(j, m), (m, j)}:
                D2[..., :, a, b] = v[..., 2:]
                E2[..., :, a, b] = e[..., 2:]
        tensors["D2kB"] = D2
        errs["D2kB"] = E2
    if order >= 3:
        D3 = np.zeros(batch + (2, 2, 2, 2))
        E3 = np.zeros(batch + (2, 2, 2, 2))
        for mi, v, e in zip(_multi_indices(3)[3], est[3], err[3]):
            for perm in set(itertools.permutations(mi)):
                D3[(Ellipsis, slice(None)) + perm] = v[..., 2:]
                E3[(Ellipsis, slice(None)) + perm] = e[..., 2:]
        tensors["D3kB"] = D3
        errs["D3kB"] = E3
    return tensors, errs


def _model_fun(model):
    def fun(x):
        A, B = model.conservation(x[..., :2], x[..., 2:])
        return np.concatenate([A, B], axis=-1)
    return fun


def _rel_error(est_err, tensor, F0, xscale, n):
    scale = max(np.max(np.abs(tensor)), np.max(np.abs(F0)) / xscale**n, 1e-300)
    return float(np.max(est_err) / scale)


def bundle(model, pt: ModelPoint, order: int = 1, *, check_physical=True,
           max_shrinks=30) -> TensorBundle:
    """Derivative tensors of ``(A, B)`` at ``pt`` up to ``order`` in ``k``.

    Steps start at ``0.1 * max(|x_j|, 1)`` per variable and are divided by 4
    whenever a stencil point leaves the physical region.  ``StepUnderflow``
    is raised if no admissible step meets the error target.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    x = np.concatenate([pt.k, pt.omega])
    xscale = np.maximum(np.abs(x), 1.0)
    h0 = INITIAL_STEP * xscale
    fun = _model_fun(model)
    mis = _multi_indices(order)
    all_mis = [mi for d in sorted(mis) for mi in mis[d]]

    check = check_physical and bool(model.physical(pt.state))
    for _ in range(max_shrinks):
        if not check:
            break
        offs = np.concatenate([_stencil(mi, 4)[0] for mi in all_mis])
        probe = x + offs * h0
        if np.all(model.physical(model.state(probe[:, :2], probe[:, 2:]))):
            break
        h0 = h0 / 4
    else:
        raise StepUnderflow(f"no physical stencil around k={pt.k.tolist()}, "
                            f"omega={pt.omega.tolist()}")

    est_flat, err_flat = ridders_partials(fun, x, all_mis, h0)
    est, err, pos = {}, {}, 0
    for d in sorted(mis):
        est[d] = est_flat[pos:pos + len(mis[d])]
        err[d] = err_flat[pos:pos + len(mis[d])]
        pos += len(mis[d])
    F0 = fun(x)
    t, e = _assemble(order, est, err, F0)

    report = {"h0": h0.tolist(), "levels": LEVELS}
    xs = float(np.max(xscale))
    checks = [("first", np.stack([t["DkA"], t["DwA"], t["DkB"], t["DwB"]]), e["first"], 1)]
    if order >= 2:
        checks.append(("D2kB", t["D2kB"], e["D2kB"], 2))
    if order >= 3:
        checks.append(("D3kB", t["D3kB"], e["D3kB"], 3))
    for name, tensor, tens_err, n in checks:
        rel = _rel_error(tens_err, tensor, F0, xs, n)
        report[f"rel_error_{name}"] = rel
        if not rel <= ERROR_TARGET[n]:
            raise StepUnderflow(f"{name}: estimated relative error {rel:.3g} "
                                f"exceeds {ERROR_TARGET[n]:g}")

    DkB = t["DkB"]
    nrm = np.linalg.norm(DkB)
    report["sym_defect_DkB"] = float(np.linalg.norm(DkB - DkB.T) / nrm) if nrm > 0 else 0.0
    nA = np.linalg.norm(t["DkA"])
    report["adjoint_defect"] = (float(np.linalg.norm(t["DkA"] - t["DwB"].T) / nA)
                                if nA > 0 else float(np.linalg.norm(t["DwB"])))
    t["DkB"] = 0.5 * (DkB + DkB.T)
    return TensorBundle(order=order, step_report=report, **t)


def bundle_batch(model, k, omega, order: int = 2, h0=None):
    """Vectorized bundle over many points sharing one model.

    No physical-region checks and no error target; intended for grid scans.
    Returns a dict of arrays with leading batch shape; ``DkB`` is symmetrized.
    """
    k = np.asarray(k, dtype=float)
    omega = np.asarray(omega, dtype=float)
    x = np.concatenate([k, omega], axis=-1)
    if h0 is None:
        h0 = INITIAL_STEP * np.maximum(np.abs(x), 1.0)
    fun = _model_fun(model)
    mis = _multi_indices(order)
    all_mis = [mi for d in sorted(mis) for mi in mis[d]]
    est_flat, err_flat = ridders_partials(fun, x, all_mis, h0)
    est, err, pos = {}, {}, 0
    for d in sorted(mis):
        est[d] = est_flat[pos:pos + len(mis[d])]
        err[d] = err_flat[pos:pos + len(mis[d])]
        pos += len(mis[d])
    t, _ = _assemble(order, est, err, fun(x))
    t["DkB"] = 0.5 * (t["DkB"] + np.swapaxes(t["DkB"], -1, -2))
    return t


def analytic_bundle(model, pt: ModelPoint, order: int = 3) -> TensorBundle:
    """Exact tensors from the model's analytic state derivatives.

    Uses ``A_i = c_i s_i`` and ``B_i = f_i k_i s_i`` with ``s`` at most
    quadratic in ``k`` and affine in ``omega``.
    """
    c, f = model.density_coeffs, model.flux_coeffs
    k, w, s = pt.k, pt.omega, pt.state
    S = model.state_dk(k, w)
    S2 = model.state_dkk(k, w)
    W = model.state_dw(k, w)
    eye = np.eye(2)
    DkB = f[:, None] * (eye * s[:, None] + k[:, None] * S)
    D2 = np.einsum("i,ij,im->ijm", f, eye, S) + np.einsum("i,im,ij->ijm", f, eye, S)
    D2 += (f * k)[:, None, None] * S2
    D3 = np.zeros((2, 2, 2, 2))
    for i, j, m, n in itertools.product(range(2), repeat=4):
        D3[i, j, m, n] = f[i] * ((i == j) * S2[i, m, n] + (i == m) * S2[i, j, n]
                                 + (i == n) * S2[i, j, m])
    A = c * s
    B = f * k * s
    return TensorBundle(
        A=A, B=B, DkA=c[:, None] * S, DwA=c[:, None] * W, DkB=DkB,
        DwB=(f * k)[:, None] * W,
        D2kB=D2 if order >= 2 else None, D3kB=D3 if order >= 3 else None,
        order=order, step_report={"analytic": True},
    )


def contract2(T, u, v) -> np.ndarray:
    """``D^2 B(u, v)``: contract the last two indices of ``T`` with ``u``, ``v``."""
    return np.einsum("...ijm,...j,...m->...i", T, u, v)


def contract3(T, u, v, w) -> np.ndarray:
    """``D^3 B(u, v, w)``."""
    return np.einsum("...ijmn,...j,...m,...n->...i", T, u, v, w)
