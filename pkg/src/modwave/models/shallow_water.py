"""Two-layer stratified shallow water with third-order dispersion.

The relative equilibrium is uniform flow in each layer, with velocity
potential phases ``phi_i = theta_i`` so that ``u_i = k_i``.  Layer 1 is the
lower layer with thickness ``eta0``; layer 2 the upper layer with thickness
``chi0``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace, asdict

import numpy as np

from .base import DimensionlessNumbers, ModelPoint, TwoPhaseModel

__all__ = [
    "SWParams",
    "ShallowWaterModel",
    "sw_state",
    "sw_invert",
    "sw_conservation",
    "sw_dispersion_constants",
    "sw_dispersive_projection",
]


@dataclass(frozen=True)
class SWParams:
    g: float = 1.0
    rho1: float = 1.0
    r: float = 0.5
    sigma1: float = 0.0
    sigma2: float = 0.0
    R1: float = 0.0
    R2: float = 0.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if not self.rho1 > 0:
            raise ValueError(f"rho1 must be positive, got {self.rho1}")
        if not 0 < self.r < 1:
            raise ValueError(f"density ratio r must lie in (0, 1), got {self.r}")

    @property
    def rho2(self) -> float:
        return self.r * self.rho1


def sw_state(k, omega, p: SWParams) -> np.ndarray:
    """Uniform-flow thicknesses ``(eta0, chi0)``.  Broadcasts over ``(..., 2)``."""
    k = np.asarray(k, dtype=float)
    omega = np.asarray(omega, dtype=float)
    k1, k2 = k[..., 0], k[..., 1]
    w1, w2 = omega[..., 0], omega[..., 1]
    rho1, rho2 = p.rho1, p.rho2
    denom = p.g * (rho1 - rho2)
    eta0 = (0.5 * (rho2 * k2**2 - rho1 * k1**2) + p.R1 - p.R2 - rho1 * w1 + rho2 * w2) / denom
    chi0 = rho1 * (p.R2 - p.R1 - w2 + w1 + 0.5 * (k1**2 - k2**2)) / denom
    return np.stack([eta0, chi0], axis=-1)


def sw_invert(eta0, chi0, k, p: SWParams) -> np.ndarray:
    """Frequencies giving thicknesses ``(eta0, chi0)`` at wavenumbers ``k``."""
    k = np.asarray(k, dtype=float)
    k1, k2 = k[..., 0], k[..., 1]
    rho1, rho2 = p.rho1, p.rho2
    denom = p.g * (rho1 - rho2)
    # u = -rho1 w1 + rho2 w2,  v = w1 - w2
    u = denom * np.asarray(eta0) - 0.5 * (rho2 * k2**2 - rho1 * k1**2) - p.R1 + p.R2
    v = denom * np.asarray(chi0) / rho1 - (p.R2 - p.R1) - 0.5 * (k1**2 - k2**2)
    w2 = -(u + rho1 * v) / (rho1 - rho2)
    w1 = w2 + v
    return np.stack([w1, w2], axis=-1)


def sw_conservation(pt: ModelPoint, p: SWParams):
    """``A = (rho1 eta0, rho2 chi0)``, ``B = (rho1 k1 eta0, rho2 k2 chi0)``."""
    dens = np.array([p.rho1, p.rho2])
    return dens * pt.state, dens * pt.k * pt.state


def sw_dispersion_constants(eta0, chi0, p: SWParams):
    """The dispersive constants ``(a11, a12, a22)`` at quiescent thicknesses."""
    g, rho1, rho2 = p.g, p.rho1, p.rho2
    a11 = (p.sigma1 + p.sigma2 - rho1 * g * eta0**2 / 3 - rho2 * g * eta0 * chi0
           - 0.5 * g * chi0**2)
    a12 = (p.sigma2 - rho2 * g * eta0**2 / 6 - 0.25 * rho2 * g * eta0 * chi0
           - rho2**2 / (2 * rho1) * g * eta0 * chi0 - 5.0 / 12.0 * rho2 * g * chi0**2)
    a22 = p.sigma2 - rho2**2 / (2 * rho1) * g * eta0 * chi0 - rho2 * g * chi0**2 / 3
    return a11, a12, a22


def _froude_sq(pt: ModelPoint, p: SWParams):
    eta0, chi0 = pt.state
    if eta0 == 0 or chi0 == 0:
        raise ZeroDivisionError("Froude number undefined for zero layer thickness")
    return pt.k[0] ** 2 / (p.g * eta0), pt.k[1] ** 2 / (p.g * chi0)


def _reference_zeta(pt: ModelPoint, p: SWParams) -> np.ndarray:
    F1, _ = _froude_sq(pt, p)
    k1, k2 = pt.k
    return np.array([-p.rho2 * k1 * k2, p.g * p.rho1 * pt.state[0] * (1 - p.r - F1)])


def _gauge_factor(zeta, zeta_ref) -> float:
    zeta = np.asarray(zeta, dtype=float)
    return float(zeta @ zeta_ref / (zeta_ref @ zeta_ref))


def sw_dispersive_projection(pt: ModelPoint, p: SWParams, zeta=None) -> float:
    """Dispersive coefficient ``zeta^T K`` from the closed form.

    The closed form holds for the reference null vector
    ``(-rho2 k1 k2, g rho1 eta0 (1 - r - F1^2))``.  A different ``zeta``
    (assumed parallel to it) rescales the result quadratically.
    """
    F1, F2 = _froude_sq(pt, p)
    eta0, chi0 = pt.state
    a11, a12, a22 = sw_dispersion_constants(eta0, chi0, p)
    r = p.r
    bracket = a11 * r * (1 - F2) - 2 * r * a12 + (1 - F1) * a22
    value = p.g * p.rho1**2 * eta0**2 * chi0 * (1 - r - F1) * bracket
    if zeta is None:
        return float(value)
    return float(_gauge_factor(zeta, _reference_zeta(pt, p)) ** 2 * value)


class ShallowWaterModel(TwoPhaseModel):
    name = "sw"
    slice_names = ("r", "k1", "k2")
    state_names = ("eta0", "chi0")

    def __init__(self, params: SWParams):
        self.params = params
        self.density_coeffs = np.array([params.rho1, params.rho2])
        self.flux_coeffs = self.density_coeffs

    def __repr__(self):
        return f"ShallowWaterModel({self.params!r})"

    def state(self, k, omega):
        return sw_state(k, omega, self.params)

    def invert(self, state, k):
        state = np.asarray(state, dtype=float)
        return sw_invert(state[..., 0], state[..., 1], k, self.params)

    # analytic derivatives of (eta0, chi0)
    def _denom(self):
        p = self.params
        return p.g * (p.rho1 - p.rho2)

    def state_dk(self, k, omega):
        p = self.params
        k1, k2 = np.asarray(k, dtype=float)
        return np.array([[-p.rho1 * k1, p.rho2 * k2],
                         [p.rho1 * k1, -p.rho1 * k2]]) / self._denom()

    def state_dkk(self, k, omega):
        p = self.params
        out = np.zeros((2, 2, 2))
        out[0] = np.diag([-p.rho1, p.rho2])
        out[1] = np.diag([p.rho1, -p.rho1])
        return out / self._denom()

    def state_dw(self, k, omega):
        p = self.params
        return np.array([[-p.rho1, p.rho2], [p.rho1, -p.rho1]]) / self._denom()

    def at_slice(self, x, fixed_state):
        r, k1, k2 = (float(v) for v in x)
        model = ShallowWaterModel(replace(self.params, r=r))
        return model, model.point_from_state(fixed_state, [k1, k2])

    def slice_of(self, pt):
        return np.array([self.params.r, pt.k[0], pt.k[1]])

    def dimensionless(self, pt):
        return DimensionlessNumbers(*_froude_sq(pt, self.params))

    def reference_zeta(self, pt):
        return _reference_zeta(pt, self.params)

    def normalization(self, pt):
        p = self.params
        F1, _ = _froude_sq(pt, p)
        eta0, chi0 = pt.state
        return -2 * p.g**2 * p.rho1**2 * chi0 * eta0**2 * (1 - p.r - F1)

    def dispersive_projection(self, pt, zeta=None):
        return sw_dispersive_projection(pt, self.params, zeta)

    def closed_forms(self, pt):
        """Closed-form criticality and coefficient expressions, evaluated at
        ``pt`` in the reference gauge of :meth:`reference_zeta`."""
        p = self.params
        g, rho1, rho2, r = p.g, p.rho1, p.rho2, p.r
        F1, F2 = _froude_sq(pt, p)
        eta0, chi0 = pt.state
        k1, k2 = pt.k
        e = 1 - r - F1
        S = F1 * F2 + 4 * (F1 + F2)
        crit2_bracket = chi0 * r * (1 - F2) * F1 - eta0 * (1 - F1) ** 2 * F2
        delta1 = (rho2 * k1 / (g * eta0 * e)
                  * (-3 * rho2 * k1**2 * k2**2 - 2 * g * rho2 * k2**2 * eta0 * e
                     + g**2 * rho1 * eta0**2 * e**2))
        a11, a12, a22 = sw_dispersion_constants(eta0, chi0, p)
        disp_bracket = a11 * r * (1 - F2) - 2 * r * a12 + (1 - F1) * a22
        return {
            "zeta": self.reference_zeta(pt),
            "delta": np.array([delta1, 0.0]),
            "crit1": (1 - F1) * (1 - F2) - r,
            "crit2": crit2_bracket,
            "r_independent": chi0 * (1 - F2) ** 2 * F1 - eta0 * (1 - F1) * F2,
            "quadratic": 3 * g**2 * rho1**3 * rho2 * k2 * eta0**2 * e * crit2_bracket,
            "time": (-2 * g**2 * rho1**2 * rho2 * chi0 * eta0**2 * e
                     * (k1 / (g * eta0) * (1 - F2) + k2 / (g * chi0) * (1 - F1))),
            "dispersive": self.dispersive_projection(pt),
            "cubic_d3": (3 * g**3 * rho1**5 * eta0**4 * e**4 / (1 - r)
                         * ((1 - F1) * (2 * r - 1 + F1) - r)),
            "cubic_d2": (g**3 * rho1**3 * rho2**2 * chi0 * eta0**3 * e**2 / (1 - r)
                         * (2 * (1 - r) + F1 * F2) ** 2),
            "cubic_combined": -3 * g**3 * rho2**2 * rho1**3 * chi0 * eta0**3 * e**2 * S,
            "a0": rho2 * (k1 / (g * eta0) * (1 - F2) + k2 / (g * chi0) * (1 - F1)),
            "a1": -0.75 * g * rho1 * rho2 * eta0 * F2 * (1 - F1) * S,
            "a2": -disp_bracket / (2 * g),
        }

    def to_dict(self):
        return asdict(self.params)
