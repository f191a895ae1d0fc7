"""Coupled nonlinear Schroedinger equations and their plane waves.

    i psi1_t + alpha1 psi1_xx + (beta11 |psi1|^2 + beta12 |psi2|^2) psi1 = 0
    i psi2_t + alpha2 psi2_xx + (beta12 |psi1|^2 + beta22 |psi2|^2) psi2 = 0

Plane waves ``psi_i = Psi_i exp(i theta_i)`` carry intensities
``I_i = |Psi_i|^2`` fixed by ``(k, omega)``.  The mass density is
``A_i = I_i / 2`` and its flux is ``B_i = alpha_i k_i I_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace, asdict

import numpy as np

from .base import DimensionlessNumbers, ModelPoint, TwoPhaseModel
from .shallow_water import _gauge_factor

__all__ = [
    "NLSParams",
    "CoupledNLSModel",
    "nls_amplitudes",
    "nls_invert",
    "nls_conservation",
    "nls_dispersive_projection",
    "ZETA_K_VARIANTS",
]

# Leading factor of the dispersive closed form: "beta11" uses
# (1 + beta11 E1^2), "beta22" uses (1 + beta22 E1^2), the factor carried by
# the time coefficient.  They coincide when beta11 = beta22.
ZETA_K_VARIANTS = ("beta11", "beta22")


@dataclass(frozen=True)
class NLSParams:
    alpha1: float = 0.5
    alpha2: float = 0.5
    beta11: float = -1.0
    beta12: float = 0.0
    beta22: float = -1.0

    def __post_init__(self):
        if self.beta == 0:
            raise ValueError("beta11*beta22 - beta12**2 must be nonzero")

    @property
    def beta(self) -> float:
        return self.beta11 * self.beta22 - self.beta12**2

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.beta11, self.beta12], [self.beta12, self.beta22]])

    @property
    def alpha(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha2])


def nls_amplitudes(k, omega, p: NLSParams) -> np.ndarray:
    """Plane-wave intensities ``(|Psi1|^2, |Psi2|^2)``."""
    k = np.asarray(k, dtype=float)
    omega = np.asarray(omega, dtype=float)
    s1 = p.alpha1 * k[..., 0] ** 2 + omega[..., 0]
    s2 = p.alpha2 * k[..., 1] ** 2 + omega[..., 1]
    b = p.beta
    return np.stack([(p.beta22 * s1 - p.beta12 * s2) / b,
                     (p.beta11 * s2 - p.beta12 * s1) / b], axis=-1)


def nls_invert(intensities, k, p: NLSParams) -> np.ndarray:
    """``omega_i = sum_j beta_ij I_j - alpha_i k_i^2``."""
    intensities = np.asarray(intensities, dtype=float)
    k = np.asarray(k, dtype=float)
    return intensities @ p.matrix.T - p.alpha * k**2


def nls_conservation(pt: ModelPoint, p: NLSParams):
    return 0.5 * pt.state, p.alpha * pt.k * pt.state


def _e_sq(pt: ModelPoint, p: NLSParams):
    I1, I2 = pt.state
    if I1 == 0 or I2 == 0:
        raise ZeroDivisionError("E_i^2 undefined for zero intensity")
    k1, k2 = pt.k
    return 2 * p.alpha1 * k1**2 / (p.beta * I1), 2 * p.alpha2 * k2**2 / (p.beta * I2)


def _reference_zeta(pt: ModelPoint, p: NLSParams) -> np.ndarray:
    # adjugate row of D_k B: (-dB1/dk2, dB1/dk1)
    E1, _ = _e_sq(pt, p)
    k1, k2 = pt.k
    return np.array([2 * p.alpha1 * p.alpha2 * k1 * k2 * p.beta12 / p.beta,
                     p.alpha1 * pt.state[0] * (1 + p.beta22 * E1)])


def nls_dispersive_projection(pt: ModelPoint, p: NLSParams, zeta=None,
                              variant: str = "beta11") -> float:
    """Dispersive coefficient ``zeta^T K`` from the closed form.

    ``variant`` selects the leading factor, see :data:`ZETA_K_VARIANTS`.
    """
    if variant not in ZETA_K_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    E1, E2 = _e_sq(pt, p)
    I1, I2 = pt.state
    a1, a2, b = p.alpha1, p.alpha2, p.beta
    lead = p.beta11 if variant == "beta11" else p.beta22
    value = (a1**2 * a2 * I1 * (1 + lead * E1) / (2 * b)
             * (a2 * I1 * (p.beta11 + b * E1) + a1 * I2 * (p.beta22 + b * E2)))
    if zeta is None:
        return float(value)
    return float(_gauge_factor(zeta, _reference_zeta(pt, p)) ** 2 * value)


class CoupledNLSModel(TwoPhaseModel):
    name = "cnls"
    slice_names = ("beta12", "k1", "k2")
    state_names = ("psi1_sq", "psi2_sq")
    density_coeffs = np.array([0.5, 0.5])

    def __init__(self, params: NLSParams, zeta_k_variant: str = "beta11"):
        if zeta_k_variant not in ZETA_K_VARIANTS:
            raise ValueError(f"unknown variant {zeta_k_variant!r}")
        self.params = params
        self.zeta_k_variant = zeta_k_variant
        self.flux_coeffs = params.alpha

    def __repr__(self):
        return f"CoupledNLSModel({self.params!r}, zeta_k_variant={self.zeta_k_variant!r})"

    def state(self, k, omega):
        return nls_amplitudes(k, omega, self.params)

    def invert(self, state, k):
        return nls_invert(state, k, self.params)

    def _binv(self):
        p = self.params
        return np.array([[p.beta22, -p.beta12], [-p.beta12, p.beta11]]) / p.beta

    def state_dk(self, k, omega):
        k = np.asarray(k, dtype=float)
        return self._binv() * (2 * self.params.alpha * k)[None, :]

    def state_dkk(self, k, omega):
        out = np.zeros((2, 2, 2))
        binv = self._binv()
        for j in range(2):
            out[:, j, j] = binv[:, j] * 2 * self.params.alpha[j]
        return out

    def state_dw(self, k, omega):
        return self._binv()

    def at_slice(self, x, fixed_state):
        b12, k1, k2 = (float(v) for v in x)
        model = CoupledNLSModel(replace(self.params, beta12=b12), self.zeta_k_variant)
        return model, model.point_from_state(fixed_state, [k1, k2])

    def slice_of(self, pt):
        return np.array([self.params.beta12, pt.k[0], pt.k[1]])

    def dimensionless(self, pt):
        return DimensionlessNumbers(*_e_sq(pt, self.params))

    def reference_zeta(self, pt):
        return _reference_zeta(pt, self.params)

    def normalization(self, pt):
        p = self.params
        E1, _ = _e_sq(pt, p)
        return 2 * p.alpha1**2 * p.alpha2 * pt.state[0] * (1 + p.beta22 * E1) / p.beta

    def dispersive_projection(self, pt, zeta=None):
        return nls_dispersive_projection(pt, self.params, zeta, self.zeta_k_variant)

    def closed_forms(self, pt):
        p = self.params
        a1, a2 = p.alpha1, p.alpha2
        b11, b12, b22, b = p.beta11, p.beta12, p.beta22, p.beta
        E1, E2 = _e_sq(pt, p)
        I1, I2 = pt.state
        k1, k2 = pt.k
        zeta2 = self.reference_zeta(pt)[1]
        crit2 = I1 * (1 + b22 * E1) * (b11 + b * E1) - b12 * I2 * (1 + b11 * E2)
        a0 = I2 * (b22 + b * E2) * k1 + I1 * (b11 + b * E1) * k2
        G = 3 * (b22 * E1 + b11 * E2) - 1
        inner = 2 * b12 * I2 * (b22 + b * E2) + b * I1 * (1 + b22 * E1) ** 2
        return {
            "zeta": self.reference_zeta(pt),
            "delta": np.array([2 * a1**2 * a2 * k1 / (b * b12) * inner, 0.0]),
            "crit1": (b11 + b * E1) * (b22 + b * E2) - b12**2,
            "crit1_expanded": 1 + b22 * E1 + b11 * E2 + b * E1 * E2,
            "crit2": crit2,
            "quadratic": 6 * a1**3 * a2**2 * k2 * I1**2 * (1 + b22 * E1) / b * crit2,
            "time": self.normalization(pt) * a0,
            "dispersive": nls_dispersive_projection(pt, p, None, "beta11"),
            "dispersive_beta22": nls_dispersive_projection(pt, p, None, "beta22"),
            "cubic_d3": 6 * a2**2 * zeta2**4 / b12**2 * (b * E1 * (1 + b22 * E1) + (b11 + b * E1)),
            "cubic_d2": (2 * a1**4 * a2**2 * E1 * I1**2 * (1 + b22 * E1) / b12**2 * inner**2),
            "cubic_combined": 6 * a2**2 * a1**4 * b12 * I1**3 * I2 * (1 + b22 * E1) ** 2 / b * G,
            "a0": a0,
            "a1": 1.5 * a2 * a1**2 * b12 * I1 * I2 * (1 + b22 * E1) * G,
            "a2": 0.25 * (a2 * I1 * (b11 + b * E1) + a1 * I2 * (b22 + b * E2)),
        }

    def to_dict(self):
        return asdict(self.params)
