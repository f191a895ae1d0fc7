"""Two-phase model interface.

A model maps a wavenumber/frequency pair ``(k, omega)`` to a model state
(layer thicknesses, plane-wave intensities, ...) and from there to the
wave-action conservation laws ``A`` and ``B``.  Both concrete systems in
this package share the structure

    A_i = c_i * s_i,        B_i = f_i * k_i * s_i,

where ``s`` is the state, affine in ``omega`` and quadratic in ``k``.  The
finite-difference engine only needs :meth:`TwoPhaseModel.conservation`;
the structured derivatives are optional and serve as an analytic oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonPhysical

__all__ = ["ModelPoint", "DimensionlessNumbers", "TwoPhaseModel"]


@dataclass(frozen=True, eq=False)
class ModelPoint:
    """Wavenumbers, frequencies and the derived model state."""

    k: np.ndarray
    omega: np.ndarray
    state: np.ndarray

    def __post_init__(self):
        for name in ("k", "omega", "state"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (2,):
                raise ValueError(f"{name} must be a 2-vector, got shape {arr.shape}")
            object.__setattr__(self, name, arr)

    @property
    def physical(self) -> bool:
        return bool(np.all(self.state > 0))

    def require_physical(self):
        if not self.physical:
            raise NonPhysical(f"non-positive state {self.state.tolist()}")
        return self

    def to_dict(self) -> dict:
        return {"k": self.k.tolist(), "omega": self.omega.tolist(),
                "state": self.state.tolist()}


@dataclass(frozen=True)
class DimensionlessNumbers:
    """Squared Froude numbers (shallow water) or E_i^2 (coupled NLS)."""

    sq1: float
    sq2: float


class TwoPhaseModel:
    """Base class.  Subclasses set ``name``, ``slice_names``, ``state_names``
    and implement the state map and its inverse.

    All array methods broadcast over leading dimensions: ``k`` and ``omega``
    of shape ``(..., 2)`` give states of shape ``(..., 2)``.
    """

    name = "abstract"
    slice_names: tuple = ()
    state_names: tuple = ()

    # A_i = density_coeffs[i] * s_i,  B_i = flux_coeffs[i] * k_i * s_i
    density_coeffs = np.ones(2)
    flux_coeffs = np.ones(2)

    def state(self, k, omega) -> np.ndarray:
        raise NotImplementedError

    def invert(self, state, k) -> np.ndarray:
        raise NotImplementedError

    def conservation(self, k, omega):
        k = np.asarray(k, dtype=float)
        s = self.state(k, omega)
        return self.density_coeffs * s, self.flux_coeffs * k * s

    def physical(self, state) -> np.ndarray:
        return np.all(np.asarray(state) > 0, axis=-1)

    def point(self, k, omega) -> ModelPoint:
        return ModelPoint(k, omega, self.state(np.asarray(k, float), np.asarray(omega, float)))

    def point_from_state(self, state, k) -> ModelPoint:
        k = np.asarray(k, dtype=float)
        omega = self.invert(state, k)
        # recompute so the stored state is exactly what the model returns
        return ModelPoint(k, omega, self.state(k, omega))

    # -- analytic state derivatives (oracles for the FD engine) -----------
    def state_dk(self, k, omega) -> np.ndarray:
        """``[i, j] = d s_i / d k_j``."""
        raise NotImplementedError

    def state_dkk(self, k, omega) -> np.ndarray:
        """``[i, j, m] = d^2 s_i / d k_j d k_m``."""
        raise NotImplementedError

    def state_dw(self, k, omega) -> np.ndarray:
        """``[i, j] = d s_i / d omega_j``."""
        raise NotImplementedError

    def has_analytic_derivatives(self) -> bool:
        try:
            self.state_dw(np.zeros(2), np.zeros(2))
        except NotImplementedError:
            return False
        return True

    # -- slice parametrisation used by the criticality scans --------------
    def at_slice(self, x, fixed_state):
        """Return ``(model, point)`` for slice parameters ``x`` with the
        state held at ``fixed_state``."""
        raise NotImplementedError

    def slice_of(self, pt: ModelPoint) -> np.ndarray:
        raise NotImplementedError

    # -- closed forms supplied per model -----------------------------------
    def dimensionless(self, pt: ModelPoint) -> DimensionlessNumbers:
        raise NotImplementedError

    def reference_zeta(self, pt: ModelPoint) -> np.ndarray:
        raise NotImplementedError

    def normalization(self, pt: ModelPoint) -> float:
        raise NotImplementedError

    def dispersive_projection(self, pt: ModelPoint, zeta=None) -> float:
        raise NotImplementedError

    def closed_forms(self, pt: ModelPoint) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError
