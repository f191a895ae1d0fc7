"""Two-phase models: stratified shallow water and coupled NLS."""
from .base import DimensionlessNumbers, ModelPoint, TwoPhaseModel
from .coupled_nls import (
    ZETA_K_VARIANTS,
    CoupledNLSModel,
    NLSParams,
    nls_amplitudes,
    nls_conservation,
    nls_dispersive_projection,
    nls_invert,
)
from .shallow_water import (
    ShallowWaterModel,
    SWParams,
    sw_conservation,
    sw_dispersion_constants,
    sw_dispersive_projection,
    sw_invert,
    sw_state,
)


def dimensionless(model, pt):
    """Squared Froude numbers (shallow water) or E_i^2 (coupled NLS)."""
    return model.dimensionless(pt)


def model_from_dict(doc: dict):
    """Build ``(model, fixed_state)`` from a parameter-file document."""
    kind = doc.get("model")
    params = dict(doc.get("params", {}))
    fixed = doc.get("fixed_state")
    if kind == "sw":
        model = ShallowWaterModel(SWParams(**params))
    elif kind == "cnls":
        variant = params.pop("zeta_k_variant", "beta11")
        model = CoupledNLSModel(NLSParams(**params), variant)
    else:
        raise ValueError(f"unknown model {kind!r}; expected 'sw' or 'cnls'")
    state = None
    if fixed is not None:
        state = [float(fixed[name]) for name in model.state_names]
    return model, state


__all__ = [
    "DimensionlessNumbers", "ModelPoint", "TwoPhaseModel",
    "SWParams", "ShallowWaterModel", "sw_state", "sw_invert", "sw_conservation",
    "sw_dispersion_constants", "sw_dispersive_projection",
    "NLSParams", "CoupledNLSModel", "nls_amplitudes", "nls_invert", "nls_conservation",
    "nls_dispersive_projection", "ZETA_K_VARIANTS",
    "dimensionless", "model_from_dict",
]
