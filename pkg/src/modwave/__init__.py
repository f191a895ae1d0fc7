"""Double-criticality detection and modified KdV reduction for two-phase wavetrains."""
from . import criticality, models, mkdv, reduction, tensors
from .errors import ModwaveError

__version__ = "0.1.0"

__all__ = ["models", "tensors", "criticality", "reduction", "mkdv", "ModwaveError", "__version__"]
