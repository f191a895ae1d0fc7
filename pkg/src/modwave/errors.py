"""Exception hierarchy shared by all modules."""


class ModwaveError(Exception):
    """Base class for every error raised by the toolkit."""


class NonPhysical(ModwaveError):
    """A layer thickness or plane-wave intensity is not strictly positive."""


class StepUnderflow(ModwaveError):
    """No admissible finite-difference step met the error target."""


class NotCritical(ModwaveError):
    """The Jacobian D_k B is not singular to the requested tolerance."""


class DegenerateKernel(ModwaveError):
    """D_k B vanishes entirely, so the zero eigenvalue is not simple."""


class NotSolvable(ModwaveError):
    """The solvability condition for the delta system fails."""


class NoConvergence(ModwaveError):
    """Newton iteration did not converge."""


class SeedInvalid(ModwaveError):
    """A continuation seed does not satisfy the residual tolerances."""


class StepFailure(ModwaveError):
    """A continuation step could not be corrected after all retries."""


class InvalidBranch(ModwaveError):
    """The requested solution family does not exist for these coefficients."""


class Blowup(ModwaveError):
    """The simulated field became non-finite or exceeded the amplitude cap."""
