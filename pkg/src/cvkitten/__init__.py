"""Two-photon subtraction from cw squeezed light: heralded kitten states.

Typical use::

    from cvkitten import PhysicalParams, conditioned_state, wigner_origin

    params = PhysicalParams(delta=30.0)          # default experimental set, delta in ns
    state = conditioned_state(params, "biased", dressed=True)
    wigner_origin(state, 0)
"""

from .conditioning import GaussianMixture, condition, conditioned_state, dress_homodyne
from .errors import (
    AboveThreshold,
    CvKittenError,
    DegenerateConditioning,
    DegenerateModes,
    NegativePdet,
    NonConvergence,
    NotPositiveDefinite,
    SingularCovariance,
)
from .gaussian_state import CovarianceSet, InvalidParams, ModeBasis, PhysicalParams, build_covariances
from .observables import (
    GridSpec,
    PhotonNumbers,
    WignerGrid,
    mean_photon_closed,
    mean_photon_general,
    photon_numbers,
    squeezing_curve,
    wigner_origin,
    wigner_single,
    wigner_two_mode,
)
from .temporal_modes import ModeFunction, biased_modes, overlap_I, p_delta, unbiased_modes

__version__ = "0.1.0"
