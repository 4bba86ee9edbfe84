"""Phase-estimation precision of two-mode optical probes in a truncated Fock space."""

from .errors import *  # noqa: F401,F403
from .estimation import (
    BayesReport,
    Merit,
    OptimizationResult,
    bayes_ensemble,
    bayes_trial,
    contour_points,
    optimize_at_nbar,
)
from .fock import FockSpace, SingleModeState, TwoModeDensity, TwoModeState
from .loss import LossSpec, apply_loss, kraus_set
from .metrology import (
    MeasurementModel,
    cfi,
    crb,
    mandel_decomposition,
    photon_moments,
    qfi_mixed,
    qfi_pure,
    scs_qfi_closed,
    ses_qfi_closed,
)
from .phase_space import WignerGrid, qfi_from_fidelity, wigner, wigner_overlap_fidelity
from .states import (
    Family,
    StateSpec,
    cat,
    coherent,
    healthy_space,
    mean_photons,
    noon,
    ses,
    squeezed_cat,
    ssv,
    svcs,
    two_mode_scs,
)

__version__ = "0.1.0"
