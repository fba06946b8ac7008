"""Simulation and process tomography of two-crystal polarization depolarizers."""

from .errors import (
    ConvergenceError,
    DegenerateDataError,
    IllConditionedInputsError,
    ModeOverflowError,
    PolQPTError,
    UnphysicalStateError,
)
from .measurement import CountRecord, Projector, canonical_six_set, canonical_sixteen_set, simulate_counts
from .optics import SCHEME_I, SCHEME_II, ChannelScheme, CrystalSpec, WavePlate, channel_kraus
from .process import (
    BlochMap,
    apply_chi,
    bloch_map,
    chi_eigenvalues,
    chi_to_choi,
    chi_to_ptm,
    choi_to_chi,
    ellipsoid_radii,
    is_completely_positive,
    is_unital,
    kraus_to_chi,
    process_fidelity,
    ptm_to_chi,
)
from .qstate import StokesVector, canonical_state, density_to_stokes, degree_of_polarization, state_fidelity, stokes_to_density
from .tomography import (
    MLSettings,
    chi_ml_physical,
    qpt_linear_full,
    qpt_linear_unital,
    qst_linear,
    qst_ml,
    reconstruct_process,
    theory_chi,
)

__version__ = "0.1.0"
