"""Eigenvalue spectra of linearly reconstructed quantum states.

Simulates finite-statistics state tomography with local Pauli
measurements (and a complete projector scheme for contrast), and
provides the matching analytic spectral models: the noise-induced
semicircle bulk, its moments and physicality probability, minimal
count planning, and a rank-estimation test built on Anderson-Darling
goodness of fit.
"""

__version__ = "0.1.0"

from .pauli import (
    Outcome,
    PauliString,
    Setting,
    StateSpec,
    build_state,
    check_density_matrix,
    correlation_tensor_values,
    fidelity,
    outcome_probabilities,
    setting_probability_table,
)
from .sampling import (
    MULTINOMIAL,
    POISSON,
    CountModel,
    CountRecord,
    EmptySettingError,
    SeedPolicy,
    frequencies,
    sample_counts,
    stream,
)
from .estimation import (
    CompleteSchemeFrame,
    CorrelationTensor,
    Spectrum,
    build_complete_frame,
    correlations_from_frequencies,
    estimate_complete,
    estimate_correlations,
    reconstruct_linear,
    spectrum_of,
)
from .models import (
    LaplaceModel,
    SemicircleModel,
    SingleQubitModel,
    catalan,
    laplace_model,
    min_counts,
    physicality_probability,
    semicircle_center,
    semicircle_moment,
    semicircle_radius,
    semicircle_width,
    single_qubit_density,
)
from .gof import (
    EmpiricalSpectrumSample,
    NoAcceptedRankError,
    RankCandidate,
    RankTestReport,
    a2_null_cdf,
    a2_null_sf,
    anderson_darling,
    estimate_rank,
    reconstruct_physical_estimate,
    unphysical_fraction,
)
from .ensemble import (
    ChecksumMismatchError,
    DimensionMismatchError,
    EnsembleIOError,
    EnsembleRunError,
    ExperimentConfig,
    MalformedEnsembleError,
    SchemaVersionError,
    SpectrumEnsemble,
    empirical_moments,
    load_ensemble,
    run_ensemble,
    save_ensemble,
)

__all__ = [name for name in dir() if not name.startswith("_")]
