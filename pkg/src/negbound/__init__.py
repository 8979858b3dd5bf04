"""Certified estimates of the entanglement negativity from low-order moments
of the partially transposed density matrix."""

from .backstep import BackstepResult, mu0_lower_bound
from .errors import NoFeasibleOrder, NoiseError
from .existence import Classification, Verdict, classify, hankel_pair
from .moments import MomentSequence, SpectralRange, perturb, truncate, validate
from .pipeline import BoundReport, PipelineConfig, run_degradation, run_pipeline, run_sweep
from .principal import (
    NegativityBound,
    PrincipalRepresentation,
    Tolerances,
    assemble_bound,
    bound_order3,
    bound_order4,
    char_polynomial,
    exp_fit_lower,
    find_roots,
    generic_bound,
    singular_recovery,
    solve_weights,
)
from .spectral import (
    DensityMatrix,
    SpectrumReport,
    exact_spectrum_report,
    gen_random_state,
    partial_transpose,
    pt_moments,
)

__version__ = "0.1.0"
